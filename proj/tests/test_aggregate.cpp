#include <doctest.h>

#include "activedp/aggregate.hpp"
#include "activedp/error.hpp"
#include "oracles.hpp"

using namespace activedp;

TEST_CASE("gate branches") {
    const SoftLabel al{{0.8, 0.2}};  // HAM (0) with confidence 0.8
    const SoftLabel lm{{0.1, 0.9}};  // SPAM (1), e.g. from "check" -> 1

    // confidence 0.8 reaches a 0.7 threshold: the AL prediction is adopted
    auto a = confusion(al, lm, 0.7);
    CHECK(a.source == LabelSource::al);
    CHECK(*a.label == al);

    auto b = confusion(al, lm, 0.85);
    CHECK(b.source == LabelSource::lm);
    CHECK(*b.label == lm);

    auto c = confusion(al, std::nullopt, 0.85);
    CHECK(c.rejected());
    CHECK_FALSE(c.label.has_value());

    // the comparison is inclusive
    CHECK(confusion(al, lm, 0.8).source == LabelSource::al);
    CHECK(confusion(al, std::nullopt, 0.0).source == LabelSource::al);
    CHECK(confusion(SoftLabel{{0.5, 0.5}}, lm, 1.0).source == LabelSource::lm);

    CHECK_THROWS_AS(confusion(al, lm, 1.5), UsageError);
    CHECK(std::string(to_string(LabelSource::none)) == "REJECTED");
}

TEST_CASE("candidate thresholds") {
    const std::vector<double> conf{0.9, 0.6, 0.9, 0.75};
    CHECK(candidate_thresholds(conf) == std::vector<double>{0.0, 0.6, 0.75, 0.9, 1.0});
    CHECK(candidate_thresholds({}) == std::vector<double>{0.0, 1.0});
}

TEST_CASE("score and tie-breaking") {
    // Two points, both correct either way: every threshold has accuracy 1,
    // tau = 0 covers both and is the smallest.
    const std::vector<SoftLabel> al{{{0.1, 0.9}}, {{0.7, 0.3}}};
    const std::vector<MaybeSoftLabel> lm{std::nullopt, std::nullopt};
    const std::vector<int> y{1, 0};
    CHECK(tune_threshold(al, lm, y) == 0.0);
    const auto s = score_threshold(al, lm, y, 0.8);
    CHECK(s.covered == 1);
    CHECK(s.accuracy == 1.0);

    // AL wrong on the confident point, LM right: tau must exceed 0.9
    const std::vector<SoftLabel> al2{{{0.1, 0.9}}};
    const std::vector<MaybeSoftLabel> lm2{SoftLabel{{0.8, 0.2}}};
    const std::vector<int> y2{0};
    CHECK(tune_threshold(al2, lm2, y2) == 1.0);

    CHECK_THROWS_AS(tune_threshold({}, {}, {}), UsageError);
}

TEST_CASE("tuned threshold reaches the exhaustive optimum") {
    for (std::uint64_t s = 0; s < 200; ++s) {
        const auto c = oracle::random_confusion_case(s);
        const double tau = tune_threshold(c.al, c.lm, c.y);
        const auto got = oracle::gated_accuracy(c, tau);
        REQUIRE(got.has_value());
        CHECK(*got == oracle::best_gated_accuracy(c));
    }
}
