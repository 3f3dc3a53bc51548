#include <doctest.h>

#include <set>

#include "activedp/error.hpp"
#include "activedp/oracle.hpp"

using namespace activedp;

namespace {

std::shared_ptr<const Dataset> small_corpus() {
    // query (position 0) holds aa, bb and cc. aa covers 6 train documents and
    // bb covers 2, both always with label 1; cc is mostly label 0.
    const std::vector<std::pair<std::string, int>> docs{
        {"aa bb cc", 1}, {"aa", 1}, {"aa", 1}, {"aa", 1}, {"aa", 1}, {"aa", 1},
        {"bb", 1},       {"cc", 0}, {"cc", 0}, {"cc", 0}, {"dd", 0}, {"dd", 1}};
    std::vector<Instance> xs;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        TextPayload t{docs[i].first, {}};
        for (std::size_t p = 0; p < t.text.size(); p += 3) t.tokens.push_back(t.text.substr(p, 2));
        xs.push_back({static_cast<std::int64_t>(i), t, docs[i].second});
    }
    return std::make_shared<const Dataset>(
        Dataset(DataKind::text, 2, xs).with_splits(std::vector<Split>(docs.size(), Split::train)));
}

}  // namespace

TEST_CASE("label noise") {
    Rng rng(1);
    for (int i = 0; i < 50; ++i) {
        CHECK(apply_noise(1, 0.0, rng) == 1);
        CHECK(apply_noise(1, 1.0, rng) == 0);
    }
    // one uniform draw per call, flipping when it falls under the rate
    Rng a(5), b(5);
    for (int i = 0; i < 100; ++i) CHECK(apply_noise(0, 0.3, a) == (uniform01(b) < 0.3 ? 1 : 0));
    CHECK_THROWS_AS(apply_noise(2, 0.1, a), UsageError);
}

TEST_CASE("candidates are rules through the query with accuracy above the threshold") {
    const auto d = small_corpus();
    SimulatedUser user(d, {}, 0);
    const auto cands = user.candidate_lfs(0);
    std::set<std::string> got;
    for (const auto& lf : cands) got.insert(lf.describe());
    CHECK(got == std::set<std::string>{"aa -> 1", "bb -> 1", "cc -> 0"});
    CHECK(*user.lf_true_accuracy(LabelFunction::keyword("cc", 0)) == doctest::Approx(0.75));
    CHECK(user.coverage(LabelFunction::keyword("aa", 1)) == doctest::Approx(0.5));
    CHECK_FALSE(user.lf_true_accuracy(LabelFunction::keyword("zz", 1)).has_value());
}

TEST_CASE("choice is proportional to coverage and never repeats") {
    const auto d = small_corpus();
    int aa = 0;
    const int trials = 4000;
    for (int s = 0; s < trials; ++s) {
        SimulatedUser user(d, {}, static_cast<std::uint64_t>(s));
        const auto lf = user.respond(0);
        REQUIRE(lf);
        CHECK(lf->target == 1);
        CHECK(apply_lf(*lf, (*d)[0]) == 1);
        aa += lf->describe() == "aa -> 1";
        const auto second = user.respond(0);
        REQUIRE(second);
        CHECK(second->key() != lf->key());
        CHECK_FALSE(user.respond(0).has_value());  // both label-1 rules used up
    }
    // coverage 6 : 2
    CHECK(static_cast<double>(aa) / trials == doctest::Approx(0.75).epsilon(0.04));
}

TEST_CASE("noisy responses target the flipped class") {
    const auto d = small_corpus();
    SimulatedUser user(d, {0.6, 1.0}, 3);
    const auto lf = user.respond(0);
    REQUIRE(lf);
    CHECK(lf->describe() == "cc -> 0");
}

TEST_CASE("tabular candidates are stumps at the query value") {
    SyntheticTabularConfig cfg;
    cfg.n = 300;
    auto d = std::make_shared<const Dataset>(split_dataset(make_synthetic_tabular(cfg), {}, 1));
    SimulatedUser user(d, {}, 0);
    const auto pos = d->indices(Split::train)[0];
    for (const auto& lf : user.candidate_lfs(pos)) {
        CHECK_FALSE(lf.is_keyword());
        CHECK(apply_lf(lf, (*d)[pos]) == lf.target);
        // accuracy by direct count over the train split
        std::size_t fired = 0, right = 0;
        for (auto i : d->indices(Split::train)) {
            const int v = apply_lf(lf, (*d)[i]);
            if (v == kAbstain) continue;
            ++fired;
            right += v == *(*d)[i].true_label;
        }
        CHECK(static_cast<double>(right) / static_cast<double>(fired) > 0.6);
        CHECK(*user.lf_true_accuracy(lf) == doctest::Approx(double(right) / double(fired)));
    }
}

TEST_CASE("deterministic for a seed") {
    const auto d = small_corpus();
    SimulatedUser a(d, {0.6, 0.3}, 42), b(d, {0.6, 0.3}, 42);
    for (int i = 0; i < 3; ++i) {
        const auto x = a.respond(0), y = b.respond(0);
        REQUIRE(x.has_value() == y.has_value());
        if (x) CHECK(x->key() == y->key());
    }
    CHECK_THROWS_AS(SimulatedUser(d, {1.0, 0.0}, 0), ConfigError);
}
