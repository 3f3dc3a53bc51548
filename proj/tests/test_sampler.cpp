#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "activedp/error.hpp"
#include "activedp/sampler.hpp"
#include "oracles.hpp"

using namespace activedp;

namespace {

struct Pool {
    std::vector<std::int64_t> ids;
    std::vector<SoftLabel> al, lm;
};

Pool random_pool(std::uint64_t seed, std::size_t n = 25) {
    Rng rng(seed);
    Pool p;
    for (std::size_t i = 0; i < n; ++i) {
        p.ids.push_back(static_cast<std::int64_t>(1000 - 7 * i));
        // coarse grid so entropy ties occur
        const double a = static_cast<double>(uniform_index(rng, 6)) / 10.0;
        const double l = static_cast<double>(uniform_index(rng, 6)) / 10.0;
        p.al.push_back({{a, 1.0 - a}});
        p.lm.push_back({{l, 1.0 - l}});
    }
    return p;
}

}  // namespace

TEST_CASE("entropy hand values") {
    CHECK(std::abs(entropy(SoftLabel{{0.5, 0.5}}) - std::log(2.0)) < 1e-12);
    CHECK(entropy(SoftLabel{{0.8, 0.2}}) == doctest::Approx(0.500402423538188).epsilon(1e-12));
    CHECK(entropy(SoftLabel{{1.0, 0.0}}) == 0.0);
}

TEST_CASE("adp score") {
    CHECK(adp_score(0.6931, 0.5, 0.5) == doctest::Approx(std::sqrt(0.34655)).epsilon(1e-12));
    // the commonly quoted 0.58872 is a rounded hand value
    CHECK(std::abs(adp_score(0.6931, 0.5, 0.5) - 0.58872) < 1e-4);
    CHECK(adp_score(0.0, 0.3, 0.0) == doctest::Approx(0.3));  // 0^0 = 1
    CHECK(adp_score(0.4, 0.0, 1.0) == doctest::Approx(0.4));
    CHECK(adp_score(0.0, 0.3, 0.5) == 0.0);
}

TEST_CASE("alpha = 1 selects exactly like uncertainty sampling") {
    for (std::uint64_t s = 0; s < 100; ++s) {
        const auto p = random_pool(s);
        SamplerState adp{SamplerStrategy::adp, 1.0, {}};
        SamplerState us{SamplerStrategy::us, 0.5, {}};
        Rng r1(s), r2(s);
        for (int k = 0; k < 10; ++k) {
            const auto a = select_next(adp, p.ids, p.al, p.lm, r1);
            const auto b = select_next(us, p.ids, p.al, p.lm, r2);
            REQUIRE(a == b);
            adp.queried.insert(a);
            us.queried.insert(b);
        }
    }
}

TEST_CASE("alpha = 0 follows the label-model entropy ranking") {
    for (std::uint64_t s = 0; s < 100; ++s) {
        const auto p = random_pool(s);
        // reference order: entropy descending, ties by smaller id
        std::vector<std::size_t> order(p.ids.size());
        std::iota(order.begin(), order.end(), 0);
        std::vector<double> h;
        for (const auto& l : p.lm) h.push_back(oracle::entropy(l.probs));
        std::sort(order.begin(), order.end(), [&](auto x, auto y) {
            if (h[x] != h[y]) return h[x] > h[y];
            return p.ids[x] < p.ids[y];
        });
        SamplerState st{SamplerStrategy::adp, 0.0, {}};
        Rng rng(s);
        for (std::size_t k = 0; k < order.size(); ++k) {
            if (h[order[k]] == 0.0) break;  // zero scores fall back to random draws
            const auto got = select_next(st, p.ids, p.al, p.lm, rng);
            REQUIRE(got == p.ids[order[k]]);
            st.queried.insert(got);
        }
    }
}

TEST_CASE("passive sampling and the all-zero fallback draw from the eligible pool") {
    const std::vector<std::int64_t> ids{5, 6, 7};
    const std::vector<SoftLabel> certain(3, SoftLabel{{1.0, 0.0}});
    for (auto strategy : {SamplerStrategy::passive, SamplerStrategy::us, SamplerStrategy::adp}) {
        SamplerState st{strategy, 0.5, {6}};
        Rng a(9), b(9);
        for (int k = 0; k < 20; ++k) {
            const auto x = select_next(st, ids, certain, certain, a);
            CHECK(x != 6);
            CHECK(x == select_next(st, ids, certain, certain, b));
        }
    }
    SamplerState full{SamplerStrategy::us, 0.5, {5, 6, 7}};
    Rng rng(1);
    CHECK_THROWS_AS(select_next(full, ids, certain, certain, rng), UsageError);
    CHECK(parse_sampler("adp") == SamplerStrategy::adp);
    CHECK_THROWS_AS(parse_sampler("random"), ConfigError);
}
