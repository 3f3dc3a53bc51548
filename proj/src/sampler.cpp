#include "activedp/sampler.hpp"

#include <cmath>

#include "activedp/error.hpp"

namespace activedp {

const char* to_string(SamplerStrategy s) {
    switch (s) {
        case SamplerStrategy::passive: return "passive";
        case SamplerStrategy::us: return "us";
        case SamplerStrategy::adp: return "adp";
    }
    return "?";
}

SamplerStrategy parse_sampler(const std::string& name) {
    if (name == "passive") return SamplerStrategy::passive;
    if (name == "us") return SamplerStrategy::us;
    if (name == "adp") return SamplerStrategy::adp;
    throw ConfigError("unknown sampler '" + name + "' (expected passive, us or adp)");
}

double entropy(const SoftLabel& p) {
    double h = 0.0;
    for (double v : p.probs)
        if (v > 0.0) h -= v * std::log(v);
    return h;
}

double adp_score(double ent_a, double ent_l, double alpha) {
    // std::pow(0, 0) is 1, matching the required convention.
    return std::pow(ent_a, alpha) * std::pow(ent_l, 1.0 - alpha);
}

std::int64_t select_next(const SamplerState& state, std::span<const std::int64_t> pool_ids,
                         std::span<const SoftLabel> al_soft, std::span<const SoftLabel> lm_soft, Rng& rng) {
    if (!(state.alpha >= 0.0 && state.alpha <= 1.0)) throw UsageError("sampler alpha must lie in [0,1]");
    std::vector<std::size_t> eligible;
    eligible.reserve(pool_ids.size());
    for (std::size_t k = 0; k < pool_ids.size(); ++k)
        if (!state.queried.contains(pool_ids[k])) eligible.push_back(k);
    if (eligible.empty()) throw UsageError("no unqueried instance left to sample");

    if (state.strategy != SamplerStrategy::passive) {
        if (al_soft.size() != pool_ids.size()) throw UsageError("al_soft not aligned with pool");
        if (state.strategy == SamplerStrategy::adp && lm_soft.size() != pool_ids.size())
            throw UsageError("lm_soft not aligned with pool");
        double best = 0.0;
        std::size_t best_k = 0;
        bool found = false;
        for (auto k : eligible) {
            const double ea = entropy(al_soft[k]);
            const double s = state.strategy == SamplerStrategy::us ? ea : adp_score(ea, entropy(lm_soft[k]), state.alpha);
            if (s > best || (found && s == best && pool_ids[k] < pool_ids[best_k])) {
                best = s;
                best_k = k;
                found = s > 0.0;
            }
        }
        if (found) return pool_ids[best_k];
    }
    return pool_ids[eligible[uniform_index(rng, eligible.size())]];
}

}  // namespace activedp
