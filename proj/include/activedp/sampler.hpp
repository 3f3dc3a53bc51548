#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "activedp/rng.hpp"
#include "activedp/soft_label.hpp"

namespace activedp {

enum class SamplerStrategy { passive, us, adp };

const char* to_string(SamplerStrategy s);
SamplerStrategy parse_sampler(const std::string& name);

inline constexpr double kTextAlpha = 0.5;
inline constexpr double kTabularAlpha = 0.99;

/// -sum p ln p with 0 ln 0 = 0.
double entropy(const SoftLabel& p);

/// ent_a^alpha * ent_l^(1-alpha) with 0^0 = 1.
double adp_score(double ent_a, double ent_l, double alpha);

struct SamplerState {
    SamplerStrategy strategy = SamplerStrategy::adp;
    double alpha = kTextAlpha;
    /// Ids already queried (including queries answered without a label function).
    std::unordered_set<std::int64_t> queried;
};

/// Choose the next query among `pool_ids` not yet in state.queried.
/// `al_soft` and `lm_soft` are aligned with `pool_ids`; lm_soft is only read
/// by the adp strategy. Ties go to the smallest id; an all-zero score vector
/// falls back to a uniform draw. Throws UsageError on an empty eligible pool.
std::int64_t select_next(const SamplerState& state, std::span<const std::int64_t> pool_ids,
                         std::span<const SoftLabel> al_soft, std::span<const SoftLabel> lm_soft, Rng& rng);

}  // namespace activedp
