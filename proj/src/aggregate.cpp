#include "activedp/aggregate.hpp"

#include <algorithm>
#include <limits>

#include "activedp/error.hpp"

namespace activedp {

const char* to_string(LabelSource s) {
    switch (s) {
        case LabelSource::al: return "AL";
        case LabelSource::lm: return "LM";
        case LabelSource::none: return "REJECTED";
    }
    return "?";
}

AggregatedLabel confusion(const SoftLabel& al, const MaybeSoftLabel& lm, double tau) {
    if (!(tau >= 0.0 && tau <= 1.0)) throw UsageError("confidence threshold must lie in [0,1]");
    if (confidence(al) >= tau) return {al, LabelSource::al};
    if (lm) return {*lm, LabelSource::lm};
    return AggregatedLabel::rejected_label();
}

std::vector<double> candidate_thresholds(std::span<const double> al_conf_valid) {
    std::vector<double> c(al_conf_valid.begin(), al_conf_valid.end());
    c.push_back(0.0);
    c.push_back(1.0);
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    return c;
}

ThresholdScore score_threshold(std::span<const SoftLabel> al_valid, std::span<const MaybeSoftLabel> lm_valid,
                               std::span<const int> y_valid, double tau) {
    if (al_valid.size() != y_valid.size() || lm_valid.size() != y_valid.size())
        throw UsageError("validation inputs differ in length");
    ThresholdScore s{tau, -std::numeric_limits<double>::infinity(), 0};
    std::size_t correct = 0;
    for (std::size_t i = 0; i < y_valid.size(); ++i) {
        const auto agg = confusion(al_valid[i], lm_valid[i], tau);
        if (agg.rejected()) continue;
        ++s.covered;
        if (agg.label->argmax() == y_valid[i]) ++correct;
    }
    if (s.covered > 0) s.accuracy = static_cast<double>(correct) / static_cast<double>(s.covered);
    return s;
}

double tune_threshold(std::span<const SoftLabel> al_valid, std::span<const MaybeSoftLabel> lm_valid,
                      std::span<const int> y_valid) {
    if (y_valid.empty()) throw UsageError("threshold tuning needs a non-empty validation set");
    std::vector<double> conf;
    conf.reserve(al_valid.size());
    for (const auto& s : al_valid) conf.push_back(confidence(s));
    const auto candidates = candidate_thresholds(conf);

    std::optional<ThresholdScore> best;
    for (double tau : candidates) {
        const auto s = score_threshold(al_valid, lm_valid, y_valid, tau);
        if (s.covered == 0) continue;
        // Candidates ascend, so a strict improvement test keeps the smaller tau on full ties.
        if (!best || s.accuracy > best->accuracy || (s.accuracy == best->accuracy && s.covered > best->covered))
            best = s;
    }
    return best ? best->tau : 1.0;
}

}  // namespace activedp
