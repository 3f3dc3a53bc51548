#pragma once

#include <optional>
#include <span>
#include <vector>

#include "activedp/soft_label.hpp"

namespace activedp {

enum class LabelSource { al, lm, none };

const char* to_string(LabelSource s);

/// Result of confidence-gated aggregation. `label` is empty exactly when the
/// instance is rejected (source none).
struct AggregatedLabel {
    std::optional<SoftLabel> label;
    LabelSource source = LabelSource::none;

    bool rejected() const { return source == LabelSource::none; }
    static AggregatedLabel rejected_label() { return {}; }
};

/// Adopt the active-learning prediction when its confidence reaches `tau`,
/// otherwise the label-model prediction if any selected LF fired, otherwise
/// reject.
AggregatedLabel confusion(const SoftLabel& al, const MaybeSoftLabel& lm, double tau);

/// Sorted unique validation confidences plus the bounds 0.0 and 1.0.
std::vector<double> candidate_thresholds(std::span<const double> al_conf_valid);

struct ThresholdScore {
    double tau = 1.0;
    double accuracy = 0.0;  // -inf when every validation point is rejected
    std::size_t covered = 0;
};

/// Accuracy and coverage of confusion(., ., tau) over a validation set.
ThresholdScore score_threshold(std::span<const SoftLabel> al_valid, std::span<const MaybeSoftLabel> lm_valid,
                               std::span<const int> y_valid, double tau);

/// Pick the candidate threshold with the best validation accuracy over
/// non-rejected points; ties go to higher coverage, then smaller tau.
/// Returns 1.0 when every candidate rejects the whole validation set.
double tune_threshold(std::span<const SoftLabel> al_valid, std::span<const MaybeSoftLabel> lm_valid,
                      std::span<const int> y_valid);

}  // namespace activedp
