#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <vector>

namespace activedp {

/// Probability vector over the C classes.
struct SoftLabel {
    std::vector<double> probs;

    static SoftLabel uniform(int n_classes) {
        return {std::vector<double>(static_cast<std::size_t>(n_classes), 1.0 / n_classes)};
    }

    std::size_t size() const { return probs.size(); }
    double operator[](std::size_t i) const { return probs[i]; }
    /// Index of the largest entry; the lowest index wins ties.
    int argmax() const {
        return static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin());
    }

    friend bool operator==(const SoftLabel&, const SoftLabel&) = default;
};

/// A label-model output: nullopt when every label function abstained.
using MaybeSoftLabel = std::optional<SoftLabel>;

/// Top-class probability.
inline double confidence(const SoftLabel& s) { return *std::max_element(s.probs.begin(), s.probs.end()); }

}  // namespace activedp
