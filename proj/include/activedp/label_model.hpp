#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "activedp/core.hpp"
#include "activedp/soft_label.hpp"

namespace activedp {

/// Majority vote over the active entries of one weak-label row. Ties give a
/// uniform vector over the tied classes; an all-abstain row gives nullopt.
MaybeSoftLabel majority_vote(std::span<const int> row, int n_classes);

/// one_coin: each LF is correct with probability lf_accuracy[j] when it fires,
/// spreads its errors evenly, and fires independently of the class.
///
/// class_conditional: each LF has a full distribution over {abstain, 0..C-1}
/// per class, so how often it fires is evidence too. Needed for LFs that only
/// ever vote one class (keywords, stumps): under one_coin the likelihood of
/// such LFs is maximised by a constant class with the other side's LFs
/// "always wrong".
enum class LabelModelKind { one_coin, class_conditional };

const char* to_string(LabelModelKind k);
LabelModelKind parse_label_model(const std::string& name);

struct GenerativeParams {
    LabelModelKind kind = LabelModelKind::one_coin;
    std::vector<double> class_prior;
    /// one_coin: the model parameter. class_conditional: derived
    /// P(vote correct | fires) under the class prior, for reporting.
    std::vector<double> lf_accuracy;
    int n_classes = 2;
    /// class_conditional only: P(output o | y) at [(j * C + y) * (C + 1) + o],
    /// o = 0 for abstain and o = c + 1 for a vote for class c.
    std::vector<double> emission;

    static constexpr double kMinAccuracy = 0.01;
    static constexpr double kMaxAccuracy = 0.99;
    static constexpr double kInitAccuracy = 0.7;
    /// Dirichlet pseudo-count added to every emission cell.
    static constexpr double kEmissionSmoothing = 0.01;

    static GenerativeParams initial(std::size_t n_lfs, int n_classes);
    std::size_t n_lfs() const { return lf_accuracy.size(); }
    double emission_at(std::size_t j, int y, int output) const {
        const auto c = static_cast<std::size_t>(n_classes);
        return emission[(j * c + static_cast<std::size_t>(y)) * (c + 1) + static_cast<std::size_t>(output + 1)];
    }
};

struct EmConfig {
    LabelModelKind model = LabelModelKind::one_coin;
    /// When set, the class prior is held at this distribution instead of
    /// being re-estimated (the caller knows the class balance).
    std::optional<std::vector<double>> class_balance;
    int max_iter = 100;
    double tol = 1e-6;
    /// Unused by the deterministic initialisation; kept so callers can tag fits.
    std::uint64_t seed = 0;
};

struct GenerativeFit {
    GenerativeParams params;
    /// EM objective at the initial parameters and after each M-step: the
    /// observed-data log-likelihood (class_conditional adds the smoothing
    /// prior's log density, which is what its M-step maximises).
    std::vector<double> log_likelihood;
    int iterations = 0;
    bool converged = false;
};

/// EM for the chosen model. Throws UsageError when W has no active entry.
GenerativeFit fit_generative(const WeakLabelMatrix& w, int n_classes, const EmConfig& cfg = {});

double log_likelihood(const GenerativeParams& params, const WeakLabelMatrix& w);

/// Posterior over classes for one row; nullopt when the row is all abstains.
MaybeSoftLabel predict_generative(const GenerativeParams& params, std::span<const int> row);

/// Row-wise predict_generative over a whole matrix.
std::vector<MaybeSoftLabel> predict_generative(const GenerativeParams& params, const WeakLabelMatrix& w);

/// As predict_generative, but uncovered rows map to the uniform vector so an
/// entropy-based sampler sees them as maximally uncertain.
SoftLabel lm_entropy_input(const GenerativeParams& params, std::span<const int> row);

}  // namespace activedp
