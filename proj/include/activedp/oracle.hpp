#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "activedp/core.hpp"
#include "activedp/rng.hpp"

namespace activedp {

struct OracleConfig {
    double acc_threshold = 0.6;
    double noise_rate = 0.0;
};

/// With probability `noise_rate` return the other binary class.
/// Always consumes exactly one uniform draw.
int apply_noise(int true_label, double noise_rate, Rng& rng);

/// Simulated labeller. Proposes keyword rules (text) or single-feature stumps
/// through the query point (tabular) whose train-split accuracy, measured
/// against ground truth, exceeds the threshold; picks one with probability
/// proportional to coverage and never repeats itself.
class SimulatedUser {
public:
    SimulatedUser(std::shared_ptr<const Dataset> data, OracleConfig cfg, std::uint64_t seed);

    const OracleConfig& config() const { return cfg_; }
    const Dataset& dataset() const { return *data_; }

    /// correct / activated on the train split; nullopt when the LF never fires.
    std::optional<double> lf_true_accuracy(const LabelFunction& lf) const;
    double coverage(const LabelFunction& lf) const;

    /// Candidates built from the instance at `pos`, accuracy-filtered and
    /// with previously returned rules removed.
    std::vector<LabelFunction> candidate_lfs(std::size_t pos) const;

    /// One simulated response; nullopt means "no label function" and the
    /// query is still spent.
    std::optional<LabelFunction> respond(std::size_t pos);

    const std::unordered_set<std::string>& history() const { return history_; }

private:
    struct Counts {
        std::size_t active = 0;
        std::vector<std::size_t> by_class;
    };
    Counts stump_counts(const StumpRule& s) const;
    Counts counts_for(const LabelFunction& lf) const;

    std::shared_ptr<const Dataset> data_;
    OracleConfig cfg_;
    Rng rng_;
    std::unordered_set<std::string> history_;
    std::size_t n_train_ = 0;

    // text: documents containing each token, by class
    std::unordered_map<std::string, Counts> token_counts_;
    // tabular: per feature, sorted train values and prefix class counts
    std::vector<std::vector<double>> sorted_values_;
    std::vector<std::vector<std::vector<std::size_t>>> prefix_by_class_;
};

}  // namespace activedp
