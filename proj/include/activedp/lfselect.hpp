#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "activedp/core.hpp"

namespace activedp {

/// (instance position, pseudo-label) pairs, one per query that produced an LF.
struct PseudoLabel {
    std::size_t instance = 0;
    int label = 0;
};
using PseudoLabeledSet = std::vector<PseudoLabel>;

struct LfAccuracy {
    int lf_id = 0;
    std::size_t activated = 0;
    std::size_t correct = 0;
    /// correct / activated; nullopt when the LF never fires.
    std::optional<double> accuracy;
    bool kept = false;
};

struct AccuracyFilterResult {
    std::vector<LabelFunction> survivors;  // input order preserved
    std::vector<LfAccuracy> report;        // one entry per input LF
};

/// Drop LFs that never fire on the validation split or whose validation
/// accuracy is below 1/C.
AccuracyFilterResult accuracy_filter(std::span<const LabelFunction> lfs, const Dataset& d);

/// Rows = pseudo-labelled instances; columns = survivors' weak labels then
/// the pseudo-label. Binary encoding: class 0 -> -1, class 1 -> +1, abstain -> 0.
/// Throws ConfigError unless the dataset is binary.
Eigen::MatrixXd encode_table(const PseudoLabeledSet& labeled, std::span<const LabelFunction> survivors,
                             const Dataset& d);
/// Encoding of a single weak label or pseudo-label.
double encode_binary(int value);

/// Indices j != y_index with |theta(j, y_index)| > edge_tol.
std::vector<std::size_t> markov_blanket(const Eigen::MatrixXd& theta, std::size_t y_index, double edge_tol = 1e-4);

struct LabelPickConfig {
    double lambda = 0.1;
    double edge_tol = 1e-4;
    std::size_t min_rows = 8;
};

enum class LabelPickPath {
    no_survivors,        // nothing passed the accuracy filter
    insufficient,        // <= 1 survivor or too few pseudo-labelled rows
    label_constant,      // pseudo-labels all equal, no dependency to estimate
    blanket,             // selection is the Markov blanket (+ constant columns)
    empty_blanket,       // blanket empty, fell back to the survivors
    disabled,            // selection turned off; every LF is used
};

const char* to_string(LabelPickPath p);

struct LabelPickReport {
    std::vector<LfAccuracy> accuracy;
    std::vector<int> pruned_ids;
    std::vector<int> constant_ids;   // survivors kept without glasso evidence
    std::vector<int> selected_ids;
    LabelPickPath path = LabelPickPath::no_survivors;
    bool glasso_converged = true;
};

struct LabelPickResult {
    std::vector<LabelFunction> selected;
    LabelPickReport report;
};

/// Accuracy filter, then the Markov blanket of the pseudo-label in the
/// glasso dependency graph. Every failure path degrades to the survivors.
LabelPickResult label_pick(std::span<const LabelFunction> lfs, const PseudoLabeledSet& labeled, const Dataset& d,
                           const LabelPickConfig& cfg = {});

/// Report as JSON text (pruned / selected / fallback status).
std::string to_json(const LabelPickReport& r);

}  // namespace activedp
