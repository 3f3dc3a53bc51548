#pragma once

// Experiment loop: the interactive training phase (query, LF, refit), the
// aggregation/inference phase, checkpoint evaluation with a downstream model,
// multi-seed runs, ablations and the pure active-learning baseline.

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "activedp/aggregate.hpp"
#include "activedp/al_model.hpp"
#include "activedp/core.hpp"
#include "activedp/featurize.hpp"
#include "activedp/label_model.hpp"
#include "activedp/lfselect.hpp"
#include "activedp/oracle.hpp"
#include "activedp/sampler.hpp"

namespace activedp {

enum class Mode { activedp, baseline, labelpick, confusion, al };

const char* to_string(Mode m);
Mode parse_mode(const std::string& name);
bool uses_labelpick(Mode m);
bool uses_confusion(Mode m);

inline EmConfig class_conditional_em() {
    EmConfig e;
    e.model = LabelModelKind::class_conditional;
    return e;
}

struct SessionConfig {
    /// "synth:text", "synth:tab", or a path to a .jsonl / .csv file.
    std::string dataset = "synth:text";
    SyntheticTextConfig synth_text;
    SyntheticTabularConfig synth_tab;
    int budget = 300;
    int eval_every = 10;
    SamplerStrategy sampler = SamplerStrategy::adp;
    /// Defaults to 0.5 for text and 0.99 for tabular data.
    std::optional<double> alpha;
    double acc_threshold = 0.6;
    double noise_rate = 0.0;
    Mode mode = Mode::activedp;
    std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
    std::size_t vocab_cap = kDefaultVocabCap;
    SplitRatios ratios;
    LabelPickConfig labelpick;
    /// Keyword and stump LFs vote for a single class, which the one-coin
    /// model cannot identify; see LabelModelKind.
    EmConfig em = class_conditional_em();
    /// Hold the label model's class prior at the validation split's class
    /// frequencies (Laplace-smoothed) unless em.class_balance is already set.
    bool fix_class_balance = true;
    LogRegConfig al_model;
    LogRegConfig end_model;

    /// Throws ConfigError on out-of-range values.
    void validate() const;
};

/// Materialise the dataset named by cfg.dataset (unsplit).
Dataset load_dataset(const SessionConfig& cfg);

/// A split dataset with features, shared read-only by sessions and oracles.
struct PreparedData {
    std::shared_ptr<const Dataset> data;
    FeatureMatrix features;  // every instance, dataset order
    std::vector<std::size_t> train, valid, test;
    std::vector<std::int64_t> train_ids;
    std::vector<int> valid_labels, test_labels;
    FeatureMatrix train_x, valid_x, test_x;

    double default_alpha() const;
    /// Laplace-smoothed class frequencies on the validation split.
    std::vector<double> validation_balance() const;
};

/// Split `unsplit` with a sub-seed of `seed` and featurise on the train split.
std::shared_ptr<const PreparedData> prepare_data(const Dataset& unsplit, std::uint64_t seed, const SessionConfig& cfg);

struct Checkpoint {
    int iteration = 0;
    double test_acc = 0.0;
    double label_acc = 0.0;  // NaN when every train instance is rejected
    double coverage = 0.0;
    std::size_t n_lfs_selected = 0;
    double tau = 1.0;
    /// End model could not be trained (fewer than two classes); test_acc
    /// is the accuracy of a constant majority-class prediction.
    bool degenerate = false;

    friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

using PerformanceCurve = std::vector<Checkpoint>;

double average_accuracy(const PerformanceCurve& curve);

/// Stream identifiers for derive_seed; each RNG consumer gets its own stream.
enum class SeedStream : std::uint64_t { split = 1, sampler = 2, oracle = 3 };

/// One interactive labelling session. The loop is: next_query() -> the user
/// (simulated or human) answers with an LF or nothing -> submit(). Models are
/// refitted after every accepted LF and a checkpoint is recorded every
/// eval_every submissions.
class Session {
public:
    Session(std::shared_ptr<const PreparedData> prepared, SessionConfig cfg, std::uint64_t seed);

    const SessionConfig& config() const { return cfg_; }
    const PreparedData& prepared() const { return *prep_; }
    std::uint64_t seed() const { return seed_; }

    /// Dataset position of the outstanding query, choosing one if needed.
    /// Throws PreconditionError once the budget is spent.
    std::size_t next_query();
    std::optional<std::size_t> outstanding_query() const { return outstanding_; }

    /// Answer the outstanding query. nullopt spends the query without an LF.
    /// An LF that abstains on its own query is rejected with UsageError and
    /// leaves the session unchanged.
    void submit(std::optional<LabelFunction> lf);

    int iteration() const { return iteration_; }
    bool finished() const { return iteration_ >= cfg_.budget; }

    const std::vector<LabelFunction>& lfs() const { return lfs_; }
    const std::vector<LabelFunction>& selected() const { return selected_; }
    const PseudoLabeledSet& pseudo_labels() const { return labeled_; }
    const LabelPickReport& labelpick_report() const { return report_; }
    const std::optional<GenerativeParams>& label_model() const { return lm_; }
    const LogRegModel& al_model() const { return al_; }
    double tau() const { return tau_; }
    const PerformanceCurve& curve() const { return curve_; }

    /// Aggregated labels for dataset positions under the current models.
    std::vector<AggregatedLabel> inference(std::span<const std::size_t> positions) const;
    /// Aggregated labels for the train split, in prepared().train order.
    std::vector<AggregatedLabel> train_labels() const;

    Checkpoint evaluate_checkpoint() const;

private:
    void refit();
    WeakLabelMatrix selected_matrix(std::span<const std::size_t> positions) const;
    std::vector<MaybeSoftLabel> lm_predict(std::span<const std::size_t> positions) const;

    std::shared_ptr<const PreparedData> prep_;
    SessionConfig cfg_;
    std::uint64_t seed_;
    Rng sampler_rng_;
    SamplerState sampler_;

    int iteration_ = 0;
    int next_lf_id_ = 0;
    std::optional<std::size_t> outstanding_;

    std::vector<LabelFunction> lfs_;
    std::vector<std::vector<int>> lf_columns_;  // per LF, output on every instance
    std::vector<std::size_t> selected_cols_;    // indices into lfs_
    std::vector<LabelFunction> selected_;
    PseudoLabeledSet labeled_;
    LabelPickReport report_;

    std::optional<GenerativeParams> lm_;
    LogRegModel al_;
    double tau_ = 1.0;

    // Cached predictions on the train pool and validation split.
    std::vector<SoftLabel> al_train_;
    std::vector<MaybeSoftLabel> lm_train_;

    PerformanceCurve curve_;
};

/// Simulated-user session for one seed.
PerformanceCurve run_session(const SessionConfig& cfg, std::uint64_t seed);
PerformanceCurve run_session(std::shared_ptr<const PreparedData> prepared, const SessionConfig& cfg,
                             std::uint64_t seed);

/// Pure active learning: the simulated user returns true labels and the
/// logistic model trained on them is the end model.
PerformanceCurve run_al_baseline(std::shared_ptr<const PreparedData> prepared, const SessionConfig& cfg,
                                 std::uint64_t seed);

struct SeedCurve {
    std::uint64_t seed = 0;
    PerformanceCurve curve;
};

/// Every seed of cfg.seeds (mode al dispatches to run_al_baseline).
std::vector<SeedCurve> run_seeds(const SessionConfig& cfg);

struct AblationRow {
    Mode mode = Mode::activedp;
    std::vector<double> per_seed;  // average accuracy, cfg.seeds order
    double mean = 0.0;
};

/// Baseline, LabelPick, ConFusion and ActiveDP on shared seeds.
std::vector<AblationRow> run_ablation(const SessionConfig& cfg);

void write_curves_csv(std::ostream& out, const std::vector<SeedCurve>& curves);
void write_ablation_csv(std::ostream& out, const std::vector<AblationRow>& rows,
                        const std::vector<std::uint64_t>& seeds);

}  // namespace activedp
