#pragma once

// Domain types shared by every module: instances, datasets, label functions
// and the weak-label matrix, plus ingestion, splitting and synthetic data.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace activedp {

/// Weak-label value meaning "the label function declined to vote".
inline constexpr int kAbstain = -1;

enum class DataKind { text, tabular };
enum class Split : std::uint8_t { train, valid, test };

const char* to_string(DataKind kind);
const char* to_string(Split split);

struct TextPayload {
    std::string text;
    std::vector<std::string> tokens;
};

using FeatureVector = std::vector<double>;

struct Instance {
    std::int64_t id = 0;
    std::variant<TextPayload, FeatureVector> payload;
    /// Hidden ground truth. Only the simulated user and validation-set
    /// tuning read it; training paths receive explicit label vectors.
    std::optional<int> true_label;

    bool is_text() const { return std::holds_alternative<TextPayload>(payload); }
    const TextPayload& text() const { return std::get<TextPayload>(payload); }
    const FeatureVector& features() const { return std::get<FeatureVector>(payload); }
};

/// An immutable collection of instances with split tags.
class Dataset {
public:
    Dataset() = default;
    Dataset(DataKind kind, int n_classes, std::vector<Instance> instances,
            std::vector<std::string> feature_names = {});

    DataKind kind() const { return kind_; }
    int n_classes() const { return n_classes_; }
    std::size_t size() const { return instances_.size(); }
    /// Number of tabular features (0 for text).
    std::size_t m_feat() const { return feature_names_.size(); }
    const std::vector<std::string>& feature_names() const { return feature_names_; }

    const std::vector<Instance>& instances() const { return instances_; }
    const Instance& operator[](std::size_t i) const { return instances_[i]; }

    bool is_split() const { return !splits_.empty(); }
    Split split_of(std::size_t i) const { return splits_.at(i); }
    const std::vector<Split>& splits() const { return splits_; }
    /// Positions (not ids) of the instances tagged with `s`, in dataset order.
    const std::vector<std::size_t>& indices(Split s) const;

    /// Copy of this dataset carrying the given per-instance split tags.
    Dataset with_splits(std::vector<Split> tags) const;

private:
    DataKind kind_ = DataKind::text;
    int n_classes_ = 2;
    std::vector<Instance> instances_;
    std::vector<std::string> feature_names_;
    std::vector<Split> splits_;
    std::array<std::vector<std::size_t>, 3> by_split_;
};

enum class StumpOp { le, ge };

struct KeywordRule {
    std::string word;
};

struct StumpRule {
    std::size_t feature = 0;
    double value = 0.0;
    StumpOp op = StumpOp::le;
};

struct LabelFunction {
    int id = 0;
    std::variant<KeywordRule, StumpRule> rule;
    int target = 0;

    bool is_keyword() const { return std::holds_alternative<KeywordRule>(rule); }
    DataKind kind() const { return is_keyword() ? DataKind::text : DataKind::tabular; }

    /// Identity used for de-duplication: the rule and target, ignoring `id`.
    std::string key() const;
    /// Human-readable form, e.g. `check -> 1` or `x[2] <= 0.5 -> 0`.
    std::string describe() const;

    static LabelFunction keyword(std::string word, int target, int id = 0);
    static LabelFunction stump(std::size_t feature, double value, StumpOp op, int target, int id = 0);
};

/// Row-major n x m matrix of weak labels in {-1} U {0..C-1}.
class WeakLabelMatrix {
public:
    WeakLabelMatrix() = default;
    WeakLabelMatrix(std::size_t rows, std::vector<int> lf_ids);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return lf_ids_.size(); }
    const std::vector<int>& lf_ids() const { return lf_ids_; }

    int operator()(std::size_t i, std::size_t j) const { return entries_[i * cols() + j]; }
    int& operator()(std::size_t i, std::size_t j) { return entries_[i * cols() + j]; }
    std::span<const int> row(std::size_t i) const {
        return {entries_.data() + i * cols(), cols()};
    }
    /// True when at least one entry is not an abstain.
    bool any_active() const;

private:
    std::size_t rows_ = 0;
    std::vector<int> lf_ids_;
    std::vector<int> entries_;
};

int apply_lf(const LabelFunction& lf, const Instance& x);
WeakLabelMatrix build_label_matrix(std::span<const LabelFunction> lfs, const Dataset& d);
/// Same as above restricted to the instances at `rows` (dataset positions).
WeakLabelMatrix build_label_matrix(std::span<const LabelFunction> lfs, const Dataset& d,
                                   std::span<const std::size_t> rows);

/// Fraction of train-split instances on which `lf` does not abstain.
double lf_coverage(const LabelFunction& lf, const Dataset& d);

struct SplitRatios {
    double train = 0.8;
    double valid = 0.1;
    double test = 0.1;
};

/// Per-split instance counts under the floor-then-distribute rule.
std::array<std::size_t, 3> split_counts(std::size_t n, const SplitRatios& ratios);
Dataset split_dataset(const Dataset& d, const SplitRatios& ratios, std::uint64_t seed);

Dataset load_text_jsonl(const std::filesystem::path& path);
Dataset load_tabular_csv(const std::filesystem::path& path);
Dataset parse_text_jsonl(const std::string& content);
Dataset parse_tabular_csv(const std::string& content);
void save_text_jsonl(const Dataset& d, const std::filesystem::path& path);
void save_tabular_csv(const Dataset& d, const std::filesystem::path& path);

struct SyntheticTextConfig {
    std::size_t n = 2000;
    std::size_t vocab_size = 600;
    std::size_t n_signal_words = 40;
    double flip_noise = 0.05;
    std::uint64_t seed = 0;
    /// Background (Zipf) tokens per document, inclusive range.
    std::size_t min_len = 10;
    std::size_t max_len = 24;
    /// Per-keyword inclusion probability in documents of its own / the other class.
    double own_rate = 0.15;
    double other_rate = 0.02;
    /// Probability that a planted keyword brings its phrase partner
    /// ("kw0x3" -> "kw0x3p"); partners never appear alone, so partner LFs are
    /// redundant given their keyword.
    double phrase_rate = 0.0;
    /// Weaker class cues: topic words per class and their inclusion rates.
    std::size_t topic_words = 30;
    double topic_own_rate = 0.06;
    double topic_other_rate = 0.03;
};

struct SyntheticTabularConfig {
    std::size_t n = 2000;
    std::size_t m_feat = 4;
    double cluster_sep = 1.5;
    std::uint64_t seed = 0;
};

/// Binary text corpus. Each class owns n_signal_words/2 keywords that show up
/// far more often in its documents; the remaining tokens are Zipf background.
Dataset make_synthetic_text(const SyntheticTextConfig& cfg);
/// Binary tabular data: two unit-variance Gaussian clusters whose means differ
/// by cluster_sep along every feature.
Dataset make_synthetic_tabular(const SyntheticTabularConfig& cfg);

}  // namespace activedp
