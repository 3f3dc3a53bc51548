#include "activedp/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "activedp/error.hpp"
#include "activedp/rng.hpp"

namespace activedp {

const char* to_string(DataKind kind) { return kind == DataKind::text ? "text" : "tabular"; }

const char* to_string(Split split) {
    switch (split) {
        case Split::train: return "train";
        case Split::valid: return "valid";
        case Split::test: return "test";
    }
    return "?";
}

Dataset::Dataset(DataKind kind, int n_classes, std::vector<Instance> instances,
                 std::vector<std::string> feature_names)
    : kind_(kind), n_classes_(n_classes), instances_(std::move(instances)),
      feature_names_(std::move(feature_names)) {
    if (n_classes_ < 2) throw UsageError("dataset needs at least 2 classes");
    if (kind_ == DataKind::text && !feature_names_.empty())
        throw UsageError("text datasets carry no feature names");
    std::set<std::int64_t> ids;
    for (const auto& x : instances_) {
        if (!ids.insert(x.id).second) throw UsageError("duplicate instance id " + std::to_string(x.id));
        if (x.is_text() != (kind_ == DataKind::text))
            throw UsageError("instance " + std::to_string(x.id) + " payload does not match dataset kind");
        if (!x.is_text() && x.features().size() != feature_names_.size())
            throw UsageError("instance " + std::to_string(x.id) + " has wrong feature count");
        if (x.true_label && (*x.true_label < 0 || *x.true_label >= n_classes_))
            throw UsageError("instance " + std::to_string(x.id) + " label out of range");
    }
}

const std::vector<std::size_t>& Dataset::indices(Split s) const {
    if (!is_split()) throw UsageError("dataset has not been split");
    return by_split_[static_cast<std::size_t>(s)];
}

Dataset Dataset::with_splits(std::vector<Split> tags) const {
    if (tags.size() != instances_.size()) throw UsageError("split tag count mismatch");
    Dataset out = *this;
    out.splits_ = std::move(tags);
    for (auto& v : out.by_split_) v.clear();
    for (std::size_t i = 0; i < out.splits_.size(); ++i)
        out.by_split_[static_cast<std::size_t>(out.splits_[i])].push_back(i);
    return out;
}

namespace {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::string LabelFunction::key() const {
    if (const auto* k = std::get_if<KeywordRule>(&rule))
        return "kw:" + k->word + ":" + std::to_string(target);
    const auto& s = std::get<StumpRule>(rule);
    return "st:" + std::to_string(s.feature) + ":" + format_double(s.value) +
           (s.op == StumpOp::le ? ":le:" : ":ge:") + std::to_string(target);
}

std::string LabelFunction::describe() const {
    if (const auto* k = std::get_if<KeywordRule>(&rule))
        return k->word + " -> " + std::to_string(target);
    const auto& s = std::get<StumpRule>(rule);
    return "x[" + std::to_string(s.feature) + "] " + (s.op == StumpOp::le ? "<= " : ">= ") +
           format_double(s.value) + " -> " + std::to_string(target);
}

LabelFunction LabelFunction::keyword(std::string word, int target, int id) {
    return LabelFunction{id, KeywordRule{std::move(word)}, target};
}

LabelFunction LabelFunction::stump(std::size_t feature, double value, StumpOp op, int target, int id) {
    return LabelFunction{id, StumpRule{feature, value, op}, target};
}

WeakLabelMatrix::WeakLabelMatrix(std::size_t rows, std::vector<int> lf_ids)
    : rows_(rows), lf_ids_(std::move(lf_ids)), entries_(rows_ * lf_ids_.size(), kAbstain) {}

bool WeakLabelMatrix::any_active() const {
    return std::any_of(entries_.begin(), entries_.end(), [](int v) { return v != kAbstain; });
}

int apply_lf(const LabelFunction& lf, const Instance& x) {
    if (const auto* k = std::get_if<KeywordRule>(&lf.rule)) {
        if (!x.is_text()) throw UsageError("keyword label function applied to a tabular instance");
        const auto& toks = x.text().tokens;
        return std::find(toks.begin(), toks.end(), k->word) != toks.end() ? lf.target : kAbstain;
    }
    const auto& s = std::get<StumpRule>(lf.rule);
    if (x.is_text()) throw UsageError("stump label function applied to a text instance");
    const auto& f = x.features();
    if (s.feature >= f.size()) throw UsageError("stump feature index out of range");
    const double v = f[s.feature];
    const bool fires = s.op == StumpOp::le ? v <= s.value : v >= s.value;
    return fires ? lf.target : kAbstain;
}

WeakLabelMatrix build_label_matrix(std::span<const LabelFunction> lfs, const Dataset& d,
                                   std::span<const std::size_t> rows) {
    std::vector<int> ids;
    ids.reserve(lfs.size());
    for (const auto& lf : lfs) {
        if (lf.kind() != d.kind()) throw UsageError("label function kind does not match dataset");
        ids.push_back(lf.id);
    }
    WeakLabelMatrix w(rows.size(), std::move(ids));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < lfs.size(); ++j) w(i, j) = apply_lf(lfs[j], d[rows[i]]);
    return w;
}

WeakLabelMatrix build_label_matrix(std::span<const LabelFunction> lfs, const Dataset& d) {
    std::vector<std::size_t> all(d.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return build_label_matrix(lfs, d, all);
}

double lf_coverage(const LabelFunction& lf, const Dataset& d) {
    const auto& train = d.indices(Split::train);
    if (train.empty()) throw UsageError("empty train split");
    std::size_t active = 0;
    for (auto i : train)
        if (apply_lf(lf, d[i]) != kAbstain) ++active;
    return static_cast<double>(active) / static_cast<double>(train.size());
}

std::array<std::size_t, 3> split_counts(std::size_t n, const SplitRatios& r) {
    if (r.train < 0 || r.valid < 0 || r.test < 0 || std::abs(r.train + r.valid + r.test - 1.0) > 1e-9)
        throw ConfigError("split ratios must be non-negative and sum to 1");
    const std::array<double, 3> ratios{r.train, r.valid, r.test};
    std::array<std::size_t, 3> counts{};
    std::size_t used = 0;
    for (std::size_t k = 0; k < 3; ++k) {
        counts[k] = static_cast<std::size_t>(std::floor(static_cast<double>(n) * ratios[k] + 1e-9));
        used += counts[k];
    }
    // Remainders go to train, then valid, then test.
    for (std::size_t k = 0; used < n; k = (k + 1) % 3, ++used) ++counts[k];
    return counts;
}

Dataset split_dataset(const Dataset& d, const SplitRatios& ratios, std::uint64_t seed) {
    if (d.size() < 3) throw UsageError("dataset needs at least 3 instances to split");
    const auto counts = split_counts(d.size(), ratios);
    std::vector<std::size_t> order(d.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(seed);
    shuffle(order.begin(), order.end(), rng);
    std::vector<Split> tags(d.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
        const Split s = k < counts[0] ? Split::train : k < counts[0] + counts[1] ? Split::valid : Split::test;
        tags[order[k]] = s;
    }
    return d.with_splits(std::move(tags));
}

}  // namespace activedp
