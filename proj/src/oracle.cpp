#include "activedp/oracle.hpp"

#include <algorithm>
#include <numeric>

#include "activedp/error.hpp"

namespace activedp {

int apply_noise(int true_label, double noise_rate, Rng& rng) {
    if (true_label != 0 && true_label != 1) throw UsageError("label noise is defined for binary labels only");
    const bool flip = uniform01(rng) < noise_rate;
    return flip ? 1 - true_label : true_label;
}

SimulatedUser::SimulatedUser(std::shared_ptr<const Dataset> data, OracleConfig cfg, std::uint64_t seed)
    : data_(std::move(data)), cfg_(cfg), rng_(seed) {
    if (!(cfg_.acc_threshold > 0.0 && cfg_.acc_threshold < 1.0))
        throw ConfigError("oracle accuracy threshold must lie in (0,1)");
    if (!(cfg_.noise_rate >= 0.0 && cfg_.noise_rate <= 1.0)) throw ConfigError("noise rate must lie in [0,1]");
    const auto& d = *data_;
    const auto& train = d.indices(Split::train);
    n_train_ = train.size();
    if (n_train_ == 0) throw UsageError("simulated user needs a non-empty train split");
    const auto c = static_cast<std::size_t>(d.n_classes());

    if (d.kind() == DataKind::text) {
        std::unordered_set<std::string_view> seen;
        for (auto i : train) {
            const int y = d[i].true_label.value();
            seen.clear();
            for (const auto& tok : d[i].text().tokens) {
                if (!seen.insert(tok).second) continue;
                auto& cnt = token_counts_[tok];
                if (cnt.by_class.empty()) cnt.by_class.assign(c, 0);
                ++cnt.active;
                ++cnt.by_class[static_cast<std::size_t>(y)];
            }
        }
        return;
    }
    for (std::size_t j = 0; j < d.m_feat(); ++j) {
        std::vector<std::pair<double, int>> col;
        col.reserve(n_train_);
        for (auto i : train) col.emplace_back(d[i].features()[j], d[i].true_label.value());
        std::sort(col.begin(), col.end());
        std::vector<double> values;
        std::vector<std::vector<std::size_t>> prefix(c, std::vector<std::size_t>(n_train_ + 1, 0));
        for (std::size_t r = 0; r < col.size(); ++r) {
            values.push_back(col[r].first);
            for (std::size_t y = 0; y < c; ++y)
                prefix[y][r + 1] = prefix[y][r] + (static_cast<std::size_t>(col[r].second) == y ? 1 : 0);
        }
        sorted_values_.push_back(std::move(values));
        prefix_by_class_.push_back(std::move(prefix));
    }
}

SimulatedUser::Counts SimulatedUser::stump_counts(const StumpRule& s) const {
    const auto& vals = sorted_values_.at(s.feature);
    const auto& prefix = prefix_by_class_.at(s.feature);
    // Rows [lo, hi) of the sorted column satisfy the stump.
    std::size_t lo = 0;
    std::size_t hi = vals.size();
    if (s.op == StumpOp::le)
        hi = static_cast<std::size_t>(std::upper_bound(vals.begin(), vals.end(), s.value) - vals.begin());
    else
        lo = static_cast<std::size_t>(std::lower_bound(vals.begin(), vals.end(), s.value) - vals.begin());
    Counts out;
    out.active = hi - lo;
    for (const auto& p : prefix) out.by_class.push_back(p[hi] - p[lo]);
    return out;
}

SimulatedUser::Counts SimulatedUser::counts_for(const LabelFunction& lf) const {
    if (lf.kind() != data_->kind()) throw UsageError("label function kind does not match dataset");
    if (const auto* k = std::get_if<KeywordRule>(&lf.rule)) {
        auto it = token_counts_.find(k->word);
        if (it == token_counts_.end()) return Counts{0, std::vector<std::size_t>(static_cast<std::size_t>(data_->n_classes()), 0)};
        return it->second;
    }
    return stump_counts(std::get<StumpRule>(lf.rule));
}

std::optional<double> SimulatedUser::lf_true_accuracy(const LabelFunction& lf) const {
    const auto c = counts_for(lf);
    if (c.active == 0 || lf.target < 0 || lf.target >= data_->n_classes()) return std::nullopt;
    return static_cast<double>(c.by_class[static_cast<std::size_t>(lf.target)]) / static_cast<double>(c.active);
}

double SimulatedUser::coverage(const LabelFunction& lf) const {
    return static_cast<double>(counts_for(lf).active) / static_cast<double>(n_train_);
}

std::vector<LabelFunction> SimulatedUser::candidate_lfs(std::size_t pos) const {
    const auto& x = (*data_)[pos];
    std::vector<LabelFunction> raw;
    const int c = data_->n_classes();
    if (x.is_text()) {
        std::unordered_set<std::string_view> seen;
        for (const auto& tok : x.text().tokens) {
            if (!seen.insert(tok).second) continue;
            for (int y = 0; y < c; ++y) raw.push_back(LabelFunction::keyword(tok, y));
        }
    } else {
        const auto& f = x.features();
        for (std::size_t j = 0; j < f.size(); ++j)
            for (auto op : {StumpOp::le, StumpOp::ge})
                for (int y = 0; y < c; ++y) raw.push_back(LabelFunction::stump(j, f[j], op, y));
    }
    std::vector<LabelFunction> out;
    for (auto& lf : raw) {
        const auto acc = lf_true_accuracy(lf);
        if (!acc || !(*acc > cfg_.acc_threshold)) continue;
        if (history_.contains(lf.key())) continue;
        out.push_back(std::move(lf));
    }
    return out;
}

std::optional<LabelFunction> SimulatedUser::respond(std::size_t pos) {
    const int truth = (*data_)[pos].true_label.value();
    const int target = apply_noise(truth, cfg_.noise_rate, rng_);
    auto candidates = candidate_lfs(pos);
    std::erase_if(candidates, [&](const LabelFunction& lf) { return lf.target != target; });
    if (candidates.empty()) return std::nullopt;

    std::vector<double> weights;
    weights.reserve(candidates.size());
    for (const auto& lf : candidates) weights.push_back(coverage(lf));
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    double u = uniform01(rng_) * total;
    std::size_t pick = candidates.size() - 1;
    for (std::size_t k = 0; k < weights.size(); ++k) {
        if (u < weights[k]) {
            pick = k;
            break;
        }
        u -= weights[k];
    }
    history_.insert(candidates[pick].key());
    return std::move(candidates[pick]);
}

}  // namespace activedp
