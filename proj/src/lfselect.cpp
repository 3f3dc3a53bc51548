#include "activedp/lfselect.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

#include "activedp/error.hpp"
#include "activedp/glasso.hpp"

namespace activedp {

const char* to_string(LabelPickPath p) {
    switch (p) {
        case LabelPickPath::no_survivors: return "no_survivors";
        case LabelPickPath::insufficient: return "insufficient_evidence";
        case LabelPickPath::label_constant: return "constant_pseudo_labels";
        case LabelPickPath::blanket: return "markov_blanket";
        case LabelPickPath::empty_blanket: return "empty_blanket_fallback";
        case LabelPickPath::disabled: return "disabled";
    }
    return "?";
}

AccuracyFilterResult accuracy_filter(std::span<const LabelFunction> lfs, const Dataset& d) {
    const auto& valid = d.indices(Split::valid);
    if (valid.empty()) throw UsageError("accuracy filter needs a non-empty validation split");
    const double chance = 1.0 / static_cast<double>(d.n_classes());
    AccuracyFilterResult out;
    for (const auto& lf : lfs) {
        LfAccuracy acc{lf.id, 0, 0, std::nullopt, false};
        for (auto i : valid) {
            const int v = apply_lf(lf, d[i]);
            if (v == kAbstain) continue;
            ++acc.activated;
            if (d[i].true_label && v == *d[i].true_label) ++acc.correct;
        }
        if (acc.activated > 0) {
            acc.accuracy = static_cast<double>(acc.correct) / static_cast<double>(acc.activated);
            acc.kept = !(*acc.accuracy < chance);
        }
        if (acc.kept) out.survivors.push_back(lf);
        out.report.push_back(acc);
    }
    return out;
}

double encode_binary(int value) {
    switch (value) {
        case kAbstain: return 0.0;
        case 0: return -1.0;
        case 1: return 1.0;
        default: throw UsageError("binary encoding got label " + std::to_string(value));
    }
}

Eigen::MatrixXd encode_table(const PseudoLabeledSet& labeled, std::span<const LabelFunction> survivors,
                             const Dataset& d) {
    if (d.n_classes() != 2) throw ConfigError("LF/label table encoding is only defined for binary tasks");
    const auto m = static_cast<Eigen::Index>(survivors.size());
    Eigen::MatrixXd t(static_cast<Eigen::Index>(labeled.size()), m + 1);
    for (std::size_t r = 0; r < labeled.size(); ++r) {
        const auto row = static_cast<Eigen::Index>(r);
        const auto& x = d[labeled[r].instance];
        for (Eigen::Index j = 0; j < m; ++j)
            t(row, j) = encode_binary(apply_lf(survivors[static_cast<std::size_t>(j)], x));
        t(row, m) = encode_binary(labeled[r].label);
    }
    return t;
}

std::vector<std::size_t> markov_blanket(const Eigen::MatrixXd& theta, std::size_t y_index, double edge_tol) {
    const auto y = static_cast<Eigen::Index>(y_index);
    if (y >= theta.rows() || theta.rows() != theta.cols()) throw UsageError("markov_blanket: bad label index");
    std::vector<std::size_t> out;
    for (Eigen::Index j = 0; j < theta.rows(); ++j)
        if (j != y && std::abs(theta(j, y)) > edge_tol) out.push_back(static_cast<std::size_t>(j));
    return out;
}

LabelPickResult label_pick(std::span<const LabelFunction> lfs, const PseudoLabeledSet& labeled, const Dataset& d,
                           const LabelPickConfig& cfg) {
    LabelPickResult res;
    auto filtered = accuracy_filter(lfs, d);
    res.report.accuracy = filtered.report;
    for (const auto& a : filtered.report)
        if (!a.kept) res.report.pruned_ids.push_back(a.lf_id);
    const auto& survivors = filtered.survivors;

    auto finish = [&](std::vector<LabelFunction> chosen, LabelPickPath path) {
        res.selected = std::move(chosen);
        res.report.path = path;
        res.report.selected_ids.clear();
        for (const auto& lf : res.selected) res.report.selected_ids.push_back(lf.id);
        return res;
    };

    if (survivors.empty()) return finish({}, LabelPickPath::no_survivors);
    if (survivors.size() <= 1 || labeled.size() < cfg.min_rows) return finish(survivors, LabelPickPath::insufficient);

    const auto table = encode_table(labeled, survivors, d);
    const auto cov = empirical_cov(table);
    const std::size_t label_col = survivors.size();
    for (auto c : cov.constant)
        if (c != label_col) res.report.constant_ids.push_back(survivors[c].id);
    if (std::find(cov.constant.begin(), cov.constant.end(), label_col) != cov.constant.end())
        return finish(survivors, LabelPickPath::label_constant);

    const auto fit = graphical_lasso(cov.s, cfg.lambda);
    res.report.glasso_converged = fit.converged;
    const auto blanket = markov_blanket(fit.theta, cov.kept.size() - 1, cfg.edge_tol);
    if (blanket.empty()) return finish(survivors, LabelPickPath::empty_blanket);

    std::set<std::size_t> keep(cov.constant.begin(), cov.constant.end());
    for (auto b : blanket) keep.insert(cov.kept[b]);
    std::vector<LabelFunction> chosen;
    for (std::size_t j = 0; j < survivors.size(); ++j)
        if (keep.contains(j)) chosen.push_back(survivors[j]);
    return finish(std::move(chosen), LabelPickPath::blanket);
}

std::string to_json(const LabelPickReport& r) {
    nlohmann::json j;
    j["path"] = to_string(r.path);
    j["pruned"] = r.pruned_ids;
    j["selected"] = r.selected_ids;
    j["constant"] = r.constant_ids;
    j["glasso_converged"] = r.glasso_converged;
    auto& acc = j["accuracy"] = nlohmann::json::array();
    for (const auto& a : r.accuracy) {
        acc.push_back({{"lf_id", a.lf_id},
                       {"activated", a.activated},
                       {"correct", a.correct},
                       {"accuracy", a.accuracy ? nlohmann::json(*a.accuracy) : nlohmann::json(nullptr)},
                       {"kept", a.kept}});
    }
    return j.dump();
}

}  // namespace activedp
