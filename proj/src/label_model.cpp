#include "activedp/label_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "activedp/error.hpp"

namespace activedp {

MaybeSoftLabel majority_vote(std::span<const int> row, int n_classes) {
    std::vector<int> votes(static_cast<std::size_t>(n_classes), 0);
    bool any = false;
    for (int v : row) {
        if (v == kAbstain) continue;
        if (v < 0 || v >= n_classes) throw UsageError("weak label out of range");
        ++votes[static_cast<std::size_t>(v)];
        any = true;
    }
    if (!any) return std::nullopt;
    const int top = *std::max_element(votes.begin(), votes.end());
    const auto n_top = std::count(votes.begin(), votes.end(), top);
    SoftLabel out{std::vector<double>(votes.size(), 0.0)};
    for (std::size_t c = 0; c < votes.size(); ++c)
        if (votes[c] == top) out.probs[c] = 1.0 / static_cast<double>(n_top);
    return out;
}

const char* to_string(LabelModelKind k) {
    return k == LabelModelKind::one_coin ? "one_coin" : "class_conditional";
}

LabelModelKind parse_label_model(const std::string& name) {
    if (name == "one_coin") return LabelModelKind::one_coin;
    if (name == "class_conditional") return LabelModelKind::class_conditional;
    throw ConfigError("unknown label model '" + name + "' (expected one_coin or class_conditional)");
}

GenerativeParams GenerativeParams::initial(std::size_t n_lfs, int n_classes) {
    GenerativeParams p;
    p.class_prior.assign(static_cast<std::size_t>(n_classes), 1.0 / n_classes);
    p.lf_accuracy.assign(n_lfs, kInitAccuracy);
    p.n_classes = n_classes;
    return p;
}

namespace {

double safe_log(double v) { return v > 0.0 ? std::log(v) : -std::numeric_limits<double>::infinity(); }

// Log-probability tables. `base` is the log joint of an all-abstain row and
// `delta` the change when LF j votes v instead of abstaining, so a row costs
// O(active entries). For one_coin the abstain terms are zero.
struct LogTables {
    std::size_t c = 0;
    std::vector<double> base;
    std::vector<double> delta;  // [(j * C + y) * C + v]

    explicit LogTables(const GenerativeParams& p) : c(static_cast<std::size_t>(p.n_classes)) {
        for (double v : p.class_prior) base.push_back(safe_log(v));
        delta.resize(p.n_lfs() * c * c);
        if (p.kind == LabelModelKind::one_coin) {
            const double spread = static_cast<double>(p.n_classes - 1);
            for (std::size_t j = 0; j < p.n_lfs(); ++j) {
                const double hit = std::log(p.lf_accuracy[j]);
                const double miss = std::log((1.0 - p.lf_accuracy[j]) / spread);
                for (std::size_t y = 0; y < c; ++y)
                    for (std::size_t v = 0; v < c; ++v) delta[(j * c + y) * c + v] = y == v ? hit : miss;
            }
            return;
        }
        for (std::size_t j = 0; j < p.n_lfs(); ++j)
            for (std::size_t y = 0; y < c; ++y) {
                const double abstain = std::log(p.emission_at(j, static_cast<int>(y), kAbstain));
                base[y] += abstain;
                for (std::size_t v = 0; v < c; ++v)
                    delta[(j * c + y) * c + v] =
                        std::log(p.emission_at(j, static_cast<int>(y), static_cast<int>(v))) - abstain;
            }
    }
};

struct ActiveEntry {
    std::size_t lf;
    int vote;
};

// Unnormalised log posterior of each class given the row's active votes.
void log_joint(const LogTables& t, std::span<const ActiveEntry> votes, std::vector<double>& out) {
    out = t.base;
    for (const auto& e : votes) {
        const double* d = t.delta.data() + e.lf * t.c * t.c + static_cast<std::size_t>(e.vote);
        for (std::size_t y = 0; y < t.c; ++y) out[y] += d[y * t.c];
    }
}

double log_sum_exp(const std::vector<double>& v) {
    const double m = *std::max_element(v.begin(), v.end());
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

// Active entries of a weak-label matrix in compressed row form.
struct ActiveRows {
    std::vector<std::size_t> offsets;
    std::vector<ActiveEntry> entries;

    explicit ActiveRows(const WeakLabelMatrix& w) {
        offsets.reserve(w.rows() + 1);
        offsets.push_back(0);
        for (std::size_t i = 0; i < w.rows(); ++i) {
            const auto row = w.row(i);
            for (std::size_t j = 0; j < row.size(); ++j)
                if (row[j] != kAbstain) entries.push_back({j, row[j]});
            offsets.push_back(entries.size());
        }
    }
    std::span<const ActiveEntry> row(std::size_t i) const {
        return {entries.data() + offsets[i], offsets[i + 1] - offsets[i]};
    }
    std::size_t rows() const { return offsets.size() - 1; }
};

std::vector<ActiveEntry> active_entries(std::span<const int> row) {
    std::vector<ActiveEntry> out;
    for (std::size_t j = 0; j < row.size(); ++j)
        if (row[j] != kAbstain) out.push_back({j, row[j]});
    return out;
}

// Under one_coin all-abstain rows carry no information (probability 1);
// under class_conditional they are ordinary observations.
double log_likelihood(const GenerativeParams& p, const ActiveRows& rows) {
    const LogTables t(p);
    const bool skip_empty = p.kind == LabelModelKind::one_coin;
    std::vector<double> lj;
    double ll = 0.0;
    for (std::size_t i = 0; i < rows.rows(); ++i) {
        const auto votes = rows.row(i);
        if (votes.empty() && skip_empty) continue;
        log_joint(t, votes, lj);
        ll += log_sum_exp(lj);
    }
    return ll;
}

double em_objective(const GenerativeParams& p, const ActiveRows& rows) {
    double obj = log_likelihood(p, rows);
    if (p.kind == LabelModelKind::class_conditional)
        for (double e : p.emission) obj += GenerativeParams::kEmissionSmoothing * std::log(e);
    return obj;
}

void check_shape(const GenerativeParams& p, std::size_t width) {
    if (p.n_lfs() != width) throw UsageError("weak-label row width does not match label model");
    if (p.kind == LabelModelKind::class_conditional &&
        p.emission.size() != width * static_cast<std::size_t>(p.n_classes * (p.n_classes + 1)))
        throw UsageError("class-conditional label model has a malformed emission table");
}

// Posterior over classes for every row; rows with no active vote get the
// prior under one_coin.
void e_step(const GenerativeParams& p, const ActiveRows& rows, std::vector<std::vector<double>>& q) {
    const LogTables t(p);
    q.resize(rows.rows());
    for (std::size_t i = 0; i < rows.rows(); ++i) {
        const auto votes = rows.row(i);
        if (votes.empty() && p.kind == LabelModelKind::one_coin) {
            q[i] = p.class_prior;
            continue;
        }
        log_joint(t, votes, q[i]);
        const double z = log_sum_exp(q[i]);
        for (auto& v : q[i]) v = std::exp(v - z);
    }
}

// Class-conditional M-step; returns the largest parameter change.
double m_step_class_conditional(GenerativeParams& p, const ActiveRows& rows,
                                const std::vector<std::vector<double>>& q, bool fixed_prior) {
    const auto c = static_cast<std::size_t>(p.n_classes);
    const std::size_t m = p.n_lfs();
    const double eps = GenerativeParams::kEmissionSmoothing;
    std::vector<double> total(c, 0.0);
    std::vector<double> votes(m * c * c, 0.0);  // [(j * C + y) * C + v]
    for (std::size_t i = 0; i < rows.rows(); ++i) {
        for (std::size_t y = 0; y < c; ++y) total[y] += q[i][y];
        for (const auto& e : rows.row(i))
            for (std::size_t y = 0; y < c; ++y)
                votes[(e.lf * c + y) * c + static_cast<std::size_t>(e.vote)] += q[i][y];
    }

    const bool first = p.emission.empty();
    double change = 0.0;
    std::vector<double> emission(m * c * (c + 1));
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t y = 0; y < c; ++y) {
            double* cell = emission.data() + (j * c + y) * (c + 1);
            double fired = 0.0;
            for (std::size_t v = 0; v < c; ++v) {
                cell[v + 1] = eps + votes[(j * c + y) * c + v];
                fired += votes[(j * c + y) * c + v];
            }
            cell[0] = eps + std::max(0.0, total[y] - fired);
            double z = 0.0;
            for (std::size_t o = 0; o <= c; ++o) z += cell[o];
            for (std::size_t o = 0; o <= c; ++o) cell[o] /= z;
        }
    if (!first)
        for (std::size_t k = 0; k < emission.size(); ++k) change = std::max(change, std::abs(emission[k] - p.emission[k]));
    p.emission = std::move(emission);

    const double n = static_cast<double>(rows.rows());
    for (std::size_t y = 0; y < c && !fixed_prior; ++y) {
        const double next = total[y] / n;
        change = std::max(change, std::abs(next - p.class_prior[y]));
        p.class_prior[y] = next;
    }
    for (std::size_t j = 0; j < m; ++j) {
        double correct = 0.0, fires = 0.0;
        for (std::size_t y = 0; y < c; ++y) {
            const double* cell = p.emission.data() + (j * c + y) * (c + 1);
            correct += p.class_prior[y] * cell[y + 1];
            fires += p.class_prior[y] * (1.0 - cell[0]);
        }
        p.lf_accuracy[j] = fires > 0.0 ? correct / fires : GenerativeParams::kInitAccuracy;
    }
    return change;
}

GenerativeFit fit_class_conditional(const WeakLabelMatrix& w, int n_classes, const EmConfig& cfg) {
    GenerativeFit fit;
    const ActiveRows rows(w);
    // Seed with the one-coin posterior at its initial parameters (an
    // accuracy-weighted vote), which fixes the labelling of the classes.
    auto seed = GenerativeParams::initial(w.cols(), n_classes);
    const bool fixed = cfg.class_balance.has_value();
    if (fixed) seed.class_prior = *cfg.class_balance;
    std::vector<std::vector<double>> q;
    e_step(seed, rows, q);
    fit.params = seed;
    fit.params.kind = LabelModelKind::class_conditional;
    m_step_class_conditional(fit.params, rows, q, fixed);
    fit.log_likelihood.push_back(em_objective(fit.params, rows));

    for (int it = 0; it < cfg.max_iter; ++it) {
        e_step(fit.params, rows, q);
        const double change = m_step_class_conditional(fit.params, rows, q, fixed);
        fit.iterations = it + 1;
        fit.log_likelihood.push_back(em_objective(fit.params, rows));
        if (change < cfg.tol) {
            fit.converged = true;
            break;
        }
    }
    return fit;
}

}  // namespace

double log_likelihood(const GenerativeParams& params, const WeakLabelMatrix& w) {
    check_shape(params, w.cols());
    return log_likelihood(params, ActiveRows(w));
}

GenerativeFit fit_generative(const WeakLabelMatrix& w, int n_classes, const EmConfig& cfg) {
    if (n_classes < 2) throw UsageError("label model needs at least 2 classes");
    if (w.cols() == 0 || !w.any_active()) throw UsageError("label model needs at least one active weak label");
    for (std::size_t i = 0; i < w.rows(); ++i)
        for (int v : w.row(i))
            if (v < kAbstain || v >= n_classes) throw UsageError("weak label out of range");
    if (cfg.class_balance) {
        const auto& b = *cfg.class_balance;
        double sum = 0.0;
        for (double v : b) {
            if (!(v > 0.0)) throw UsageError("class balance entries must be positive");
            sum += v;
        }
        if (b.size() != static_cast<std::size_t>(n_classes) || std::abs(sum - 1.0) > 1e-9)
            throw UsageError("class balance must be a distribution over the classes");
    }
    if (cfg.model == LabelModelKind::class_conditional) return fit_class_conditional(w, n_classes, cfg);

    GenerativeFit fit;
    fit.params = GenerativeParams::initial(w.cols(), n_classes);
    if (cfg.class_balance) fit.params.class_prior = *cfg.class_balance;
    auto& p = fit.params;
    const auto c = static_cast<std::size_t>(n_classes);
    const double n = static_cast<double>(w.rows());
    const ActiveRows rows(w);

    std::vector<double> q;
    std::vector<double> prior_acc(c);
    std::vector<double> hit(w.cols());
    std::vector<double> fired(w.cols());
    fit.log_likelihood.push_back(log_likelihood(p, rows));

    for (int it = 0; it < cfg.max_iter; ++it) {
        const LogTables t(p);
        std::fill(prior_acc.begin(), prior_acc.end(), 0.0);
        std::fill(hit.begin(), hit.end(), 0.0);
        std::fill(fired.begin(), fired.end(), 0.0);
        for (std::size_t i = 0; i < rows.rows(); ++i) {
            const auto votes = rows.row(i);
            if (votes.empty()) {
                for (std::size_t y = 0; y < c; ++y) prior_acc[y] += p.class_prior[y];
                continue;
            }
            log_joint(t, votes, q);
            const double z = log_sum_exp(q);
            for (auto& v : q) v = std::exp(v - z);
            for (std::size_t y = 0; y < c; ++y) prior_acc[y] += q[y];
            for (const auto& e : votes) {
                fired[e.lf] += 1.0;
                hit[e.lf] += q[static_cast<std::size_t>(e.vote)];
            }
        }

        double change = 0.0;
        for (std::size_t y = 0; y < c && !cfg.class_balance; ++y) {
            const double next = prior_acc[y] / n;
            change = std::max(change, std::abs(next - p.class_prior[y]));
            p.class_prior[y] = next;
        }
        for (std::size_t j = 0; j < w.cols(); ++j) {
            // LFs that never fire keep their current value.
            if (fired[j] == 0.0) continue;
            const double next = std::clamp(hit[j] / fired[j], GenerativeParams::kMinAccuracy,
                                           GenerativeParams::kMaxAccuracy);
            change = std::max(change, std::abs(next - p.lf_accuracy[j]));
            p.lf_accuracy[j] = next;
        }
        fit.iterations = it + 1;
        fit.log_likelihood.push_back(log_likelihood(p, rows));
        if (change < cfg.tol) {
            fit.converged = true;
            break;
        }
    }
    return fit;
}

MaybeSoftLabel predict_generative(const GenerativeParams& params, std::span<const int> row) {
    check_shape(params, row.size());
    const auto votes = active_entries(row);
    if (votes.empty()) return std::nullopt;
    std::vector<double> lj;
    log_joint(LogTables(params), votes, lj);
    const double z = log_sum_exp(lj);
    for (auto& v : lj) v = std::exp(v - z);
    return SoftLabel{std::move(lj)};
}

std::vector<MaybeSoftLabel> predict_generative(const GenerativeParams& params, const WeakLabelMatrix& w) {
    check_shape(params, w.cols());
    const LogTables t(params);
    const ActiveRows rows(w);
    std::vector<MaybeSoftLabel> out;
    out.reserve(w.rows());
    std::vector<double> lj;
    for (std::size_t i = 0; i < rows.rows(); ++i) {
        const auto votes = rows.row(i);
        if (votes.empty()) {
            out.emplace_back(std::nullopt);
            continue;
        }
        log_joint(t, votes, lj);
        const double z = log_sum_exp(lj);
        SoftLabel s{std::vector<double>(lj.size())};
        for (std::size_t y = 0; y < lj.size(); ++y) s.probs[y] = std::exp(lj[y] - z);
        out.emplace_back(std::move(s));
    }
    return out;
}

SoftLabel lm_entropy_input(const GenerativeParams& params, std::span<const int> row) {
    auto s = predict_generative(params, row);
    return s ? std::move(*s) : SoftLabel::uniform(params.n_classes);
}

}  // namespace activedp
