#include "activedp/harness.hpp"

#include <algorithm>
#include <array>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <future>
#include <limits>
#include <numeric>
#include <ostream>

#include "activedp/error.hpp"

namespace activedp {

const char* to_string(Mode m) {
    switch (m) {
        case Mode::activedp: return "activedp";
        case Mode::baseline: return "baseline";
        case Mode::labelpick: return "labelpick";
        case Mode::confusion: return "confusion";
        case Mode::al: return "al";
    }
    return "?";
}

Mode parse_mode(const std::string& name) {
    if (name == "activedp") return Mode::activedp;
    if (name == "baseline") return Mode::baseline;
    if (name == "labelpick") return Mode::labelpick;
    if (name == "confusion") return Mode::confusion;
    if (name == "al") return Mode::al;
    throw ConfigError("unknown mode '" + name + "' (expected activedp, baseline, labelpick, confusion or al)");
}

bool uses_labelpick(Mode m) { return m == Mode::activedp || m == Mode::labelpick; }
bool uses_confusion(Mode m) { return m == Mode::activedp || m == Mode::confusion; }

void SessionConfig::validate() const {
    if (eval_every < 1) throw ConfigError("eval_every must be >= 1");
    if (mode == Mode::al) {
        if (budget < 0) throw ConfigError("budget must be >= 0");
    } else if (budget < eval_every) {
        throw ConfigError("budget must be >= eval_every");
    }
    if (alpha && !(*alpha >= 0.0 && *alpha <= 1.0)) throw ConfigError("alpha must lie in [0,1]");
    if (!(acc_threshold > 0.0 && acc_threshold < 1.0)) throw ConfigError("accuracy threshold must lie in (0,1)");
    if (!(noise_rate >= 0.0 && noise_rate <= 1.0)) throw ConfigError("noise rate must lie in [0,1]");
    if (seeds.empty()) throw ConfigError("at least one seed is required");
    if (vocab_cap < 1) throw ConfigError("vocabulary cap must be >= 1");
    if (!(labelpick.lambda >= 0.0)) throw ConfigError("glasso lambda must be >= 0");
    if (!(labelpick.edge_tol >= 0.0)) throw ConfigError("edge tolerance must be >= 0");
    if (al_model.max_iter < 0 || end_model.max_iter < 0 || em.max_iter < 0)
        throw ConfigError("iteration limits must be >= 0");
}

Dataset load_dataset(const SessionConfig& cfg) {
    if (cfg.dataset == "synth:text") return make_synthetic_text(cfg.synth_text);
    if (cfg.dataset == "synth:tab") return make_synthetic_tabular(cfg.synth_tab);
    const std::filesystem::path path(cfg.dataset);
    if (!std::filesystem::exists(path)) throw ConfigError("dataset not found: " + cfg.dataset);
    const auto ext = path.extension().string();
    if (ext == ".jsonl" || ext == ".json") return load_text_jsonl(path);
    if (ext == ".csv") return load_tabular_csv(path);
    throw ConfigError("unrecognised dataset extension '" + ext + "' (expected .jsonl or .csv)");
}

double PreparedData::default_alpha() const { return data->kind() == DataKind::text ? kTextAlpha : kTabularAlpha; }

std::vector<double> PreparedData::validation_balance() const {
    const auto c = static_cast<std::size_t>(data->n_classes());
    std::vector<double> b(c, 1.0);
    for (int y : valid_labels) b[static_cast<std::size_t>(y)] += 1.0;
    for (auto& v : b) v /= static_cast<double>(valid_labels.size() + c);
    return b;
}

std::shared_ptr<const PreparedData> prepare_data(const Dataset& unsplit, std::uint64_t seed, const SessionConfig& cfg) {
    auto prep = std::make_shared<PreparedData>();
    auto split = split_dataset(unsplit, cfg.ratios, derive_seed(seed, static_cast<std::uint64_t>(SeedStream::split)));
    prep->data = std::make_shared<const Dataset>(std::move(split));
    const auto& d = *prep->data;
    for (const auto& x : d.instances())
        if (!x.true_label) throw ConfigError("every instance needs a label for simulation and validation");
    prep->features = featurize_dataset(d, cfg.vocab_cap);
    prep->train = d.indices(Split::train);
    prep->valid = d.indices(Split::valid);
    prep->test = d.indices(Split::test);
    if (prep->train.empty() || prep->valid.empty() || prep->test.empty())
        throw ConfigError("dataset too small: every split needs at least one instance");
    for (auto i : prep->train) prep->train_ids.push_back(d[i].id);
    for (auto i : prep->valid) prep->valid_labels.push_back(*d[i].true_label);
    for (auto i : prep->test) prep->test_labels.push_back(*d[i].true_label);
    prep->train_x = gather_rows(prep->features, prep->train);
    prep->valid_x = gather_rows(prep->features, prep->valid);
    prep->test_x = gather_rows(prep->features, prep->test);
    return prep;
}

double average_accuracy(const PerformanceCurve& curve) {
    if (curve.empty()) return std::numeric_limits<double>::quiet_NaN();
    double s = 0.0;
    for (const auto& c : curve) s += c.test_acc;
    return s / static_cast<double>(curve.size());
}

namespace {

double accuracy_of(const std::vector<SoftLabel>& pred, const std::vector<int>& truth) {
    std::size_t ok = 0;
    for (std::size_t i = 0; i < truth.size(); ++i)
        if (pred[i].argmax() == truth[i]) ++ok;
    return truth.empty() ? 0.0 : static_cast<double>(ok) / static_cast<double>(truth.size());
}

double constant_accuracy(int cls, const std::vector<int>& truth) {
    const auto ok = std::count(truth.begin(), truth.end(), cls);
    return truth.empty() ? 0.0 : static_cast<double>(ok) / static_cast<double>(truth.size());
}

bool has_both_classes(const std::vector<int>& y) {
    return std::find(y.begin(), y.end(), 0) != y.end() && std::find(y.begin(), y.end(), 1) != y.end();
}

}  // namespace

Session::Session(std::shared_ptr<const PreparedData> prepared, SessionConfig cfg, std::uint64_t seed)
    : prep_(std::move(prepared)), cfg_(std::move(cfg)), seed_(seed),
      sampler_rng_(derive_seed(seed, static_cast<std::uint64_t>(SeedStream::sampler))) {
    cfg_.validate();
    if (cfg_.mode == Mode::al) throw ConfigError("interactive sessions do not support mode 'al'");
    if (prep_->data->n_classes() != 2) throw ConfigError("sessions are defined for binary tasks only");
    if (static_cast<std::size_t>(cfg_.budget) > prep_->train.size())
        throw ConfigError("budget exceeds the number of train instances");
    if (cfg_.fix_class_balance && !cfg_.em.class_balance) cfg_.em.class_balance = prep_->validation_balance();
    sampler_.strategy = cfg_.sampler;
    sampler_.alpha = cfg_.alpha.value_or(prep_->default_alpha());
    al_ = LogRegModel::zero(prep_->features.cols());
    al_train_ = predict_proba(al_, prep_->train_x);
    lm_train_.assign(prep_->train.size(), std::nullopt);
    report_.path = uses_labelpick(cfg_.mode) ? LabelPickPath::no_survivors : LabelPickPath::disabled;
}

std::size_t Session::next_query() {
    if (finished()) throw PreconditionError("labelling budget exhausted");
    if (outstanding_) return *outstanding_;
    std::vector<SoftLabel> lm_soft;
    if (sampler_.strategy == SamplerStrategy::adp) {
        lm_soft.reserve(lm_train_.size());
        for (const auto& s : lm_train_) lm_soft.push_back(s ? *s : SoftLabel::uniform(2));
    }
    const auto id = select_next(sampler_, prep_->train_ids, al_train_, lm_soft, sampler_rng_);
    const auto k = static_cast<std::size_t>(
        std::find(prep_->train_ids.begin(), prep_->train_ids.end(), id) - prep_->train_ids.begin());
    outstanding_ = prep_->train[k];
    return *outstanding_;
}

void Session::submit(std::optional<LabelFunction> lf) {
    if (!outstanding_) throw PreconditionError("no outstanding query");
    const auto& d = *prep_->data;
    const std::size_t pos = *outstanding_;
    int pseudo = kAbstain;
    if (lf) {
        if (lf->kind() != d.kind()) throw UsageError("label function kind does not match the dataset");
        if (const auto* s = std::get_if<StumpRule>(&lf->rule); s && s->feature >= d.m_feat())
            throw UsageError("stump feature index out of range");
        if (lf->target < 0 || lf->target >= d.n_classes()) throw UsageError("label function target out of range");
        pseudo = apply_lf(*lf, d[pos]);
        if (pseudo == kAbstain) throw UsageError("LF must label its query");
    }

    sampler_.queried.insert(d[pos].id);
    outstanding_.reset();
    ++iteration_;
    if (lf) {
        lf->id = next_lf_id_++;
        std::vector<int> column(d.size());
        for (std::size_t i = 0; i < d.size(); ++i) column[i] = apply_lf(*lf, d[i]);
        lf_columns_.push_back(std::move(column));
        lfs_.push_back(std::move(*lf));
        labeled_.push_back({pos, pseudo});
        refit();
    }
    if (iteration_ % cfg_.eval_every == 0) curve_.push_back(evaluate_checkpoint());
}

WeakLabelMatrix Session::selected_matrix(std::span<const std::size_t> positions) const {
    std::vector<int> ids;
    for (auto c : selected_cols_) ids.push_back(lfs_[c].id);
    WeakLabelMatrix w(positions.size(), std::move(ids));
    for (std::size_t i = 0; i < positions.size(); ++i)
        for (std::size_t j = 0; j < selected_cols_.size(); ++j) w(i, j) = lf_columns_[selected_cols_[j]][positions[i]];
    return w;
}

std::vector<MaybeSoftLabel> Session::lm_predict(std::span<const std::size_t> positions) const {
    if (!lm_) return std::vector<MaybeSoftLabel>(positions.size());
    return predict_generative(*lm_, selected_matrix(positions));
}

void Session::refit() {
    const auto& d = *prep_->data;
    if (uses_labelpick(cfg_.mode)) {
        auto picked = label_pick(lfs_, labeled_, d, cfg_.labelpick);
        selected_ = std::move(picked.selected);
        report_ = std::move(picked.report);
    } else {
        selected_ = lfs_;
        report_ = LabelPickReport{};
        report_.path = LabelPickPath::disabled;
        for (const auto& lf : lfs_) report_.selected_ids.push_back(lf.id);
    }
    // LF ids are assigned sequentially, so an id is also its column index.
    selected_cols_.clear();
    for (const auto& lf : selected_) selected_cols_.push_back(static_cast<std::size_t>(lf.id));

    const auto w = selected_matrix(prep_->train);
    if (w.cols() > 0 && w.any_active()) {
        lm_ = fit_generative(w, d.n_classes(), cfg_.em).params;
        lm_train_ = predict_generative(*lm_, w);
    } else {
        lm_.reset();
        lm_train_.assign(prep_->train.size(), std::nullopt);
    }

    std::vector<std::size_t> rows;
    std::vector<int> y;
    for (const auto& p : labeled_) {
        rows.push_back(p.instance);
        y.push_back(p.label);
    }
    if (has_both_classes(y)) {
        al_ = fit_logreg(gather_rows(prep_->features, rows), y, cfg_.al_model).model;
        al_train_ = predict_proba(al_, prep_->train_x);
    }

    if (uses_confusion(cfg_.mode)) {
        const auto al_valid = predict_proba(al_, prep_->valid_x);
        const auto lm_valid = lm_predict(prep_->valid);
        tau_ = tune_threshold(al_valid, lm_valid, prep_->valid_labels);
    }
}

std::vector<AggregatedLabel> Session::inference(std::span<const std::size_t> positions) const {
    const auto al = predict_proba(al_, gather_rows(prep_->features, positions));
    const auto lm = lm_predict(positions);
    std::vector<AggregatedLabel> out;
    out.reserve(positions.size());
    for (std::size_t i = 0; i < positions.size(); ++i) {
        if (uses_confusion(cfg_.mode))
            out.push_back(confusion(al[i], lm[i], tau_));
        else
            out.push_back(lm[i] ? AggregatedLabel{*lm[i], LabelSource::lm} : AggregatedLabel::rejected_label());
    }
    return out;
}

std::vector<AggregatedLabel> Session::train_labels() const {
    std::vector<AggregatedLabel> out;
    out.reserve(prep_->train.size());
    for (std::size_t k = 0; k < prep_->train.size(); ++k) {
        if (uses_confusion(cfg_.mode))
            out.push_back(confusion(al_train_[k], lm_train_[k], tau_));
        else
            out.push_back(lm_train_[k] ? AggregatedLabel{*lm_train_[k], LabelSource::lm}
                                       : AggregatedLabel::rejected_label());
    }
    return out;
}

Checkpoint Session::evaluate_checkpoint() const {
    const auto& d = *prep_->data;
    Checkpoint cp;
    cp.iteration = iteration_;
    cp.n_lfs_selected = selected_.size();
    cp.tau = tau_;

    const auto labels = train_labels();
    std::vector<std::size_t> rows;
    std::vector<int> hard;
    std::size_t correct = 0;
    for (std::size_t k = 0; k < labels.size(); ++k) {
        if (labels[k].rejected()) continue;
        const auto pos = prep_->train[k];
        const int y = labels[k].label->argmax();
        rows.push_back(pos);
        hard.push_back(y);
        if (y == *d[pos].true_label) ++correct;
    }
    cp.coverage = static_cast<double>(rows.size()) / static_cast<double>(labels.size());
    cp.label_acc = rows.empty() ? std::numeric_limits<double>::quiet_NaN()
                                : static_cast<double>(correct) / static_cast<double>(rows.size());

    if (has_both_classes(hard)) {
        const auto end_model = fit_logreg(gather_rows(prep_->features, rows), hard, cfg_.end_model).model;
        cp.test_acc = accuracy_of(predict_proba(end_model, prep_->test_x), prep_->test_labels);
    } else {
        // No labels at all predicts class 0.
        cp.degenerate = true;
        cp.test_acc = constant_accuracy(hard.empty() ? 0 : hard.front(), prep_->test_labels);
    }
    return cp;
}

PerformanceCurve run_session(std::shared_ptr<const PreparedData> prepared, const SessionConfig& cfg,
                             std::uint64_t seed) {
    if (cfg.mode == Mode::al) return run_al_baseline(std::move(prepared), cfg, seed);
    SimulatedUser user(prepared->data, OracleConfig{cfg.acc_threshold, cfg.noise_rate},
                       derive_seed(seed, static_cast<std::uint64_t>(SeedStream::oracle)));
    Session session(std::move(prepared), cfg, seed);
    while (!session.finished()) {
        const auto q = session.next_query();
        session.submit(user.respond(q));
    }
    return session.curve();
}

PerformanceCurve run_session(const SessionConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    const auto data = load_dataset(cfg);
    return run_session(prepare_data(data, seed, cfg), cfg, seed);
}

PerformanceCurve run_al_baseline(std::shared_ptr<const PreparedData> prepared, const SessionConfig& cfg,
                                 std::uint64_t seed) {
    cfg.validate();
    const auto& prep = *prepared;
    const auto& d = *prep.data;
    if (static_cast<std::size_t>(cfg.budget) > prep.train.size())
        throw ConfigError("budget exceeds the number of train instances");
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(SeedStream::sampler)));
    SamplerState state{cfg.sampler, cfg.alpha.value_or(prep.default_alpha()), {}};
    // No label model here: every instance is maximally uncertain for it.
    const std::vector<SoftLabel> lm_soft(prep.train.size(), SoftLabel::uniform(2));

    auto model = LogRegModel::zero(prep.features.cols());
    std::vector<std::size_t> rows;
    std::vector<int> y;
    PerformanceCurve curve;
    auto record = [&](int t) {
        Checkpoint cp;
        cp.iteration = t;
        cp.test_acc = accuracy_of(predict_proba(model, prep.test_x), prep.test_labels);
        cp.label_acc = rows.empty() ? std::numeric_limits<double>::quiet_NaN() : 1.0;
        cp.coverage = static_cast<double>(rows.size()) / static_cast<double>(prep.train.size());
        cp.tau = 0.0;
        cp.degenerate = !has_both_classes(y);
        curve.push_back(cp);
    };
    if (cfg.budget == 0) {
        record(0);
        return curve;
    }
    for (int t = 1; t <= cfg.budget; ++t) {
        const auto al_soft = predict_proba(model, prep.train_x);
        const auto id = select_next(state, prep.train_ids, al_soft, lm_soft, rng);
        const auto k = static_cast<std::size_t>(
            std::find(prep.train_ids.begin(), prep.train_ids.end(), id) - prep.train_ids.begin());
        state.queried.insert(id);
        rows.push_back(prep.train[k]);
        y.push_back(*d[prep.train[k]].true_label);
        if (has_both_classes(y)) model = fit_logreg(gather_rows(prep.features, rows), y, cfg.al_model).model;
        if (t % cfg.eval_every == 0) record(t);
    }
    return curve;
}

namespace {

// One task per seed; results land in seed order, so output does not depend on
// scheduling.
template <class Fn>
auto per_seed(const std::vector<std::uint64_t>& seeds, Fn fn) {
    using R = decltype(fn(seeds.front()));
    std::vector<std::future<R>> tasks;
    tasks.reserve(seeds.size());
    for (auto seed : seeds) tasks.push_back(std::async(std::launch::async, fn, seed));
    std::vector<R> out;
    out.reserve(seeds.size());
    for (auto& t : tasks) out.push_back(t.get());
    return out;
}

}  // namespace

std::vector<SeedCurve> run_seeds(const SessionConfig& cfg) {
    cfg.validate();
    const auto data = load_dataset(cfg);
    return per_seed(cfg.seeds, [&](std::uint64_t seed) {
        return SeedCurve{seed, run_session(prepare_data(data, seed, cfg), cfg, seed)};
    });
}

std::vector<AblationRow> run_ablation(const SessionConfig& cfg) {
    cfg.validate();
    const auto data = load_dataset(cfg);
    const std::array modes{Mode::baseline, Mode::labelpick, Mode::confusion, Mode::activedp};
    const auto scores = per_seed(cfg.seeds, [&](std::uint64_t seed) {
        const auto prep = prepare_data(data, seed, cfg);
        std::array<double, modes.size()> avg{};
        for (std::size_t k = 0; k < modes.size(); ++k) {
            auto c = cfg;
            c.mode = modes[k];
            avg[k] = average_accuracy(run_session(prep, c, seed));
        }
        return avg;
    });
    std::vector<AblationRow> rows;
    for (std::size_t k = 0; k < modes.size(); ++k) {
        AblationRow row{modes[k], {}, 0.0};
        for (const auto& s : scores) row.per_seed.push_back(s[k]);
        row.mean = std::accumulate(row.per_seed.begin(), row.per_seed.end(), 0.0) /
                   static_cast<double>(row.per_seed.size());
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace

void write_curves_csv(std::ostream& out, const std::vector<SeedCurve>& curves) {
    out << "seed,iteration,test_acc,label_acc,coverage,n_lfs_selected,tau\n";
    for (const auto& sc : curves)
        for (const auto& c : sc.curve)
            out << sc.seed << ',' << c.iteration << ',' << fmt(c.test_acc) << ',' << fmt(c.label_acc) << ','
                << fmt(c.coverage) << ',' << c.n_lfs_selected << ',' << fmt(c.tau) << '\n';
}

void write_ablation_csv(std::ostream& out, const std::vector<AblationRow>& rows,
                        const std::vector<std::uint64_t>& seeds) {
    out << "method";
    for (auto s : seeds) out << ",seed_" << s;
    out << ",mean\n";
    for (const auto& r : rows) {
        out << to_string(r.mode);
        for (double v : r.per_seed) out << ',' << fmt(v);
        out << ',' << fmt(r.mean) << '\n';
    }
}

}  // namespace activedp
