// activedp command line: simulated-user experiments, ablations, standalone
// graphical lasso, the HTTP service and synthetic data generation.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "activedp/error.hpp"
#include "activedp/glasso.hpp"
#include "activedp/harness.hpp"
#include "activedp/service.hpp"

#include <CLI11.hpp>
#include <httplib.h>

using namespace activedp;

namespace {

constexpr int kConfigExit = 2;

struct RunOptions {
    std::string dataset = "synth:text";
    int budget = 300;
    int eval_every = 10;
    std::string sampler = "adp";
    std::optional<double> alpha;
    double noise = 0.0;
    double acc_threshold = 0.6;
    int seeds = 5;
    std::string mode = "activedp";
    std::string label_model = "class_conditional";
    std::optional<std::size_t> n;
    std::string output;
};

void add_run_options(CLI::App* cmd, RunOptions& o, bool with_mode) {
    cmd->add_option("--dataset", o.dataset, "synth:text, synth:tab, or a .jsonl / .csv path");
    cmd->add_option("--budget", o.budget, "labelling iterations");
    cmd->add_option("--eval-every", o.eval_every, "checkpoint cadence");
    cmd->add_option("--sampler", o.sampler, "passive | us | adp");
    cmd->add_option("--alpha", o.alpha, "ADP trade-off (default 0.5 text, 0.99 tabular)");
    cmd->add_option("--noise", o.noise, "simulated-user label noise rate");
    cmd->add_option("--acc-threshold", o.acc_threshold, "simulated-user LF accuracy threshold");
    cmd->add_option("--seeds", o.seeds, "number of seeds (0..N-1)");
    cmd->add_option("--n", o.n, "synthetic dataset size");
    cmd->add_option("--label-model", o.label_model, "class_conditional | one_coin");
    cmd->add_option("-o,--output", o.output, "CSV output path (default stdout)");
    if (with_mode) cmd->add_option("--mode", o.mode, "activedp | baseline | labelpick | confusion | al");
}

SessionConfig to_config(const RunOptions& o) {
    SessionConfig cfg;
    cfg.dataset = o.dataset;
    cfg.budget = o.budget;
    cfg.eval_every = o.eval_every;
    cfg.sampler = parse_sampler(o.sampler);
    cfg.alpha = o.alpha;
    cfg.noise_rate = o.noise;
    cfg.acc_threshold = o.acc_threshold;
    cfg.mode = parse_mode(o.mode);
    cfg.em.model = parse_label_model(o.label_model);
    if (o.seeds < 1) throw ConfigError("--seeds must be >= 1");
    cfg.seeds.clear();
    for (int s = 0; s < o.seeds; ++s) cfg.seeds.push_back(static_cast<std::uint64_t>(s));
    if (o.n) {
        cfg.synth_text.n = *o.n;
        cfg.synth_tab.n = *o.n;
    }
    cfg.validate();
    return cfg;
}

template <class Fn>
void with_output(const std::string& path, Fn&& fn) {
    if (path.empty()) return fn(std::cout);
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    fn(out);
}

Eigen::MatrixXd read_matrix_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
            } catch (const std::exception&) {
                throw ParseError("not a number: '" + cell + "'", lineno);
            }
        }
        if (!rows.empty() && row.size() != rows.front().size()) throw ParseError("ragged row", lineno);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ConfigError("empty matrix in " + path);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return m;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ActiveDP: data programming with active learning"};
    app.require_subcommand(1);

    RunOptions run_opts;
    auto* run = app.add_subcommand("run", "simulated-user sessions; writes the performance curves as CSV");
    add_run_options(run, run_opts, true);

    RunOptions ablate_opts;
    ablate_opts.budget = 100;
    auto* ablate = app.add_subcommand("ablate", "Baseline / LabelPick / ConFusion / ActiveDP average accuracies");
    add_run_options(ablate, ablate_opts, false);

    std::string glasso_input, glasso_output;
    double glasso_lambda = 0.1;
    bool glasso_is_data = false;
    auto* glasso = app.add_subcommand("glasso", "sparse precision matrix of a covariance (or data) CSV");
    glasso->add_option("--input", glasso_input, "CSV matrix")->required();
    glasso->add_option("--lambda", glasso_lambda, "off-diagonal L1 penalty");
    glasso->add_flag("--data", glasso_is_data, "input rows are observations; standardise first");
    glasso->add_option("-o,--output", glasso_output, "CSV output path (default stdout)");

    int port = 8080;
    std::string host = "127.0.0.1";
    auto* serve = app.add_subcommand("serve", "HTTP session API");
    serve->add_option("--port", port);
    serve->add_option("--host", host);

    std::string synth_kind = "text", synth_output;
    std::size_t synth_n = 2000;
    std::uint64_t synth_seed = 0;
    auto* synth = app.add_subcommand("synth", "write a synthetic dataset (.jsonl for text, .csv for tab)");
    synth->add_option("--kind", synth_kind, "text | tab");
    synth->add_option("--n", synth_n);
    synth->add_option("--seed", synth_seed);
    synth->add_option("-o,--output", synth_output)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigExit;
    }

    try {
        if (*run) {
            const auto cfg = to_config(run_opts);
            const auto curves = run_seeds(cfg);
            with_output(run_opts.output, [&](std::ostream& out) { write_curves_csv(out, curves); });
        } else if (*ablate) {
            const auto cfg = to_config(ablate_opts);
            const auto rows = run_ablation(cfg);
            with_output(ablate_opts.output, [&](std::ostream& out) { write_ablation_csv(out, rows, cfg.seeds); });
        } else if (*glasso) {
            auto m = read_matrix_csv(glasso_input);
            Eigen::MatrixXd s = glasso_is_data ? empirical_cov(m).s : m;
            const auto fit = graphical_lasso(s, glasso_lambda);
            if (!fit.converged) std::cerr << "warning: glasso did not converge\n";
            with_output(glasso_output, [&](std::ostream& out) {
                char buf[32];
                for (Eigen::Index i = 0; i < fit.theta.rows(); ++i) {
                    for (Eigen::Index j = 0; j < fit.theta.cols(); ++j) {
                        std::snprintf(buf, sizeof buf, "%.10g", fit.theta(i, j));
                        out << (j ? "," : "") << buf;
                    }
                    out << '\n';
                }
            });
        } else if (*serve) {
            Service service;
            httplib::Server server;
            make_routes(server, service);
            std::cerr << "listening on " << host << ':' << port << '\n';
            if (!server.listen(host, port)) throw ConfigError("cannot listen on " + host + ":" + std::to_string(port));
        } else if (*synth) {
            if (synth_kind == "text") {
                SyntheticTextConfig c;
                c.n = synth_n;
                c.seed = synth_seed;
                save_text_jsonl(make_synthetic_text(c), synth_output);
            } else if (synth_kind == "tab") {
                SyntheticTabularConfig c;
                c.n = synth_n;
                c.seed = synth_seed;
                save_tabular_csv(make_synthetic_tabular(c), synth_output);
            } else {
                throw ConfigError("--kind must be text or tab");
            }
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigExit;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return kConfigExit;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
