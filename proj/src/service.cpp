#include "activedp/service.hpp"

#include <cmath>
#include <sstream>

#include <httplib.h>

#include "activedp/error.hpp"

namespace activedp {

using nlohmann::json;

namespace {

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json checkpoint_json(const Checkpoint& c) {
    return {{"iteration", c.iteration},
            {"test_acc", number_or_null(c.test_acc)},
            {"label_acc", number_or_null(c.label_acc)},
            {"coverage", c.coverage},
            {"n_lfs_selected", c.n_lfs_selected},
            {"tau", c.tau},
            {"degenerate", c.degenerate}};
}

json instance_json(const Dataset& d, std::size_t pos) {
    const auto& x = d[pos];
    json j{{"id", x.id}};
    if (x.is_text()) {
        j["text"] = x.text().text;
        j["tokens"] = x.text().tokens;
    } else {
        j["features"] = x.features();
        j["feature_names"] = d.feature_names();
    }
    return j;
}

template <class T>
void read_opt(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

LabelFunction lf_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("label function must be an object");
    const auto kind = j.at("kind").get<std::string>();
    const int target = j.at("target").get<int>();
    if (kind == "keyword") return LabelFunction::keyword(j.at("word").get<std::string>(), target);
    if (kind == "stump") {
        const auto op = j.at("op").get<std::string>();
        if (op != "le" && op != "ge") throw ConfigError("stump op must be 'le' or 'ge'");
        const auto feature = j.at("feature").get<std::int64_t>();
        if (feature < 0) throw ConfigError("stump feature must be >= 0");
        return LabelFunction::stump(static_cast<std::size_t>(feature), j.at("value").get<double>(),
                                    op == "le" ? StumpOp::le : StumpOp::ge, target);
    }
    throw ConfigError("unknown label function kind '" + kind + "'");
}

json lf_to_json(const LabelFunction& lf) {
    json j{{"id", lf.id}, {"target", lf.target}, {"description", lf.describe()}};
    if (const auto* k = std::get_if<KeywordRule>(&lf.rule)) {
        j["kind"] = "keyword";
        j["word"] = k->word;
    } else {
        const auto& s = std::get<StumpRule>(lf.rule);
        j["kind"] = "stump";
        j["feature"] = s.feature;
        j["value"] = s.value;
        j["op"] = s.op == StumpOp::le ? "le" : "ge";
    }
    return j;
}

SessionConfig config_from_json(const json& j) {
    SessionConfig cfg;
    if (j.is_null()) return cfg;
    if (!j.is_object()) throw ConfigError("config must be an object");
    read_opt(j, "budget", cfg.budget);
    read_opt(j, "eval_every", cfg.eval_every);
    if (j.contains("sampler")) cfg.sampler = parse_sampler(j.at("sampler").get<std::string>());
    if (j.contains("alpha") && !j.at("alpha").is_null()) cfg.alpha = j.at("alpha").get<double>();
    read_opt(j, "acc_threshold", cfg.acc_threshold);
    read_opt(j, "noise_rate", cfg.noise_rate);
    if (j.contains("mode")) cfg.mode = parse_mode(j.at("mode").get<std::string>());
    read_opt(j, "vocab_cap", cfg.vocab_cap);
    read_opt(j, "lambda", cfg.labelpick.lambda);
    if (j.contains("label_model")) cfg.em.model = parse_label_model(j.at("label_model").get<std::string>());
    if (j.contains("n")) {
        const auto n = j.at("n").get<std::size_t>();
        cfg.synth_text.n = n;
        cfg.synth_tab.n = n;
    }
    if (j.contains("synth_seed")) {
        const auto s = j.at("synth_seed").get<std::uint64_t>();
        cfg.synth_text.seed = s;
        cfg.synth_tab.seed = s;
    }
    cfg.validate();
    return cfg;
}

Reply error_reply(const std::exception& e) {
    auto make = [&](int status, const char* code) { return Reply{status, {{"code", code}, {"message", e.what()}}}; };
    if (dynamic_cast<const ParseError*>(&e)) return make(400, "parse_error");
    if (dynamic_cast<const ConfigError*>(&e)) return make(400, "invalid_config");
    if (dynamic_cast<const json::exception*>(&e)) return make(400, "bad_request");
    if (dynamic_cast<const NotFoundError*>(&e)) return make(404, "not_found");
    if (dynamic_cast<const ConflictError*>(&e)) return make(409, "conflict");
    if (dynamic_cast<const PreconditionError*>(&e)) return make(412, "precondition_failed");
    if (dynamic_cast<const UsageError*>(&e)) return make(422, "invalid_lf");
    return make(500, "internal");
}

std::shared_ptr<Service::Entry> Service::find(const std::string& id) {
    std::shared_lock lock(mu_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) throw NotFoundError("unknown session '" + id + "'");
    return it->second;
}

json Service::query_json(Entry& e) {
    auto& s = *e.session;
    if (s.finished()) return nullptr;
    const bool fresh = !s.outstanding_query();
    const auto pos = s.next_query();
    if (fresh || e.nonce.empty()) e.nonce = "q" + std::to_string(++e.query_serial);
    return {{"nonce", e.nonce}, {"iteration", s.iteration()}, {"instance", instance_json(*s.prepared().data, pos)}};
}

json Service::metrics_json(const Session& s) {
    const auto& prep = s.prepared();
    json j;
    j["iteration"] = s.iteration();
    j["budget"] = s.config().budget;
    j["status"] = s.finished() ? "finished" : "awaiting_lf";
    j["tau"] = s.tau();
    j["curve"] = json::array();
    for (const auto& c : s.curve()) j["curve"].push_back(checkpoint_json(c));
    j["labelpick"] = json::parse(to_json(s.labelpick_report()));

    std::vector<int> selected_ids;
    for (const auto& lf : s.selected()) selected_ids.push_back(lf.id);
    j["lfs"] = json::array();
    const auto& acc = s.labelpick_report().accuracy;
    for (const auto& lf : s.lfs()) {
        auto l = lf_to_json(lf);
        l["selected"] = std::find(selected_ids.begin(), selected_ids.end(), lf.id) != selected_ids.end();
        l["valid_accuracy"] = nullptr;
        for (const auto& a : acc)
            if (a.lf_id == lf.id && a.accuracy) l["valid_accuracy"] = *a.accuracy;
        j["lfs"].push_back(std::move(l));
    }

    const auto labels = s.inference(prep.valid);
    std::size_t covered = 0, correct = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i].rejected()) continue;
        ++covered;
        if (labels[i].label->argmax() == prep.valid_labels[i]) ++correct;
    }
    j["validation"] = {
        {"coverage", static_cast<double>(covered) / static_cast<double>(labels.size())},
        {"accuracy", covered ? json(static_cast<double>(correct) / static_cast<double>(covered)) : json(nullptr)}};
    return j;
}

Reply Service::upload_dataset(const std::string& content, const std::string& format) {
    try {
        Dataset d = [&] {
            if (format == "jsonl" || format == "json") return parse_text_jsonl(content);
            if (format == "csv") return parse_tabular_csv(content);
            throw ConfigError("dataset format must be 'jsonl' or 'csv'");
        }();
        const auto n = d.size();
        const auto kind = d.kind();
        std::unique_lock lock(mu_);
        const auto id = "d" + std::to_string(next_dataset_++);
        datasets_[id] = std::make_shared<const Dataset>(std::move(d));
        return {201, {{"dataset_id", id}, {"size", n}, {"kind", to_string(kind)}}};
    } catch (const std::exception& e) {
        return error_reply(e);
    }
}

Reply Service::create_session(const json& body) {
    try {
        if (!body.is_object()) throw ConfigError("request body must be a JSON object");
        auto cfg = config_from_json(body.value("config", json::object()));
        const auto ref = body.value("dataset", std::string("synth:text"));
        const auto seed = body.value("seed", std::uint64_t{0});

        std::shared_ptr<const Dataset> data;
        if (ref == "synth:text" || ref == "synth:tab") {
            cfg.dataset = ref;
            data = std::make_shared<const Dataset>(load_dataset(cfg));
        } else {
            std::shared_lock lock(mu_);
            const auto it = datasets_.find(ref);
            if (it == datasets_.end()) throw NotFoundError("unknown dataset '" + ref + "'");
            data = it->second;
            cfg.dataset = ref;
        }

        auto entry = std::make_shared<Entry>();
        entry->session = std::make_unique<Session>(prepare_data(*data, seed, cfg), cfg, seed);
        json out;
        {
            std::lock_guard lock(entry->mu);
            out["query"] = query_json(*entry);
        }
        std::unique_lock lock(mu_);
        const auto id = "s" + std::to_string(next_session_++);
        sessions_[id] = entry;
        out["session_id"] = id;
        return {201, out};
    } catch (const std::exception& e) {
        return error_reply(e);
    }
}

Reply Service::get_query(const std::string& session_id) {
    try {
        auto e = find(session_id);
        std::lock_guard lock(e->mu);
        const auto& s = *e->session;
        return {200, {{"status", s.finished() ? "finished" : "awaiting_lf"}, {"query", query_json(*e)}}};
    } catch (const std::exception& e) {
        return error_reply(e);
    }
}

Reply Service::submit_lf(const std::string& session_id, const json& body) {
    try {
        auto e = find(session_id);
        std::lock_guard lock(e->mu);
        auto& s = *e->session;
        if (!body.is_object() || !body.contains("nonce")) throw ConfigError("submission needs a nonce");
        const auto nonce = body.at("nonce").get<std::string>();
        if (!e->last_nonce.empty() && nonce == e->last_nonce) {
            if (body == e->last_request) return {200, e->last_response};
            throw ConflictError("nonce '" + nonce + "' was already used for a different submission");
        }
        if (s.finished()) throw ConflictError("session is finished");
        if (nonce != e->nonce) throw ConflictError("stale query nonce '" + nonce + "'");

        std::optional<LabelFunction> lf;
        const bool skip = body.value("skip", false);
        if (!skip) {
            if (!body.contains("lf")) throw ConfigError("submission needs 'lf' or 'skip': true");
            lf = lf_from_json(body.at("lf"));
        }
        s.submit(std::move(lf));

        json out;
        out["metrics"] = metrics_json(s);
        out["query"] = query_json(*e);
        out["status"] = s.finished() ? "finished" : "awaiting_lf";
        e->last_nonce = nonce;
        e->last_request = body;
        e->last_response = out;
        return {200, out};
    } catch (const std::exception& e) {
        return error_reply(e);
    }
}

Reply Service::get_metrics(const std::string& session_id) {
    try {
        auto e = find(session_id);
        std::lock_guard lock(e->mu);
        return {200, metrics_json(*e->session)};
    } catch (const std::exception& e) {
        return error_reply(e);
    }
}

Reply Service::export_labels(const std::string& session_id, std::string& jsonl) {
    try {
        auto e = find(session_id);
        std::lock_guard lock(e->mu);
        const auto& s = *e->session;
        if (s.curve().empty()) throw PreconditionError("no checkpoint yet; nothing to export");
        const auto& prep = s.prepared();
        const auto labels = s.train_labels();
        std::ostringstream out;
        for (std::size_t k = 0; k < labels.size(); ++k) {
            json row{{"id", (*prep.data)[prep.train[k]].id}, {"source", to_string(labels[k].source)}};
            row["soft_label"] = labels[k].label ? json(labels[k].label->probs) : json(nullptr);
            out << row.dump() << '\n';
        }
        jsonl = out.str();
        return {200, {{"rows", labels.size()}}};
    } catch (const std::exception& e) {
        return error_reply(e);
    }
}

namespace {

void send(httplib::Response& res, const Reply& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
}

json parse_body(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    return json::parse(req.body);
}

}  // namespace

void make_routes(httplib::Server& server, Service& service) {
    server.Post("/datasets", [&](const httplib::Request& req, httplib::Response& res) {
        std::string content, format;
        if (req.is_multipart_form_data()) {
            if (!req.has_file("file")) return send(res, {400, {{"code", "bad_request"}, {"message", "missing 'file' part"}}});
            const auto file = req.get_file_value("file");
            content = file.content;
            if (req.has_file("format")) format = req.get_file_value("format").content;
            else if (file.filename.ends_with(".csv")) format = "csv";
            else format = "jsonl";
        } else {
            content = req.body;
            format = req.has_param("format") ? req.get_param_value("format") : "jsonl";
        }
        send(res, service.upload_dataset(content, format));
    });
    server.Post("/sessions", [&](const httplib::Request& req, httplib::Response& res) {
        try {
            send(res, service.create_session(parse_body(req)));
        } catch (const std::exception& e) {
            send(res, error_reply(e));
        }
    });
    server.Get(R"(/sessions/([A-Za-z0-9_-]+)/query)", [&](const httplib::Request& req, httplib::Response& res) {
        send(res, service.get_query(req.matches[1]));
    });
    server.Post(R"(/sessions/([A-Za-z0-9_-]+)/lf)", [&](const httplib::Request& req, httplib::Response& res) {
        try {
            send(res, service.submit_lf(req.matches[1], parse_body(req)));
        } catch (const std::exception& e) {
            send(res, error_reply(e));
        }
    });
    server.Get(R"(/sessions/([A-Za-z0-9_-]+)/metrics)", [&](const httplib::Request& req, httplib::Response& res) {
        send(res, service.get_metrics(req.matches[1]));
    });
    server.Get(R"(/sessions/([A-Za-z0-9_-]+)/export)", [&](const httplib::Request& req, httplib::Response& res) {
        std::string jsonl;
        const auto r = service.export_labels(req.matches[1], jsonl);
        if (r.status != 200) return send(res, r);
        res.set_content(jsonl, "application/x-ndjson");
    });
}

}  // namespace activedp
