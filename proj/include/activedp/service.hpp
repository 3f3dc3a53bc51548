#pragma once

// JSON-over-HTTP shell around harness::Session for interactive labelling.
// Service holds the state and answers (status, body) pairs; make_routes wires
// it into an httplib server.

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>

#include <json.hpp>

#include "activedp/harness.hpp"

namespace httplib {
class Server;
}

namespace activedp {

struct Reply {
    int status = 200;
    nlohmann::json body;
};

/// Parses a label function:
///   {"kind": "keyword", "word": "check", "target": 1}
///   {"kind": "stump", "feature": 0, "value": 1.5, "op": "le", "target": 0}
LabelFunction lf_from_json(const nlohmann::json& j);
nlohmann::json lf_to_json(const LabelFunction& lf);

/// Session config from a JSON object; absent keys keep their defaults.
SessionConfig config_from_json(const nlohmann::json& j);

class Service {
public:
    /// Upload; format is "jsonl" or "csv".
    Reply upload_dataset(const std::string& content, const std::string& format);
    /// Body: {"dataset": "synth:text" | "synth:tab" | uploaded id, "seed": n, "config": {...}}.
    Reply create_session(const nlohmann::json& body);
    Reply get_query(const std::string& session_id);
    /// Body: {"nonce": "...", "lf": {...}} or {"nonce": "...", "skip": true}.
    Reply submit_lf(const std::string& session_id, const nlohmann::json& body);
    Reply get_metrics(const std::string& session_id);
    /// One JSON object per line: {"id", "soft_label", "source"}.
    Reply export_labels(const std::string& session_id, std::string& jsonl);

private:
    struct Entry {
        std::mutex mu;
        std::unique_ptr<Session> session;
        std::uint64_t query_serial = 0;
        std::string nonce;
        // Last accepted submission, for idempotent retries.
        std::string last_nonce;
        nlohmann::json last_request;
        nlohmann::json last_response;
    };

    std::shared_ptr<Entry> find(const std::string& id);
    static nlohmann::json query_json(Entry& e);
    static nlohmann::json metrics_json(const Session& s);

    std::shared_mutex mu_;
    std::map<std::string, std::shared_ptr<const Dataset>> datasets_;
    std::map<std::string, std::shared_ptr<Entry>> sessions_;
    std::uint64_t next_dataset_ = 1;
    std::uint64_t next_session_ = 1;
};

/// Errors map to {code, message}: ConfigError/ParseError 400, NotFoundError 404,
/// ConflictError 409, PreconditionError 412, UsageError 422.
Reply error_reply(const std::exception& e);

void make_routes(httplib::Server& server, Service& service);

}  // namespace activedp
