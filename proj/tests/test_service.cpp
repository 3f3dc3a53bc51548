#include <doctest.h>

#include <sstream>
#include <thread>

#include "activedp/harness.hpp"
#include "activedp/oracle.hpp"
#include "activedp/service.hpp"

#include <httplib.h>

using namespace activedp;
using nlohmann::json;

namespace {

json small_config(int budget = 10) { return {{"budget", budget}, {"eval_every", 5}, {"n", 300}}; }

std::string check_query_text() {
    return "{\"id\": 10, \"text\": \"check out my channel\", \"label\": 1}\n"
           "{\"id\": 11, \"text\": \"great song love it\", \"label\": 0}\n"
           "{\"id\": 12, \"text\": \"check my page please\", \"label\": 1}\n"
           "{\"id\": 13, \"text\": \"nice video\", \"label\": 0}\n"
           "{\"id\": 14, \"text\": \"love this song\", \"label\": 0}\n"
           "{\"id\": 15, \"text\": \"subscribe to my channel\", \"label\": 1}\n"
           "{\"id\": 16, \"text\": \"beautiful voice\", \"label\": 0}\n"
           "{\"id\": 17, \"text\": \"visit my page\", \"label\": 1}\n"
           "{\"id\": 18, \"text\": \"best song ever\", \"label\": 0}\n"
           "{\"id\": 19, \"text\": \"free gift card check\", \"label\": 1}\n";
}

struct Server {
    Service service;
    httplib::Server http;
    std::thread thread;
    int port = 0;

    Server() {
        make_routes(http, service);
        port = http.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { http.listen_after_bind(); });
        http.wait_until_ready();
    }
    ~Server() {
        http.stop();
        thread.join();
    }
};

}  // namespace

TEST_CASE("create, query and metrics") {
    Service svc;
    const auto created = svc.create_session({{"dataset", "synth:text"}, {"seed", 0}, {"config", small_config()}});
    REQUIRE(created.status == 201);
    const auto id = created.body["session_id"].get<std::string>();
    const auto& q = created.body["query"];
    CHECK(q["instance"]["text"].is_string());
    CHECK(q["nonce"].is_string());

    const auto again = svc.get_query(id);
    CHECK(again.status == 200);
    CHECK(again.body["query"] == q);  // one outstanding query

    const auto m1 = svc.get_metrics(id);
    const auto m2 = svc.get_metrics(id);
    CHECK(m1.status == 200);
    CHECK(m1.body == m2.body);
    CHECK(m1.body["curve"].empty());
    CHECK(m1.body["tau"] == 1.0);
    CHECK(m1.body["status"] == "awaiting_lf");

    CHECK(svc.get_metrics("s999").status == 404);
    CHECK(svc.create_session({{"dataset", "d42"}}).status == 404);
    const auto bad = svc.create_session({{"config", {{"alpha", 2.0}}}});
    CHECK(bad.status == 400);
    CHECK(bad.body["code"] == "invalid_config");
}

TEST_CASE("submitting label functions") {
    Service svc;
    const auto up = svc.upload_dataset(check_query_text(), "jsonl");
    REQUIRE(up.status == 201);
    CHECK(up.body["size"] == 10);
    const auto created = svc.create_session(
        {{"dataset", up.body["dataset_id"]}, {"seed", 0}, {"config", {{"budget", 2}, {"eval_every", 1}}}});
    REQUIRE(created.status == 201);
    const auto id = created.body["session_id"].get<std::string>();
    auto q = created.body["query"];
    const auto tokens = q["instance"]["tokens"].get<std::vector<std::string>>();
    const auto nonce = q["nonce"].get<std::string>();

    // an LF that abstains on its own query is refused
    const auto miss = svc.submit_lf(id, {{"nonce", nonce}, {"lf", {{"kind", "keyword"}, {"word", "zzz"}, {"target", 1}}}});
    CHECK(miss.status == 422);
    CHECK(miss.body["message"] == "LF must label its query");
    CHECK(svc.submit_lf(id, {{"lf", {}}}).status == 400);  // no nonce
    CHECK(svc.submit_lf(id, {{"nonce", "q999"}, {"skip", true}}).status == 409);
    CHECK(svc.submit_lf(id, {{"nonce", nonce}, {"lf", {{"kind", "regex"}, {"target", 1}}}}).status == 400);

    const json body{{"nonce", nonce}, {"lf", {{"kind", "keyword"}, {"word", tokens.front()}, {"target", 1}}}};
    const auto ok = svc.submit_lf(id, body);
    REQUIRE(ok.status == 200);
    CHECK(ok.body["metrics"]["iteration"] == 1);
    CHECK(ok.body["metrics"]["lfs"].size() == 1);
    CHECK(ok.body["metrics"]["curve"].size() == 1);
    CHECK(ok.body["query"]["nonce"] != nonce);

    // a retry of the same submission is a no-op with the same answer
    const auto retry = svc.submit_lf(id, body);
    CHECK(retry.status == 200);
    CHECK(retry.body == ok.body);
    CHECK(svc.get_metrics(id).body["iteration"] == 1);
    auto changed = body;
    changed["lf"]["target"] = 0;
    CHECK(svc.submit_lf(id, changed).status == 409);

    // skip spends the last query and finishes the session
    const auto last = svc.submit_lf(id, {{"nonce", ok.body["query"]["nonce"]}, {"skip", true}});
    REQUIRE(last.status == 200);
    CHECK(last.body["status"] == "finished");
    CHECK(last.body["query"].is_null());
    CHECK(last.body["metrics"]["lfs"].size() == 1);
    CHECK(svc.submit_lf(id, {{"nonce", "q3"}, {"skip", true}}).status == 409);
}

TEST_CASE("the worked keyword example") {
    // a single-document train split: the query is "check out my channel"
    Service svc;
    const auto up = svc.upload_dataset(check_query_text(), "jsonl");
    bool found = false;
    for (std::uint64_t seed = 0; seed < 50 && !found; ++seed) {
        const auto c = svc.create_session({{"dataset", up.body["dataset_id"]}, {"seed", seed},
                                           {"config", {{"budget", 1}, {"eval_every", 1}, {"sampler", "passive"}}}});
        REQUIRE(c.status == 201);
        if (c.body["query"]["instance"]["id"] != 10) continue;
        found = true;
        const auto r = svc.submit_lf(c.body["session_id"], {{"nonce", c.body["query"]["nonce"]},
                                                           {"lf", {{"kind", "keyword"}, {"word", "check"}, {"target", 1}}}});
        REQUIRE(r.status == 200);
        CHECK(r.body["metrics"]["lfs"][0]["description"] == "check -> 1");
    }
    CHECK(found);
}

TEST_CASE("sessions are independent") {
    Service svc;
    const json req{{"dataset", "synth:text"}, {"seed", 3}, {"config", small_config()}};
    const auto a = svc.create_session(req);
    const auto b = svc.create_session(req);
    REQUIRE(a.status == 201);
    REQUIRE(b.status == 201);
    CHECK(a.body["session_id"] != b.body["session_id"]);
    CHECK(a.body["query"] == b.body["query"]);
    svc.submit_lf(a.body["session_id"], {{"nonce", a.body["query"]["nonce"]}, {"skip", true}});
    CHECK(svc.get_metrics(a.body["session_id"]).body["iteration"] == 1);
    CHECK(svc.get_metrics(b.body["session_id"]).body["iteration"] == 0);
}

TEST_CASE("export") {
    Service svc;
    const auto c = svc.create_session({{"dataset", "synth:text"}, {"seed", 0}, {"config", small_config(5)}});
    const auto id = c.body["session_id"].get<std::string>();
    std::string jsonl;
    CHECK(svc.export_labels(id, jsonl).status == 412);

    // replay the simulated user so the export has something to say
    SessionConfig cfg = config_from_json(small_config(5));
    const auto prep = prepare_data(load_dataset(cfg), 0, cfg);
    SimulatedUser user(prep->data, {}, derive_seed(0, static_cast<std::uint64_t>(SeedStream::oracle)));
    json q = c.body["query"];
    json last;
    while (!q.is_null()) {
        const auto qid = q["instance"]["id"].get<std::int64_t>();
        std::size_t pos = 0;
        while ((*prep->data)[pos].id != qid) ++pos;
        const auto lf = user.respond(pos);
        json body{{"nonce", q["nonce"]}};
        if (lf) body["lf"] = lf_to_json(*lf);
        else body["skip"] = true;
        last = svc.submit_lf(id, body).body;
        q = last["query"];
    }
    REQUIRE(svc.export_labels(id, jsonl).status == 200);
    std::istringstream in(jsonl);
    std::string line;
    std::size_t rows = 0, covered = 0, correct = 0;
    while (std::getline(in, line)) {
        const auto row = json::parse(line);
        const auto pos = prep->train[rows++];
        CHECK(row["id"] == (*prep->data)[pos].id);
        if (row["source"] == "REJECTED") {
            CHECK(row["soft_label"].is_null());
            continue;
        }
        const auto p = row["soft_label"].get<std::vector<double>>();
        ++covered;
        correct += (p[1] > p[0] ? 1 : 0) == *(*prep->data)[pos].true_label;
    }
    CHECK(rows == prep->train.size());
    const auto& cp = last["metrics"]["curve"].back();
    REQUIRE(covered > 0);
    CHECK(static_cast<double>(correct) / static_cast<double>(covered) == doctest::Approx(cp["label_acc"].get<double>()));
    CHECK(static_cast<double>(covered) / static_cast<double>(rows) == doctest::Approx(cp["coverage"].get<double>()));
}

TEST_CASE("http round trip") {
    Server server;
    httplib::Client cli("127.0.0.1", server.port);

    httplib::MultipartFormDataItems items{{"file", check_query_text(), "tiny.jsonl", "application/jsonl"}};
    auto up = cli.Post("/datasets", items);
    REQUIRE(up);
    CHECK(up->status == 201);
    const auto dataset_id = json::parse(up->body)["dataset_id"].get<std::string>();

    auto bad_csv = cli.Post("/datasets?format=csv", "a,b,label\n1,x,0\n", "text/csv");
    REQUIRE(bad_csv);
    CHECK(bad_csv->status == 400);
    CHECK(json::parse(bad_csv->body)["code"] == "parse_error");

    const json req{{"dataset", dataset_id}, {"seed", 1}, {"config", {{"budget", 2}, {"eval_every", 1}}}};
    auto created = cli.Post("/sessions", req.dump(), "application/json");
    REQUIRE(created);
    REQUIRE(created->status == 201);
    const auto body = json::parse(created->body);
    const auto id = body["session_id"].get<std::string>();

    auto q = cli.Get("/sessions/" + id + "/query");
    REQUIRE(q);
    CHECK(q->status == 200);
    CHECK(json::parse(q->body)["query"] == body["query"]);

    auto exp = cli.Get("/sessions/" + id + "/export");
    REQUIRE(exp);
    CHECK(exp->status == 412);

    const json skip{{"nonce", body["query"]["nonce"]}, {"skip", true}};
    auto sub = cli.Post("/sessions/" + id + "/lf", skip.dump(), "application/json");
    REQUIRE(sub);
    CHECK(sub->status == 200);

    exp = cli.Get("/sessions/" + id + "/export");
    REQUIRE(exp);
    CHECK(exp->status == 200);
    CHECK(exp->get_header_value("Content-Type") == "application/x-ndjson");

    auto broken = cli.Post("/sessions/" + id + "/lf", "{not json", "application/json");
    REQUIRE(broken);
    CHECK(broken->status == 400);

    auto missing = cli.Get("/sessions/nope/metrics");
    REQUIRE(missing);
    CHECK(missing->status == 404);
    CHECK(json::parse(missing->body)["code"] == "not_found");
}
