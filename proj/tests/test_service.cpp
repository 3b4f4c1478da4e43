#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "lagraph/engine.hpp"
#include "lagraph/server.hpp"
#include "lagraph/util.hpp"
#include "support/generators.hpp"

using namespace lagraph;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::string kAlert =
    R"({"id":"prelude-0001","target_address":"10.0.0.5","target_port":3389,"protocol":"tcp","cve_refs":["CVE-2019-0708"]})";

DeploymentConfig fixture_config() { return DeploymentConfig::load(gen::fixture_dir() / "config.json"); }

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("lagraph_" + name)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

/// Copy of the fixture with one file replaced.
DeploymentConfig modified_fixture(const TempDir& dir, const std::string& file, const std::string& content) {
    for (const auto& e : fs::directory_iterator(gen::fixture_dir())) fs::copy(e.path(), dir.path / e.path().filename());
    write_file(dir.path / file, content);
    return DeploymentConfig::load(dir.path / "config.json");
}

struct Served {
    Engine engine;
    HttpService service;
    httplib::Client client;

    explicit Served(Engine::Inputs in, std::shared_ptr<AuditLog> audit = nullptr)
        : engine(std::move(in), std::move(audit)), service(engine), client("127.0.0.1", service.start("127.0.0.1", 0)) {
        client.set_read_timeout(5, 0);
    }
    ~Served() {
        engine.shutdown();
        service.stop();
    }

    json get(const std::string& path, int expect = 200) {
        auto res = client.Get(path);
        REQUIRE(res);
        CHECK(res->status == expect);
        return json::parse(res->body);
    }
    json post(const std::string& path, const std::string& body, int expect = 200) {
        auto res = client.Post(path, body, "application/json");
        REQUIRE(res);
        CHECK(res->status == expect);
        return json::parse(res->body);
    }
};

} // namespace

TEST_CASE("deployment config") {
    DeploymentConfig c = fixture_config();
    CHECK(c.rules == gen::fixture_dir() / "rules.pl");
    CHECK(c.listen_host == "127.0.0.1");
    CHECK(c.listen_port == 8080);
    CHECK(c.min_confidence == Confidence::CveConfirmed);
    CHECK_THROWS_AS(DeploymentConfig::from_json(json{{"rules", "r"}}, "."), SchemaError);
    json bad = json::parse(read_file(gen::fixture_dir() / "config.json"));
    bad["listen"] = "nowhere";
    CHECK_THROWS_AS(DeploymentConfig::from_json(bad, "."), SchemaError);
    CHECK_THROWS_AS(DeploymentConfig::load("/nonexistent/config.json"), Error);
}

TEST_CASE("cmd_generate") {
    TempDir out("generate");
    std::ostringstream o, e;
    REQUIRE(cmd_generate(fixture_config(), out.path, o, e) == kExitOk);
    CHECK(o.str().find("goal reachable: yes") != std::string::npos);
    CHECK(o.str().find("nodes: 34") != std::string::npos);
    const json doc = json::parse(read_file(out.path / "graph.json"));
    CHECK(doc["version"] == 1);
    CHECK(doc["goal"] == 1);
    CHECK(fs::exists(out.path / "graph.dot"));

    // Identical inputs, identical digest.
    TempDir again("generate2");
    std::ostringstream o2;
    REQUIRE(cmd_generate(fixture_config(), again.path, o2, e) == kExitOk);
    CHECK(json::parse(read_file(again.path / "graph.json"))["digest"] == doc["digest"]);
    CHECK(read_file(again.path / "graph.json") == read_file(out.path / "graph.json"));
}

TEST_CASE("cmd_generate errors and exit codes") {
    TempDir dir("generate_err");
    std::ostringstream o, e;
    CHECK(cmd_generate(modified_fixture(dir, "facts.pl", ""), dir.path / "out", o, e) == kExitGoalUnderivable);
    CHECK(e.str().find("error:") != std::string::npos);

    TempDir dir2("generate_err2");
    CHECK(cmd_generate(modified_fixture(dir2, "rules.pl", "broken(:- ."), dir2.path / "out", o, e) == kExitInputError);

    DeploymentConfig c = fixture_config();
    c.goal = "attackerGoal('something else')";
    CHECK(cmd_generate(c, dir.path / "out", o, e) == kExitGoalUnderivable);
    c.goal = "not a goal(";
    CHECK(cmd_generate(c, dir.path / "out", o, e) == kExitInputError);

    std::ostringstream vo;
    CHECK(cmd_validate(fixture_config(), vo, e) == kExitOk);
    CHECK(vo.str().find("goal derivable: yes") != std::string::npos);
}

TEST_CASE("cmd_replay") {
    TempDir dir("replay");
    std::ostringstream o, e;

    SUBCASE("fixture alert") {
        REQUIRE(cmd_replay(fixture_config(), gen::fixture_dir() / "alerts.ndjson", dir.path / "out", o, e) == kExitOk);
        CHECK(o.str().find("+4 nodes") != std::string::npos);
        CHECK(o.str().find("classification: shorter") != std::string::npos);
        const json g = json::parse(read_file(dir.path / "out" / "graph.json"));
        CHECK(g["version"] == 2);
        CHECK(g["nodes"].size() == 38);
        CHECK(read_file(dir.path / "out" / "deltas.ndjson").find("\"applied\"") != std::string::npos);
    }
    SUBCASE("empty file") {
        write_file(dir.path / "empty.ndjson", "");
        REQUIRE(cmd_replay(fixture_config(), dir.path / "empty.ndjson", std::nullopt, o, e) == kExitOk);
        Engine fresh(Engine::load_inputs(fixture_config()));
        CHECK(o.str().find("digest: " + fresh.initial().digest) != std::string::npos);
        CHECK(o.str().find("classification: unchanged") != std::string::npos);
    }
    SUBCASE("the same alert twice: second pass adds nothing") {
        write_file(dir.path / "twice.ndjson", kAlert + "\n" + kAlert + "\n");
        REQUIRE(cmd_replay(fixture_config(), dir.path / "twice.ndjson", std::nullopt, o, e) == kExitOk);
        const std::string text = o.str();
        const auto first = text.find("+4 nodes");
        REQUIRE(first != std::string::npos);
        CHECK(text.find("+0 nodes, +0 arcs", first) != std::string::npos);
        CHECK(text.find("version: 2") != std::string::npos);
    }
    SUBCASE("bad lines are skipped and reflected in the exit code") {
        write_file(dir.path / "mixed.ndjson", "{oops\n" + kAlert + "\n{\"protocol\":\"tcp\"}\n");
        CHECK(cmd_replay(fixture_config(), dir.path / "mixed.ndjson", std::nullopt, o, e) == kExitInputError);
        CHECK(o.str().find("+4 nodes") != std::string::npos);
        CHECK(o.str().find("3 processed, 2 skipped") != std::string::npos);
        CHECK(e.str().find("skipped alert 1") != std::string::npos);
        CHECK(e.str().find("skipped alert 3") != std::string::npos);
    }
    SUBCASE("missing file") {
        CHECK(cmd_replay(fixture_config(), dir.path / "nope.ndjson", std::nullopt, o, e) == kExitInputError);
    }
}

TEST_CASE("read_replay_alerts keeps only the last session of an audit log") {
    const std::string log =
        R"({"seq":1,"time_ms":1,"event":"generation","payload":{}})" "\n"
        R"({"seq":2,"time_ms":1,"event":"alert","payload":{"id":"x","raw":"old"}})" "\n"
        R"({"seq":3,"time_ms":2,"event":"generation","payload":{}})" "\n"
        R"({"seq":4,"time_ms":2,"event":"alert","payload":{"id":"y","raw":"new"}})" "\n"
        R"({"seq":5,"time_ms":2,"event":"hypothesis","payload":{}})" "\n";
    CHECK(read_replay_alerts(log) == std::vector<std::string>{"new"});
    CHECK(read_replay_alerts("a\n\n  \nb\r\n") == std::vector<std::string>{"a", "b"});
}

TEST_CASE("engine versions, what-if isolation and waiting") {
    Engine engine(Engine::load_inputs(fixture_config()));
    const std::string v1 = engine.current()->digest;

    AlertOutcome hypothetical = engine.what_if(kAlert);
    CHECK(hypothetical.added_nodes() == 4);
    CHECK(hypothetical.change == PathChange::Shorter);
    CHECK(engine.current()->version == 1);
    CHECK(engine.current()->digest == v1);

    std::atomic<std::size_t> seen{0};
    std::thread waiter([&] { seen = engine.wait_for_versions(1, std::chrono::seconds(5)).size(); });
    AlertOutcome real = engine.submit(kAlert);
    waiter.join();
    CHECK(seen == 1);
    CHECK(real.added_nodes() == 4);
    CHECK(real.version == 2);
    CHECK(real.digest == hypothetical.digest);
    CHECK(engine.current()->digest == real.digest);
    CHECK(engine.current()->event == "prelude-0001#29");

    AlertOutcome repeat = engine.submit(kAlert);
    CHECK(repeat.added_nodes() == 0);
    CHECK(repeat.version == 2);

    auto h = engine.history();
    REQUIRE(h.size() == 2);
    CHECK(h[0]->version == 1);
    CHECK(h[1]->version == 2);
    CHECK(h[1]->delta.has_value());

    CHECK_THROWS_AS(engine.submit("{}"), SchemaError);
    CHECK(engine.current()->version == 2);

    engine.shutdown();
    CHECK(engine.wait_for_versions(2, std::chrono::seconds(5)).empty());
}

TEST_CASE("http: graph, what-if, alerts, history") {
    Served s(Engine::load_inputs(fixture_config()));

    // Version 1 equals the generate output.
    TempDir out("http_generate");
    std::ostringstream o, e;
    REQUIRE(cmd_generate(fixture_config(), out.path, o, e) == kExitOk);
    const json v1 = s.get("/graph");
    CHECK(v1 == json::parse(read_file(out.path / "graph.json")));
    CHECK(v1["version"] == 1);

    const json whatif = s.post("/whatif", kAlert);
    CHECK(whatif["hypothetical"] == true);
    CHECK(whatif["added_nodes"] == 4);
    CHECK(whatif["classification"] == "shorter");
    CHECK(whatif["committed_version"] == 1);
    CHECK(s.get("/graph")["digest"] == v1["digest"]);
    for (int i = 0; i < 3; ++i) s.post("/whatif", kAlert);
    CHECK(s.get("/graph") == v1);

    const json posted = s.post("/alerts", kAlert);
    CHECK(posted["added_nodes"] == 4);
    CHECK(posted["version"] == 2);
    CHECK(posted["classification"] == "shorter");
    CHECK(posted["deltas"] == whatif["deltas"]);
    REQUIRE(posted["hypotheses"].size() == 1);
    CHECK(posted["hypotheses"][0]["confidence"] == "cve_confirmed");

    const json v2 = s.get("/graph");
    CHECK(v2["version"] == 2);
    CHECK(v2["digest"] == posted["digest"]);
    CHECK(v2["nodes"].size() == 38);

    const json history = s.get("/graph/history");
    REQUIRE(history["versions"].size() == 2);
    CHECK(history["versions"][0]["version"] == 1);
    CHECK(history["versions"][0]["event"] == "generation");
    CHECK(history["versions"][1]["version"] == 2);
    CHECK(history["versions"][1]["delta"]["added_nodes"].size() == 4);
    CHECK(history["versions"][1]["digest"] == v2["digest"]);
}

TEST_CASE("http: errors") {
    Served s(Engine::load_inputs(fixture_config()));
    json bad = s.post("/alerts", "{not json", 400);
    CHECK(bad["error"]["code"] == "invalid_alert");
    CHECK_FALSE(bad["error"]["message"].get<std::string>().empty());
    CHECK(s.post("/alerts", R"({"protocol":"tcp"})", 400)["error"]["code"] == "invalid_alert");
    CHECK(s.post("/whatif", R"({"target_address":"10.0.0.5","protocol":"tcp","target_port":99999})", 400)["error"]
              ["code"] == "invalid_alert");
    CHECK(s.get("/nope", 404)["error"]["code"] == "not_found");
    CHECK(s.get("/events?since=abc", 400)["error"]["code"] == "invalid_cursor");
    CHECK(s.get("/graph")["version"] == 1);
}

TEST_CASE("http: internal failures leave the version unchanged") {
    // An impact rule aimed at a rule that exists but never fires passes config
    // validation yet cannot be applied.
    Engine::Inputs in = Engine::load_inputs(fixture_config());
    in.kb.add_rule(parse_rule("[unused rule] neverHappens(_x) :- noSuchFact(_x)."));
    in.policy.impact_rules = load_impact_rules(
        json::parse(R"j([{"trigger_kind":"Read(Direct)","target_rule_label":"unused rule"}])j"), in.kb.rules());
    Served s(std::move(in));
    const json before = s.get("/graph");
    json err = s.post("/alerts", kAlert, 500);
    CHECK(err["error"]["code"] == "internal_error");
    CHECK(s.get("/graph") == before);
    CHECK(s.get("/graph/history")["versions"].size() == 1);
}

TEST_CASE("http: event stream announces every version in order") {
    Served s(Engine::load_inputs(fixture_config()));

    std::string received;
    std::atomic<bool> done{false};
    std::thread reader([&] {
        httplib::Client c("127.0.0.1", s.service.port());
        c.set_read_timeout(10, 0);
        c.Get("/events?since=0", [&](const char* data, std::size_t len) {
            received.append(data, len);
            // Two announcements: versions 1 and 2.
            return received.find("id: 2\n") == std::string::npos;
        });
        done = true;
    });

    std::this_thread::sleep_for(std::chrono::milliseconds(100));
    s.post("/alerts", kAlert);
    reader.join();
    REQUIRE(done);
    const auto first = received.find("id: 1\n");
    const auto second = received.find("id: 2\n");
    REQUIRE(first != std::string::npos);
    REQUIRE(second != std::string::npos);
    CHECK(first < second);
    CHECK(received.find("event: version") != std::string::npos);

    // Resuming after version 1 only delivers version 2.
    std::string resumed;
    httplib::Client c("127.0.0.1", s.service.port());
    c.set_read_timeout(10, 0);
    httplib::Headers headers{{"Last-Event-ID", "1"}};
    c.Get("/events", headers, [&](const char* data, std::size_t len) {
        resumed.append(data, len);
        const auto at = resumed.find("id: 2\n");
        return at == std::string::npos || resumed.find("\n\n", at) == std::string::npos;
    });
    CHECK(resumed.find("id: 2\n") != std::string::npos);
    CHECK(resumed.find("id: 1\n") == std::string::npos);
    const auto data_pos = resumed.find("data: ");
    REQUIRE(data_pos != std::string::npos);
    const json announced = json::parse(resumed.substr(data_pos + 6, resumed.find('\n', data_pos) - data_pos - 6));
    CHECK(announced["version"] == 2);
    CHECK(announced["digest"] == s.get("/graph")["digest"]);
}

TEST_CASE("replaying a live session's audit log reproduces its digest") {
    TempDir dir("session");
    const fs::path log_path = dir.path / "audit.ndjson";
    std::string live_digest;
    {
        Served s(Engine::load_inputs(fixture_config()), std::make_shared<AuditLog>(log_path));
        s.post("/whatif", kAlert);
        s.post("/alerts", R"({"target_address":"10.0.0.5","target_port":3389,"protocol":"tcp"})");
        s.post("/alerts", "{broken", 400);
        s.post("/alerts", kAlert);
        s.post("/alerts", R"({"target_address":"10.0.0.10","target_port":445,"protocol":"tcp","cve_refs":["CVE-2017-0144"]})");
        live_digest = s.get("/graph")["digest"];
    }
    std::ostringstream o, e;
    REQUIRE(cmd_replay(fixture_config(), log_path, std::nullopt, o, e) == kExitOk);
    CHECK(o.str().find("digest: " + live_digest) != std::string::npos);
    CHECK(o.str().find("3 processed, 0 skipped") != std::string::npos);
}
