// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 licensekit contributors

#include "licensekit/error.hpp"
#include "licensekit/modelgate.hpp"

#include <doctest.h>
#include <httplib.h>
#include <json.hpp>

#include <cstdlib>
#include <deque>
#include <filesystem>
#include <thread>
#include <unistd.h>
#include <variant>

using namespace licensekit;
using namespace licensekit::modelgate;

namespace {

prompts::RenderedPrompt prompt(std::string user = "hello \xC3\xA9") { return {"sys", std::move(user), "s", "u", "L1"}; }

ModelEndpointConfig model(std::string base_url = "http://unused") {
    ModelEndpointConfig c;
    c.model_id = "m1";
    c.base_url = std::move(base_url);
    return c;
}

// Scripted transport: each call pops a reply or an error kind.
class FakeTransport : public HttpTransport {
public:
    enum class Fail { Transport, Timeout };
    std::deque<std::variant<HttpReply, Fail>> script;
    std::vector<std::string> urls;

    HttpReply post(const std::string& url, const std::string&, const Headers&, double) override {
        urls.push_back(url);
        REQUIRE_FALSE(script.empty());
        auto next = script.front();
        script.pop_front();
        if (auto* f = std::get_if<Fail>(&next)) {
            if (*f == Fail::Timeout) throw TimeoutError("timed out");
            throw TransportError("connection refused");
        }
        return std::get<HttpReply>(next);
    }
};

const HttpReply kOk{200, R"({"choices":[{"message":{"role":"assistant","content":"Can be used commercially."}}]})"};

std::filesystem::path temp_file(const char* tag) {
    return std::filesystem::temp_directory_path() / (std::string("lk_mg_") + tag + "_" + std::to_string(getpid()));
}

} // namespace

TEST_CASE("request fingerprint follows the documented byte layout") {
    // Vectors computed outside the library (see tools/gen_fixtures.py).
    CHECK(request_fingerprint(model(), prompt()) ==
          "cd9355e25939edfd37e51fe85269fa986dd961af043269612ae006dfdb3c6b33");
    auto tuned = model();
    tuned.params.temperature = 0.7;
    tuned.params.max_tokens = 64;
    CHECK(request_fingerprint(tuned, prompt()) == "e97a9b01352edf0f6f130919223822df9f3a88fffa4b9bc891bbf5991984993f");
    CHECK(embedding_fingerprint("e", "abc") == "2ede9bdd6509c7e6b005c4577990fd17988dda4a1a554f6385fe35dc60a2cd7a");
}

TEST_CASE("fingerprint ignores timeout and retry settings") {
    auto a = model();
    auto b = model();
    b.params.timeout_s = 5;
    b.params.max_retries = 9;
    b.base_url = "http://elsewhere";
    CHECK(request_fingerprint(a, prompt()) == request_fingerprint(b, prompt()));
    // length prefixes keep field boundaries unambiguous
    CHECK(request_fingerprint(a, {"ab", "c", "", "", ""}) != request_fingerprint(a, {"a", "bc", "", "", ""}));
}

TEST_CASE("registry parsing") {
    const auto reg = ModelRegistry::load(std::filesystem::path(LICENSEKIT_FIXTURE_DIR) / "models.json");
    CHECK(reg.models().size() == 4);
    CHECK(reg.model("licensegpt").parameter_count_b == 7.0);
    CHECK(reg.model("licensegpt").auth_env == "LICENSEKIT_LICENSEGPT_KEY");
    CHECK(reg.has_embedder("mini-embed"));
    CHECK_THROWS_AS(reg.model("nope"), ConfigError);
    CHECK_THROWS_AS(ModelRegistry::from_json_text(R"({"models":[{"model_id":"a","base_url":"x"},)"
                                                  R"({"model_id":"a","base_url":"y"}]})"),
                    ConfigError);
    CHECK_THROWS_AS(ModelRegistry::from_json_text("{"), ParseError);
    CHECK(conventional_auth_env("qwen-1.5") == "LICENSEKIT_QWEN_1_5_KEY");
}

TEST_CASE("replay store round trip and misses") {
    ReplayStore store;
    store.put({"fp1", "answer", 1.5, std::nullopt});
    store.put({"fp2", "", 0.0, std::vector<double>{0.5, -1}});
    store.put({"fp1", "newer", 2.0, std::nullopt});
    CHECK(store.size() == 2);
    const auto back = ReplayStore::parse(store.serialize());
    REQUIRE(back.find("fp1"));
    CHECK(back.find("fp1")->text == "newer");
    CHECK(back.find("fp2")->embedding->size() == 2);
    CHECK(back.find("fp3") == nullptr);

    ReplayBackend replay(back);
    EmbedderConfig e{"emb", "", std::nullopt};
    CHECK_THROWS_AS(replay.complete(model(), prompt()), ReplayMissError);
    CHECK_THROWS_AS(replay.embed(e, "text"), ReplayMissError);
    CHECK_THROWS_AS(ReplayStore::parse("{\"fp\":1}\n"), ParseError);
}

TEST_CASE("retries transport errors with doubling backoff") {
    auto t = std::make_shared<FakeTransport>();
    t->script = {FakeTransport::Fail::Transport, FakeTransport::Fail::Timeout, kOk};
    std::vector<double> sleeps;
    HttpBackend backend(t, [&](double s) { sleeps.push_back(s); });
    const auto r = backend.complete(model(), prompt());
    CHECK(r.text == "Can be used commercially.");
    CHECK(r.request_fingerprint == request_fingerprint(model(), prompt()));
    CHECK(sleeps == std::vector<double>{0.5, 1.0});
    CHECK(t->urls.front() == "http://unused/chat/completions");
}

TEST_CASE("exhausted retries surface the last error kind") {
    auto t = std::make_shared<FakeTransport>();
    t->script = {FakeTransport::Fail::Transport, FakeTransport::Fail::Transport, FakeTransport::Fail::Timeout};
    HttpBackend backend(t, [](double) {});
    CHECK_THROWS_AS(backend.complete(model(), prompt()), TimeoutError);

    t->script = {FakeTransport::Fail::Timeout, FakeTransport::Fail::Timeout, FakeTransport::Fail::Transport};
    try {
        backend.complete(model(), prompt());
        FAIL("expected an error");
    } catch (const TimeoutError&) {
        FAIL("last failure was not a timeout");
    } catch (const TransportError&) {
    }
}

TEST_CASE("HTTP error statuses are protocol errors without retry") {
    auto t = std::make_shared<FakeTransport>();
    t->script = {HttpReply{429, "slow down"}};
    HttpBackend backend(t, [](double) { FAIL("no retry expected"); });
    try {
        backend.complete(model(), prompt());
        FAIL("expected ProtocolError");
    } catch (const ProtocolError& e) {
        CHECK(e.status() == 429);
        CHECK(e.body_excerpt() == "slow down");
    }
    t->script = {HttpReply{200, "not json"}};
    CHECK_THROWS_AS(backend.complete(model(), prompt()), ProtocolError);
    t->script = {HttpReply{200, "{}"}};
    CHECK_THROWS_AS(backend.complete(model(), prompt()), ProtocolError);
}

TEST_CASE("missing credentials fail before any request") {
    auto t = std::make_shared<FakeTransport>();
    HttpBackend backend(t, [](double) {});
    auto c = model();
    c.auth_env = "LICENSEKIT_TEST_SURELY_UNSET_KEY";
    unsetenv("LICENSEKIT_TEST_SURELY_UNSET_KEY");
    CHECK_THROWS_AS(backend.complete(c, prompt()), ConfigError);
    CHECK(t->urls.empty());
}

TEST_CASE("wire shape against a local server") {
    httplib::Server server;
    nlohmann::json seen_completion, seen_embedding;
    std::string seen_auth;
    server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        seen_completion = nlohmann::json::parse(req.body);
        seen_auth = req.get_header_value("Authorization");
        res.set_content(R"({"choices":[{"message":{"content":"It is unclear."}}]})", "application/json");
    });
    server.Post("/v1/embeddings", [&](const httplib::Request& req, httplib::Response& res) {
        seen_embedding = nlohmann::json::parse(req.body);
        res.set_content(R"({"data":[{"embedding":[0.25,0.5,1]}]})", "application/json");
    });
    server.Post("/v1/broken/chat/completions", [](const httplib::Request&, httplib::Response& res) {
        res.status = 503;
        res.set_content("overloaded", "text/plain");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread serving([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    setenv("LICENSEKIT_WIRE_TEST_KEY", "sekret", 1);
    auto c = model("http://127.0.0.1:" + std::to_string(port) + "/v1/");
    c.auth_env = "LICENSEKIT_WIRE_TEST_KEY";
    c.params.max_tokens = 128;
    HttpBackend backend(make_http_transport());
    const auto r = backend.complete(c, prompt("user text"));
    CHECK(r.text == "It is unclear.");
    CHECK(r.latency_s >= 0.0);
    CHECK(seen_auth == "Bearer sekret");
    CHECK(seen_completion["model"] == "m1");
    CHECK(seen_completion["max_tokens"] == 128);
    CHECK(seen_completion["temperature"] == 0.0);
    REQUIRE(seen_completion["messages"].size() == 2); // zero-shot: one system, one user
    CHECK(seen_completion["messages"][0] == nlohmann::json{{"role", "system"}, {"content", "sys"}});
    CHECK(seen_completion["messages"][1] == nlohmann::json{{"role", "user"}, {"content", "user text"}});

    EmbedderConfig e{"emb", "http://127.0.0.1:" + std::to_string(port) + "/v1", std::nullopt};
    CHECK(backend.embed(e, "abc") == std::vector<double>{0.25, 0.5, 1});
    CHECK(seen_embedding["input"] == "abc");

    auto broken = model("http://127.0.0.1:" + std::to_string(port) + "/v1/broken");
    CHECK_THROWS_AS(backend.complete(broken, prompt()), ProtocolError);

    auto closed = model("http://127.0.0.1:1");
    closed.params.max_retries = 0;
    CHECK_THROWS_AS(backend.complete(closed, prompt()), TransportError);

    server.stop();
    serving.join();
}

TEST_CASE("record then replay returns the same answers") {
    class Canned : public Backend {
    public:
        int calls = 0;
        ModelResponse complete(const ModelEndpointConfig& c, const prompts::RenderedPrompt& p) override {
            ++calls;
            return {"answer to " + p.user_text, 0.25, c.model_id, request_fingerprint(c, p)};
        }
        std::vector<double> embed(const EmbedderConfig&, std::string_view text) override {
            return {static_cast<double>(text.size()), 1.0};
        }
    };
    const auto sink = temp_file("record.jsonl");
    std::filesystem::remove(sink);
    auto live = std::make_shared<Canned>();
    {
        auto rec = record_session(live, sink);
        CHECK(rec->complete(model(), prompt("a")).text == "answer to a");
        rec->complete(model(), prompt("b"));
        rec->embed({"emb", "", std::nullopt}, "xyz");
    }
    auto replay = replay_session(sink);
    CHECK(replay->complete(model(), prompt("b")).text == "answer to b");
    CHECK(replay->complete(model(), prompt("a")).latency_s == 0.25);
    CHECK(replay->embed({"emb", "", std::nullopt}, "xyz") == std::vector<double>{3.0, 1.0});
    CHECK(live->calls == 2);
    std::filesystem::remove(sink);
}
