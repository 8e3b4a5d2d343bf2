// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 licensekit contributors

#include "licensekit/error.hpp"
#include "licensekit/hash.hpp"
#include "licensekit/review.hpp"
#include "licensekit/review_http.hpp"

#include <doctest.h>
#include <httplib.h>
#include <json.hpp>

#include <filesystem>
#include <thread>
#include <unistd.h>

using namespace licensekit;
using namespace licensekit::review;
using metrics::Verdict;
namespace fs = std::filesystem;
using std::chrono::seconds;

namespace {

const fs::path kFixtures = LICENSEKIT_FIXTURE_DIR;
const TimePoint kNoon = parse_iso8601("2026-03-01T12:00:00Z");

corpus::Corpus review_corpus() {
    return corpus::load_corpus(kFixtures / "review_corpus.jsonl", corpus::Format::JsonLines);
}

fs::path store(const std::string& tag) {
    const auto p = fs::temp_directory_path() / ("lk_review_" + tag + "_" + std::to_string(getpid()));
    fs::remove_all(p);
    return p;
}

Assistant assistant() {
    return Assistant(review_corpus(), prompts::TemplatePack::load(kFixtures / "default_pack.json"),
                     metrics::Ruleset::load(kFixtures / "rulesets/en.json"),
                     modelgate::ModelRegistry::load(kFixtures / "models.json"),
                     modelgate::replay_session(kFixtures / "replay/review_assist.jsonl"));
}

ApiRequest request(std::string method, std::string path, std::string body = "") {
    return {std::move(method), std::move(path), std::move(body), {}};
}

std::string error_kind(const ApiResponse& r) { return nlohmann::json::parse(r.body).at("error"); }

} // namespace

TEST_CASE("ISO-8601 parsing and formatting") {
    CHECK(format_iso8601(kNoon) == "2026-03-01T12:00:00.000Z");
    CHECK(parse_iso8601("2026-03-01T13:30:00+01:30") == kNoon);
    CHECK(parse_iso8601("2026-03-01T10:00:00-02:00") == kNoon);
    CHECK(parse_iso8601("2026-03-01T12:00:00.1234567Z") - kNoon == std::chrono::microseconds(123456));
    CHECK(format_iso8601(kNoon + std::chrono::microseconds(250)) == "2026-03-01T12:00:00.000250Z");
    CHECK(parse_iso8601(format_iso8601(kNoon + std::chrono::milliseconds(678))) ==
          kNoon + std::chrono::milliseconds(678));
    CHECK_THROWS_AS(parse_iso8601("2026-03-01T12:00:00"), ParseError);
    CHECK_THROWS_AS(parse_iso8601("2026-02-30T12:00:00Z"), ParseError);
    CHECK_THROWS_AS(parse_iso8601("2026-03-01T24:00:00Z"), ParseError);
    CHECK_THROWS_AS(parse_iso8601("2026-03-01T12:00:00Zjunk"), ParseError);
    CHECK_THROWS_AS(parse_iso8601("2026-03-01T12:00:00.Z"), ParseError);
}

TEST_CASE("session creation rules") {
    ReviewService svc(review_corpus(), store("create"), [] { return kNoon; });
    const auto s = svc.create_session("r1", Group::Manual, {"rev-nc", "rev-by"});
    CHECK(s.session_id == "s-000001");
    CHECK(s.created_at == kNoon);
    CHECK(svc.create_session("r1", Group::Assisted, {"rev-tos"}).session_id == "s-000002");
    CHECK_THROWS_AS(svc.create_session("", Group::Manual, {"rev-nc"}), ValidationError);
    CHECK_THROWS_AS(svc.create_session("r", Group::Manual, {}), ValidationError);
    CHECK_THROWS_AS(svc.create_session("r", Group::Manual, {"rev-nc", "rev-nc"}), ValidationError);
    CHECK_THROWS_AS(svc.create_session("r", Group::Manual, {"nope"}), ValidationError);
    CHECK_THROWS_AS(svc.create_session("r", Group::Manual, {"rev-raw"}), ValidationError); // unlabeled
    CHECK_THROWS_AS(svc.session("s-999999"), NotFoundError);
    CHECK(group_from_string("Assisted") == Group::Assisted);
    CHECK_THROWS_AS(group_from_string("control"), ValidationError);
}

TEST_CASE("decision rules") {
    ReviewService svc(review_corpus(), store("decide"), [] { return kNoon; });
    const auto manual = svc.create_session("r", Group::Manual, {"rev-nc", "rev-by"}).session_id;
    const auto assisted = svc.create_session("r", Group::Assisted, {"rev-nc"}).session_id;
    const auto t0 = kNoon - seconds(60);

    CHECK_THROWS_AS(svc.record_decision(manual, "rev-tos", Verdict::Unclear, t0, kNoon, false), ValidationError);
    CHECK_THROWS_AS(svc.record_decision(manual, "rev-nc", Verdict::NonSpecific, t0, kNoon, false), ValidationError);
    CHECK_THROWS_AS(svc.record_decision(manual, "rev-nc", Verdict::DeniesCommercial, t0, kNoon, true),
                    ValidationError); // assist outside the assisted group
    CHECK_THROWS_AS(svc.record_decision(assisted, "rev-nc", Verdict::DeniesCommercial, t0, kNoon, false,
                                        Verdict::DeniesCommercial),
                    ValidationError);
    CHECK_THROWS_AS(svc.record_decision(manual, "rev-nc", Verdict::DeniesCommercial, kNoon, t0, false),
                    ValidationError);
    // up to five seconds of client clock skew is tolerated
    CHECK_THROWS_AS(svc.record_decision(manual, "rev-nc", Verdict::DeniesCommercial, t0,
                                        kNoon + seconds(5) + std::chrono::microseconds(1), false),
                    ValidationError);
    const auto d = svc.record_decision(manual, "rev-nc", Verdict::DeniesCommercial, t0, kNoon + seconds(5), false);
    CHECK(d.duration_s == doctest::Approx(65.0));
    CHECK_THROWS_AS(svc.record_decision(manual, "rev-nc", Verdict::DeniesCommercial, t0, kNoon, false),
                    ConflictError);
    CHECK(svc.next(manual)->license_id == "rev-by");

    const auto a = svc.record_decision(assisted, "rev-nc", Verdict::AllowsCommercial, t0, kNoon, true,
                                       Verdict::DeniesCommercial);
    CHECK(a.assist_verdict == Verdict::DeniesCommercial);
    CHECK_FALSE(svc.next(assisted).has_value());
}

TEST_CASE("summary arithmetic") {
    ReviewService svc(review_corpus(), store("summary"), [] { return kNoon; });
    const auto id = svc.create_session("r", Group::Assisted, {"rev-nc", "rev-by", "rev-tos", "rev-mit"}).session_id;
    CHECK_THROWS_AS(svc.summary(id), ValidationError);
    const auto t0 = kNoon - seconds(100);
    svc.record_decision(id, "rev-nc", Verdict::DeniesCommercial, t0, t0 + seconds(10), true);
    svc.record_decision(id, "rev-by", Verdict::DeniesCommercial, t0, t0 + seconds(20), false);
    svc.record_decision(id, "rev-tos", Verdict::Unclear, t0, t0 + seconds(30), true);
    const auto s = svc.summary(id);
    CHECK(s.n_decided == 3);
    CHECK(s.n_pending == 1);
    CHECK(s.n_assist_shown == 2);
    CHECK(s.pa_pct == doctest::Approx(200.0 / 3));
    CHECK(s.mean_duration_s == doctest::Approx(20.0));
    CHECK(to_json(s).contains("n_assist_shown"));
}

TEST_CASE("the log restores sessions and decisions") {
    const auto dir = store("replay");
    std::string id;
    {
        ReviewService svc(review_corpus(), dir, [] { return kNoon; });
        id = svc.create_session("r", Group::Manual, {"rev-nc", "rev-by"}).session_id;
        svc.record_decision(id, "rev-nc", Verdict::DeniesCommercial, kNoon - seconds(4), kNoon, false);
    }
    ReviewService again(review_corpus(), dir, [] { return kNoon; });
    CHECK(again.session(id).license_queue.size() == 2);
    REQUIRE(again.decisions(id).size() == 1);
    CHECK(again.decisions(id)[0].duration_s == doctest::Approx(4.0));
    CHECK(again.next(id)->license_id == "rev-by");
    CHECK(again.create_session("r", Group::Manual, {"rev-by"}).session_id == "s-000002");

    write_file(dir / "review_log.jsonl", "{\"type\":\"mystery\"}\n");
    CHECK_THROWS_AS(ReviewService(review_corpus(), dir), ParseError);
    fs::remove_all(dir);
}

TEST_CASE("assistant answers from the replay store and caches") {
    auto a = assistant();
    const auto p = a.analyze("rev-nc", "licensegpt", "sys_v1", "user_v1");
    CHECK(p.verdict == Verdict::DeniesCommercial);
    CHECK_FALSE(p.rationale_text.empty());
    CHECK(a.analyze("rev-nc", "licensegpt", "sys_v1", "user_v1").fingerprint == p.fingerprint);
    CHECK(a.backend_calls() == 1);
    CHECK(a.analyze("rev-by", "licensegpt", "sys_v1", "user_v1").verdict == Verdict::AllowsCommercial);
    CHECK(a.backend_calls() == 2);
    CHECK_THROWS_AS(a.analyze("missing", "licensegpt", "sys_v1", "user_v1"), NotFoundError);
    CHECK_THROWS_AS(a.analyze("rev-nc", "nobody", "sys_v1", "user_v1"), ConfigError);
    CHECK_THROWS_AS(a.analyze("rev-tos", "licensegpt", "sys_v1", "user_v1"), ReplayMissError);
}

TEST_CASE("API status mapping") {
    ReviewService svc(review_corpus(), store("api"), [] { return kNoon; });
    auto helper = assistant();
    ReviewApi api(svc, &helper);

    auto created = api.handle(request("POST", "/sessions",
                                      R"({"reviewer_id":"r","group":"assisted","license_ids":["rev-nc","rev-tos"]})"));
    CHECK(created.status == 201);
    const std::string id = nlohmann::json::parse(created.body).at("session_id");

    CHECK(api.handle(request("GET", "/sessions/" + id)).status == 200);
    const auto next = nlohmann::json::parse(api.handle(request("GET", "/sessions/" + id + "/next")).body);
    CHECK(next["license_id"] == "rev-nc");

    const auto analyzed = api.handle(request(
        "POST", "/analyze", R"({"license_id":"rev-nc","model_id":"licensegpt","system_id":"sys_v1","user_id":"user_v1"})"));
    CHECK(analyzed.status == 200);
    CHECK(nlohmann::json::parse(analyzed.body)["verdict"] == "denies");
    const auto miss = api.handle(request(
        "POST", "/analyze", R"({"license_id":"rev-tos","model_id":"licensegpt","system_id":"sys_v1","user_id":"user_v1"})"));
    CHECK(miss.status == 502);
    CHECK(error_kind(miss) == "replay_miss");

    const std::string decision = R"({"license_id":"rev-nc","verdict":"denies","started_at":"2026-03-01T11:59:50Z",)"
                                 R"("ended_at":"2026-03-01T11:59:58Z","assist_shown":true,"assist_verdict":"denies"})";
    CHECK(api.handle(request("POST", "/sessions/" + id + "/decisions", decision)).status == 201);
    const auto again = api.handle(request("POST", "/sessions/" + id + "/decisions", decision));
    CHECK(again.status == 409);
    CHECK(error_kind(again) == "conflict");

    const auto summary = nlohmann::json::parse(api.handle(request("GET", "/sessions/" + id + "/summary")).body);
    CHECK(summary["pa_pct"] == 100.0);
    CHECK(summary["mean_duration_s"] == 8.0);
    CHECK(summary["n_pending"] == 1);

    CHECK(api.handle(request("POST", "/sessions", "{not json")).status == 400);
    CHECK(error_kind(api.handle(request("POST", "/sessions", R"({"reviewer_id":"r"})"))) == "validation");
    CHECK(api.handle(request("POST", "/sessions/" + id + "/decisions",
                             R"({"license_id":"rev-tos","verdict":"maybe","started_at":"x","ended_at":"y",)"
                             R"("assist_shown":false})"))
              .status == 400);
    CHECK(api.handle(request("GET", "/sessions/s-424242")).status == 404);
    CHECK(api.handle(request("GET", "/elsewhere")).status == 404);
    CHECK(api.handle(request("DELETE", "/sessions/" + id)).status == 405);
    CHECK(api.handle(request("GET", "/analyze")).status == 405);
    const auto unknown_model = api.handle(request(
        "POST", "/analyze", R"({"license_id":"rev-nc","model_id":"x","system_id":"sys_v1","user_id":"user_v1"})"));
    CHECK(unknown_model.status == 400);
    CHECK(error_kind(unknown_model) == "config");

    ReviewApi no_assist(svc, nullptr);
    CHECK(no_assist.handle(request("POST", "/analyze", "{}")).status == 503);

    ApiOptions locked;
    locked.bearer_token = "t0k";
    ReviewApi guarded(svc, nullptr, locked);
    CHECK(guarded.handle(request("GET", "/sessions/" + id)).status == 401);
    auto with_token = request("GET", "/sessions/" + id);
    with_token.headers["authorization"] = "Bearer t0k";
    CHECK(guarded.handle(with_token).status == 200);
}

TEST_CASE("HTTP server wiring and CORS preflight") {
    ReviewService svc(review_corpus(), store("http"), [] { return kNoon; });
    ApiOptions opts;
    opts.bearer_token = "t0k";
    ReviewApi api(svc, nullptr, opts);
    ReviewServer server(api);
    const int port = server.bind("127.0.0.1", 0);
    std::thread serving([&] { server.run(); });
    server.wait_until_ready();

    httplib::Client client("127.0.0.1", port);
    const auto pre = client.Options("/sessions");
    REQUIRE(pre);
    CHECK(pre->status == 204);
    CHECK(pre->get_header_value("Access-Control-Allow-Origin") == "*");

    CHECK(client.Post("/sessions", R"({})", "application/json")->status == 401);
    client.set_bearer_token_auth("t0k");
    const auto created = client.Post(
        "/sessions", R"({"reviewer_id":"r","group":"manual","license_ids":["rev-by"]})", "application/json");
    REQUIRE(created);
    CHECK(created->status == 201);
    CHECK(created->get_header_value("Content-Type") == "application/json");

    server.stop();
    serving.join();
}
