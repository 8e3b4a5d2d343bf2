// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 licensekit contributors

#include "licensekit/review_http.hpp"

#include "licensekit/error.hpp"
#include "licensekit/text.hpp"

#include <httplib.h>

#include <regex>

namespace licensekit::review {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

ApiResponse reply(int status, const ordered_json& body) { return {status, body.dump()}; }

ApiResponse error_reply(int status, const std::string& kind, const std::string& message, bool retriable = false) {
    ordered_json j;
    j["error"] = kind;
    j["message"] = message;
    j["retriable"] = retriable;
    return reply(status, j);
}

json parse_body(const std::string& body) {
    try {
        auto j = json::parse(body);
        if (!j.is_object()) {
            throw ParseError("request body must be a json object");
        }
        return j;
    } catch (const json::exception& e) {
        throw ParseError(std::string("request body is not valid json: ") + e.what());
    }
}

template <class T>
T field(const json& j, const char* name) {
    if (!j.contains(name)) {
        throw ValidationError(std::string("missing field '") + name + "'");
    }
    try {
        return j.at(name).get<T>();
    } catch (const json::exception&) {
        throw ValidationError(std::string("field '") + name + "' has the wrong type");
    }
}

metrics::Verdict parse_verdict(const std::string& s) {
    try {
        return metrics::verdict_from_string(text::casefold(s));
    } catch (const ParseError&) {
        throw ValidationError("verdict must be allows, denies or unclear (got '" + s + "')");
    }
}

TimePoint parse_time(const json& j, const char* name) {
    const auto s = field<std::string>(j, name);
    try {
        return parse_iso8601(s);
    } catch (const ParseError& e) {
        throw ValidationError(std::string(name) + ": " + e.what());
    }
}

bool retriable_status(int status) { return status == 429 || status >= 500; }

} // namespace

ReviewApi::ReviewApi(ReviewService& service, Assistant* assistant, ApiOptions options)
    : service_(service), assistant_(assistant), options_(std::move(options)) {}

ApiResponse ReviewApi::handle(const ApiRequest& req) const {
    if (options_.bearer_token) {
        const auto it = req.headers.find("authorization");
        if (it == req.headers.end() || it->second != "Bearer " + *options_.bearer_token) {
            return error_reply(401, "unauthorized", "missing or invalid bearer token");
        }
    }

    static const std::regex session_route(R"(^/sessions/([^/]+)(/next|/decisions|/summary)?/?$)");
    try {
        const auto& path = req.path;
        if (path == "/sessions" || path == "/sessions/") {
            if (req.method != "POST") {
                return error_reply(405, "method_not_allowed", req.method + " " + path);
            }
            const auto body = parse_body(req.body);
            const auto group = group_from_string(field<std::string>(body, "group"));
            const auto s = service_.create_session(field<std::string>(body, "reviewer_id"), group,
                                                   field<std::vector<std::string>>(body, "license_ids"));
            return reply(201, to_json(s));
        }
        if (path == "/analyze") {
            if (req.method != "POST") {
                return error_reply(405, "method_not_allowed", req.method + " " + path);
            }
            if (!assistant_) {
                return error_reply(503, "unavailable", "no assisting model is configured");
            }
            const auto body = parse_body(req.body);
            const auto p = assistant_->analyze(field<std::string>(body, "license_id"), field<std::string>(body, "model_id"),
                                               field<std::string>(body, "system_id"), field<std::string>(body, "user_id"));
            return reply(200, to_json(p));
        }
        std::smatch m;
        if (std::regex_match(path, m, session_route)) {
            const std::string id = m[1];
            const std::string sub = m[2];
            if (sub.empty() || sub == "/next" || sub == "/summary") {
                if (req.method != "GET") {
                    return error_reply(405, "method_not_allowed", req.method + " " + path);
                }
                if (sub.empty()) {
                    return reply(200, to_json(service_.session(id)));
                }
                if (sub == "/summary") {
                    return reply(200, to_json(service_.summary(id)));
                }
                const auto item = service_.next(id);
                ordered_json j;
                if (item) {
                    j["license_id"] = item->license_id;
                    j["name"] = item->name;
                    j["text"] = item->text;
                } else {
                    j["done"] = true;
                }
                return reply(200, j);
            }
            if (req.method != "POST") {
                return error_reply(405, "method_not_allowed", req.method + " " + path);
            }
            const auto body = parse_body(req.body);
            std::optional<metrics::Verdict> assist_verdict;
            if (body.contains("assist_verdict") && !body["assist_verdict"].is_null()) {
                assist_verdict = parse_verdict(field<std::string>(body, "assist_verdict"));
            }
            const auto d = service_.record_decision(id, field<std::string>(body, "license_id"),
                                                    parse_verdict(field<std::string>(body, "verdict")),
                                                    parse_time(body, "started_at"), parse_time(body, "ended_at"),
                                                    field<bool>(body, "assist_shown"), assist_verdict);
            return reply(201, to_json(d));
        }
        return error_reply(404, "not_found", "no route for " + path);
    } catch (const ParseError& e) {
        return error_reply(400, "parse", e.what());
    } catch (const ValidationError& e) {
        return error_reply(400, "validation", e.what());
    } catch (const ConfigError& e) {
        return error_reply(400, "config", e.what());
    } catch (const NotFoundError& e) {
        return error_reply(404, "not_found", e.what());
    } catch (const ConflictError& e) {
        return error_reply(409, "conflict", e.what());
    } catch (const TimeoutError& e) {
        return error_reply(504, "upstream_timeout", e.what(), true);
    } catch (const TransportError& e) {
        return error_reply(502, "upstream_transport", e.what(), true);
    } catch (const ProtocolError& e) {
        return error_reply(502, "upstream_protocol", e.what(), retriable_status(e.status()));
    } catch (const ReplayMissError& e) {
        return error_reply(502, "replay_miss", e.what());
    } catch (const std::exception& e) {
        return error_reply(500, "internal", e.what());
    }
}

// ---------------------------------------------------------------------------
// httplib glue

struct ReviewServer::Impl {
    explicit Impl(const ReviewApi& a) : api(a) {}
    const ReviewApi& api;
    httplib::Server server;
};

ReviewServer::ReviewServer(const ReviewApi& api) : impl_(std::make_unique<Impl>(api)) {
    auto handler = [this](const httplib::Request& req, httplib::Response& res) {
        ApiRequest r;
        r.method = req.method;
        r.path = req.path;
        r.body = req.body;
        for (const auto& [k, v] : req.headers) {
            r.headers[text::casefold(k)] = v;
        }
        const auto out = impl_->api.handle(r);
        res.status = out.status;
        res.set_content(out.body, "application/json");
    };
    auto& s = impl_->server;
    const std::string any = R"(/.*)";
    s.Get(any, handler);
    s.Post(any, handler);
    s.Put(any, handler);
    s.Delete(any, handler);
    s.Patch(any, handler);
    const auto origin = api.options().cors_origin;
    if (!origin.empty()) {
        s.set_default_headers({{"Access-Control-Allow-Origin", origin},
                               {"Access-Control-Allow-Headers", "Content-Type, Authorization"},
                               {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
        s.Options(any, [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    }
}

ReviewServer::~ReviewServer() { stop(); }

int ReviewServer::bind(const std::string& host, int port) {
    if (port == 0) {
        const int p = impl_->server.bind_to_any_port(host);
        if (p <= 0) {
            throw TransportError("cannot bind " + host);
        }
        return p;
    }
    if (!impl_->server.bind_to_port(host, port)) {
        throw TransportError("cannot bind " + host + ":" + std::to_string(port));
    }
    return port;
}

void ReviewServer::run() { impl_->server.listen_after_bind(); }

void ReviewServer::stop() {
    if (impl_ && impl_->server.is_running()) {
        impl_->server.stop();
    }
}

void ReviewServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

} // namespace licensekit::review
