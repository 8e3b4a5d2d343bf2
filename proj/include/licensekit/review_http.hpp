// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 licensekit contributors

#pragma once

#include "licensekit/review.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>

namespace licensekit::review {

struct ApiRequest {
    std::string method;
    std::string path;
    std::string body;
    std::map<std::string, std::string> headers; // keys lowercased
};

struct ApiResponse {
    int status = 200;
    std::string body; // json
};

struct ApiOptions {
    /// When set, every request needs `Authorization: Bearer <token>`.
    std::optional<std::string> bearer_token;
    /// Value for Access-Control-Allow-Origin; empty disables CORS headers.
    std::string cors_origin = "*";
};

/// Transport-free routing of the review API:
///
///   POST /sessions                    {reviewer_id, group, license_ids}
///   GET  /sessions/{id}
///   GET  /sessions/{id}/next          {license_id, name, text} or {"done": true}
///   POST /analyze                     {license_id, model_id, system_id, user_id}
///   POST /sessions/{id}/decisions     {license_id, verdict, started_at, ended_at,
///                                      assist_shown, assist_verdict?}
///   GET  /sessions/{id}/summary
///
/// Errors come back as {"error": kind, "message": text, "retriable": bool}
/// with 400 (validation, parse, config), 401, 404, 405, 409, 502 (upstream)
/// or 504 (upstream timeout).
class ReviewApi {
public:
    /// `assistant` may be null, in which case /analyze answers 503.
    ReviewApi(ReviewService& service, Assistant* assistant, ApiOptions options = {});

    ApiResponse handle(const ApiRequest& request) const;
    const ApiOptions& options() const { return options_; }

private:
    ReviewService& service_;
    Assistant* assistant_;
    ApiOptions options_;
};

/// cpp-httplib server around a ReviewApi.
class ReviewServer {
public:
    explicit ReviewServer(const ReviewApi& api);
    ~ReviewServer();
    ReviewServer(const ReviewServer&) = delete;
    ReviewServer& operator=(const ReviewServer&) = delete;

    /// Binds; port 0 picks a free port. Returns the bound port.
    int bind(const std::string& host, int port);
    /// Serves until stop(); call after bind().
    void run();
    void stop();
    void wait_until_ready() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace licensekit::review
