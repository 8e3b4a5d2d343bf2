// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 licensekit contributors

#include "licensekit/error.hpp"
#include "licensekit/modelgate.hpp"

#include <httplib.h>

#include <chrono>
#include <cmath>

namespace licensekit::modelgate {

namespace {

struct SplitUrl {
    std::string origin; // scheme://host[:port]
    std::string path;
};

SplitUrl split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw ConfigError("url '" + url + "' has no scheme");
    }
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        return {url, "/"};
    }
    return {url.substr(0, path_start), url.substr(path_start)};
}

class HttplibTransport final : public HttpTransport {
public:
    HttpReply post(const std::string& url, const std::string& body, const Headers& headers,
                   double timeout_s) override {
        const auto parts = split_url(url);
        httplib::Client client(parts.origin);
        const auto secs = static_cast<time_t>(timeout_s);
        const auto usecs = static_cast<time_t>((timeout_s - std::floor(timeout_s)) * 1e6);
        client.set_connection_timeout(secs, usecs);
        client.set_read_timeout(secs, usecs);
        client.set_write_timeout(secs, usecs);

        httplib::Headers hdrs;
        std::string content_type = "application/json";
        for (const auto& [k, v] : headers) {
            if (k == "Content-Type") {
                content_type = v;
            } else {
                hdrs.emplace(k, v);
            }
        }

        const auto start = std::chrono::steady_clock::now();
        auto res = client.Post(parts.path, hdrs, body, content_type);
        if (!res) {
            const auto err = res.error();
            const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            const auto what = "POST " + url + ": " + httplib::to_string(err);
            if (err == httplib::Error::ConnectionTimeout ||
                (err == httplib::Error::Read && elapsed >= 0.95 * timeout_s)) {
                throw TimeoutError(what + " (timeout " + std::to_string(timeout_s) + " s)");
            }
            throw TransportError(what);
        }
        return {res->status, res->body};
    }
};

} // namespace

std::shared_ptr<HttpTransport> make_http_transport() { return std::make_shared<HttplibTransport>(); }

} // namespace licensekit::modelgate
