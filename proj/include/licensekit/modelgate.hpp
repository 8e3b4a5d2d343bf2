// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 licensekit contributors

#pragma once

#include "licensekit/prompts.hpp"

#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace licensekit::modelgate {

struct GenerationParams {
    double temperature = 0.0;
    int max_tokens = 512;
    double timeout_s = 60.0;
    int max_retries = 2;
    double backoff_s = 0.5; // first retry delay; doubles per attempt
};

struct ModelEndpointConfig {
    std::string model_id;
    std::string base_url;
    std::optional<std::string> auth_env;
    GenerationParams params;
    std::optional<double> parameter_count_b;
};

struct EmbedderConfig {
    std::string embedder_id;
    std::string base_url;
    std::optional<std::string> auth_env;
    double timeout_s = 30.0;
    int max_retries = 2;
    double backoff_s = 0.5;
};

/// `LICENSEKIT_<MODELID>_KEY`, with non-alphanumerics mapped to '_'.
std::string conventional_auth_env(std::string_view model_id);

/// Models and embedders by id, loaded from a registry json file:
/// {"models": [{model_id, base_url, auth_env?, params?, parameter_count_b?}],
///  "embedders": [{embedder_id, base_url, auth_env?, timeout_s?, max_retries?}]}
class ModelRegistry {
public:
    static ModelRegistry load(const std::filesystem::path& path);
    static ModelRegistry from_json_text(std::string_view text);

    void add(ModelEndpointConfig config);
    void add(EmbedderConfig config);

    const ModelEndpointConfig& model(const std::string& id) const;
    const EmbedderConfig& embedder(const std::string& id) const;
    bool has_model(const std::string& id) const { return model_index_.count(id) != 0; }
    bool has_embedder(const std::string& id) const { return embedder_index_.count(id) != 0; }

    const std::vector<ModelEndpointConfig>& models() const { return models_; }
    const std::vector<EmbedderConfig>& embedders() const { return embedders_; }

private:
    std::vector<ModelEndpointConfig> models_;
    std::vector<EmbedderConfig> embedders_;
    std::unordered_map<std::string, std::size_t> model_index_;
    std::unordered_map<std::string, std::size_t> embedder_index_;
};

/// Stable hash of (model_id, system text, user text, temperature, max_tokens).
///
/// SHA-256 hex of the byte string
///   "lk1|complete|" L(model_id) "|" L(system) "|" L(user) "|t=" T "|m=" M
/// where L(s) is "<byte length>:<s>", T is round(temperature * 1000) and M is
/// max_tokens, both in decimal. Timeout and retry settings are excluded since
/// they do not change the answer.
std::string request_fingerprint(const ModelEndpointConfig& config, const prompts::RenderedPrompt& prompt);

/// SHA-256 hex of "lk1|embed|" L(embedder_id) "|" L(text).
std::string embedding_fingerprint(std::string_view embedder_id, std::string_view text);

struct ModelResponse {
    std::string text;
    double latency_s = 0.0;
    std::string model_id;
    std::string request_fingerprint;
};

/// Everything that talks to a model goes through a Backend.
class Backend {
public:
    virtual ~Backend() = default;

    /// Zero-shot: exactly one system and one user message per request.
    virtual ModelResponse complete(const ModelEndpointConfig& config, const prompts::RenderedPrompt& prompt) = 0;

    virtual std::vector<double> embed(const EmbedderConfig& config, std::string_view text) = 0;
};

struct HttpReply {
    int status = 0;
    std::string body;
};

using Headers = std::vector<std::pair<std::string, std::string>>;

/// One POST. Implementations throw TransportError/TimeoutError on
/// connection-level failures and return any HTTP status otherwise.
class HttpTransport {
public:
    virtual ~HttpTransport() = default;
    virtual HttpReply post(const std::string& url, const std::string& body, const Headers& headers,
                           double timeout_s) = 0;
};

/// cpp-httplib transport; handles http:// and https:// URLs.
std::shared_ptr<HttpTransport> make_http_transport();

using Sleeper = std::function<void(double seconds)>;

/// Live backend speaking the chat-completion wire shape.
class HttpBackend final : public Backend {
public:
    explicit HttpBackend(std::shared_ptr<HttpTransport> transport, Sleeper sleeper = {});

    ModelResponse complete(const ModelEndpointConfig& config, const prompts::RenderedPrompt& prompt) override;
    std::vector<double> embed(const EmbedderConfig& config, std::string_view text) override;

    /// Body sent by complete(); exposed for wire-shape tests.
    static std::string completion_request_body(const ModelEndpointConfig& config,
                                               const prompts::RenderedPrompt& prompt);

private:
    HttpReply post_with_retries(const std::string& url, const std::string& body, const Headers& headers,
                                double timeout_s, int max_retries, double backoff_s, double* latency_s);

    std::shared_ptr<HttpTransport> transport_;
    Sleeper sleeper_;
    std::mutex dim_mutex_;
    std::unordered_map<std::string, std::size_t> dims_;
};

struct ReplayEntry {
    std::string fp;
    std::string text;
    double latency_s = 0.0;
    std::optional<std::vector<double>> embedding;
};

/// Fingerprint-keyed responses, serialized as json-lines in insertion order:
/// {"fp": str, "text": str, "latency_s": num, "embedding": [num]?}
class ReplayStore {
public:
    static ReplayStore load(const std::filesystem::path& path);
    static ReplayStore parse(std::string_view data, std::string_view source = "<memory>");

    std::string serialize() const;
    void save(const std::filesystem::path& path) const;

    const ReplayEntry* find(const std::string& fp) const;
    /// Appends, or replaces the entry with the same fingerprint in place.
    void put(ReplayEntry entry);

    std::size_t size() const { return entries_.size(); }
    const std::vector<ReplayEntry>& entries() const { return entries_; }

private:
    std::vector<ReplayEntry> entries_;
    std::unordered_map<std::string, std::size_t> index_;
};

std::string serialize_entry(const ReplayEntry& entry);

/// Answers only from the store; misses are hard errors.
class ReplayBackend final : public Backend {
public:
    explicit ReplayBackend(ReplayStore store) : store_(std::move(store)) {}

    ModelResponse complete(const ModelEndpointConfig& config, const prompts::RenderedPrompt& prompt) override;
    std::vector<double> embed(const EmbedderConfig& config, std::string_view text) override;

    const ReplayStore& store() const { return store_; }

private:
    ReplayStore store_;
    std::mutex dim_mutex_;
    std::unordered_map<std::string, std::size_t> dims_;
};

/// Forwards to `inner` and appends each new answer to a json-lines sink.
class RecordingBackend final : public Backend {
public:
    RecordingBackend(std::shared_ptr<Backend> inner, std::filesystem::path sink);

    ModelResponse complete(const ModelEndpointConfig& config, const prompts::RenderedPrompt& prompt) override;
    std::vector<double> embed(const EmbedderConfig& config, std::string_view text) override;

    const ReplayStore& store() const { return store_; }

private:
    void append(ReplayEntry entry);

    std::shared_ptr<Backend> inner_;
    std::filesystem::path sink_;
    std::mutex mutex_;
    ReplayStore store_;
};

std::unique_ptr<Backend> record_session(std::shared_ptr<Backend> live, const std::filesystem::path& sink);
std::unique_ptr<Backend> replay_session(const std::filesystem::path& source);

} // namespace licensekit::modelgate
