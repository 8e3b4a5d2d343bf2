// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 licensekit contributors

#include "licensekit/modelgate.hpp"

#include "licensekit/error.hpp"
#include "licensekit/hash.hpp"
#include "licensekit/text.hpp"

#include <json.hpp>

#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <thread>

namespace licensekit::modelgate {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string conventional_auth_env(std::string_view model_id) {
    std::string out = "LICENSEKIT_";
    for (const char c : model_id) {
        const auto u = static_cast<unsigned char>(c);
        if (std::isalnum(u)) {
            out.push_back(static_cast<char>(std::toupper(u)));
        } else {
            out.push_back('_');
        }
    }
    return out + "_KEY";
}

// ---------------------------------------------------------------------------
// registry

namespace {

std::optional<std::string> optional_string(const json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
        return std::nullopt;
    }
    return it->get<std::string>();
}

} // namespace

void ModelRegistry::add(ModelEndpointConfig config) {
    if (config.model_id.empty()) {
        throw ConfigError("model_id must be non-empty");
    }
    if (!(config.params.timeout_s > 0)) {
        throw ConfigError("model '" + config.model_id + "': timeout_s must be positive");
    }
    if (config.params.temperature < 0 || config.params.max_tokens <= 0 || config.params.max_retries < 0) {
        throw ConfigError("model '" + config.model_id + "': invalid generation parameters");
    }
    if (!model_index_.emplace(config.model_id, models_.size()).second) {
        throw ConfigError("duplicate model_id '" + config.model_id + "' in registry");
    }
    models_.push_back(std::move(config));
}

void ModelRegistry::add(EmbedderConfig config) {
    if (config.embedder_id.empty()) {
        throw ConfigError("embedder_id must be non-empty");
    }
    if (!(config.timeout_s > 0) || config.max_retries < 0) {
        throw ConfigError("embedder '" + config.embedder_id + "': invalid timeout or retry settings");
    }
    if (!embedder_index_.emplace(config.embedder_id, embedders_.size()).second) {
        throw ConfigError("duplicate embedder_id '" + config.embedder_id + "' in registry");
    }
    embedders_.push_back(std::move(config));
}

const ModelEndpointConfig& ModelRegistry::model(const std::string& id) const {
    const auto it = model_index_.find(id);
    if (it == model_index_.end()) {
        throw ConfigError("unknown model_id '" + id + "'");
    }
    return models_[it->second];
}

const EmbedderConfig& ModelRegistry::embedder(const std::string& id) const {
    const auto it = embedder_index_.find(id);
    if (it == embedder_index_.end()) {
        throw ConfigError("unknown embedder_id '" + id + "'");
    }
    return embedders_[it->second];
}

ModelRegistry ModelRegistry::from_json_text(std::string_view text) {
    ModelRegistry reg;
    try {
        const auto doc = json::parse(text);
        for (const auto& m : doc.value("models", json::array())) {
            ModelEndpointConfig c;
            c.model_id = m.at("model_id").get<std::string>();
            c.base_url = m.value("base_url", std::string{});
            c.auth_env = optional_string(m, "auth_env");
            if (m.contains("params")) {
                const auto& p = m["params"];
                c.params.temperature = p.value("temperature", c.params.temperature);
                c.params.max_tokens = p.value("max_tokens", c.params.max_tokens);
                c.params.timeout_s = p.value("timeout_s", c.params.timeout_s);
                c.params.max_retries = p.value("max_retries", c.params.max_retries);
                c.params.backoff_s = p.value("backoff_s", c.params.backoff_s);
            }
            if (m.contains("parameter_count_b") && !m["parameter_count_b"].is_null()) {
                c.parameter_count_b = m["parameter_count_b"].get<double>();
            }
            reg.add(std::move(c));
        }
        for (const auto& e : doc.value("embedders", json::array())) {
            EmbedderConfig c;
            c.embedder_id = e.at("embedder_id").get<std::string>();
            c.base_url = e.value("base_url", std::string{});
            c.auth_env = optional_string(e, "auth_env");
            c.timeout_s = e.value("timeout_s", c.timeout_s);
            c.max_retries = e.value("max_retries", c.max_retries);
            c.backoff_s = e.value("backoff_s", c.backoff_s);
            reg.add(std::move(c));
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("model registry: ") + e.what());
    }
    return reg;
}

ModelRegistry ModelRegistry::load(const std::filesystem::path& path) { return from_json_text(read_file(path)); }

// ---------------------------------------------------------------------------
// fingerprints

namespace {

void append_field(std::string& out, std::string_view s) {
    out += std::to_string(s.size());
    out += ':';
    out += s;
}

} // namespace

std::string request_fingerprint(const ModelEndpointConfig& config, const prompts::RenderedPrompt& prompt) {
    std::string payload = "lk1|complete|";
    append_field(payload, config.model_id);
    payload += '|';
    append_field(payload, prompt.system_text);
    payload += '|';
    append_field(payload, prompt.user_text);
    payload += "|t=" + std::to_string(std::llround(config.params.temperature * 1000.0));
    payload += "|m=" + std::to_string(config.params.max_tokens);
    return sha256_hex(payload);
}

std::string embedding_fingerprint(std::string_view embedder_id, std::string_view text) {
    std::string payload = "lk1|embed|";
    append_field(payload, embedder_id);
    payload += '|';
    append_field(payload, text);
    return sha256_hex(payload);
}

namespace {

void check_dimension(std::mutex& m, std::unordered_map<std::string, std::size_t>& dims, const std::string& id,
                     std::size_t dim) {
    if (dim == 0) {
        throw ProtocolError("embedder '" + id + "' returned an empty vector");
    }
    std::lock_guard lock(m);
    const auto [it, inserted] = dims.emplace(id, dim);
    if (!inserted && it->second != dim) {
        throw ProtocolError("embedder '" + id + "' dimension changed from " + std::to_string(it->second) + " to " +
                            std::to_string(dim));
    }
}

void require_text(std::string_view text) {
    if (text.empty()) {
        throw ValidationError("embed: text must be non-empty");
    }
}

} // namespace

// ---------------------------------------------------------------------------
// live http backend

HttpBackend::HttpBackend(std::shared_ptr<HttpTransport> transport, Sleeper sleeper)
    : transport_(std::move(transport)), sleeper_(std::move(sleeper)) {
    if (!sleeper_) {
        sleeper_ = [](double s) { std::this_thread::sleep_for(std::chrono::duration<double>(s)); };
    }
}

namespace {

Headers auth_headers(const std::optional<std::string>& auth_env, const std::string& who) {
    Headers headers{{"Content-Type", "application/json"}};
    if (auth_env) {
        const char* key = std::getenv(auth_env->c_str());
        if (key == nullptr || *key == '\0') {
            throw ConfigError(who + ": credential environment variable " + *auth_env + " is not set");
        }
        headers.emplace_back("Authorization", std::string("Bearer ") + key);
    }
    return headers;
}

std::string endpoint_url(const std::string& base_url, std::string_view suffix, const std::string& who) {
    if (base_url.empty()) {
        throw ConfigError(who + ": base_url is not configured");
    }
    std::string url = base_url;
    while (!url.empty() && url.back() == '/') {
        url.pop_back();
    }
    return url + std::string(suffix);
}

json parse_reply(const HttpReply& reply, const std::string& who) {
    if (reply.status < 200 || reply.status >= 300) {
        throw ProtocolError(who + ": endpoint returned HTTP " + std::to_string(reply.status), reply.status,
                            reply.body.substr(0, 256));
    }
    try {
        return json::parse(reply.body);
    } catch (const json::exception&) {
        throw ProtocolError(who + ": response is not json", reply.status, reply.body.substr(0, 256));
    }
}

} // namespace

std::string HttpBackend::completion_request_body(const ModelEndpointConfig& config,
                                                 const prompts::RenderedPrompt& prompt) {
    ordered_json body;
    body["model"] = config.model_id;
    body["messages"] = ordered_json::array({
        {{"role", "system"}, {"content", prompt.system_text}},
        {{"role", "user"}, {"content", prompt.user_text}},
    });
    body["temperature"] = config.params.temperature;
    body["max_tokens"] = config.params.max_tokens;
    return body.dump(-1, ' ', false, json::error_handler_t::replace);
}

HttpReply HttpBackend::post_with_retries(const std::string& url, const std::string& body, const Headers& headers,
                                         double timeout_s, int max_retries, double backoff_s, double* latency_s) {
    for (int attempt = 0;; ++attempt) {
        try {
            const auto start = std::chrono::steady_clock::now();
            auto reply = transport_->post(url, body, headers, timeout_s);
            *latency_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            return reply;
        } catch (const TimeoutError& e) {
            if (attempt >= max_retries) {
                throw TimeoutError(std::string(e.what()) + " (after " + std::to_string(attempt + 1) + " attempts)");
            }
        } catch (const TransportError& e) {
            if (attempt >= max_retries) {
                throw TransportError(std::string(e.what()) + " (after " + std::to_string(attempt + 1) +
                                     " attempts)");
            }
        }
        sleeper_(backoff_s * std::ldexp(1.0, attempt));
    }
}

ModelResponse HttpBackend::complete(const ModelEndpointConfig& config, const prompts::RenderedPrompt& prompt) {
    const std::string who = "model '" + config.model_id + "'";
    const auto headers = auth_headers(config.auth_env, who);
    const auto url = endpoint_url(config.base_url, "/chat/completions", who);
    double latency = 0.0;
    const auto reply = post_with_retries(url, completion_request_body(config, prompt), headers,
                                         config.params.timeout_s, config.params.max_retries,
                                         config.params.backoff_s, &latency);
    const auto doc = parse_reply(reply, who);

    std::optional<std::string> text;
    if (doc.contains("choices") && doc["choices"].is_array() && !doc["choices"].empty()) {
        const auto& first = doc["choices"][0];
        if (first.contains("message") && first["message"].contains("content") &&
            first["message"]["content"].is_string()) {
            text = first["message"]["content"].get<std::string>();
        } else if (first.contains("text") && first["text"].is_string()) {
            text = first["text"].get<std::string>();
        }
    }
    if (!text) {
        throw ProtocolError(who + ": response has no completion text", reply.status, reply.body.substr(0, 256));
    }
    return {std::move(*text), latency, config.model_id, request_fingerprint(config, prompt)};
}

std::vector<double> HttpBackend::embed(const EmbedderConfig& config, std::string_view text) {
    require_text(text);
    const std::string who = "embedder '" + config.embedder_id + "'";
    const auto headers = auth_headers(config.auth_env, who);
    const auto url = endpoint_url(config.base_url, "/embeddings", who);
    ordered_json body;
    body["model"] = config.embedder_id;
    body["input"] = std::string(text);
    double latency = 0.0;
    const auto reply = post_with_retries(url, body.dump(-1, ' ', false, json::error_handler_t::replace), headers,
                                         config.timeout_s, config.max_retries, config.backoff_s, &latency);
    const auto doc = parse_reply(reply, who);

    const json* vec = nullptr;
    if (doc.contains("embedding")) {
        vec = &doc["embedding"];
    } else if (doc.contains("data") && doc["data"].is_array() && !doc["data"].empty() &&
               doc["data"][0].contains("embedding")) {
        vec = &doc["data"][0]["embedding"];
    }
    if (vec == nullptr || !vec->is_array()) {
        throw ProtocolError(who + ": response has no embedding array", reply.status, reply.body.substr(0, 256));
    }
    std::vector<double> out;
    out.reserve(vec->size());
    for (const auto& v : *vec) {
        if (!v.is_number()) {
            throw ProtocolError(who + ": embedding contains a non-number", reply.status);
        }
        out.push_back(v.get<double>());
    }
    check_dimension(dim_mutex_, dims_, config.embedder_id, out.size());
    return out;
}

// ---------------------------------------------------------------------------
// replay store

std::string serialize_entry(const ReplayEntry& e) {
    ordered_json j;
    j["fp"] = e.fp;
    j["text"] = e.text;
    j["latency_s"] = e.latency_s;
    if (e.embedding) {
        j["embedding"] = *e.embedding;
    }
    return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

ReplayStore ReplayStore::parse(std::string_view data, std::string_view source) {
    ReplayStore store;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < data.size()) {
        auto end = data.find('\n', pos);
        if (end == std::string_view::npos) {
            end = data.size();
        }
        const auto line = data.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (text::is_blank(line)) {
            continue;
        }
        try {
            const auto j = json::parse(line);
            ReplayEntry e;
            e.fp = j.at("fp").get<std::string>();
            e.text = j.value("text", std::string{});
            e.latency_s = j.value("latency_s", 0.0);
            if (j.contains("embedding") && !j["embedding"].is_null()) {
                e.embedding = j["embedding"].get<std::vector<double>>();
            }
            if (e.latency_s < 0) {
                throw ParseError("negative latency_s");
            }
            store.put(std::move(e));
        } catch (const json::exception& ex) {
            throw ParseError(std::string(source) + ":" + std::to_string(line_no) + ": " + ex.what());
        } catch (const ParseError& ex) {
            throw ParseError(std::string(source) + ":" + std::to_string(line_no) + ": " + ex.what());
        }
    }
    return store;
}

ReplayStore ReplayStore::load(const std::filesystem::path& path) { return parse(read_file(path), path.string()); }

std::string ReplayStore::serialize() const {
    std::string out;
    for (const auto& e : entries_) {
        out += serialize_entry(e);
        out += '\n';
    }
    return out;
}

void ReplayStore::save(const std::filesystem::path& path) const { write_file(path, serialize()); }

const ReplayEntry* ReplayStore::find(const std::string& fp) const {
    const auto it = index_.find(fp);
    return it == index_.end() ? nullptr : &entries_[it->second];
}

void ReplayStore::put(ReplayEntry entry) {
    const auto it = index_.find(entry.fp);
    if (it != index_.end()) {
        entries_[it->second] = std::move(entry);
        return;
    }
    index_.emplace(entry.fp, entries_.size());
    entries_.push_back(std::move(entry));
}

// ---------------------------------------------------------------------------
// replay / record backends

ModelResponse ReplayBackend::complete(const ModelEndpointConfig& config, const prompts::RenderedPrompt& prompt) {
    auto fp = request_fingerprint(config, prompt);
    const auto* e = store_.find(fp);
    if (e == nullptr) {
        throw ReplayMissError(fp);
    }
    return {e->text, e->latency_s, config.model_id, std::move(fp)};
}

std::vector<double> ReplayBackend::embed(const EmbedderConfig& config, std::string_view text) {
    require_text(text);
    auto fp = embedding_fingerprint(config.embedder_id, text);
    const auto* e = store_.find(fp);
    if (e == nullptr || !e->embedding) {
        throw ReplayMissError(fp);
    }
    check_dimension(dim_mutex_, dims_, config.embedder_id, e->embedding->size());
    return *e->embedding;
}

RecordingBackend::RecordingBackend(std::shared_ptr<Backend> inner, std::filesystem::path sink)
    : inner_(std::move(inner)), sink_(std::move(sink)) {
    if (std::filesystem::exists(sink_)) {
        store_ = ReplayStore::load(sink_);
    } else {
        write_file(sink_, "");
    }
}

void RecordingBackend::append(ReplayEntry entry) {
    std::lock_guard lock(mutex_);
    if (const auto* existing = store_.find(entry.fp); existing != nullptr) {
        return;
    }
    std::ofstream out(sink_, std::ios::binary | std::ios::app);
    if (!out) {
        throw Error("cannot append to replay sink " + sink_.string());
    }
    out << serialize_entry(entry) << '\n';
    store_.put(std::move(entry));
}

ModelResponse RecordingBackend::complete(const ModelEndpointConfig& config, const prompts::RenderedPrompt& prompt) {
    auto response = inner_->complete(config, prompt);
    append({response.request_fingerprint, response.text, response.latency_s, std::nullopt});
    return response;
}

std::vector<double> RecordingBackend::embed(const EmbedderConfig& config, std::string_view text) {
    auto vec = inner_->embed(config, text);
    append({embedding_fingerprint(config.embedder_id, text), "", 0.0, vec});
    return vec;
}

std::unique_ptr<Backend> record_session(std::shared_ptr<Backend> live, const std::filesystem::path& sink) {
    return std::make_unique<RecordingBackend>(std::move(live), sink);
}

std::unique_ptr<Backend> replay_session(const std::filesystem::path& source) {
    return std::make_unique<ReplayBackend>(ReplayStore::load(source));
}

} // namespace licensekit::modelgate
