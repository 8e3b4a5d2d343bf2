// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 licensekit contributors

#pragma once

#include "licensekit/corpus.hpp"
#include "licensekit/metrics.hpp"
#include "licensekit/modelgate.hpp"
#include "licensekit/prompts.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace licensekit::review {

using TimePoint = std::chrono::sys_time<std::chrono::microseconds>;
using Clock = std::function<TimePoint()>;

TimePoint system_now();

/// Parses `YYYY-MM-DDTHH:MM:SS[.frac](Z|+HH:MM|-HH:MM)`. A zone designator is
/// required; fractions beyond microseconds are truncated.
TimePoint parse_iso8601(std::string_view s);
/// UTC with millisecond precision: `2026-01-02T03:04:05.678Z`.
std::string format_iso8601(TimePoint t);

enum class Group { Manual, Assisted };

std::string_view to_string(Group g);
Group group_from_string(std::string_view s);

struct ReviewSession {
    std::string session_id;
    std::string reviewer_id;
    Group group = Group::Manual;
    TimePoint created_at;
    std::vector<std::string> license_queue;
};

struct ReviewDecision {
    std::string session_id;
    std::string license_id;
    metrics::Verdict verdict = metrics::Verdict::Unclear;
    TimePoint started_at;
    TimePoint ended_at;
    double duration_s = 0.0;
    bool assist_shown = false;
    std::optional<metrics::Verdict> assist_verdict;
};

struct SessionSummary {
    std::string session_id;
    Group group = Group::Manual;
    double pa_pct = 0.0;
    double mean_duration_s = 0.0;
    std::size_t n_decided = 0;
    std::size_t n_pending = 0;
    std::size_t n_assist_shown = 0; // reported for Assisted sessions only
};

struct QueueItem {
    std::string license_id;
    std::string name;
    std::string text;
};

nlohmann::ordered_json to_json(const ReviewSession& s);
nlohmann::ordered_json to_json(const ReviewDecision& d);
nlohmann::ordered_json to_json(const SessionSummary& s);

/// Client clocks may run ahead of the server by at most this much.
inline constexpr std::chrono::seconds kMaxClockSkew{5};

/// Timed A/B review sessions over a labeled ground-truth corpus.
///
/// State lives in memory and in an append-only `review_log.jsonl` under the
/// store directory, which is replayed on construction. Writes are serialized;
/// reads share a lock.
class ReviewService {
public:
    ReviewService(corpus::Corpus ground_truth, std::filesystem::path store_dir, Clock clock = system_now);

    ReviewSession create_session(const std::string& reviewer_id, Group group,
                                 const std::vector<std::string>& license_ids);
    ReviewSession session(const std::string& session_id) const;
    /// First queued license without a decision; nullopt once all are decided.
    std::optional<QueueItem> next(const std::string& session_id) const;

    /// duration_s is ended_at - started_at. Throws ConflictError on a second
    /// decision for the same license and ValidationError when the timestamps
    /// are reversed or ended_at lies beyond receipt time plus kMaxClockSkew.
    ReviewDecision record_decision(const std::string& session_id, const std::string& license_id,
                                   metrics::Verdict verdict, TimePoint started_at, TimePoint ended_at,
                                   bool assist_shown, std::optional<metrics::Verdict> assist_verdict = std::nullopt);

    std::vector<ReviewDecision> decisions(const std::string& session_id) const;
    /// Needs at least one decision.
    SessionSummary summary(const std::string& session_id) const;

    const corpus::LicenseRecord& license(const std::string& license_id) const;

private:
    struct SessionState {
        ReviewSession session;
        std::vector<ReviewDecision> decisions;
        std::map<std::string, std::size_t> decided; // license id -> decision index
    };

    const SessionState& state(const std::string& session_id) const;
    void append_log(const nlohmann::ordered_json& event);
    void replay_log();
    void apply_session(ReviewSession s);
    void apply_decision(ReviewDecision d);

    std::map<std::string, corpus::LicenseRecord> corpus_;
    std::filesystem::path log_path_;
    Clock clock_;
    mutable std::shared_mutex mutex_;
    std::map<std::string, SessionState> sessions_;
    std::uint64_t next_session_ = 1;
};

struct AssistPayload {
    std::string license_id;
    std::string model_id;
    metrics::Verdict verdict = metrics::Verdict::NonSpecific;
    std::string rationale_text;
    double latency_s = 0.0;
    std::string fingerprint;
};

nlohmann::ordered_json to_json(const AssistPayload& p);

/// Model assistance for reviewers: render, complete, extract. Answers are
/// cached by request fingerprint, so repeated views return the same payload.
class Assistant {
public:
    Assistant(corpus::Corpus corpus, prompts::TemplatePack pack, metrics::Ruleset ruleset,
              modelgate::ModelRegistry registry, std::shared_ptr<modelgate::Backend> backend);

    AssistPayload analyze(const std::string& license_id, const std::string& model_id, const std::string& system_id,
                          const std::string& user_id);

    std::size_t backend_calls() const;

private:
    std::map<std::string, corpus::LicenseRecord> corpus_;
    prompts::TemplatePack pack_;
    metrics::Ruleset ruleset_;
    modelgate::ModelRegistry registry_;
    std::shared_ptr<modelgate::Backend> backend_;
    mutable std::mutex mutex_;
    std::unordered_map<std::string, AssistPayload> cache_;
    std::size_t backend_calls_ = 0;
};

} // namespace licensekit::review
