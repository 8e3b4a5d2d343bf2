// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 licensekit contributors

#include "licensekit/review.hpp"

#include "licensekit/error.hpp"
#include "licensekit/hash.hpp"
#include "licensekit/text.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>

namespace licensekit::review {

namespace fs = std::filesystem;
namespace chr = std::chrono;
using nlohmann::json;
using nlohmann::ordered_json;

TimePoint system_now() { return chr::floor<chr::microseconds>(chr::system_clock::now()); }

namespace {

[[noreturn]] void bad_time(std::string_view s, const char* why) {
    throw ParseError("invalid ISO-8601 timestamp '" + std::string(s) + "': " + why);
}

int digits(std::string_view s, std::size_t& pos, std::size_t count) {
    if (pos + count > s.size()) {
        bad_time(s, "truncated");
    }
    int v = 0;
    for (std::size_t i = 0; i < count; ++i) {
        const char c = s[pos + i];
        if (c < '0' || c > '9') {
            bad_time(s, "expected a digit");
        }
        v = v * 10 + (c - '0');
    }
    pos += count;
    return v;
}

void expect(std::string_view s, std::size_t& pos, char c) {
    if (pos >= s.size() || s[pos] != c) {
        bad_time(s, "unexpected character");
    }
    ++pos;
}

} // namespace

TimePoint parse_iso8601(std::string_view s) {
    std::size_t pos = 0;
    const int y = digits(s, pos, 4);
    expect(s, pos, '-');
    const int mo = digits(s, pos, 2);
    expect(s, pos, '-');
    const int d = digits(s, pos, 2);
    if (pos >= s.size() || (s[pos] != 'T' && s[pos] != 't')) {
        bad_time(s, "expected 'T'");
    }
    ++pos;
    const int hh = digits(s, pos, 2);
    expect(s, pos, ':');
    const int mm = digits(s, pos, 2);
    expect(s, pos, ':');
    const int ss = digits(s, pos, 2);
    std::int64_t micros = 0;
    if (pos < s.size() && s[pos] == '.') {
        ++pos;
        std::size_t n = 0;
        while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
            if (n < 6) {
                micros = micros * 10 + (s[pos] - '0');
            }
            ++n;
            ++pos;
        }
        if (n == 0) {
            bad_time(s, "empty fraction");
        }
        for (std::size_t i = n; i < 6; ++i) {
            micros *= 10;
        }
    }
    int offset_min = 0;
    if (pos < s.size() && (s[pos] == 'Z' || s[pos] == 'z')) {
        ++pos;
    } else if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) {
        const int sign = s[pos] == '-' ? -1 : 1;
        ++pos;
        const int oh = digits(s, pos, 2);
        expect(s, pos, ':');
        const int om = digits(s, pos, 2);
        if (oh > 23 || om > 59) {
            bad_time(s, "offset out of range");
        }
        offset_min = sign * (oh * 60 + om);
    } else {
        bad_time(s, "missing zone designator");
    }
    if (pos != s.size()) {
        bad_time(s, "trailing characters");
    }
    const chr::year_month_day ymd{chr::year{y}, chr::month{static_cast<unsigned>(mo)},
                                  chr::day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) {
        bad_time(s, "no such date");
    }
    if (hh > 23 || mm > 59 || ss > 59) {
        bad_time(s, "time of day out of range");
    }
    return TimePoint{chr::sys_days{ymd}} + chr::hours{hh} + chr::minutes{mm} + chr::seconds{ss} +
           chr::microseconds{micros} - chr::minutes{offset_min};
}

std::string format_iso8601(TimePoint t) {
    const auto day = chr::floor<chr::days>(t);
    const chr::year_month_day ymd{day};
    const chr::hh_mm_ss<chr::microseconds> tod{t - day};
    const auto micros = tod.subseconds().count();
    char buf[48];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(tod.hours().count()), static_cast<int>(tod.minutes().count()),
                  static_cast<int>(tod.seconds().count()));
    std::string out = buf;
    if (micros % 1000 == 0) {
        std::snprintf(buf, sizeof buf, ".%03dZ", static_cast<int>(micros / 1000));
    } else {
        std::snprintf(buf, sizeof buf, ".%06dZ", static_cast<int>(micros));
    }
    return out + buf;
}

std::string_view to_string(Group g) { return g == Group::Manual ? "manual" : "assisted"; }

Group group_from_string(std::string_view s) {
    const auto f = text::casefold(s);
    if (f == "manual") return Group::Manual;
    if (f == "assisted") return Group::Assisted;
    throw ValidationError("group must be 'manual' or 'assisted' (got '" + std::string(s) + "')");
}

ordered_json to_json(const ReviewSession& s) {
    ordered_json j;
    j["session_id"] = s.session_id;
    j["reviewer_id"] = s.reviewer_id;
    j["group"] = to_string(s.group);
    j["created_at"] = format_iso8601(s.created_at);
    j["license_queue"] = s.license_queue;
    return j;
}

ordered_json to_json(const ReviewDecision& d) {
    ordered_json j;
    j["session_id"] = d.session_id;
    j["license_id"] = d.license_id;
    j["verdict"] = metrics::to_string(d.verdict);
    j["started_at"] = format_iso8601(d.started_at);
    j["ended_at"] = format_iso8601(d.ended_at);
    j["duration_s"] = d.duration_s;
    j["assist_shown"] = d.assist_shown;
    if (d.assist_verdict) {
        j["assist_verdict"] = metrics::to_string(*d.assist_verdict);
    }
    return j;
}

ordered_json to_json(const SessionSummary& s) {
    ordered_json j;
    j["session_id"] = s.session_id;
    j["group"] = to_string(s.group);
    j["pa_pct"] = s.pa_pct;
    j["mean_duration_s"] = s.mean_duration_s;
    j["n_decided"] = s.n_decided;
    j["n_pending"] = s.n_pending;
    if (s.group == Group::Assisted) {
        j["n_assist_shown"] = s.n_assist_shown;
    }
    return j;
}

ordered_json to_json(const AssistPayload& p) {
    ordered_json j;
    j["license_id"] = p.license_id;
    j["model_id"] = p.model_id;
    j["verdict"] = metrics::to_string(p.verdict);
    j["rationale_text"] = p.rationale_text;
    j["latency_s"] = p.latency_s;
    j["fingerprint"] = p.fingerprint;
    return j;
}

// ---------------------------------------------------------------------------
// ReviewService

namespace {

std::map<std::string, corpus::LicenseRecord> index_corpus(corpus::Corpus records) {
    std::map<std::string, corpus::LicenseRecord> out;
    for (auto& r : records) {
        auto id = r.id;
        out.emplace(std::move(id), std::move(r));
    }
    return out;
}

double seconds_between(TimePoint a, TimePoint b) {
    return chr::duration<double>(b - a).count();
}

ordered_json tagged(const char* type, const ordered_json& body) {
    ordered_json e;
    e["type"] = type;
    for (const auto& [k, v] : body.items()) {
        e[k] = v;
    }
    return e;
}

std::string session_id_for(std::uint64_t n) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "s-%06llu", static_cast<unsigned long long>(n));
    return buf;
}

} // namespace

ReviewService::ReviewService(corpus::Corpus ground_truth, fs::path store_dir, Clock clock)
    : corpus_(index_corpus(std::move(ground_truth))), log_path_(std::move(store_dir) / "review_log.jsonl"),
      clock_(std::move(clock)) {
    fs::create_directories(log_path_.parent_path());
    replay_log();
}

void ReviewService::append_log(const ordered_json& event) {
    std::ofstream out(log_path_, std::ios::app | std::ios::binary);
    out << event.dump() << '\n';
    out.flush();
    if (!out) {
        throw Error("cannot append to " + log_path_.string());
    }
}

void ReviewService::apply_session(ReviewSession s) {
    const auto id = s.session_id;
    if (id.size() > 2 && id.rfind("s-", 0) == 0) {
        try {
            next_session_ = std::max<std::uint64_t>(next_session_, std::stoull(id.substr(2)) + 1);
        } catch (const std::logic_error&) {
        }
    }
    sessions_[id].session = std::move(s);
}

void ReviewService::apply_decision(ReviewDecision d) {
    auto& st = sessions_.at(d.session_id);
    st.decided[d.license_id] = st.decisions.size();
    st.decisions.push_back(std::move(d));
}

void ReviewService::replay_log() {
    if (!fs::exists(log_path_)) {
        return;
    }
    const auto data = read_file(log_path_);
    std::size_t line_no = 0;
    for (const auto& line : text::split(data, '\n')) {
        ++line_no;
        if (text::is_blank(line)) {
            continue;
        }
        try {
            const auto j = json::parse(line);
            const auto type = j.at("type").get<std::string>();
            if (type == "session") {
                ReviewSession s;
                s.session_id = j.at("session_id").get<std::string>();
                s.reviewer_id = j.at("reviewer_id").get<std::string>();
                s.group = group_from_string(j.at("group").get<std::string>());
                s.created_at = parse_iso8601(j.at("created_at").get<std::string>());
                s.license_queue = j.at("license_queue").get<std::vector<std::string>>();
                apply_session(std::move(s));
            } else if (type == "decision") {
                ReviewDecision d;
                d.session_id = j.at("session_id").get<std::string>();
                d.license_id = j.at("license_id").get<std::string>();
                d.verdict = metrics::verdict_from_string(j.at("verdict").get<std::string>());
                d.started_at = parse_iso8601(j.at("started_at").get<std::string>());
                d.ended_at = parse_iso8601(j.at("ended_at").get<std::string>());
                d.duration_s = j.at("duration_s").get<double>();
                d.assist_shown = j.at("assist_shown").get<bool>();
                if (j.contains("assist_verdict")) {
                    d.assist_verdict = metrics::verdict_from_string(j["assist_verdict"].get<std::string>());
                }
                if (!sessions_.count(d.session_id)) {
                    throw ParseError("decision for unknown session '" + d.session_id + "'");
                }
                apply_decision(std::move(d));
            } else {
                throw ParseError("unknown event type '" + type + "'");
            }
        } catch (const json::exception& e) {
            throw ParseError(log_path_.string() + ":" + std::to_string(line_no) + ": " + e.what());
        } catch (const Error& e) {
            throw ParseError(log_path_.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
}

const corpus::LicenseRecord& ReviewService::license(const std::string& license_id) const {
    const auto it = corpus_.find(license_id);
    if (it == corpus_.end()) {
        throw NotFoundError("unknown license '" + license_id + "'");
    }
    return it->second;
}

const ReviewService::SessionState& ReviewService::state(const std::string& session_id) const {
    const auto it = sessions_.find(session_id);
    if (it == sessions_.end()) {
        throw NotFoundError("unknown session '" + session_id + "'");
    }
    return it->second;
}

ReviewSession ReviewService::create_session(const std::string& reviewer_id, Group group,
                                            const std::vector<std::string>& license_ids) {
    if (reviewer_id.empty()) {
        throw ValidationError("reviewer_id is empty");
    }
    if (license_ids.empty()) {
        throw ValidationError("license queue is empty");
    }
    std::set<std::string> seen;
    for (const auto& id : license_ids) {
        if (!seen.insert(id).second) {
            throw ValidationError("license '" + id + "' appears twice in the queue");
        }
        const auto it = corpus_.find(id);
        if (it == corpus_.end()) {
            throw ValidationError("unknown license id '" + id + "'");
        }
        if (it->second.label == corpus::Label::Unlabeled) {
            throw ValidationError("license '" + id + "' has no ground-truth label");
        }
    }

    std::unique_lock lock(mutex_);
    ReviewSession s;
    s.session_id = session_id_for(next_session_);
    s.reviewer_id = reviewer_id;
    s.group = group;
    s.created_at = clock_();
    s.license_queue = license_ids;
    append_log(tagged("session", to_json(s)));
    apply_session(s);
    return s;
}

ReviewSession ReviewService::session(const std::string& session_id) const {
    std::shared_lock lock(mutex_);
    return state(session_id).session;
}

std::optional<QueueItem> ReviewService::next(const std::string& session_id) const {
    std::shared_lock lock(mutex_);
    const auto& st = state(session_id);
    for (const auto& id : st.session.license_queue) {
        if (!st.decided.count(id)) {
            const auto& rec = license(id);
            return QueueItem{rec.id, rec.name, rec.text};
        }
    }
    return std::nullopt;
}

ReviewDecision ReviewService::record_decision(const std::string& session_id, const std::string& license_id,
                                              metrics::Verdict verdict, TimePoint started_at, TimePoint ended_at,
                                              bool assist_shown, std::optional<metrics::Verdict> assist_verdict) {
    const auto receipt = clock_();
    std::unique_lock lock(mutex_);
    const auto& st = state(session_id);
    const auto& queue = st.session.license_queue;
    if (std::find(queue.begin(), queue.end(), license_id) == queue.end()) {
        throw ValidationError("license '" + license_id + "' is not in session '" + session_id + "'");
    }
    if (st.decided.count(license_id)) {
        throw ConflictError("license '" + license_id + "' already has a decision in session '" + session_id + "'");
    }
    if (verdict == metrics::Verdict::NonSpecific) {
        throw ValidationError("verdict must be allows, denies or unclear");
    }
    if (assist_shown && st.session.group != Group::Assisted) {
        throw ValidationError("assist_shown is only valid in assisted sessions");
    }
    if (assist_verdict && !assist_shown) {
        throw ValidationError("assist_verdict given but assist_shown is false");
    }
    if (ended_at < started_at) {
        throw ValidationError("ended_at precedes started_at");
    }
    if (ended_at > receipt + kMaxClockSkew) {
        throw ValidationError("ended_at " + format_iso8601(ended_at) + " is later than server time " +
                              format_iso8601(receipt) + " plus allowed skew");
    }

    ReviewDecision d;
    d.session_id = session_id;
    d.license_id = license_id;
    d.verdict = verdict;
    d.started_at = started_at;
    d.ended_at = ended_at;
    d.duration_s = seconds_between(started_at, ended_at);
    d.assist_shown = assist_shown;
    d.assist_verdict = assist_verdict;
    append_log(tagged("decision", to_json(d)));
    apply_decision(d);
    return d;
}

std::vector<ReviewDecision> ReviewService::decisions(const std::string& session_id) const {
    std::shared_lock lock(mutex_);
    return state(session_id).decisions;
}

SessionSummary ReviewService::summary(const std::string& session_id) const {
    std::shared_lock lock(mutex_);
    const auto& st = state(session_id);
    if (st.decisions.empty()) {
        throw ValidationError("session '" + session_id + "' has no decisions yet");
    }
    std::vector<metrics::EvalOutcome> outcomes;
    double total = 0.0;
    SessionSummary s;
    s.session_id = session_id;
    s.group = st.session.group;
    for (const auto& d : st.decisions) {
        metrics::EvalOutcome o;
        o.license_id = d.license_id;
        o.extracted = d.verdict;
        o.ground_truth = license(d.license_id).label;
        o.correct = metrics::verdict_for(o.ground_truth) == d.verdict;
        outcomes.push_back(std::move(o));
        total += d.duration_s;
        s.n_assist_shown += d.assist_shown;
    }
    s.pa_pct = metrics::prediction_agreement(outcomes);
    s.n_decided = st.decisions.size();
    s.mean_duration_s = total / static_cast<double>(s.n_decided);
    s.n_pending = st.session.license_queue.size() - s.n_decided;
    return s;
}

// ---------------------------------------------------------------------------
// Assistant

Assistant::Assistant(corpus::Corpus corpus, prompts::TemplatePack pack, metrics::Ruleset ruleset,
                     modelgate::ModelRegistry registry, std::shared_ptr<modelgate::Backend> backend)
    : corpus_(index_corpus(std::move(corpus))), pack_(std::move(pack)), ruleset_(std::move(ruleset)),
      registry_(std::move(registry)), backend_(std::move(backend)) {
    if (!backend_) {
        throw ConfigError("assistant needs a backend");
    }
}

AssistPayload Assistant::analyze(const std::string& license_id, const std::string& model_id,
                                 const std::string& system_id, const std::string& user_id) {
    const auto it = corpus_.find(license_id);
    if (it == corpus_.end()) {
        throw NotFoundError("unknown license '" + license_id + "'");
    }
    const auto& cfg = registry_.model(model_id);
    const auto prompt = prompts::render(pack_, system_id, user_id, it->second);
    const auto fp = modelgate::request_fingerprint(cfg, prompt);
    {
        std::lock_guard lock(mutex_);
        if (const auto hit = cache_.find(fp); hit != cache_.end()) {
            return hit->second;
        }
    }
    const auto reply = backend_->complete(cfg, prompt);
    AssistPayload p;
    p.license_id = license_id;
    p.model_id = model_id;
    p.verdict = ruleset_.extract(reply.text);
    p.rationale_text = reply.text;
    p.latency_s = reply.latency_s;
    p.fingerprint = fp;
    std::lock_guard lock(mutex_);
    ++backend_calls_;
    return cache_.emplace(fp, std::move(p)).first->second;
}

std::size_t Assistant::backend_calls() const {
    std::lock_guard lock(mutex_);
    return backend_calls_;
}

} // namespace licensekit::review
