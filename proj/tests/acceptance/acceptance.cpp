// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 licensekit contributors

// Acceptance checks. One line per criterion, exit status 1 if any fails.
//
//   licensekit_acceptance [fixture_dir]

#include "licensekit/corpus.hpp"
#include "licensekit/error.hpp"
#include "licensekit/experiments.hpp"
#include "licensekit/hash.hpp"
#include "licensekit/metrics.hpp"
#include "licensekit/random.hpp"
#include "licensekit/reports.hpp"
#include "licensekit/review.hpp"
#include "licensekit/review_http.hpp"
#include "licensekit/stats.hpp"
#include "licensekit/text.hpp"

#include "../oracles.hpp"

#include <httplib.h>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <unistd.h>
#include <vector>

namespace fs = std::filesystem;
namespace lk = licensekit;
using lk::corpus::Label;
using lk::metrics::Verdict;

namespace {

fs::path g_fixtures = LICENSEKIT_FIXTURE_DIR;

// Tolerances and limits.
constexpr double kMeanTol = 1e-9;
constexpr double kCohenTol = 1e-12;
constexpr double kC1Seconds = 1.0;
constexpr double kC2Seconds = 30.0;
constexpr double kC4Seconds = 10.0;

struct Failure {
    std::string why;
};

void expect(bool ok, const std::string& why) {
    if (!ok) throw Failure{why};
}

fs::path scratch(const std::string& tag) {
    std::string templ = (fs::temp_directory_path() / ("lk_accept_" + tag + "_XXXXXX")).string();
    if (!mkdtemp(templ.data())) throw Failure{"cannot create temp dir"};
    return templ;
}

std::map<std::string, std::string> tree_hashes(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = lk::sha256_file(e.path());
    }
    return out;
}

// --- 1 ---------------------------------------------------------------------

std::string criterion_1() {
    const auto ruleset = lk::metrics::Ruleset::load(g_fixtures / "rulesets/en.json");
    const std::vector<std::vector<std::string>> phrasing = {
        {"Can be used commercially.", "It CAN be used commercially, with credit.", "commercial use is permitted"},
        {"Can't be used commercially.", "This license prohibits commercial use.", "noncommercial only"},
        {"It is not clear whether it is authorized for commercial use.", "The answer is unclear.",
         "Terms are ambiguous."},
        {"", "I do not know.", "The document lists a maintainer address."},
    };
    const Verdict verdicts[] = {Verdict::AllowsCommercial, Verdict::DeniesCommercial, Verdict::Unclear,
                                Verdict::NonSpecific};
    const Label labels[] = {Label::AllowsCommercial, Label::DeniesCommercial, Label::Unclear};
    lk::Rng rng(101);
    for (int trial = 0; trial < 200; ++trial) {
        const auto n = 1 + rng.below(60);
        std::vector<lk::metrics::EvalOutcome> outs;
        for (std::size_t i = 0; i < n; ++i) {
            const auto v = rng.below(4);
            std::string text = phrasing[v][rng.below(3)];
            if (!text.empty() && rng.below(3) == 0) text = "  " + lk::text::casefold(text) + "\n";
            auto o = lk::metrics::grade("L" + std::to_string(i), "m", "s", "u", text, labels[rng.below(3)],
                                        std::round(rng.uniform() * 5000) / 1000.0, ruleset);
            expect(o.extracted == verdicts[v], "extraction mismatch on '" + text + "'");
            o.ss = rng.uniform() * 1.2 - 0.2;
            outs.push_back(o);
        }
        const auto s = lk::metrics::summarize(outs);
        const auto want = oracle::metrics(outs);
        const auto dn = static_cast<double>(n);
        expect(std::llround(s.pa_pct * dn / 100) == want.correct, "PA count");
        expect(std::llround(s.dr_pct * dn / 100) == want.duplicate_extras, "DR count");
        expect(std::llround(s.nrr_pct * dn / 100) == want.nonspecific, "NRR count");
        expect(std::abs(s.pa_pct - want.pa) < kMeanTol, "PA value");
        expect(std::abs(s.dr_pct - want.dr) < kMeanTol, "DR value");
        expect(std::abs(s.nrr_pct - want.nrr) < kMeanTol, "NRR value");
        expect(std::abs(s.ars_s - want.ars) < kMeanTol, "ARS value");
        expect(s.ss_pct && std::abs(*s.ss_pct - want.ss) < kMeanTol, "mean SS value");
        expect(s.consistency_pct && std::abs(*s.consistency_pct - want.consistency) < kMeanTol, "consistency");
    }
    return "200 fixtures";
}

// --- 2 ---------------------------------------------------------------------

std::vector<double> draw(lk::Rng& rng, std::size_t n, int span) {
    std::vector<double> v(n);
    for (auto& x : v) x = static_cast<double>(rng.below(static_cast<std::uint64_t>(span)));
    return v;
}

std::string criterion_2() {
    lk::Rng rng(202);
    // (a) Wilcoxon exact vs sign enumeration; small integer ranges force ties and zeros.
    int degenerate = 0;
    for (int t = 0; t < 200; ++t) {
        const auto n = 1 + rng.below(10);
        const auto x = draw(rng, n, 8), y = draw(rng, n, 8);
        const auto want = oracle::wilcoxon_exact(x, y);
        if (want.n == 0) {
            bool threw = false;
            try {
                lk::stats::wilcoxon_signed_rank(x, y, lk::stats::WilcoxonMode::Exact);
            } catch (const lk::DegenerateError&) {
                threw = true;
            }
            expect(threw, "all-zero differences must be degenerate");
            ++degenerate;
            continue;
        }
        const auto got = lk::stats::wilcoxon_signed_rank(x, y, lk::stats::WilcoxonMode::Exact);
        expect(got.n_used == want.n, "wilcoxon n");
        expect(got.w == want.w && got.w_plus == want.w_plus, "wilcoxon W");
        expect(got.p_value == want.p, "wilcoxon exact p " + std::to_string(got.p_value) + " vs " +
                                          std::to_string(want.p));
    }
    // (b) Cliff's delta vs pair count, plus antisymmetry.
    for (int t = 0; t < 200; ++t) {
        const auto x = draw(rng, 1 + rng.below(30), 20), y = draw(rng, 1 + rng.below(30), 20);
        const auto d = lk::stats::cliffs_delta(x, y).delta;
        expect(d == oracle::cliffs_delta(x, y), "cliffs delta value");
        expect(lk::stats::cliffs_delta(y, x).delta == -d, "cliffs antisymmetry");
    }
    // (c) Cohen's d: one hand-worked case, then random cases and rescaling.
    {
        const std::vector<double> a{1, 2, 3, 4}, b{3, 4, 5, 6};
        // means 2.5 and 4.5, both variances 5/3, so d = -2 / sqrt(5/3)
        expect(std::abs(lk::stats::cohens_d(a, b) - (-2.0 / std::sqrt(5.0 / 3.0))) < kCohenTol, "cohen hand case");
    }
    for (int t = 0; t < 200; ++t) {
        std::vector<double> a(2 + rng.below(10)), b(2 + rng.below(10));
        for (auto& v : a) v = rng.uniform() * 10;
        for (auto& v : b) v = rng.uniform() * 10 + 1;
        const double d = lk::stats::cohens_d(a, b);
        expect(std::abs(d - oracle::cohens_d(a, b)) <= kCohenTol * std::max(1.0, std::abs(d)), "cohen formula");
        const double c = 0.5 + rng.uniform() * 20;
        auto sa = a, sb = b;
        for (auto& v : sa) v *= c;
        for (auto& v : sb) v *= c;
        expect(std::abs(lk::stats::cohens_d(sa, sb) - d) <= kCohenTol * std::max(1.0, std::abs(d)), "cohen scale");
    }
    // (d) SK-ESD vs exhaustive contiguous-partition search.
    for (int t = 0; t < 100; ++t) {
        const auto groups = 1 + rng.below(5);
        const auto folds = 2 + rng.below(7);
        std::vector<lk::stats::SampleGroup> in;
        std::vector<oracle::Group> ref;
        for (std::size_t g = 0; g < groups; ++g) {
            const double centre = rng.uniform() * 10;
            std::vector<double> v(folds);
            for (auto& x : v) x = centre + rng.uniform() * 3;
            in.push_back({"g" + std::to_string(g), v});
            ref.push_back({"g" + std::to_string(g), v});
        }
        const bool higher = rng.below(2) == 0;
        const auto table = lk::stats::sk_esd_rank(
            in, higher ? lk::stats::Direction::HigherBetter : lk::stats::Direction::LowerBetter);
        const auto want = oracle::sk_esd(ref, higher, lk::stats::kDefaultDThreshold);
        for (const auto& [id, rank] : want) {
            expect(table.rank_of(id) == rank, "sk-esd rank of " + id + " in instance " + std::to_string(t));
        }
    }
    return "wilcoxon 200 (" + std::to_string(degenerate) + " degenerate), cliffs 200, cohen 200, sk-esd 100";
}

// --- 3 ---------------------------------------------------------------------

std::string criterion_3() {
    const auto run = lk::reports::load_run(g_fixtures / "five_model_run");
    struct Row {
        const char* model;
        double pa, ss, dr, nrr, ars;
    };
    // Per-model values as published.
    const Row published[] = {
        {"ChatGPT4-175B", 18.06, 94.80, 0, 3.40, 1.3}, {"LLaMA2-70B", 40.28, 92.00, 1.87, 5.17, 1.0},
        {"Qwen1.5-110B", 59.72, 83.10, 0, 0.79, 3.8},  {"LawGPT-7B", 43.75, 50.25, 0, 0, 1.7},
        {"LicenseGPT", 64.30, 85.80, 5.71, 3.4, 2.40},
    };
    using lk::reports::Metric;
    auto avg = [&](const std::string& model, Metric m) {
        double s = 0;
        const auto v = run.fold_values(model, m);
        for (const auto& [fold, x] : v) s += x;
        return s / static_cast<double>(v.size());
    };
    for (const auto& r : published) {
        expect(std::abs(avg(r.model, Metric::PA) - r.pa) < 1e-9, std::string("PA of ") + r.model);
        expect(std::abs(avg(r.model, Metric::SS) - r.ss) < 1e-9, std::string("SS of ") + r.model);
        expect(std::abs(avg(r.model, Metric::DR) - r.dr) < 1e-9, std::string("DR of ") + r.model);
        expect(std::abs(avg(r.model, Metric::NRR) - r.nrr) < 1e-9, std::string("NRR of ") + r.model);
        expect(std::abs(avg(r.model, Metric::ARS) - r.ars) < 1e-9, std::string("ARS of ") + r.model);
    }
    const auto table = lk::reports::rank_report({run}, Metric::PA);
    const int qwen = table.rank_of("Qwen1.5-110B"), lawgpt = table.rank_of("LawGPT-7B");
    const int chatgpt = table.rank_of("ChatGPT4-175B");
    expect(qwen < lawgpt, "Qwen1.5 must rank strictly above LawGPT");
    expect(chatgpt == table.max_rank(), "ChatGPT-4 must be last");
    for (const auto& e : table.entries) {
        if (e.group_id != "ChatGPT4-175B") expect(e.rank < chatgpt, "ChatGPT-4 must be alone in last place");
    }
    return "Qwen1.5 " + std::to_string(qwen) + " < LawGPT " + std::to_string(lawgpt) + ", ChatGPT-4 " +
           std::to_string(chatgpt) + " of " + std::to_string(table.max_rank());
}

// --- 4 ---------------------------------------------------------------------

std::string criterion_4() {
    const auto manifest = lk::experiments::RunManifest::load(g_fixtures / "run.json");
    expect(manifest.model_ids.size() == 3 && manifest.k == 4, "fixture manifest shape");
    const auto a = scratch("det_a"), b = scratch("det_b");
    const auto ra = lk::experiments::run_cv_eval(manifest, a);
    lk::experiments::run_cv_eval(manifest, b);
    expect(ra.subset_size == 48, "48 records expected, got " + std::to_string(ra.subset_size));
    const auto ha = tree_hashes(a), hb = tree_hashes(b);
    expect(!ha.empty() && ha == hb, "result trees differ");
    fs::remove_all(a);
    fs::remove_all(b);
    return std::to_string(ha.size()) + " files identical";
}

// --- 5 ---------------------------------------------------------------------

std::string criterion_5() {
    const auto manifest = lk::experiments::RunManifest::load(g_fixtures / "grid.json");
    const auto out = scratch("grid");
    const auto grid = lk::experiments::run_prompt_grid(
        manifest, {"sys_v1", "sys_v2", "sys_v3", "sys_v4", "sys_v5", "sys_v6"}, {"user_v1", "user_v2", "user_v3"},
        out);
    const auto got = lk::read_file(out / "grid_pa.csv");
    const auto want = lk::read_file(g_fixtures / "expected/grid_pa.csv");
    expect(got == want, "grid_pa.csv differs from the stored heatmap");
    const auto& pa = grid.pa.at("licensegpt");
    expect(lk::text::fixed(pa[2][2], 1) == "64.3", "Sys_v3/User_v3 is " + lk::text::fixed(pa[2][2], 1));
    expect(lk::text::fixed(pa[3][2], 1) == "4.8", "Sys_v4/User_v3 is " + lk::text::fixed(pa[3][2], 1));
    fs::remove_all(out);
    return "18 cells match, 64.3 and 4.8 present";
}

// --- 6 ---------------------------------------------------------------------

std::string criterion_6() {
    const std::vector<std::pair<std::size_t, std::string>> expected_pairs = {
        {100, "39.3"}, {150, "42.7"}, {200, "44.4"}, {250, "52.8"},
        {300, "56.1"}, {350, "60.7"}, {400, "62.1"}, {450, "64.3"},
    };
    std::vector<std::size_t> sizes;
    std::map<std::size_t, std::string> endpoints;
    for (const auto& [size, pa] : expected_pairs) {
        sizes.push_back(size);
        endpoints[size] = "licensegpt-n" + std::to_string(size);
    }
    const auto out = scratch("ablation");
    const auto rows = lk::experiments::run_data_size_ablation(
        lk::experiments::RunManifest::load(g_fixtures / "ablation.json"), sizes, endpoints, out);
    expect(rows.size() == expected_pairs.size(), "row count");
    for (std::size_t i = 0; i < rows.size(); ++i) {
        expect(rows[i].size == expected_pairs[i].first && lk::text::fixed(rows[i].pa_pct, 1) == expected_pairs[i].second,
               "size " + std::to_string(rows[i].size) + " gave " + lk::text::fixed(rows[i].pa_pct, 1));
    }

    const auto mono_out = scratch("monotone");
    const auto mono = lk::experiments::run_data_size_ablation(
        lk::experiments::RunManifest::load(g_fixtures / "monotone.json"), {12, 24, 36},
        {{12, "mono-12"}, {24, "mono-24"}, {36, "mono-36"}}, mono_out);
    for (std::size_t i = 1; i < mono.size(); ++i) {
        expect(mono[i].pa_pct > mono[i - 1].pa_pct, "monotone fixture is not strictly increasing");
    }
    fs::remove_all(out);
    fs::remove_all(mono_out);
    return "8 pairs exact, monotone " + lk::text::fixed(mono[0].pa_pct, 1) + " < " +
           lk::text::fixed(mono[1].pa_pct, 1) + " < " + lk::text::fixed(mono[2].pa_pct, 1);
}

// --- 7 ---------------------------------------------------------------------

std::string criterion_7() {
    using lk::corpus::Format;
    const auto f = lk::corpus::filter_invalid(lk::corpus::load_corpus(g_fixtures / "filter_fixture.jsonl",
                                                                       Format::JsonLines));
    expect(f.report.input_count == 10, "input count");
    expect(f.report.removed_unreadable == 2, "unreadable " + std::to_string(f.report.removed_unreadable));
    expect(f.report.removed_expired == 1, "expired " + std::to_string(f.report.removed_expired));
    expect(f.report.removed_duplicate == 1, "duplicate " + std::to_string(f.report.removed_duplicate));
    expect(f.report.output_count == 6 && f.corpus.size() == 6, "output " + std::to_string(f.corpus.size()));
    const auto s =
        lk::corpus::category_stats(lk::corpus::load_corpus(g_fixtures / "category_metadata.jsonl", Format::JsonLines));
    expect(s.general == 146 && s.customized == 186 && s.official_terms == 168 && s.total == 500,
           "category counts " + std::to_string(s.general) + "/" + std::to_string(s.customized) + "/" +
               std::to_string(s.official_terms) + "/" + std::to_string(s.total));
    return "filter 10 -> 6, categories 146/186/168/500";
}

// --- 8 ---------------------------------------------------------------------

std::string criterion_8() {
    using namespace std::chrono;
    const auto store = scratch("review");
    const auto now = lk::review::parse_iso8601("2026-03-01T12:00:00Z");
    lk::review::ReviewService service(
        lk::corpus::load_corpus(g_fixtures / "review_corpus.jsonl", lk::corpus::Format::JsonLines), store,
        [now] { return now; });
    lk::review::ReviewApi api(service, nullptr);
    lk::review::ReviewServer server(api);
    const int port = server.bind("127.0.0.1", 0);
    std::thread serving([&] { server.run(); });
    server.wait_until_ready();

    std::string detail;
    try {
        httplib::Client cli("127.0.0.1", port);
        auto post = [&](const std::string& path, const nlohmann::json& body) {
            auto r = cli.Post(path, body.dump(), "application/json");
            expect(static_cast<bool>(r), "no response from " + path);
            expect(r->status == 201, path + " answered " + std::to_string(r->status) + ": " + r->body);
            return nlohmann::json::parse(r->body);
        };
        const auto session = post("/sessions", {{"reviewer_id", "r1"},
                                                {"group", "manual"},
                                                {"license_ids", {"rev-nc", "rev-by", "rev-tos"}}});
        const std::string sid = session.at("session_id");
        const std::map<std::string, std::string> truth = {
            {"rev-nc", "denies"}, {"rev-by", "allows"}, {"rev-tos", "unclear"}};
        int seconds = 5;
        auto start = now - minutes(30);
        for (;;) {
            auto r = cli.Get("/sessions/" + sid + "/next");
            expect(r && r->status == 200, "next failed");
            const auto item = nlohmann::json::parse(r->body);
            if (item.contains("done")) break;
            const std::string id = item.at("license_id");
            post("/sessions/" + sid + "/decisions", {{"license_id", id},
                                                     {"verdict", truth.at(id)},
                                                     {"started_at", lk::review::format_iso8601(start)},
                                                     {"ended_at", lk::review::format_iso8601(start + seconds * 1s)},
                                                     {"assist_shown", false}});
            start += minutes(1);
            ++seconds;
        }
        expect(seconds == 8, "expected three decisions");
        auto r = cli.Get("/sessions/" + sid + "/summary");
        expect(r && r->status == 200, "summary failed");
        const auto summary = nlohmann::json::parse(r->body);
        expect(summary.at("pa_pct").get<double>() == 100.0, "PA " + summary.at("pa_pct").dump());
        expect(summary.at("mean_duration_s").get<double>() == 6.0, "mean " + summary.at("mean_duration_s").dump());
        expect(summary.at("n_decided").get<int>() == 3, "n_decided");
        detail = "PA " + summary.at("pa_pct").dump() + ", mean " + summary.at("mean_duration_s").dump() + " s";
    } catch (...) {
        server.stop();
        serving.join();
        fs::remove_all(store);
        throw;
    }
    server.stop();
    serving.join();
    fs::remove_all(store);
    return detail;
}

} // namespace

int main(int argc, char** argv) {
    if (argc > 1) g_fixtures = argv[1];
    struct Criterion {
        int id;
        const char* name;
        std::function<std::string()> run;
        double limit_s; // 0: no limit
    };
    const std::vector<Criterion> criteria = {
        {1, "metric oracle equivalence", criterion_1, kC1Seconds},
        {2, "statistics oracles", criterion_2, kC2Seconds},
        {3, "published-value summary ranking", criterion_3, 0},
        {4, "replay determinism", criterion_4, kC4Seconds},
        {5, "prompt grid heatmap", criterion_5, 0},
        {6, "data-size ablation", criterion_6, 0},
        {7, "corpus pipeline counts", criterion_7, 0},
        {8, "review service over HTTP", criterion_8, 0},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = true;
        try {
            detail = c.run();
        } catch (const Failure& f) {
            ok = false;
            detail = f.why;
        } catch (const std::exception& e) {
            ok = false;
            detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (ok && c.limit_s > 0 && secs >= c.limit_s) {
            ok = false;
            detail += " (over the " + lk::text::fixed(c.limit_s, 0) + " s limit)";
        }
        failed += !ok;
        std::printf("[%s] %d %s (%.3f s): %s\n", ok ? "PASS" : "FAIL", c.id, c.name, secs, detail.c_str());
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
