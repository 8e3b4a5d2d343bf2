// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 licensekit contributors
//
// licensekit command-line interface.

#include "licensekit/corpus.hpp"
#include "licensekit/error.hpp"
#include "licensekit/experiments.hpp"
#include "licensekit/hash.hpp"
#include "licensekit/metrics.hpp"
#include "licensekit/modelgate.hpp"
#include "licensekit/prompts.hpp"
#include "licensekit/random.hpp"
#include "licensekit/reports.hpp"
#include "licensekit/review.hpp"
#include "licensekit/review_http.hpp"
#include "licensekit/text.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
namespace lk = licensekit;

namespace {

struct CorpusArgs {
    std::string input;
    std::string format = "jsonl";

    void add(CLI::App* app) {
        app->add_option("--input,-i", input, "Corpus file")->required();
        app->add_option("--format", format, "jsonl or csv")->capture_default_str();
    }
    lk::corpus::Corpus load() const { return lk::corpus::load_corpus(input, lk::corpus::format_from_string(format)); }
};

void write_or_print(const std::string& out, const std::string& data) {
    if (out.empty() || out == "-") {
        std::cout << data;
    } else {
        lk::write_file(out, data);
    }
}

std::string corpus_jsonl(const lk::corpus::Corpus& c) {
    std::ostringstream os;
    lk::corpus::write_jsonl(os, c);
    return os.str();
}

std::vector<std::size_t> parse_sizes(const std::string& s) {
    std::vector<std::size_t> out;
    for (const auto& part : lk::text::split(s, ',')) {
        const auto t = std::string(lk::text::trim(part));
        if (t.empty()) {
            continue;
        }
        try {
            out.push_back(std::stoull(t));
        } catch (const std::logic_error&) {
            throw lk::ParseError("not a size: '" + t + "'");
        }
    }
    return out;
}

std::vector<std::string> parse_list(const std::string& s) {
    std::vector<std::string> out;
    for (const auto& part : lk::text::split(s, ',')) {
        const auto t = std::string(lk::text::trim(part));
        if (!t.empty()) {
            out.push_back(t);
        }
    }
    return out;
}

void print_summary_table(const std::vector<std::pair<std::string, lk::metrics::MetricSummary>>& rows) {
    std::cout << "source,n,pa_pct,dr_pct,nrr_pct,ss_pct,consistency_pct,ars_s\n";
    auto opt = [](const std::optional<double>& v) { return v ? lk::text::fixed(*v, 2) : std::string(); };
    for (const auto& [name, s] : rows) {
        std::cout << name << ',' << s.n << ',' << lk::text::fixed(s.pa_pct, 2) << ',' << lk::text::fixed(s.dr_pct, 2)
                  << ',' << lk::text::fixed(s.nrr_pct, 2) << ',' << opt(s.ss_pct) << ',' << opt(s.consistency_pct)
                  << ',' << lk::text::fixed(s.ars_s, 2) << '\n';
    }
}

// ---------------------------------------------------------------------------
// rank / compare (shared by the top-level and eval subcommands)

struct RankArgs {
    std::vector<std::string> runs;
    std::string metric = "pa";
    std::string direction;
    double threshold = lk::stats::kDefaultDThreshold;
    std::string out;

    void add(CLI::App* app) {
        app->add_option("--run,-r", runs, "Run directory or summary.csv (repeatable)")->required();
        app->add_option("--metric,-m", metric, "pa, dr, nrr, ss, consistency or ars")->capture_default_str();
        app->add_option("--direction", direction, "higher or lower (default depends on metric)");
        app->add_option("--threshold", threshold, "Negligible Cohen's d bound")->capture_default_str();
        app->add_option("--out,-o", out, "Directory for rank_<metric>.md and .csv");
    }

    int run() const {
        std::vector<lk::reports::LoadedRun> loaded;
        for (const auto& r : runs) {
            loaded.push_back(lk::reports::load_run(r));
        }
        const auto m = lk::reports::metric_from_string(metric);
        std::optional<lk::stats::Direction> dir;
        if (!direction.empty()) {
            dir = lk::stats::direction_from_string(direction);
        }
        const auto table = lk::reports::rank_report(loaded, m, dir, threshold);
        const auto md = lk::reports::render_rank_markdown(table);
        std::cout << md;
        if (!out.empty()) {
            const auto name = "rank_" + std::string(lk::reports::to_string(m));
            lk::write_file(fs::path(out) / (name + ".md"), md);
            lk::write_file(fs::path(out) / (name + ".csv"), lk::reports::render_rank_csv(table));
        }
        return 0;
    }
};

struct CompareArgs {
    std::string run_a;
    std::string run_b;
    double alpha = 0.05;
    std::string metrics;
    std::size_t family_size = 0;
    std::string mode = "auto";
    std::string out;

    void add(CLI::App* app) {
        app->add_option("--run-a", run_a, "Baseline run")->required();
        app->add_option("--run-b", run_b, "Candidate run")->required();
        app->add_option("--alpha", alpha, "Family-wise significance level")->capture_default_str();
        app->add_option("--metrics", metrics, "Comma-separated metrics (default pa,ss,dr,nrr,ars)");
        app->add_option("--family-size", family_size, "Override the Bonferroni family size");
        app->add_option("--mode", mode, "Wilcoxon p-value: auto, exact or approx")->capture_default_str();
        app->add_option("--out,-o", out, "Directory for compare.md and compare.csv");
    }

    int run() const {
        lk::reports::CompareOptions opts;
        opts.alpha = alpha;
        for (const auto& m : parse_list(metrics)) {
            opts.metrics.push_back(lk::reports::metric_from_string(m));
        }
        if (family_size > 0) {
            opts.family_size = family_size;
        }
        opts.mode = lk::stats::wilcoxon_mode_from_string(mode);
        const auto results = lk::reports::compare_report(lk::reports::load_run(run_a), lk::reports::load_run(run_b), opts);
        const auto md = lk::reports::render_compare_markdown(results);
        std::cout << md;
        if (!out.empty()) {
            lk::write_file(fs::path(out) / "compare.md", md);
            lk::write_file(fs::path(out) / "compare.csv", lk::reports::render_compare_csv(results));
        }
        return 0;
    }
};

// ---------------------------------------------------------------------------
// eval

struct ManifestArgs {
    std::string manifest;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> k;
    std::optional<double> fraction;
    std::optional<std::size_t> concurrency;
    std::string backend;
    std::string replay;
    std::string run_id;
    std::string models;
    std::string embedder;

    void add(CLI::App* app) {
        app->add_option("--manifest", manifest, "Run manifest json")->required();
        app->add_option("--out,-o", out, "Results directory")->required();
        app->add_option("--seed", seed, "Override seed");
        app->add_option("--k", k, "Override fold count");
        app->add_option("--fraction", fraction, "Override subset fraction");
        app->add_option("--concurrency", concurrency, "Override concurrency_limit");
        app->add_option("--backend", backend, "Override backend: live, record or replay");
        app->add_option("--replay", replay, "Override replay_path");
        app->add_option("--run-id", run_id, "Override run_id");
        app->add_option("--models", models, "Override model_ids (comma-separated)");
        app->add_option("--embedder", embedder, "Override embedder_id");
    }

    lk::experiments::RunManifest load() const {
        auto m = lk::experiments::RunManifest::load(manifest);
        if (seed) m.seed = *seed;
        if (k) m.k = *k;
        if (fraction) m.fraction = *fraction;
        if (concurrency) m.concurrency_limit = *concurrency;
        if (!backend.empty()) m.backend = lk::experiments::backend_mode_from_string(backend);
        if (!replay.empty()) m.replay_path = fs::absolute(replay).string();
        if (!run_id.empty()) m.run_id = run_id;
        if (!models.empty()) m.model_ids = parse_list(models);
        if (!embedder.empty()) m.embedder_id = embedder;
        return m;
    }
};

int eval_run(const ManifestArgs& a) {
    const auto m = a.load();
    const auto r = lk::experiments::run_cv_eval(m, a.out);
    std::cout << "run " << r.run_id << ": " << r.cells.size() << " cells over " << r.subset_size
              << " licenses written to " << a.out << '\n';
    std::cout << lk::read_file(fs::path(a.out) / "summary.csv");
    return 0;
}

int eval_grid(const ManifestArgs& a, const std::string& systems, const std::string& users) {
    const auto m = a.load();
    const auto g = lk::experiments::run_prompt_grid(m, parse_list(systems), parse_list(users), a.out);
    std::cout << lk::experiments::render_grid_csv(g);
    return 0;
}

int eval_ablate(const ManifestArgs& a, const std::string& sizes, const std::vector<std::string>& endpoints) {
    const auto m = a.load();
    std::map<std::size_t, std::string> ep;
    for (const auto& e : endpoints) {
        const auto eq = e.find('=');
        if (eq == std::string::npos) {
            throw lk::ParseError("endpoint must look like SIZE=MODEL_ID (got '" + e + "')");
        }
        const auto size = parse_sizes(e.substr(0, eq));
        if (size.size() != 1) {
            throw lk::ParseError("endpoint must look like SIZE=MODEL_ID (got '" + e + "')");
        }
        ep[size.front()] = e.substr(eq + 1);
    }
    const auto rows = lk::experiments::run_data_size_ablation(m, parse_sizes(sizes), ep, a.out);
    std::cout << lk::experiments::render_ablation_csv(rows);
    return 0;
}

// ---------------------------------------------------------------------------
// serve

std::atomic<lk::review::ReviewServer*> g_server{nullptr};

void on_signal(int) {
    if (auto* s = g_server.load()) {
        s->stop();
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"licensekit: dataset license compliance evaluation toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "licensekit 0.1.0");
    std::function<int()> action;

    // corpus -----------------------------------------------------------------
    auto* corpus = app.add_subcommand("corpus", "Load, clean, split and export license corpora");
    corpus->require_subcommand(1);

    CorpusArgs load_args;
    auto* c_load = corpus->add_subcommand("load", "Parse a corpus and report record status counts");
    load_args.add(c_load);
    c_load->callback([&] {
        action = [&] {
            const auto c = load_args.load();
            std::map<std::string, std::size_t> by_status;
            for (const auto& r : c) {
                ++by_status[std::string(lk::corpus::to_string(r.status))];
            }
            std::cout << "records: " << c.size() << '\n';
            for (const auto& [s, n] : by_status) {
                std::cout << s << ": " << n << '\n';
            }
            return 0;
        };
    });

    CorpusArgs filter_args;
    std::string filter_out;
    auto* c_filter = corpus->add_subcommand("filter", "Drop unreadable, expired and duplicate licenses");
    filter_args.add(c_filter);
    c_filter->add_option("--out,-o", filter_out, "Output jsonl (default stdout)");
    c_filter->callback([&] {
        action = [&] {
            const auto r = lk::corpus::filter_invalid(filter_args.load());
            write_or_print(filter_out, corpus_jsonl(r.corpus));
            std::cerr << "input " << r.report.input_count << ", removed unreadable " << r.report.removed_unreadable
                      << ", expired " << r.report.removed_expired << ", duplicate " << r.report.removed_duplicate
                      << ", output " << r.report.output_count << '\n';
            return 0;
        };
    });

    CorpusArgs stats_args;
    auto* c_stats = corpus->add_subcommand("stats", "Count licenses per category");
    stats_args.add(c_stats);
    c_stats->callback([&] {
        action = [&] {
            const auto s = lk::corpus::category_stats(stats_args.load());
            std::cout << "category,count\n"
                      << "general," << s.general << "\ncustomized," << s.customized << "\nofficial_terms,"
                      << s.official_terms << "\ntotal," << s.total << '\n';
            return 0;
        };
    });

    CorpusArgs subset_args;
    double subset_fraction = 0.1;
    std::uint64_t subset_seed = 0;
    bool subset_shrink = false;
    std::string subset_out;
    auto* c_subset = corpus->add_subcommand("subset", "Balanced per-label undersample (seed derives the 'subset' stream)");
    subset_args.add(c_subset);
    c_subset->add_option("--fraction", subset_fraction)->capture_default_str();
    c_subset->add_option("--seed", subset_seed)->capture_default_str();
    c_subset->add_flag("--allow-shrink", subset_shrink, "Shrink to the smallest class instead of failing");
    c_subset->add_option("--out,-o", subset_out, "Output jsonl (default stdout)");
    c_subset->callback([&] {
        action = [&] {
            const auto s = lk::corpus::balanced_subset(subset_args.load(), subset_fraction,
                                                       lk::derive_seed(subset_seed, "subset"), subset_shrink);
            write_or_print(subset_out, corpus_jsonl(s));
            return 0;
        };
    });

    CorpusArgs folds_args;
    std::size_t folds_k = 10;
    std::uint64_t folds_seed = 0;
    std::string folds_out;
    auto* c_folds = corpus->add_subcommand("folds", "Stratified k-fold assignment as license_id,fold csv");
    folds_args.add(c_folds);
    c_folds->add_option("--k", folds_k)->capture_default_str();
    c_folds->add_option("--seed", folds_seed)->capture_default_str();
    c_folds->add_option("--out,-o", folds_out, "Output csv (default stdout)");
    c_folds->callback([&] {
        action = [&] {
            const auto c = folds_args.load();
            const auto f = lk::corpus::stratified_folds(c, folds_k, lk::derive_seed(folds_seed, "folds"));
            std::string out = "license_id,fold\n";
            for (const auto& r : c) {
                if (f.contains(r.id)) {
                    out += r.id + "," + std::to_string(f.fold_of(r.id)) + "\n";
                }
            }
            write_or_print(folds_out, out);
            return 0;
        };
    });

    CorpusArgs export_args;
    std::size_t export_k = 10;
    std::uint64_t export_seed = 0;
    std::size_t export_held_out = 0;
    std::string export_pack, export_system, export_user, export_out;
    auto* c_export = corpus->add_subcommand("export-instructions", "Instruction fine-tune examples from the training folds");
    export_args.add(c_export);
    c_export->add_option("--k", export_k)->capture_default_str();
    c_export->add_option("--seed", export_seed)->capture_default_str();
    c_export->add_option("--held-out", export_held_out, "Fold left out of the training set")->capture_default_str();
    c_export->add_option("--pack", export_pack, "Template pack json")->required();
    c_export->add_option("--system", export_system)->required();
    c_export->add_option("--user", export_user)->required();
    c_export->add_option("--out,-o", export_out, "Output jsonl (default stdout)");
    c_export->callback([&] {
        action = [&] {
            const auto c = export_args.load();
            const auto pack = lk::prompts::TemplatePack::load(export_pack);
            const auto f = lk::corpus::stratified_folds(c, export_k, lk::derive_seed(export_seed, "folds"));
            std::ostringstream os;
            lk::corpus::write_instruction_jsonl(
                os, lk::corpus::export_instruction_dataset(c, f, export_held_out, pack, export_system, export_user));
            write_or_print(export_out, os.str());
            return 0;
        };
    });

    CorpusArgs ablate_args;
    std::string ablate_sizes, ablate_pack, ablate_system, ablate_user, ablate_out;
    std::uint64_t ablate_seed = 0;
    auto* c_ablate = corpus->add_subcommand("ablate-subsets", "Nested training subsets for a data-size ablation");
    ablate_args.add(c_ablate);
    c_ablate->add_option("--sizes", ablate_sizes, "Comma-separated increasing sizes")->required();
    c_ablate->add_option("--seed", ablate_seed)->capture_default_str();
    c_ablate->add_option("--pack", ablate_pack, "Template pack json")->required();
    c_ablate->add_option("--system", ablate_system)->required();
    c_ablate->add_option("--user", ablate_user)->required();
    c_ablate->add_option("--out-dir", ablate_out, "Directory for train_<size>.jsonl")->required();
    c_ablate->callback([&] {
        action = [&] {
            const auto sizes = parse_sizes(ablate_sizes);
            const auto pack = lk::prompts::TemplatePack::load(ablate_pack);
            const auto subsets = lk::corpus::subsample_for_ablation(ablate_args.load(), sizes,
                                                                    lk::derive_seed(ablate_seed, "ablation"));
            for (std::size_t i = 0; i < sizes.size(); ++i) {
                std::ostringstream os;
                lk::corpus::write_instruction_jsonl(
                    os, lk::corpus::instruction_examples(subsets[i], pack, ablate_system, ablate_user));
                const auto path = fs::path(ablate_out) / ("train_" + std::to_string(sizes[i]) + ".jsonl");
                lk::write_file(path, os.str());
                std::cout << path.string() << ": " << subsets[i].size() << " examples\n";
            }
            return 0;
        };
    });

    // prompts ----------------------------------------------------------------
    auto* prompts = app.add_subcommand("prompts", "Inspect and render prompt templates");
    prompts->require_subcommand(1);
    std::string list_pack;
    auto* p_list = prompts->add_subcommand("list", "List templates in a pack");
    p_list->add_option("--pack", list_pack)->required();
    p_list->callback([&] {
        action = [&] {
            const auto pack = lk::prompts::TemplatePack::load(list_pack);
            std::cout << "id,kind,origin\n";
            for (const auto& t : pack.templates()) {
                std::cout << t.id << ',' << lk::prompts::to_string(t.kind) << ',' << lk::prompts::to_string(t.origin)
                          << '\n';
            }
            return 0;
        };
    });

    std::string render_pack, render_system, render_user, render_license;
    CorpusArgs render_corpus;
    auto* p_render = prompts->add_subcommand("render", "Render one system/user pair for a license");
    p_render->add_option("--pack", render_pack)->required();
    p_render->add_option("--system", render_system)->required();
    p_render->add_option("--user", render_user)->required();
    p_render->add_option("--license-id", render_license)->required();
    render_corpus.add(p_render);
    p_render->callback([&] {
        action = [&] {
            const auto pack = lk::prompts::TemplatePack::load(render_pack);
            for (const auto& r : render_corpus.load()) {
                if (r.id == render_license) {
                    const auto p = lk::prompts::render(pack, render_system, render_user, r);
                    std::cout << "[system]\n" << p.system_text << "\n\n[user]\n" << p.user_text << '\n';
                    return 0;
                }
            }
            throw lk::NotFoundError("license '" + render_license + "' is not in " + render_corpus.input);
        };
    });

    // models -----------------------------------------------------------------
    auto* models = app.add_subcommand("models", "Model registry tools");
    models->require_subcommand(1);
    std::string models_registry;
    auto* m_list = models->add_subcommand("list", "List configured models and embedders");
    m_list->add_option("--registry", models_registry)->required();
    m_list->callback([&] {
        action = [&] {
            const auto reg = lk::modelgate::ModelRegistry::load(models_registry);
            std::cout << "kind,id,base_url,auth_env\n";
            for (const auto& m : reg.models()) {
                std::cout << "model," << m.model_id << ',' << m.base_url << ',' << m.auth_env.value_or("") << '\n';
            }
            for (const auto& e : reg.embedders()) {
                std::cout << "embedder," << e.embedder_id << ',' << e.base_url << ',' << e.auth_env.value_or("")
                          << '\n';
            }
            return 0;
        };
    });

    std::string probe_registry, probe_model, probe_replay;
    auto* m_probe = models->add_subcommand("probe", "Send one trivial request to a model");
    m_probe->add_option("--registry", probe_registry)->required();
    m_probe->add_option("--model", probe_model)->required();
    m_probe->add_option("--replay", probe_replay, "Answer from a replay store instead of the network");
    m_probe->callback([&] {
        action = [&] {
            const auto reg = lk::modelgate::ModelRegistry::load(probe_registry);
            const auto& cfg = reg.model(probe_model);
            std::unique_ptr<lk::modelgate::Backend> backend;
            if (probe_replay.empty()) {
                backend = std::make_unique<lk::modelgate::HttpBackend>(lk::modelgate::make_http_transport());
            } else {
                backend = lk::modelgate::replay_session(probe_replay);
            }
            lk::prompts::RenderedPrompt p;
            p.system_text = "You are a connectivity check.";
            p.user_text = "Reply with OK.";
            p.system_id = "probe";
            p.user_id = "probe";
            const auto r = backend->complete(cfg, p);
            std::cout << "model " << cfg.model_id << " answered in " << lk::text::fixed(r.latency_s, 3) << " s: "
                      << r.text << '\n';
            return 0;
        };
    });

    // metrics ----------------------------------------------------------------
    std::vector<std::string> metric_files;
    std::string dr_mode = "extras";
    bool metric_pooled = false;
    auto* metrics_cmd = app.add_subcommand("metrics", "Summarize outcome jsonl files");
    metrics_cmd->add_option("outcomes", metric_files, "Outcome jsonl files")->required();
    metrics_cmd->add_option("--dr-mode", dr_mode, "extras or max-class")->capture_default_str();
    metrics_cmd->add_flag("--pooled", metric_pooled, "One row over all files instead of one per file");
    metrics_cmd->callback([&] {
        action = [&] {
            const auto mode = lk::metrics::duplication_mode_from_string(dr_mode);
            std::vector<std::pair<std::string, lk::metrics::MetricSummary>> rows;
            std::vector<lk::metrics::EvalOutcome> all;
            for (const auto& f : metric_files) {
                auto o = lk::metrics::load_outcomes(f);
                if (metric_pooled) {
                    all.insert(all.end(), o.begin(), o.end());
                } else {
                    rows.emplace_back(f, lk::metrics::summarize(o, mode));
                }
            }
            if (metric_pooled) {
                rows.emplace_back("pooled", lk::metrics::summarize(all, mode));
            }
            print_summary_table(rows);
            return 0;
        };
    });

    // rank / compare ---------------------------------------------------------
    RankArgs rank_args;
    auto* rank_cmd = app.add_subcommand("rank", "SK-ESD ranking of models across runs");
    rank_args.add(rank_cmd);
    rank_cmd->callback([&] { action = [&] { return rank_args.run(); }; });

    CompareArgs compare_args;
    auto* compare_cmd = app.add_subcommand("compare", "Pairwise Wilcoxon / Cliff's delta comparison of two runs");
    compare_args.add(compare_cmd);
    compare_cmd->callback([&] { action = [&] { return compare_args.run(); }; });

    // eval -------------------------------------------------------------------
    auto* eval = app.add_subcommand("eval", "Manifest-driven experiments");
    eval->require_subcommand(1);

    ManifestArgs run_args;
    auto* e_run = eval->add_subcommand("run", "Cross-validated evaluation of the manifest's models");
    run_args.add(e_run);
    e_run->callback([&] { action = [&] { return eval_run(run_args); }; });

    RankArgs erank_args;
    auto* e_rank = eval->add_subcommand("rank", "Same as 'licensekit rank'");
    erank_args.add(e_rank);
    e_rank->callback([&] { action = [&] { return erank_args.run(); }; });

    CompareArgs ecompare_args;
    auto* e_compare = eval->add_subcommand("compare", "Same as 'licensekit compare'");
    ecompare_args.add(e_compare);
    e_compare->callback([&] { action = [&] { return ecompare_args.run(); }; });

    ManifestArgs grid_args;
    std::string grid_systems, grid_users;
    auto* e_grid = eval->add_subcommand("grid", "PA heatmap over system x user prompt pairs");
    grid_args.add(e_grid);
    e_grid->add_option("--systems", grid_systems, "Comma-separated system template ids")->required();
    e_grid->add_option("--users", grid_users, "Comma-separated user template ids")->required();
    e_grid->callback([&] { action = [&] { return eval_grid(grid_args, grid_systems, grid_users); }; });

    ManifestArgs ablate_eval_args;
    std::string ablate_eval_sizes;
    std::vector<std::string> ablate_endpoints;
    auto* e_ablate = eval->add_subcommand("ablate", "PA per fine-tune data size");
    ablate_eval_args.add(e_ablate);
    e_ablate->add_option("--sizes", ablate_eval_sizes, "Comma-separated increasing sizes")->required();
    e_ablate->add_option("--endpoint", ablate_endpoints, "SIZE=MODEL_ID (repeatable)")->required();
    e_ablate->callback(
        [&] { action = [&] { return eval_ablate(ablate_eval_args, ablate_eval_sizes, ablate_endpoints); }; });

    // serve ------------------------------------------------------------------
    std::string serve_host = "127.0.0.1";
    int serve_port = 8080;
    CorpusArgs serve_corpus;
    std::string serve_registry, serve_pack, serve_ruleset, serve_store, serve_replay, serve_token;
    auto* serve = app.add_subcommand("serve", "Review service HTTP API");
    serve->add_option("--host", serve_host)->capture_default_str();
    serve->add_option("--port", serve_port, "0 picks a free port")->capture_default_str();
    serve->add_option("--corpus", serve_corpus.input, "Ground-truth corpus")->required();
    serve->add_option("--format", serve_corpus.format)->capture_default_str();
    serve->add_option("--registry", serve_registry, "Model registry (enables /analyze)");
    serve->add_option("--pack", serve_pack, "Template pack (enables /analyze)");
    serve->add_option("--ruleset", serve_ruleset, "Verdict ruleset (enables /analyze)");
    serve->add_option("--store", serve_store, "Directory for the review log")->required();
    serve->add_option("--replay", serve_replay, "Answer /analyze from a replay store");
    serve->add_option("--token", serve_token, "Require this bearer token");
    serve->callback([&] {
        action = [&] {
            lk::review::ReviewService service(serve_corpus.load(), serve_store);
            std::unique_ptr<lk::review::Assistant> assistant;
            if (!serve_registry.empty() && !serve_pack.empty() && !serve_ruleset.empty()) {
                std::shared_ptr<lk::modelgate::Backend> backend;
                if (serve_replay.empty()) {
                    backend = std::make_shared<lk::modelgate::HttpBackend>(lk::modelgate::make_http_transport());
                } else {
                    backend = lk::modelgate::replay_session(serve_replay);
                }
                assistant = std::make_unique<lk::review::Assistant>(
                    serve_corpus.load(), lk::prompts::TemplatePack::load(serve_pack),
                    lk::metrics::Ruleset::load(serve_ruleset), lk::modelgate::ModelRegistry::load(serve_registry),
                    backend);
            }
            lk::review::ApiOptions opts;
            if (!serve_token.empty()) {
                opts.bearer_token = serve_token;
            }
            lk::review::ReviewApi api(service, assistant.get(), opts);
            lk::review::ReviewServer server(api);
            const int port = server.bind(serve_host, serve_port);
            g_server.store(&server);
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            std::cout << "listening on http://" << serve_host << ':' << port << std::endl;
            server.run();
            g_server.store(nullptr);
            return 0;
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    try {
        return action ? action() : 0;
    } catch (const lk::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
