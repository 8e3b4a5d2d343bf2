// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 licensekit contributors

#include "licensekit/reports.hpp"

#include "licensekit/csv.hpp"
#include "licensekit/error.hpp"
#include "licensekit/hash.hpp"
#include "licensekit/text.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>

namespace licensekit::reports {

namespace fs = std::filesystem;

std::string_view to_string(Metric m) {
    switch (m) {
    case Metric::PA:
        return "pa";
    case Metric::DR:
        return "dr";
    case Metric::NRR:
        return "nrr";
    case Metric::SS:
        return "ss";
    case Metric::Consistency:
        return "consistency";
    case Metric::ARS:
        return "ars";
    }
    return "pa";
}

Metric metric_from_string(std::string_view s) {
    const auto f = text::casefold(s);
    for (const auto m : {Metric::PA, Metric::DR, Metric::NRR, Metric::SS, Metric::Consistency, Metric::ARS}) {
        if (f == to_string(m)) {
            return m;
        }
    }
    throw ParseError("unknown metric '" + std::string(s) + "' (expected pa, dr, nrr, ss, consistency or ars)");
}

stats::Direction default_direction(Metric m) {
    switch (m) {
    case Metric::PA:
    case Metric::SS:
    case Metric::Consistency:
        return stats::Direction::HigherBetter;
    case Metric::DR:
    case Metric::NRR:
    case Metric::ARS:
        return stats::Direction::LowerBetter;
    }
    return stats::Direction::HigherBetter;
}

std::string_view display_name(Metric m) {
    switch (m) {
    case Metric::PA:
        return "PA";
    case Metric::DR:
        return "DR";
    case Metric::NRR:
        return "NRR";
    case Metric::SS:
        return "SS";
    case Metric::Consistency:
        return "Consistency";
    case Metric::ARS:
        return "ARS";
    }
    return "PA";
}

std::optional<double> metric_value(const metrics::MetricSummary& s, Metric m) {
    switch (m) {
    case Metric::PA:
        return s.pa_pct;
    case Metric::DR:
        return s.dr_pct;
    case Metric::NRR:
        return s.nrr_pct;
    case Metric::SS:
        return s.ss_pct;
    case Metric::Consistency:
        return s.consistency_pct;
    case Metric::ARS:
        return s.ars_s;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// summary.csv

std::string render_summary_csv(const std::vector<SummaryRow>& rows) {
    std::string out(kSummaryHeader);
    out += '\n';
    auto opt = [](const std::optional<double>& v) { return v ? text::fixed(*v, 4) : std::string(); };
    for (const auto& r : rows) {
        const auto& s = r.summary;
        out += csv::format_row({r.run_hash, r.model_id, std::to_string(r.fold), std::to_string(s.n),
                                text::fixed(s.pa_pct, 4), text::fixed(s.dr_pct, 4), text::fixed(s.nrr_pct, 4),
                                opt(s.ss_pct), opt(s.consistency_pct), text::fixed(s.ars_s, 4)});
    }
    return out;
}

namespace {

double parse_number(const std::string& field, std::string_view source, std::size_t line, const char* column) {
    try {
        std::size_t used = 0;
        const double v = std::stod(field, &used);
        if (used != field.size()) {
            throw std::invalid_argument(field);
        }
        return v;
    } catch (const std::logic_error&) {
        throw ParseError(std::string(source) + ":" + std::to_string(line) + ": column " + column +
                         " is not a number ('" + field + "')");
    }
}

std::size_t parse_count(const std::string& field, std::string_view source, std::size_t line, const char* column) {
    const double v = parse_number(field, source, line, column);
    if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v))) {
        throw ParseError(std::string(source) + ":" + std::to_string(line) + ": column " + column +
                         " must be a non-negative integer");
    }
    return static_cast<std::size_t>(v);
}

} // namespace

std::vector<SummaryRow> parse_summary_csv(std::string_view data, std::string_view source) {
    const auto rows = csv::parse(data);
    if (rows.empty()) {
        throw ParseError(std::string(source) + ": empty summary");
    }
    const auto expected = text::split(kSummaryHeader, ',');
    if (rows.front().fields != expected) {
        throw ParseError(std::string(source) + ": unexpected summary header");
    }
    std::vector<SummaryRow> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& f = rows[i].fields;
        const auto line = rows[i].line;
        if (f.size() != expected.size()) {
            throw ParseError(std::string(source) + ":" + std::to_string(line) + ": expected " +
                             std::to_string(expected.size()) + " columns, got " + std::to_string(f.size()));
        }
        SummaryRow r;
        r.run_hash = f[0];
        r.model_id = f[1];
        if (r.model_id.empty()) {
            throw ParseError(std::string(source) + ":" + std::to_string(line) + ": empty model_id");
        }
        r.fold = parse_count(f[2], source, line, "fold");
        r.summary.n = parse_count(f[3], source, line, "n");
        r.summary.pa_pct = parse_number(f[4], source, line, "pa_pct");
        r.summary.dr_pct = parse_number(f[5], source, line, "dr_pct");
        r.summary.nrr_pct = parse_number(f[6], source, line, "nrr_pct");
        if (!f[7].empty()) {
            r.summary.ss_pct = parse_number(f[7], source, line, "ss_pct");
        }
        if (!f[8].empty()) {
            r.summary.consistency_pct = parse_number(f[8], source, line, "consistency_pct");
        }
        r.summary.ars_s = parse_number(f[9], source, line, "ars_s");
        out.push_back(std::move(r));
    }
    return out;
}

// ---------------------------------------------------------------------------
// loaded runs

std::vector<std::string> LoadedRun::model_ids() const {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& r : rows) {
        if (seen.insert(r.model_id).second) {
            out.push_back(r.model_id);
        }
    }
    return out;
}

std::vector<std::pair<std::size_t, double>> LoadedRun::fold_values(const std::string& model_id, Metric m) const {
    std::vector<std::pair<std::size_t, double>> out;
    for (const auto& r : rows) {
        if (r.model_id != model_id) {
            continue;
        }
        const auto v = metric_value(r.summary, m);
        if (!v) {
            throw ValidationError("run '" + run_id + "' has no " + std::string(display_name(m)) + " values for '" +
                                  model_id + "'");
        }
        out.emplace_back(r.fold, *v);
    }
    if (out.empty()) {
        throw NotFoundError("run '" + run_id + "' has no rows for model '" + model_id + "'");
    }
    std::sort(out.begin(), out.end());
    for (std::size_t i = 1; i < out.size(); ++i) {
        if (out[i].first == out[i - 1].first) {
            throw ValidationError("run '" + run_id + "' repeats fold " + std::to_string(out[i].first) + " for '" +
                                  model_id + "'");
        }
    }
    return out;
}

LoadedRun load_run(const fs::path& path) {
    LoadedRun run;
    fs::path summary;
    if (fs::is_directory(path)) {
        run.dir = path;
        summary = path / "summary.csv";
    } else {
        run.dir = path.parent_path();
        summary = path;
    }
    run.run_id = run.dir.filename().string();
    run.rows = parse_summary_csv(read_file(summary), summary.string());

    const auto lock_path = run.dir / "MANIFEST.lock";
    if (fs::exists(lock_path)) {
        try {
            const auto lock = nlohmann::json::parse(read_file(lock_path));
            run.run_id = lock.at("run_id").get<std::string>();
            run.run_hash = lock.at("run_hash").get<std::string>();
            run.corpus_hash = lock.at("corpus_hash").get<std::string>();
            run.folds_hash = lock.at("folds_hash").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(lock_path.string() + ": " + e.what());
        }
        for (const auto& r : run.rows) {
            if (r.run_hash != run.run_hash) {
                throw ValidationError(summary.string() + ": row for '" + r.model_id + "' fold " +
                                      std::to_string(r.fold) + " carries run hash " + r.run_hash +
                                      ", lock has " + run.run_hash);
            }
        }
    }
    return run;
}

namespace {

void require_same_split(const LoadedRun& a, const LoadedRun& b) {
    if (a.corpus_hash != b.corpus_hash) {
        throw ValidationError("runs '" + a.run_id + "' and '" + b.run_id + "' used different corpora");
    }
    if (a.folds_hash != b.folds_hash) {
        throw ValidationError("runs '" + a.run_id + "' and '" + b.run_id + "' used different folds");
    }
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

} // namespace

// ---------------------------------------------------------------------------
// rank report

stats::RankTable rank_report(const std::vector<LoadedRun>& runs, Metric metric,
                             std::optional<stats::Direction> direction, double d_threshold) {
    if (runs.empty()) {
        throw ValidationError("rank_report needs at least one run");
    }
    for (std::size_t i = 1; i < runs.size(); ++i) {
        require_same_split(runs[0], runs[i]);
    }
    std::vector<stats::SampleGroup> groups;
    std::set<std::string> seen;
    for (const auto& run : runs) {
        for (const auto& model : run.model_ids()) {
            if (!seen.insert(model).second) {
                throw ValidationError("model '" + model + "' appears in more than one run");
            }
            stats::SampleGroup g;
            g.group_id = model;
            for (const auto& [fold, v] : run.fold_values(model, metric)) {
                g.values.push_back(v);
            }
            groups.push_back(std::move(g));
        }
    }
    return stats::sk_esd_rank(std::move(groups), direction.value_or(default_direction(metric)), d_threshold,
                              std::string(display_name(metric)));
}

namespace {

std::vector<stats::RankEntry> rows_by_rank(const stats::RankTable& table) {
    auto rows = table.entries;
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        return a.rank != b.rank ? a.rank < b.rank : a.group_id < b.group_id;
    });
    return rows;
}

} // namespace

std::string render_rank_markdown(const stats::RankTable& table) {
    std::string out = "## SK-ESD ranking: " + table.metric_name + " (" +
                      (table.direction == stats::Direction::HigherBetter ? "higher" : "lower") + " is better)\n\n";
    out += "| Model | Rank | Value |\n|:---|---:|---:|\n";
    for (const auto& e : rows_by_rank(table)) {
        out += "| " + e.group_id + " | " + std::to_string(e.rank) + " | " + text::fixed(e.mean, 2) + " |\n";
    }
    return out;
}

std::string render_rank_csv(const stats::RankTable& table) {
    std::string out = csv::format_row({"metric", "model_id", "rank", "value"});
    for (const auto& e : rows_by_rank(table)) {
        out += csv::format_row({table.metric_name, e.group_id, std::to_string(e.rank), text::fixed(e.mean, 4)});
    }
    return out;
}

// ---------------------------------------------------------------------------
// compare report

std::vector<stats::ComparisonResult> compare_report(const LoadedRun& run_a, const LoadedRun& run_b,
                                                    const CompareOptions& options) {
    require_same_split(run_a, run_b);
    if (!(options.alpha > 0.0 && options.alpha < 1.0)) {
        throw ValidationError("alpha must be in (0, 1)");
    }

    auto metrics = options.metrics;
    if (metrics.empty()) {
        const bool have_ss = std::all_of(run_a.rows.begin(), run_a.rows.end(),
                                         [](const auto& r) { return r.summary.ss_pct.has_value(); }) &&
                             std::all_of(run_b.rows.begin(), run_b.rows.end(),
                                         [](const auto& r) { return r.summary.ss_pct.has_value(); });
        metrics = {Metric::PA};
        if (have_ss) {
            metrics.push_back(Metric::SS);
        }
        metrics.insert(metrics.end(), {Metric::DR, Metric::NRR, Metric::ARS});
    }

    std::vector<std::pair<std::string, std::string>> pairs;
    for (const auto& a : run_a.model_ids()) {
        for (const auto& b : run_b.model_ids()) {
            pairs.emplace_back(a, b);
        }
    }
    const std::size_t family = options.family_size.value_or(metrics.size() * pairs.size());
    if (family == 0) {
        throw ValidationError("Bonferroni family size must be positive");
    }

    std::vector<stats::ComparisonResult> out;
    std::vector<double> p_values;
    for (const auto& [ma, mb] : pairs) {
        for (const auto metric : metrics) {
            const auto va = run_a.fold_values(ma, metric);
            const auto vb = run_b.fold_values(mb, metric);
            std::vector<double> xa, xb;
            if (va.size() != vb.size()) {
                throw ValidationError("unpaired folds: '" + ma + "' has " + std::to_string(va.size()) + ", '" + mb +
                                      "' has " + std::to_string(vb.size()));
            }
            for (std::size_t i = 0; i < va.size(); ++i) {
                if (va[i].first != vb[i].first) {
                    throw ValidationError("unpaired folds: fold " + std::to_string(va[i].first) + " of '" + ma +
                                          "' has no partner in '" + mb + "'");
                }
                xa.push_back(va[i].second);
                xb.push_back(vb[i].second);
            }

            stats::ComparisonResult c;
            c.metric = std::string(display_name(metric));
            c.pair = {ma, mb};
            try {
                const auto w = stats::wilcoxon_signed_rank(xb, xa, options.mode);
                c.statistic_w = w.w;
                c.p_value = w.p_value;
                c.n_zero_dropped = w.n_zero_dropped;
            } catch (const DegenerateError&) {
                c.degenerate = true;
                c.p_value = 1.0;
                c.n_zero_dropped = xa.size();
            }
            const auto d = stats::cliffs_delta(xb, xa);
            c.cliffs_delta = d.delta;
            c.magnitude = d.magnitude;
            p_values.push_back(c.p_value);
            out.push_back(std::move(c));
        }
    }

    const auto adjusted = stats::bonferroni(p_values, options.alpha);
    const double alpha_adj = options.alpha / static_cast<double>(family);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].alpha_adjusted = options.family_size ? alpha_adj : adjusted[i].alpha_adjusted;
        out[i].significant = !out[i].degenerate && out[i].p_value < out[i].alpha_adjusted;
    }
    return out;
}

std::string render_compare_markdown(const std::vector<stats::ComparisonResult>& results) {
    std::string out = "## Pairwise comparison (Wilcoxon signed-rank, Bonferroni, Cliff's delta)\n\n";
    out += "| Metric | A | B | W | p | alpha_adj | Significant | Cliff's delta | Magnitude | Note |\n";
    out += "|:---|:---|:---|---:|---:|---:|:---:|---:|:---|:---|\n";
    for (const auto& c : results) {
        out += "| " + c.metric + " | " + c.pair.first + " | " + c.pair.second + " | " + num(c.statistic_w) + " | " +
               num(c.p_value) + " | " + num(c.alpha_adjusted) + " | " + (c.significant ? "**yes**" : "no") + " | " +
               text::fixed(c.cliffs_delta, 3) + " | " + std::string(stats::to_string(c.magnitude)) + " | " +
               (c.degenerate ? "no difference" : "") + " |\n";
    }
    return out;
}

std::string render_compare_csv(const std::vector<stats::ComparisonResult>& results) {
    std::string out = csv::format_row({"metric", "model_a", "model_b", "w", "p_value", "alpha_adjusted", "significant",
                                       "cliffs_delta", "magnitude", "degenerate", "n_zero_dropped"});
    for (const auto& c : results) {
        out += csv::format_row({c.metric, c.pair.first, c.pair.second, num(c.statistic_w), num(c.p_value),
                                num(c.alpha_adjusted), c.significant ? "true" : "false", text::fixed(c.cliffs_delta, 6),
                                std::string(stats::to_string(c.magnitude)), c.degenerate ? "true" : "false",
                                std::to_string(c.n_zero_dropped)});
    }
    return out;
}

} // namespace licensekit::reports
