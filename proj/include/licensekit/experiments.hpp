// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 licensekit contributors

#pragma once

#include "licensekit/corpus.hpp"
#include "licensekit/metrics.hpp"
#include "licensekit/modelgate.hpp"
#include "licensekit/prompts.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace licensekit::experiments {

enum class BackendMode { Live, Record, Replay };

std::string_view to_string(BackendMode m);
BackendMode backend_mode_from_string(std::string_view s);

/// A run description. Relative paths resolve against `base_dir` (the
/// directory of the manifest file when loaded from disk).
struct RunManifest {
    std::string run_id;
    std::string corpus_path;
    corpus::Format corpus_format = corpus::Format::JsonLines;
    double fraction = 1.0;
    std::size_t k = 10;
    std::uint64_t seed = 0;
    std::vector<std::string> model_ids;
    std::string system_id;
    std::string user_id;
    std::string pack_path;
    std::string ruleset_path;
    std::optional<std::string> registry_path;
    std::optional<std::string> embedder_id;
    BackendMode backend = BackendMode::Replay;
    std::optional<std::string> replay_path;
    std::size_t concurrency_limit = 4;
    bool allow_shrink = false;

    std::filesystem::path base_dir;

    static RunManifest load(const std::filesystem::path& path);
    static RunManifest from_json(const nlohmann::json& j, std::filesystem::path base_dir = {});

    /// Throws ValidationError on missing or inconsistent fields.
    void validate() const;
    std::filesystem::path resolve(const std::string& p) const;
    /// Canonical form; paths appear as written, base_dir is not included.
    nlohmann::ordered_json to_json() const;
    /// SHA-256 of to_json().dump().
    std::string hash() const;
};

struct Provenance {
    std::string manifest_hash;
    std::string pack_hash;
    std::string ruleset_hash;
    std::string corpus_hash;
    std::string folds_hash;
};

struct CellResult {
    std::string model_id;
    std::size_t fold = 0;
    std::vector<metrics::EvalOutcome> outcomes; // sorted by license_id
    metrics::MetricSummary summary;
};

struct RunResult {
    std::string run_id;
    Provenance provenance;
    std::size_t subset_size = 0;
    corpus::FoldAssignment folds;
    std::vector<CellResult> cells; // sorted by (model_id, fold)

    /// Mean over folds of one model's fold PA.
    double mean_pa(const std::string& model_id) const;
};

struct RunOptions {
    /// Replaces the backend the manifest would build; used by tests and the
    /// review service.
    std::shared_ptr<modelgate::Backend> backend;
    metrics::DuplicationMode duplication_mode = metrics::DuplicationMode::Extras;
};

/// Loads the corpus, drops invalid records, draws the balanced subset and the
/// stratified folds, then evaluates every (model, fold) cell.
///
/// Writes to `out_dir`: outcomes/<model>/fold_<i>.jsonl, summary.csv and
/// MANIFEST.lock. On failure a PARTIAL file holding the error is left behind
/// and the exception propagates. A directory already holding a different
/// run_id is refused with ConflictError.
RunResult run_cv_eval(const RunManifest& manifest, const std::filesystem::path& out_dir,
                      const RunOptions& options = {});

struct GridResult {
    std::vector<std::string> system_ids;
    std::vector<std::string> user_ids;
    std::vector<std::string> model_ids;
    /// pa[model][system][user] as mean fold PA.
    std::map<std::string, std::vector<std::vector<double>>> pa;

    double row_mean(const std::string& model_id, std::size_t system_index) const;
};

/// Runs run_cv_eval for every (system, user) pair on the manifest's subset,
/// folds and seed. Cells go to grid/<system>__<user>/; the matrix goes to
/// grid_pa.csv (one row per model and system, one decimal).
GridResult run_prompt_grid(const RunManifest& manifest, const std::vector<std::string>& system_ids,
                           const std::vector<std::string>& user_ids, const std::filesystem::path& out_dir,
                           const RunOptions& options = {});

std::string render_grid_csv(const GridResult& grid);

struct AblationRow {
    std::size_t size = 0;
    std::string model_id;
    double pa_pct = 0.0;
};

/// Evaluates one endpoint per training-set size on the manifest's folds and
/// exports the nested training subsets as ablation/train_<size>.jsonl.
/// Every size needs an endpoint (ConfigError otherwise). Writes ablation.csv
/// (size,pa_pct at one decimal).
std::vector<AblationRow> run_data_size_ablation(const RunManifest& manifest, const std::vector<std::size_t>& sizes,
                                                const std::map<std::size_t, std::string>& endpoints,
                                                const std::filesystem::path& out_dir,
                                                const RunOptions& options = {});

std::string render_ablation_csv(const std::vector<AblationRow>& rows);

/// Directory-safe form of a model or template id.
std::string path_component(std::string_view id);

} // namespace licensekit::experiments
