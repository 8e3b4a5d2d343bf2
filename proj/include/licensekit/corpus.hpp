// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 licensekit contributors

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace licensekit::prompts {
class TemplatePack;
}

namespace licensekit::corpus {

enum class Category { General, Customized, OfficialTerms };
enum class Label { AllowsCommercial, DeniesCommercial, Unclear, Unlabeled };
enum class Status { Valid, Unreadable, Expired, Duplicate };

/// The three labels that can serve as evaluation ground truth, in stratum order.
inline constexpr Label kGroundTruthLabels[] = {Label::AllowsCommercial, Label::DeniesCommercial,
                                               Label::Unclear};

std::string_view to_string(Category c);
std::string_view to_string(Label l);
std::string_view to_string(Status s);
Category category_from_string(std::string_view s);
Label label_from_string(std::string_view s);
Status status_from_string(std::string_view s);

struct LicenseRecord {
    std::string id;
    std::string name;
    std::string platform;
    Category category = Category::General;
    std::string text;
    std::optional<std::string> url;
    Label label = Label::Unlabeled;
    std::optional<std::string> rationale;
    std::vector<std::string> rights_obligations;
    Status status = Status::Valid;
};

using Corpus = std::vector<LicenseRecord>;

enum class Format { JsonLines, Csv };
Format format_from_string(std::string_view s);

/// Records come back in file order. Blank text or invalid UTF-8 marks a record
/// Unreadable rather than failing the load; filter_invalid removes it.
Corpus load_corpus(const std::filesystem::path& path, Format format);
Corpus parse_corpus(std::string_view data, Format format, std::string_view source = "<memory>");

void write_jsonl(std::ostream& out, const Corpus& corpus);

struct FilterReport {
    std::size_t input_count = 0;
    std::size_t removed_unreadable = 0;
    std::size_t removed_expired = 0;
    std::size_t removed_duplicate = 0;
    std::size_t output_count = 0;
};

struct FilterResult {
    Corpus corpus;
    FilterReport report;
};

/// Drops unreadable, expired and duplicate (normalized-text) records, keeping
/// the first occurrence of each text. Never throws on content.
FilterResult filter_invalid(const Corpus& corpus);

struct CategoryStats {
    std::size_t general = 0;
    std::size_t customized = 0;
    std::size_t official_terms = 0;
    std::size_t total = 0;
};

CategoryStats category_stats(const Corpus& corpus);

/// Equal-count undersample of the three ground-truth classes.
///
/// Target size is floor(fraction * |corpus|) rounded down to a multiple of 3.
/// If a class cannot supply its share this throws, unless allow_shrink is set,
/// in which case every class contributes min(share, smallest class size).
Corpus balanced_subset(const Corpus& corpus, double fraction, std::uint64_t seed, bool allow_shrink = false);

struct FoldAssignment {
    std::size_t k = 0;
    std::uint64_t seed = 0;
    std::map<std::string, std::size_t> assignments; // record id -> fold

    std::size_t fold_of(const std::string& id) const;
    bool contains(const std::string& id) const { return assignments.count(id) != 0; }
    std::vector<std::size_t> fold_sizes() const;
};

/// Label-stratified k-fold split. Per-fold class counts are floor or ceil of
/// the proportional share and fold sizes differ by at most one.
FoldAssignment stratified_folds(const Corpus& subset, std::size_t k, std::uint64_t seed);

/// Records of `corpus` assigned to `fold`, in corpus order.
Corpus fold_members(const Corpus& corpus, const FoldAssignment& folds, std::size_t fold);

/// Canonical verdict sentence for a ground-truth label.
std::string_view label_phrase(Label label);

/// Expert reference answer: label phrase followed by the rationale, if any.
std::string reference_answer(const LicenseRecord& record);

struct InstructionExample {
    std::string system;
    std::string user;
    std::string target;
    std::string license_id;
};

std::vector<InstructionExample> instruction_examples(const Corpus& records, const prompts::TemplatePack& pack,
                                                     const std::string& system_id, const std::string& user_id);

/// One example per assigned record outside `held_out_fold`, in corpus order.
std::vector<InstructionExample> export_instruction_dataset(const Corpus& corpus, const FoldAssignment& folds,
                                                           std::size_t held_out_fold,
                                                           const prompts::TemplatePack& pack,
                                                           const std::string& system_id,
                                                           const std::string& user_id);

void write_instruction_jsonl(std::ostream& out, const std::vector<InstructionExample>& examples);

/// Nested, label-interleaved subsets for the fine-tune data-size ablation.
/// sizes must be strictly increasing; subset i is a prefix-superset of subset i-1.
std::vector<Corpus> subsample_for_ablation(const Corpus& corpus, const std::vector<std::size_t>& sizes,
                                           std::uint64_t seed);

} // namespace licensekit::corpus
