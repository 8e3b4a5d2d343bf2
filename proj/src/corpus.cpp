// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 licensekit contributors

#include "licensekit/corpus.hpp"

#include "licensekit/csv.hpp"
#include "licensekit/error.hpp"
#include "licensekit/hash.hpp"
#include "licensekit/prompts.hpp"
#include "licensekit/random.hpp"
#include "licensekit/text.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

namespace licensekit::corpus {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string_view to_string(Category c) {
    switch (c) {
    case Category::General:
        return "general";
    case Category::Customized:
        return "customized";
    case Category::OfficialTerms:
        return "official_terms";
    }
    return "general";
}

std::string_view to_string(Label l) {
    switch (l) {
    case Label::AllowsCommercial:
        return "allows";
    case Label::DeniesCommercial:
        return "denies";
    case Label::Unclear:
        return "unclear";
    case Label::Unlabeled:
        return "unlabeled";
    }
    return "unlabeled";
}

std::string_view to_string(Status s) {
    switch (s) {
    case Status::Valid:
        return "valid";
    case Status::Unreadable:
        return "unreadable";
    case Status::Expired:
        return "expired";
    case Status::Duplicate:
        return "duplicate";
    }
    return "valid";
}

Category category_from_string(std::string_view s) {
    if (s == "general") return Category::General;
    if (s == "customized") return Category::Customized;
    if (s == "official_terms") return Category::OfficialTerms;
    throw ParseError("unknown category '" + std::string(s) + "'");
}

Label label_from_string(std::string_view s) {
    if (s == "allows") return Label::AllowsCommercial;
    if (s == "denies") return Label::DeniesCommercial;
    if (s == "unclear") return Label::Unclear;
    if (s == "unlabeled") return Label::Unlabeled;
    throw ParseError("unknown label '" + std::string(s) + "'");
}

Status status_from_string(std::string_view s) {
    if (s == "valid") return Status::Valid;
    if (s == "unreadable") return Status::Unreadable;
    if (s == "expired") return Status::Expired;
    if (s == "duplicate") return Status::Duplicate;
    throw ParseError("unknown status '" + std::string(s) + "'");
}

Format format_from_string(std::string_view s) {
    if (s == "json_lines" || s == "jsonl") return Format::JsonLines;
    if (s == "csv") return Format::Csv;
    throw ParseError("unknown corpus format '" + std::string(s) + "'");
}

namespace {

// Field accessor that knows how to report where a row went wrong.
class RowFields {
public:
    virtual ~RowFields() = default;
    virtual std::optional<std::string> get(const char* key) const = 0;
    virtual std::vector<std::string> get_list(const char* key) const = 0;
};

class JsonRow final : public RowFields {
public:
    explicit JsonRow(const json& obj) : obj_(obj) {}

    std::optional<std::string> get(const char* key) const override {
        const auto it = obj_.find(key);
        if (it == obj_.end() || it->is_null()) {
            return std::nullopt;
        }
        if (!it->is_string()) {
            throw ParseError(std::string("field '") + key + "' must be a string");
        }
        return it->get<std::string>();
    }

    std::vector<std::string> get_list(const char* key) const override {
        const auto it = obj_.find(key);
        if (it == obj_.end() || it->is_null()) {
            return {};
        }
        if (!it->is_array()) {
            throw ParseError(std::string("field '") + key + "' must be an array of strings");
        }
        std::vector<std::string> out;
        for (const auto& v : *it) {
            if (!v.is_string()) {
                throw ParseError(std::string("field '") + key + "' must be an array of strings");
            }
            out.push_back(v.get<std::string>());
        }
        return out;
    }

private:
    const json& obj_;
};

class CsvRow final : public RowFields {
public:
    CsvRow(const std::unordered_map<std::string, std::size_t>& columns, const std::vector<std::string>& fields)
        : columns_(columns), fields_(fields) {}

    std::optional<std::string> get(const char* key) const override {
        const auto it = columns_.find(key);
        if (it == columns_.end() || it->second >= fields_.size()) {
            return std::nullopt;
        }
        return fields_[it->second];
    }

    std::vector<std::string> get_list(const char* key) const override {
        const auto v = get(key);
        if (!v || v->empty()) {
            return {};
        }
        return text::split(*v, '|');
    }

private:
    const std::unordered_map<std::string, std::size_t>& columns_;
    const std::vector<std::string>& fields_;
};

std::string require(const RowFields& row, const char* key) {
    auto v = row.get(key);
    if (!v) {
        throw ParseError(std::string("missing required field '") + key + "'");
    }
    return *v;
}

LicenseRecord record_from_row(const RowFields& row, bool utf8_ok) {
    LicenseRecord r;
    r.id = require(row, "id");
    if (r.id.empty()) {
        throw ParseError("field 'id' must be non-empty");
    }
    r.name = require(row, "name");
    r.platform = require(row, "platform");
    r.category = category_from_string(require(row, "category"));
    r.text = require(row, "text");
    r.label = label_from_string(require(row, "label"));
    if (auto url = row.get("url"); url && !url->empty()) {
        r.url = std::move(*url);
    }
    if (auto rationale = row.get("rationale"); rationale && !rationale->empty()) {
        r.rationale = std::move(*rationale);
    }
    r.rights_obligations = row.get_list("rights_obligations");
    if (auto status = row.get("status"); status && !status->empty()) {
        r.status = status_from_string(*status);
    }
    if (!utf8_ok || text::is_blank(r.text)) {
        r.status = Status::Unreadable;
    }
    return r;
}

struct IndexedRecord {
    std::size_t line;
    LicenseRecord record;
};

Corpus check_unique_ids(std::vector<IndexedRecord> rows, std::string_view source) {
    std::unordered_map<std::string, std::size_t> first_seen;
    Corpus out;
    out.reserve(rows.size());
    for (auto& row : rows) {
        const auto [it, inserted] = first_seen.emplace(row.record.id, row.line);
        if (!inserted) {
            throw ParseError(std::string(source) + ": duplicate id '" + row.record.id + "' at line " +
                             std::to_string(row.line) + " (first occurrence at line " +
                             std::to_string(it->second) + ")");
        }
        out.push_back(std::move(row.record));
    }
    return out;
}

Corpus parse_jsonl(std::string_view data, std::string_view source) {
    std::vector<IndexedRecord> rows;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < data.size()) {
        auto end = data.find('\n', pos);
        if (end == std::string_view::npos) {
            end = data.size();
        }
        auto line = data.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (text::is_blank(line)) {
            continue;
        }
        const bool utf8_ok = text::is_valid_utf8(line);
        try {
            const json obj = utf8_ok ? json::parse(line) : json::parse(text::sanitize_utf8(line));
            if (!obj.is_object()) {
                throw ParseError("row is not a json object");
            }
            rows.push_back({line_no, record_from_row(JsonRow(obj), utf8_ok)});
        } catch (const json::exception& e) {
            throw ParseError(std::string(source) + ":" + std::to_string(line_no) + ": malformed row: " + e.what());
        } catch (const ParseError& e) {
            throw ParseError(std::string(source) + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return check_unique_ids(std::move(rows), source);
}

Corpus parse_csv(std::string_view data, std::string_view source) {
    std::vector<csv::Row> table;
    try {
        table = csv::parse(data);
    } catch (const ParseError& e) {
        throw ParseError(std::string(source) + ": " + e.what());
    }
    if (table.empty()) {
        return {};
    }
    std::unordered_map<std::string, std::size_t> columns;
    for (std::size_t i = 0; i < table[0].fields.size(); ++i) {
        columns.emplace(std::string(text::trim(table[0].fields[i])), i);
    }
    std::vector<IndexedRecord> rows;
    for (std::size_t r = 1; r < table.size(); ++r) {
        const auto& row = table[r];
        try {
            bool utf8_ok = true;
            for (const auto& f : row.fields) {
                utf8_ok = utf8_ok && text::is_valid_utf8(f);
            }
            rows.push_back({row.line, record_from_row(CsvRow(columns, row.fields), utf8_ok)});
        } catch (const ParseError& e) {
            throw ParseError(std::string(source) + ":" + std::to_string(row.line) + ": " + e.what());
        }
    }
    return check_unique_ids(std::move(rows), source);
}

std::size_t label_index(Label l) { return static_cast<std::size_t>(l); }

} // namespace

Corpus parse_corpus(std::string_view data, Format format, std::string_view source) {
    return format == Format::Csv ? parse_csv(data, source) : parse_jsonl(data, source);
}

Corpus load_corpus(const std::filesystem::path& path, Format format) {
    return parse_corpus(read_file(path), format, path.string());
}

void write_jsonl(std::ostream& out, const Corpus& corpus) {
    for (const auto& r : corpus) {
        ordered_json j;
        j["id"] = r.id;
        j["name"] = r.name;
        j["platform"] = r.platform;
        j["category"] = to_string(r.category);
        j["text"] = r.text;
        if (r.url) j["url"] = *r.url;
        j["label"] = to_string(r.label);
        if (r.rationale) j["rationale"] = *r.rationale;
        if (!r.rights_obligations.empty()) j["rights_obligations"] = r.rights_obligations;
        j["status"] = to_string(r.status);
        out << j.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
    }
}

FilterResult filter_invalid(const Corpus& corpus) {
    FilterResult result;
    auto& report = result.report;
    report.input_count = corpus.size();
    std::unordered_set<std::string> seen;
    for (const auto& r : corpus) {
        if (r.status == Status::Unreadable || text::is_blank(r.text)) {
            ++report.removed_unreadable;
            continue;
        }
        if (r.status == Status::Expired) {
            ++report.removed_expired;
            continue;
        }
        if (r.status == Status::Duplicate || !seen.insert(text::normalize(r.text)).second) {
            ++report.removed_duplicate;
            continue;
        }
        result.corpus.push_back(r);
    }
    report.output_count = result.corpus.size();
    return result;
}

CategoryStats category_stats(const Corpus& corpus) {
    CategoryStats s;
    for (const auto& r : corpus) {
        switch (r.category) {
        case Category::General:
            ++s.general;
            break;
        case Category::Customized:
            ++s.customized;
            break;
        case Category::OfficialTerms:
            ++s.official_terms;
            break;
        }
    }
    s.total = corpus.size();
    return s;
}

Corpus balanced_subset(const Corpus& corpus, double fraction, std::uint64_t seed, bool allow_shrink) {
    if (!(fraction > 0.0 && fraction <= 1.0)) {
        throw ValidationError("fraction must be in (0, 1]");
    }
    std::array<std::vector<std::size_t>, 3> by_class;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        if (corpus[i].label != Label::Unlabeled) {
            by_class[label_index(corpus[i].label)].push_back(i);
        }
    }
    for (const auto l : kGroundTruthLabels) {
        if (by_class[label_index(l)].empty()) {
            throw ValidationError("balanced subset needs at least one '" + std::string(to_string(l)) +
                                  "' record");
        }
    }

    auto target = static_cast<std::size_t>(fraction * static_cast<double>(corpus.size()));
    target -= target % 3;
    std::size_t share = target / 3;
    if (share == 0) {
        throw ValidationError("fraction " + text::fixed(fraction, 4) + " of " + std::to_string(corpus.size()) +
                              " records yields an empty balanced subset");
    }

    std::size_t smallest = SIZE_MAX;
    for (const auto l : kGroundTruthLabels) {
        const auto have = by_class[label_index(l)].size();
        smallest = std::min(smallest, have);
        if (have < share && !allow_shrink) {
            throw ValidationError("class '" + std::string(to_string(l)) + "' has " + std::to_string(have) +
                                  " records but " + std::to_string(share) + " are required (shortfall " +
                                  std::to_string(share - have) + "); pass allow_shrink to undersample");
        }
    }
    share = std::min(share, smallest);

    Rng rng(seed);
    std::vector<std::size_t> chosen;
    chosen.reserve(share * 3);
    for (auto& members : by_class) {
        rng.shuffle(members);
        chosen.insert(chosen.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(share));
    }
    std::sort(chosen.begin(), chosen.end());

    Corpus out;
    out.reserve(chosen.size());
    for (const auto i : chosen) {
        out.push_back(corpus[i]);
    }
    return out;
}

std::size_t FoldAssignment::fold_of(const std::string& id) const {
    const auto it = assignments.find(id);
    if (it == assignments.end()) {
        throw NotFoundError("record '" + id + "' has no fold assignment");
    }
    return it->second;
}

std::vector<std::size_t> FoldAssignment::fold_sizes() const {
    std::vector<std::size_t> sizes(k, 0);
    for (const auto& [id, fold] : assignments) {
        ++sizes[fold];
    }
    return sizes;
}

FoldAssignment stratified_folds(const Corpus& subset, std::size_t k, std::uint64_t seed) {
    if (k < 2) {
        throw ValidationError("fold count k must be at least 2 (got " + std::to_string(k) + ")");
    }
    if (k > subset.size()) {
        throw ValidationError("fold count k=" + std::to_string(k) + " exceeds subset size " +
                              std::to_string(subset.size()));
    }
    std::array<std::vector<std::size_t>, 4> strata;
    for (std::size_t i = 0; i < subset.size(); ++i) {
        strata[label_index(subset[i].label)].push_back(i);
    }

    FoldAssignment folds;
    folds.k = k;
    folds.seed = seed;
    Rng rng(seed);
    // One cursor across all strata: each class is dealt cyclically (floor/ceil
    // per fold) and the running total keeps fold sizes within one of each other.
    std::size_t cursor = 0;
    for (auto& members : strata) {
        rng.shuffle(members);
        for (const auto i : members) {
            const auto [it, inserted] = folds.assignments.emplace(subset[i].id, cursor % k);
            if (!inserted) {
                throw ValidationError("duplicate record id '" + subset[i].id + "' in fold input");
            }
            ++cursor;
        }
    }
    return folds;
}

Corpus fold_members(const Corpus& corpus, const FoldAssignment& folds, std::size_t fold) {
    Corpus out;
    for (const auto& r : corpus) {
        const auto it = folds.assignments.find(r.id);
        if (it != folds.assignments.end() && it->second == fold) {
            out.push_back(r);
        }
    }
    return out;
}

std::string_view label_phrase(Label label) {
    switch (label) {
    case Label::AllowsCommercial:
        return "Can be used commercially.";
    case Label::DeniesCommercial:
        return "Can't be used commercially.";
    case Label::Unclear:
        return "It is not clear whether it is authorized for commercial use.";
    case Label::Unlabeled:
        break;
    }
    throw ValidationError("unlabeled record has no verdict phrase");
}

std::string reference_answer(const LicenseRecord& record) {
    std::string out(label_phrase(record.label));
    if (record.rationale && !record.rationale->empty()) {
        out += ' ';
        out += *record.rationale;
    }
    return out;
}

std::vector<InstructionExample> instruction_examples(const Corpus& records, const prompts::TemplatePack& pack,
                                                     const std::string& system_id, const std::string& user_id) {
    std::vector<InstructionExample> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        if (r.label == Label::Unlabeled) {
            throw ValidationError("record '" + r.id + "' is unlabeled; cannot form an instruction target");
        }
        auto rendered = prompts::render(pack, system_id, user_id, r);
        out.push_back({std::move(rendered.system_text), std::move(rendered.user_text), reference_answer(r), r.id});
    }
    return out;
}

std::vector<InstructionExample> export_instruction_dataset(const Corpus& corpus, const FoldAssignment& folds,
                                                           std::size_t held_out_fold,
                                                           const prompts::TemplatePack& pack,
                                                           const std::string& system_id,
                                                           const std::string& user_id) {
    if (held_out_fold >= folds.k) {
        throw ValidationError("held-out fold " + std::to_string(held_out_fold) + " is outside [0, " +
                              std::to_string(folds.k) + ")");
    }
    Corpus train;
    for (const auto& r : corpus) {
        const auto it = folds.assignments.find(r.id);
        if (it != folds.assignments.end() && it->second != held_out_fold) {
            train.push_back(r);
        }
    }
    return instruction_examples(train, pack, system_id, user_id);
}

void write_instruction_jsonl(std::ostream& out, const std::vector<InstructionExample>& examples) {
    for (const auto& ex : examples) {
        ordered_json j;
        j["system"] = ex.system;
        j["user"] = ex.user;
        j["target"] = ex.target;
        j["license_id"] = ex.license_id;
        out << j.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
    }
}

std::vector<Corpus> subsample_for_ablation(const Corpus& corpus, const std::vector<std::size_t>& sizes,
                                           std::uint64_t seed) {
    std::array<std::vector<std::size_t>, 3> by_class;
    std::size_t labeled = 0;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        if (corpus[i].label != Label::Unlabeled) {
            by_class[label_index(corpus[i].label)].push_back(i);
            ++labeled;
        }
    }
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        if (sizes[i] == 0) {
            throw ValidationError("ablation sizes must be positive");
        }
        if (i > 0 && sizes[i] <= sizes[i - 1]) {
            throw ValidationError("ablation sizes must be strictly increasing");
        }
    }
    if (!sizes.empty() && sizes.back() > labeled) {
        throw ValidationError("ablation size " + std::to_string(sizes.back()) + " exceeds the " +
                              std::to_string(labeled) + " labeled records available");
    }

    Rng rng(seed);
    for (auto& members : by_class) {
        rng.shuffle(members);
    }
    // Round-robin over classes: every prefix is balanced to within one record
    // per class until a class runs out, and prefixes nest by construction.
    std::vector<std::size_t> order;
    order.reserve(labeled);
    std::array<std::size_t, 3> taken{};
    while (order.size() < labeled) {
        for (std::size_t c = 0; c < 3; ++c) {
            if (taken[c] < by_class[c].size()) {
                order.push_back(by_class[c][taken[c]++]);
            }
        }
    }

    std::vector<Corpus> subsets;
    subsets.reserve(sizes.size());
    for (const auto size : sizes) {
        std::vector<std::size_t> prefix(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(size));
        std::sort(prefix.begin(), prefix.end());
        Corpus subset;
        subset.reserve(size);
        for (const auto i : prefix) {
            subset.push_back(corpus[i]);
        }
        subsets.push_back(std::move(subset));
    }
    return subsets;
}

} // namespace licensekit::corpus
