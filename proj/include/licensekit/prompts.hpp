// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 licensekit contributors

#pragma once

#include "licensekit/corpus.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace licensekit::prompts {

enum class Kind { System, User };
enum class Origin { Custom, ModelGenerated, ToolGenerated };

std::string_view to_string(Kind k);
std::string_view to_string(Origin o);

/// A system or user prompt body.
///
/// Bodies use single-brace named placeholders; `{{` and `}}` produce literal
/// braces. System bodies take no placeholders. User bodies must contain
/// `{license_text}` exactly once and may use `{license_kind}`.
struct PromptTemplate {
    std::string id;
    Kind kind = Kind::System;
    Origin origin = Origin::Custom;
    std::string body;
};

/// Throws ValidationError naming the template on any placeholder violation.
void validate(const PromptTemplate& t);

class TemplatePack {
public:
    TemplatePack() = default;

    static TemplatePack load(const std::filesystem::path& path);
    static TemplatePack from_json_text(std::string_view json_text);

    /// Validates and appends; duplicate ids are rejected.
    void add(PromptTemplate t);

    const PromptTemplate& get(const std::string& id) const;
    bool contains(const std::string& id) const { return index_.count(id) != 0; }
    const std::vector<PromptTemplate>& templates() const { return templates_; }

    /// SHA-256 over the canonical json serialization, for run provenance.
    std::string hash() const;

private:
    std::vector<PromptTemplate> templates_;
    std::unordered_map<std::string, std::size_t> index_;
};

struct RenderedPrompt {
    std::string system_text;
    std::string user_text;
    std::string system_id;
    std::string user_id;
    std::string license_id;
};

/// Phrase substituted for `{license_kind}`.
std::string_view license_kind_phrase(corpus::Category category);

RenderedPrompt render(const TemplatePack& pack, const std::string& system_id, const std::string& user_id,
                      const corpus::LicenseRecord& record);

/// Cartesian product in the given order (systems outer, users inner).
std::vector<std::pair<std::string, std::string>> grid(const TemplatePack& pack,
                                                      const std::vector<std::string>& system_ids,
                                                      const std::vector<std::string>& user_ids);

} // namespace licensekit::prompts
