// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 licensekit contributors

#include "licensekit/prompts.hpp"

#include "licensekit/error.hpp"
#include "licensekit/hash.hpp"

#include <json.hpp>

#include <functional>

namespace licensekit::prompts {

using json = nlohmann::json;

std::string_view to_string(Kind k) { return k == Kind::System ? "system" : "user"; }

std::string_view to_string(Origin o) {
    switch (o) {
    case Origin::Custom:
        return "custom";
    case Origin::ModelGenerated:
        return "model_generated";
    case Origin::ToolGenerated:
        return "tool_generated";
    }
    return "custom";
}

namespace {

Kind kind_from_string(const std::string& s) {
    if (s == "system") return Kind::System;
    if (s == "user") return Kind::User;
    throw ParseError("unknown template kind '" + s + "'");
}

Origin origin_from_string(const std::string& s) {
    if (s == "custom") return Origin::Custom;
    if (s == "model_generated") return Origin::ModelGenerated;
    if (s == "tool_generated") return Origin::ToolGenerated;
    throw ParseError("unknown template origin '" + s + "'");
}

bool is_name_char(char c) { return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_'; }

// Walks a template body, emitting literal runs and placeholder names.
// Throws std::invalid_argument with a position-bearing message on bad braces.
void scan(std::string_view body, const std::function<void(std::string_view)>& on_literal,
          const std::function<void(std::string_view)>& on_placeholder) {
    std::size_t i = 0;
    std::size_t lit_start = 0;
    auto flush = [&](std::size_t end) {
        if (end > lit_start) {
            on_literal(body.substr(lit_start, end - lit_start));
        }
    };
    while (i < body.size()) {
        const char c = body[i];
        if (c == '{') {
            if (i + 1 < body.size() && body[i + 1] == '{') {
                flush(i);
                on_literal("{");
                i += 2;
                lit_start = i;
                continue;
            }
            std::size_t j = i + 1;
            while (j < body.size() && is_name_char(body[j])) {
                ++j;
            }
            if (j == i + 1 || j >= body.size() || body[j] != '}') {
                throw std::invalid_argument("unescaped '{' at offset " + std::to_string(i));
            }
            flush(i);
            on_placeholder(body.substr(i + 1, j - i - 1));
            i = j + 1;
            lit_start = i;
        } else if (c == '}') {
            if (i + 1 < body.size() && body[i + 1] == '}') {
                flush(i);
                on_literal("}");
                i += 2;
                lit_start = i;
                continue;
            }
            throw std::invalid_argument("unescaped '}' at offset " + std::to_string(i));
        } else {
            ++i;
        }
    }
    flush(body.size());
}

} // namespace

void validate(const PromptTemplate& t) {
    if (t.id.empty()) {
        throw ValidationError("template id must be non-empty");
    }
    std::size_t license_text = 0;
    try {
        scan(
            t.body, [](std::string_view) {},
            [&](std::string_view name) {
                if (t.kind == Kind::System) {
                    throw std::invalid_argument("system template may not contain placeholder {" +
                                                std::string(name) + "}");
                }
                if (name == "license_text") {
                    ++license_text;
                } else if (name != "license_kind") {
                    throw std::invalid_argument("unknown placeholder {" + std::string(name) + "}");
                }
            });
    } catch (const std::invalid_argument& e) {
        throw ValidationError("template '" + t.id + "': " + e.what());
    }
    if (t.kind == Kind::User && license_text != 1) {
        throw ValidationError("template '" + t.id + "': user template must contain {license_text} exactly once (found " +
                              std::to_string(license_text) + ")");
    }
}

void TemplatePack::add(PromptTemplate t) {
    validate(t);
    if (index_.count(t.id)) {
        throw ValidationError("duplicate template id '" + t.id + "'");
    }
    index_.emplace(t.id, templates_.size());
    templates_.push_back(std::move(t));
}

const PromptTemplate& TemplatePack::get(const std::string& id) const {
    const auto it = index_.find(id);
    if (it == index_.end()) {
        throw NotFoundError("unknown template id '" + id + "'");
    }
    return templates_[it->second];
}

TemplatePack TemplatePack::from_json_text(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("template pack: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("templates") || !doc["templates"].is_array()) {
        throw ParseError("template pack: expected {\"templates\": [...]}");
    }
    TemplatePack pack;
    std::size_t idx = 0;
    for (const auto& t : doc["templates"]) {
        try {
            PromptTemplate tpl;
            tpl.id = t.at("id").get<std::string>();
            tpl.kind = kind_from_string(t.at("kind").get<std::string>());
            tpl.origin = origin_from_string(t.value("origin", std::string("custom")));
            tpl.body = t.at("body").get<std::string>();
            pack.add(std::move(tpl));
        } catch (const json::exception& e) {
            throw ParseError("template pack entry " + std::to_string(idx) + ": " + e.what());
        }
        ++idx;
    }
    return pack;
}

TemplatePack TemplatePack::load(const std::filesystem::path& path) { return from_json_text(read_file(path)); }

std::string TemplatePack::hash() const {
    nlohmann::ordered_json doc;
    doc["templates"] = nlohmann::ordered_json::array();
    for (const auto& t : templates_) {
        doc["templates"].push_back(
            {{"id", t.id}, {"kind", to_string(t.kind)}, {"origin", to_string(t.origin)}, {"body", t.body}});
    }
    return sha256_hex(doc.dump());
}

std::string_view license_kind_phrase(corpus::Category category) {
    return category == corpus::Category::OfficialTerms ? "website usage agreement" : "dataset license";
}

RenderedPrompt render(const TemplatePack& pack, const std::string& system_id, const std::string& user_id,
                      const corpus::LicenseRecord& record) {
    const auto& sys = pack.get(system_id);
    const auto& usr = pack.get(user_id);
    if (sys.kind != Kind::System) {
        throw ValidationError("template '" + system_id + "' is not a system template");
    }
    if (usr.kind != Kind::User) {
        throw ValidationError("template '" + user_id + "' is not a user template");
    }

    auto expand = [&](const PromptTemplate& t) {
        std::string out;
        out.reserve(t.body.size() + record.text.size());
        scan(
            t.body, [&](std::string_view lit) { out += lit; },
            [&](std::string_view name) {
                if (name == "license_text") {
                    out += record.text;
                } else {
                    out += license_kind_phrase(record.category);
                }
            });
        return out;
    };

    return {expand(sys), expand(usr), system_id, user_id, record.id};
}

std::vector<std::pair<std::string, std::string>> grid(const TemplatePack& pack,
                                                      const std::vector<std::string>& system_ids,
                                                      const std::vector<std::string>& user_ids) {
    for (const auto& id : system_ids) {
        if (pack.get(id).kind != Kind::System) {
            throw ValidationError("template '" + id + "' is not a system template");
        }
    }
    for (const auto& id : user_ids) {
        if (pack.get(id).kind != Kind::User) {
            throw ValidationError("template '" + id + "' is not a user template");
        }
    }
    std::vector<std::pair<std::string, std::string>> out;
    out.reserve(system_ids.size() * user_ids.size());
    for (const auto& s : system_ids) {
        for (const auto& u : user_ids) {
            out.emplace_back(s, u);
        }
    }
    return out;
}

} // namespace licensekit::prompts
