// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 licensekit contributors

#include "licensekit/csv.hpp"

#include "licensekit/error.hpp"

namespace licensekit::csv {

std::vector<Row> parse(std::string_view data) {
    std::vector<Row> rows;
    Row row;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    std::size_t line = 1;
    row.line = 1;

    auto end_field = [&] {
        row.fields.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_row = [&] {
        end_field();
        const bool empty = row.fields.size() == 1 && row.fields[0].empty();
        if (!empty) {
            rows.push_back(std::move(row));
        }
        row = Row{};
        row.line = line;
    };

    for (std::size_t i = 0; i < data.size(); ++i) {
        const char c = data[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < data.size() && data[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') {
                    ++line;
                }
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
        case '"':
            if (field_started || !field.empty()) {
                throw ParseError("csv line " + std::to_string(line) + ": stray quote inside unquoted field");
            }
            in_quotes = true;
            field_started = true;
            break;
        case ',':
            end_field();
            break;
        case '\r':
            if (i + 1 < data.size() && data[i + 1] == '\n') {
                break;
            }
            ++line;
            end_row();
            break;
        case '\n':
            ++line;
            end_row();
            break;
        default:
            if (field_started) {
                throw ParseError("csv line " + std::to_string(line) + ": text after closing quote");
            }
            field.push_back(c);
        }
    }
    if (in_quotes) {
        throw ParseError("csv line " + std::to_string(row.line) + ": unterminated quoted field");
    }
    if (field_started || !field.empty() || !row.fields.empty()) {
        end_row();
    }
    return rows;
}

std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
        return std::string(field);
    }
    std::string out = "\"";
    for (const char c : field) {
        if (c == '"') {
            out += "\"\"";
        } else {
            out.push_back(c);
        }
    }
    out.push_back('"');
    return out;
}

std::string format_row(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) {
            out.push_back(',');
        }
        out += escape(fields[i]);
    }
    out.push_back('\n');
    return out;
}

} // namespace licensekit::csv
