// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 licensekit contributors

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace licensekit::csv {

struct Row {
    std::size_t line = 0; // 1-based line where the record starts
    std::vector<std::string> fields;
};

/// RFC-4180 reader: quoted fields, doubled quotes, embedded CR/LF.
/// Accepts LF or CRLF record terminators. Empty lines are skipped.
std::vector<Row> parse(std::string_view data);

std::string escape(std::string_view field);
std::string format_row(const std::vector<std::string>& fields);

} // namespace licensekit::csv
