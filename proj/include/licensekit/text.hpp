// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 licensekit contributors

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace licensekit::text {

/// ASCII case folding; bytes >= 0x80 pass through unchanged so UTF-8 stays intact.
std::string casefold(std::string_view s);

/// Trim, collapse internal whitespace runs to one space, casefold.
/// Shared by corpus duplicate detection and response duplication metrics.
std::string normalize(std::string_view s);

std::string_view trim(std::string_view s);
bool is_blank(std::string_view s);

bool is_valid_utf8(std::string_view s);

/// Replaces every invalid UTF-8 sequence with U+FFFD.
std::string sanitize_utf8(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Fixed-point decimal formatting, locale independent.
std::string fixed(double value, int decimals);

} // namespace licensekit::text
