// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 licensekit contributors

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace licensekit {

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
/// Writes through a temp file + rename so readers never see a torn file.
void write_file(const std::filesystem::path& path, std::string_view contents);

} // namespace licensekit
