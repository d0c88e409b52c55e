// Copyright (C) 2026 The PIC Editing Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"

namespace pic {

constexpr int kSchemaVersion = 1;

std::string sha256_hex(std::string_view bytes);

/// Writes to a sibling temp file and renames over `path`, so readers never see partial content.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
void write_json_atomic(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

/// Unique sibling path for staging a directory before rename.
std::filesystem::path staging_path(const std::filesystem::path& target);

/// Deterministic 64-bit mixing (splitmix64), stable across platforms.
uint64_t mix64(uint64_t x);
uint64_t hash_string(std::string_view s, uint64_t seed = 0);

}  // namespace pic
