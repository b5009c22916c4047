// SPDX-License-Identifier: Apache-2.0
//
// Small file/serialization helpers shared by checkpoints, oracle caches
// and experiment outputs.

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace kdpinn {

/// FNV-1a 64-bit over a byte string; used for audit checksums (not
/// cryptographic).
std::uint64_t fnv1a64(std::string_view bytes);

std::string to_hex(std::uint64_t value);

/// Whole-file read; throws std::runtime_error with the path on failure.
std::string read_file(const std::string& path);

void write_file(const std::string& path, std::string_view content);

bool file_exists(const std::string& path);

/// Checksum of a file's bytes.
std::uint64_t file_checksum(const std::string& path);

/// Doubles formatted with enough digits that parsing reproduces the exact
/// value (shortest round-trip form).
std::string format_double(double v);

/// One CSV row from string fields, no quoting (fields never contain commas
/// here).
std::string csv_row(const std::vector<std::string>& fields);

}  // namespace kdpinn
