#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ffdpat/grid.hpp"

namespace ffdpat {

/// Binary companion of a metadata file: same stem, ".bin" extension.
std::filesystem::path binary_path_for(const std::filesystem::path& meta_path);

/// Raw little-endian float64 dump. Throws std::runtime_error naming the path.
void write_raw_f64(const std::filesystem::path& path,
                   std::span<const double> values);
/// Throws std::runtime_error when the byte count differs from expected * 8.
std::vector<double> read_raw_f64(const std::filesystem::path& path,
                                 std::size_t expected);

/// Writes `meta_path` ({"type":"field3","n","b","order":"x-fastest"}) and the
/// raw values beside it.
void write_field(const std::filesystem::path& meta_path, const Field3& field);
Field3 read_field(const std::filesystem::path& meta_path);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace ffdpat
