#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ffdpat/grid.hpp"

namespace ffdpat {

enum class Axis { X, Y, Z };
Axis parse_axis(const std::string& name);
std::string to_string(Axis axis);

/// Plane of a field at a fixed index along `axis`. Columns/rows run over
/// (x, y) for Z, (x, z) for Y and (y, z) for X.
struct SliceImage {
  int width = 0;
  int height = 0;
  std::vector<double> values;  // row-major
};

/// Throws std::out_of_range for an index outside [0, n).
SliceImage extract_slice(const Field3& field, Axis axis, int index);

/// 16-bit binary PGM (P5, big-endian samples) min-max normalised, plus a
/// sidecar JSON (same stem, .json) recording min, max and scale so values
/// can be recovered. A flat slice is written at mid-grey with scale 0.
void export_slice(const Field3& field, Axis axis, int index,
                  const std::filesystem::path& pgm_path);

/// Reads an exported slice back through its sidecar.
SliceImage import_slice(const std::filesystem::path& pgm_path);

}  // namespace ffdpat
