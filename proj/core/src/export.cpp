#include "ffdpat/export.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "ffdpat/field_io.hpp"
#include "json.hpp"

namespace ffdpat {

Axis parse_axis(const std::string& name) {
  if (name == "x") return Axis::X;
  if (name == "y") return Axis::Y;
  if (name == "z") return Axis::Z;
  throw std::invalid_argument("unknown axis: " + name);
}

std::string to_string(Axis axis) {
  switch (axis) {
    case Axis::X: return "x";
    case Axis::Y: return "y";
    case Axis::Z: return "z";
  }
  return "z";
}

SliceImage extract_slice(const Field3& field, Axis axis, int index) {
  const int n = field.grid().n();
  if (index < 0 || index >= n) {
    throw std::out_of_range("slice index " + std::to_string(index) +
                            " outside [0, " + std::to_string(n) + ")");
  }
  SliceImage img{n, n, std::vector<double>(static_cast<std::size_t>(n) * n)};
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      double v = 0.0;
      switch (axis) {
        case Axis::Z: v = field.at(c, r, index); break;
        case Axis::Y: v = field.at(c, index, r); break;
        case Axis::X: v = field.at(index, c, r); break;
      }
      img.values[static_cast<std::size_t>(r) * n + c] = v;
    }
  }
  return img;
}

namespace {

std::filesystem::path sidecar_for(const std::filesystem::path& pgm) {
  auto p = pgm;
  p.replace_extension(".json");
  return p;
}

}  // namespace

void export_slice(const Field3& field, Axis axis, int index,
                  const std::filesystem::path& pgm_path) {
  const SliceImage img = extract_slice(field, axis, index);
  const auto [lo_it, hi_it] = std::minmax_element(img.values.begin(), img.values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  const double range = hi - lo;
  const double scale = range > 0.0 ? range / 65535.0 : 0.0;

  if (pgm_path.has_parent_path()) {
    std::filesystem::create_directories(pgm_path.parent_path());
  }
  std::ofstream out(pgm_path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + pgm_path.string());
  out << "P5\n" << img.width << ' ' << img.height << "\n65535\n";
  for (double v : img.values) {
    const auto q = static_cast<unsigned>(
        range > 0.0 ? std::lround((v - lo) / range * 65535.0) : 32768);
    const char bytes[2] = {static_cast<char>((q >> 8) & 0xff),
                           static_cast<char>(q & 0xff)};
    out.write(bytes, 2);
  }
  if (!out) throw std::runtime_error("write failed: " + pgm_path.string());

  const nlohmann::json side = {{"axis", to_string(axis)},
                               {"index", index},
                               {"width", img.width},
                               {"height", img.height},
                               {"min", lo},
                               {"max", hi},
                               {"scale", scale},
                               {"flat", range == 0.0}};
  write_text(sidecar_for(pgm_path), side.dump(2) + "\n");
}

SliceImage import_slice(const std::filesystem::path& pgm_path) {
  const auto side = nlohmann::json::parse(read_text(sidecar_for(pgm_path)));
  std::ifstream in(pgm_path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + pgm_path.string());
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  in.get();
  if (magic != "P5" || maxval != 65535 || w <= 0 || h <= 0) {
    throw std::runtime_error("not a 16-bit P5 image: " + pgm_path.string());
  }
  SliceImage img{w, h, std::vector<double>(static_cast<std::size_t>(w) * h)};
  const double lo = side.at("min").get<double>();
  const double scale = side.at("scale").get<double>();
  for (auto& v : img.values) {
    unsigned char b[2];
    in.read(reinterpret_cast<char*>(b), 2);
    if (!in) throw std::runtime_error("truncated image: " + pgm_path.string());
    const unsigned q = (static_cast<unsigned>(b[0]) << 8) | b[1];
    v = scale > 0.0 ? lo + scale * q : lo;
  }
  return img;
}

}  // namespace ffdpat
