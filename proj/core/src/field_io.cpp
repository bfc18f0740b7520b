#include "ffdpat/field_io.hpp"

#include <bit>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace ffdpat {

static_assert(std::endian::native == std::endian::little,
              "raw float64 files are little-endian; big-endian hosts need a "
              "byte swap in write_raw_f64/read_raw_f64");

using json = nlohmann::json;

std::filesystem::path binary_path_for(const std::filesystem::path& meta_path) {
  auto p = meta_path;
  p.replace_extension(".bin");
  return p;
}

void write_raw_f64(const std::filesystem::path& path,
                   std::span<const double> values) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size_bytes()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<double> read_raw_f64(const std::filesystem::path& path,
                                 std::size_t expected) {
  std::error_code ec;
  const auto bytes = std::filesystem::file_size(path, ec);
  if (ec) throw std::runtime_error("cannot stat: " + path.string());
  if (bytes != expected * sizeof(double)) {
    throw std::runtime_error("byte count mismatch in " + path.string() +
                             ": expected " +
                             std::to_string(expected * sizeof(double)) +
                             ", found " + std::to_string(bytes));
  }
  std::vector<double> values(expected);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(bytes));
  if (!in) throw std::runtime_error("read failed: " + path.string());
  return values;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_field(const std::filesystem::path& meta_path, const Field3& field) {
  const json meta = {{"type", "field3"},
                     {"n", field.grid().n()},
                     {"b", field.grid().half_width()},
                     {"order", "x-fastest"}};
  write_text(meta_path, meta.dump(2) + "\n");
  write_raw_f64(binary_path_for(meta_path), field.values());
}

Field3 read_field(const std::filesystem::path& meta_path) {
  json meta;
  try {
    meta = json::parse(read_text(meta_path));
  } catch (const json::parse_error& e) {
    throw std::runtime_error("invalid JSON in " + meta_path.string() + ": " +
                             e.what());
  }
  if (!meta.is_object() || meta.value("type", "") != "field3" ||
      meta.value("order", "") != "x-fastest" || !meta.contains("n") ||
      !meta.contains("b")) {
    throw std::runtime_error("not a field3 metadata file: " + meta_path.string());
  }
  const Grid3 grid(meta.at("n").get<int>(), meta.at("b").get<double>());
  return Field3(grid, read_raw_f64(binary_path_for(meta_path), grid.size()));
}

}  // namespace ffdpat
