#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "ffdpat/grid.hpp"

namespace ffdpat {

/// n x n lattice x_i = -b + h i, the horizontal plane of a Grid3.
struct Lattice2 {
  int n = 0;
  double half_width = 0.0;

  double spacing() const { return 2.0 * half_width / n; }
  double coordinate(int i) const { return -half_width + spacing() * i; }
  static Lattice2 of(const Grid3& grid) { return {grid.n(), grid.half_width()}; }
};

/// Samples on a Lattice2, x fastest.
struct Image2 {
  Lattice2 lattice;
  std::vector<double> values;

  explicit Image2(const Lattice2& l, double fill = 0.0)
      : lattice(l), values(static_cast<std::size_t>(l.n) * l.n, fill) {}
  double& at(int ix, int iy) {
    return values[static_cast<std::size_t>(iy) * lattice.n + ix];
  }
  double at(int ix, int iy) const {
    return values[static_cast<std::size_t>(iy) * lattice.n + ix];
  }
};

/// Indicator of the disc |x - center| < r with each pixel holding the fraction
/// of its cell [x - h/2, x + h/2)^2 inside the disc (supersample^2 subsamples).
Image2 disc_image(const Lattice2& lattice, double r, double cx = 0.0,
                  double cy = 0.0, int supersample = 16);

/// k * pi / n_alpha for k = 0 .. n_alpha - 1.
std::vector<double> uniform_angles(int n_alpha);
/// n_s points spanning [-s_max, s_max], endpoints included.
std::vector<double> uniform_offsets(int n_s, double s_max);

/// Line integrals over lines {x cos(a) + y sin(a) = s}, one row per angle
/// (s fastest). Bilinear interpolation, sample step h along each line;
/// outside the lattice the image is zero. Throws on empty angle or offset lists.
std::vector<double> radon_slice(const Image2& image, std::span<const double> angles,
                                std::span<const double> offsets);

/// Filtered backprojection of one slab (n_alpha x n_s, s fastest) with angles
/// uniform on [0, pi). Ramp filtering uses the band-limited discrete ramp
/// kernel; backprojection interpolates linearly in s with weight pi / n_alpha.
/// Throws on non-uniform offsets or fewer than two angles.
Image2 fbp_slice(std::span<const double> slab, std::span<const double> angles,
                 std::span<const double> offsets, const Lattice2& out);

/// Horizontal-plane Radon data for every z node: (alpha, s, z), s fastest.
class Sinogram {
 public:
  Sinogram(int n_alpha, int n_s, int n_z, double s_max, double z_half_width);

  int n_alpha() const { return n_alpha_; }
  int n_s() const { return n_s_; }
  int n_z() const { return n_z_; }
  double s_max() const { return s_max_; }
  /// Half width b of the z lattice: z_k = -b + (2b / n_z) k.
  double z_half_width() const { return z_half_width_; }
  std::optional<double> mask_radius() const { return mask_radius_; }
  void set_mask_radius(std::optional<double> r) { mask_radius_ = r; }

  double angle(int ia) const;
  double offset(int is) const;
  double offset_spacing() const;
  double height(int iz) const;
  std::vector<double> angles() const { return uniform_angles(n_alpha_); }
  std::vector<double> offsets() const { return uniform_offsets(n_s_, s_max_); }

  std::size_t slab_size() const {
    return static_cast<std::size_t>(n_alpha_) * n_s_;
  }
  std::span<double> slab(int iz) {
    return {values_.data() + slab_size() * iz, slab_size()};
  }
  std::span<const double> slab(int iz) const {
    return {values_.data() + slab_size() * iz, slab_size()};
  }
  double& at(int ia, int is, int iz) {
    return values_[slab_size() * iz + static_cast<std::size_t>(ia) * n_s_ + is];
  }
  double at(int ia, int is, int iz) const {
    return values_[slab_size() * iz + static_cast<std::size_t>(ia) * n_s_ + is];
  }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

 private:
  int n_alpha_;
  int n_s_;
  int n_z_;
  double s_max_;
  double z_half_width_;
  std::optional<double> mask_radius_;
  std::vector<double> values_;
};

/// Default detector half-extent b * sqrt(2).
double default_offset_extent(const Grid3& grid);

/// radon_slice over every z slice of f. s_max defaults to b * sqrt(2).
Sinogram radon3(const Field3& f, int n_alpha, int n_s,
                std::optional<double> s_max = std::nullopt);

/// Zeroes samples with s^2 + z^2 < R^2 and records R; this is both the
/// measurement restriction and the zero-extension of the missing data.
Sinogram restrict_Ma(Sinogram sino, double radius);

/// fbp_slice over every z. Throws when the z sampling does not match the grid.
Field3 fbp3(const Sinogram& sino, const Grid3& grid);

/// {"type":"sinogram","n_alpha","n_s","n_z","s_max","b","mask_radius",
///  "order":"s-fastest"} plus raw float64 values beside it.
void write_sinogram(const std::filesystem::path& meta_path, const Sinogram& sino);
Sinogram read_sinogram(const std::filesystem::path& meta_path);

}  // namespace ffdpat
