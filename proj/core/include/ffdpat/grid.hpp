#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ffdpat {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double norm() const;
  friend bool operator==(const Vec3&, const Vec3&) = default;
};

/// Cubical periodic lattice on [-b, b)^3 with n nodes per axis.
///
/// Node (i1, i2, i3) sits at (-b, -b, -b) + h * (i1, i2, i3), h = 2b / n.
/// Linear storage index is i1 + n * (i2 + n * i3) (x fastest). Axis
/// wavenumbers follow the DFT layout for period 2b: xi_k = pi * k / b with
/// k in [-n/2, n/2).
class Grid3 {
 public:
  /// Throws std::invalid_argument unless n is even, n >= 4 and b > 0.
  Grid3(int n, double half_width);

  int n() const { return n_; }
  double half_width() const { return half_width_; }
  double spacing() const { return spacing_; }
  double cell_volume() const { return spacing_ * spacing_ * spacing_; }
  std::size_t size() const {
    return static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_) *
           static_cast<std::size_t>(n_);
  }

  std::size_t index(int i1, int i2, int i3) const {
    return static_cast<std::size_t>(i1) +
           static_cast<std::size_t>(n_) *
               (static_cast<std::size_t>(i2) +
                static_cast<std::size_t>(n_) * static_cast<std::size_t>(i3));
  }

  double coordinate(int i) const { return -half_width_ + spacing_ * i; }
  Vec3 node(int i1, int i2, int i3) const {
    return {coordinate(i1), coordinate(i2), coordinate(i3)};
  }
  Vec3 node(std::size_t linear) const;

  /// Signed wavenumber of DFT bin `bin` (0 <= bin < n) along one axis.
  double wavenumber(int bin) const;
  /// Axis wavenumbers sorted ascending: pi * k / b for k = -n/2 .. n/2 - 1.
  std::vector<double> axis_wavenumbers() const;
  /// pi / h, the largest wavenumber magnitude on an axis.
  double nyquist() const;

  friend bool operator==(const Grid3& a, const Grid3& b) {
    return a.n_ == b.n_ && a.half_width_ == b.half_width_;
  }

 private:
  int n_;
  double half_width_;
  double spacing_;
};

Grid3 make_grid(int n, double half_width);

/// Real scalar samples on a Grid3, x-fastest.
class Field3 {
 public:
  explicit Field3(const Grid3& grid, double fill = 0.0);
  Field3(const Grid3& grid, std::vector<double> values);

  const Grid3& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& at(int i1, int i2, int i3) { return values_[grid_.index(i1, i2, i3)]; }
  double at(int i1, int i2, int i3) const {
    return values_[grid_.index(i1, i2, i3)];
  }

  bool all_finite() const;
  double max_abs() const;

  Field3& operator+=(const Field3& other);
  Field3& operator-=(const Field3& other);
  Field3& operator*=(double s);
  /// this += s * x
  Field3& axpy(double s, const Field3& x);

  friend Field3 operator+(Field3 a, const Field3& b) { return a += b; }
  friend Field3 operator-(Field3 a, const Field3& b) { return a -= b; }
  friend Field3 operator*(double s, Field3 a) { return a *= s; }

 private:
  Grid3 grid_;
  std::vector<double> values_;
};

/// Throws std::invalid_argument when the fields live on different grids.
void require_same_grid(const Field3& a, const Field3& b);

/// h^3 * sum_i u_i v_i
double inner_product(const Field3& u, const Field3& v);
/// h^3 * sum_i u_i v_i w_i
double inner_product(const Field3& u, const Field3& v, const Field3& weight);
double norm(const Field3& u);

/// Open ball of radius a centred at the origin, as node flags.
class BallMask {
 public:
  /// Throws std::invalid_argument unless 0 < a <= b.
  BallMask(const Grid3& grid, double radius);

  const Grid3& grid() const { return grid_; }
  double radius() const { return radius_; }
  bool contains(std::size_t i) const { return flags_[i] != 0; }
  std::size_t count() const { return count_; }

  Field3 apply(const Field3& f) const;
  void apply_in_place(Field3& f) const;
  /// True when f vanishes at every node outside the ball.
  bool supports(const Field3& f) const;

 private:
  Grid3 grid_;
  double radius_;
  std::vector<std::uint8_t> flags_;
  std::size_t count_ = 0;
};

BallMask mask_ball(const Grid3& grid, double radius);

}  // namespace ffdpat
