#include "ffdpat/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ffdpat {

double Vec3::norm() const { return std::sqrt(x * x + y * y + z * z); }

Grid3::Grid3(int n, double half_width)
    : n_(n), half_width_(half_width), spacing_(0.0) {
  if (n < 4 || n % 2 != 0) {
    throw std::invalid_argument("grid: n must be even and >= 4, got " +
                                std::to_string(n));
  }
  if (!(half_width > 0.0) || !std::isfinite(half_width)) {
    throw std::invalid_argument("grid: half width b must be positive");
  }
  spacing_ = 2.0 * half_width / n;
}

Vec3 Grid3::node(std::size_t linear) const {
  const auto n = static_cast<std::size_t>(n_);
  const auto i1 = static_cast<int>(linear % n);
  const auto i2 = static_cast<int>((linear / n) % n);
  const auto i3 = static_cast<int>(linear / (n * n));
  return node(i1, i2, i3);
}

double Grid3::wavenumber(int bin) const {
  const int k = bin < n_ / 2 ? bin : bin - n_;
  return std::numbers::pi * k / half_width_;
}

std::vector<double> Grid3::axis_wavenumbers() const {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n_));
  for (int k = -n_ / 2; k < n_ / 2; ++k) {
    out.push_back(std::numbers::pi * k / half_width_);
  }
  return out;
}

double Grid3::nyquist() const { return std::numbers::pi / spacing_; }

Grid3 make_grid(int n, double half_width) { return Grid3(n, half_width); }

Field3::Field3(const Grid3& grid, double fill)
    : grid_(grid), values_(grid.size(), fill) {}

Field3::Field3(const Grid3& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw std::invalid_argument("field: expected " +
                                std::to_string(grid_.size()) + " values, got " +
                                std::to_string(values_.size()));
  }
}

bool Field3::all_finite() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return std::isfinite(v); });
}

double Field3::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

Field3& Field3::operator+=(const Field3& other) {
  require_same_grid(*this, other);
  const std::size_t n = values_.size();
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) values_[i] += other.values_[i];
  return *this;
}

Field3& Field3::operator-=(const Field3& other) {
  require_same_grid(*this, other);
  const std::size_t n = values_.size();
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) values_[i] -= other.values_[i];
  return *this;
}

Field3& Field3::operator*=(double s) {
  const std::size_t n = values_.size();
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) values_[i] *= s;
  return *this;
}

Field3& Field3::axpy(double s, const Field3& x) {
  require_same_grid(*this, x);
  const std::size_t n = values_.size();
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) values_[i] += s * x.values_[i];
  return *this;
}

void require_same_grid(const Field3& a, const Field3& b) {
  if (!(a.grid() == b.grid())) {
    throw std::invalid_argument("grid mismatch between fields");
  }
}

// Reductions run serially so results do not depend on the thread count.
double inner_product(const Field3& u, const Field3& v) {
  require_same_grid(u, v);
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) acc += u[i] * v[i];
  return acc * u.grid().cell_volume();
}

double inner_product(const Field3& u, const Field3& v, const Field3& weight) {
  require_same_grid(u, v);
  require_same_grid(u, weight);
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) acc += u[i] * v[i] * weight[i];
  return acc * u.grid().cell_volume();
}

double norm(const Field3& u) { return std::sqrt(inner_product(u, u)); }

BallMask::BallMask(const Grid3& grid, double radius)
    : grid_(grid), radius_(radius), flags_(grid.size(), 0) {
  if (!(radius > 0.0) || radius > grid.half_width()) {
    throw std::invalid_argument(
        "ball mask: radius must satisfy 0 < a <= b (object must fit the cube)");
  }
  const int n = grid.n();
  for (int i3 = 0; i3 < n; ++i3) {
    for (int i2 = 0; i2 < n; ++i2) {
      for (int i1 = 0; i1 < n; ++i1) {
        if (grid.node(i1, i2, i3).norm() < radius) {
          flags_[grid.index(i1, i2, i3)] = 1;
          ++count_;
        }
      }
    }
  }
}

Field3 BallMask::apply(const Field3& f) const {
  Field3 out = f;
  apply_in_place(out);
  return out;
}

void BallMask::apply_in_place(Field3& f) const {
  if (!(f.grid() == grid_)) {
    throw std::invalid_argument("ball mask: grid mismatch");
  }
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!flags_[i]) f[i] = 0.0;
  }
}

bool BallMask::supports(const Field3& f) const {
  if (!(f.grid() == grid_)) return false;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!flags_[i] && f[i] != 0.0) return false;
  }
  return true;
}

BallMask mask_ball(const Grid3& grid, double radius) {
  return BallMask(grid, radius);
}

}  // namespace ffdpat
