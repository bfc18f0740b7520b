#include "ffdpat/radon.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

#include "ffdpat/field_io.hpp"
#include "json.hpp"

namespace ffdpat {

std::vector<double> uniform_angles(int n_alpha) {
  std::vector<double> a(static_cast<std::size_t>(std::max(n_alpha, 0)));
  for (int k = 0; k < n_alpha; ++k) a[k] = std::numbers::pi * k / n_alpha;
  return a;
}

std::vector<double> uniform_offsets(int n_s, double s_max) {
  std::vector<double> s(static_cast<std::size_t>(std::max(n_s, 0)));
  if (n_s == 1) {
    s[0] = 0.0;
    return s;
  }
  for (int k = 0; k < n_s; ++k) s[k] = -s_max + 2.0 * s_max * k / (n_s - 1);
  return s;
}

namespace {

// Bilinear sample with zero outside the lattice nodes.
double bilinear(const Image2& img, double x, double y) {
  const Lattice2& l = img.lattice;
  const double h = l.spacing();
  const double u = (x + l.half_width) / h;
  const double v = (y + l.half_width) / h;
  const double fu = std::floor(u);
  const double fv = std::floor(v);
  const int i = static_cast<int>(fu);
  const int j = static_cast<int>(fv);
  if (i < -1 || j < -1 || i >= l.n || j >= l.n) return 0.0;
  const double du = u - fu;
  const double dv = v - fv;
  auto node = [&](int a, int b) {
    return (a < 0 || b < 0 || a >= l.n || b >= l.n) ? 0.0 : img.at(a, b);
  };
  return (1.0 - du) * (1.0 - dv) * node(i, j) + du * (1.0 - dv) * node(i + 1, j) +
         (1.0 - du) * dv * node(i, j + 1) + du * dv * node(i + 1, j + 1);
}

// Range of t for which the point s*theta + t*theta_perp lies in the box
// [-e, e]^2; empty when lo > hi.
void clip_line(double s, double c, double sn, double e, double& lo, double& hi) {
  lo = -std::numeric_limits<double>::infinity();
  hi = std::numeric_limits<double>::infinity();
  // x(t) = s c - t sn, y(t) = s sn + t c
  auto slab = [&](double p0, double dp) {
    if (std::abs(dp) < 1e-15) {
      if (std::abs(p0) > e) {
        lo = 1.0;
        hi = 0.0;
      }
      return;
    }
    double t0 = (-e - p0) / dp;
    double t1 = (e - p0) / dp;
    if (t0 > t1) std::swap(t0, t1);
    lo = std::max(lo, t0);
    hi = std::min(hi, t1);
  };
  slab(s * c, -sn);
  slab(s * sn, c);
}

void require_uniform(std::span<const double> offsets) {
  if (offsets.size() < 2) {
    throw std::invalid_argument("fbp: need at least two offsets");
  }
  const double ds = offsets[1] - offsets[0];
  if (!(ds > 0.0)) throw std::invalid_argument("fbp: offsets must increase");
  for (std::size_t k = 1; k < offsets.size(); ++k) {
    if (std::abs(offsets[k] - offsets[k - 1] - ds) > 1e-9 * std::max(1.0, ds)) {
      throw std::invalid_argument("fbp: offsets must be uniformly spaced");
    }
  }
}

std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

// Linear convolution with the band-limited ramp kernel
//   k(0) = 1 / (4 ds^2), k(odd m) = -1 / (pi^2 m^2 ds^2), k(even m) = 0,
// scaled by ds, done with zero-padded FFTs.
class RampFilter {
 public:
  RampFilter(int n_s, double ds) : n_s_(n_s) {
    padded_ = 1;
    while (padded_ < 2 * n_s) padded_ *= 2;
    const int nc = padded_ / 2 + 1;
    const int fine = padded_ * kUpsample;
    real_ = fftw_alloc_real(fine);
    spec_ = fftw_alloc_complex(fine / 2 + 1);
    {
      std::lock_guard lock(plan_mutex());
      fwd_ = fftw_plan_dft_r2c_1d(padded_, real_, spec_, FFTW_ESTIMATE);
      bwd_ = fftw_plan_dft_c2r_1d(fine, spec_, real_, FFTW_ESTIMATE);
    }
    std::fill(real_, real_ + padded_, 0.0);
    const double pi2 = std::numbers::pi * std::numbers::pi;
    real_[0] = 1.0 / (4.0 * ds * ds);
    for (int m = 1; m < n_s; ++m) {
      const double v = (m % 2 == 1) ? -1.0 / (pi2 * m * m * ds * ds) : 0.0;
      real_[m] = v;
      real_[padded_ - m] = v;
    }
    fftw_execute(fwd_);
    kernel_.resize(nc);
    // The kernel is even, so its spectrum is real.
    for (int k = 0; k < nc; ++k) kernel_[k] = spec_[k][0] * ds / padded_;
  }
  ~RampFilter() {
    std::lock_guard lock(plan_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
    fftw_free(real_);
    fftw_free(spec_);
  }
  RampFilter(const RampFilter&) = delete;
  RampFilter& operator=(const RampFilter&) = delete;

  static constexpr int kUpsample = 4;

  /// Filtered row resampled at ds / kUpsample: (n_s - 1) * kUpsample + 1 values.
  static int fine_count(int n_s) { return (n_s - 1) * kUpsample + 1; }

  void apply(std::span<const double> in, std::span<double> out) {
    const int fine = padded_ * kUpsample;
    std::fill(real_, real_ + padded_, 0.0);
    std::copy(in.begin(), in.end(), real_);
    fftw_execute(fwd_);
    const std::size_t nc = kernel_.size();
    for (std::size_t k = 0; k < nc; ++k) {
      spec_[k][0] *= kernel_[k];
      spec_[k][1] *= kernel_[k];
    }
    // Split the Nyquist bin so the zero-padded spectrum stays Hermitian.
    spec_[nc - 1][0] *= 0.5;
    spec_[nc - 1][1] *= 0.5;
    for (int k = static_cast<int>(nc); k <= fine / 2; ++k) {
      spec_[k][0] = 0.0;
      spec_[k][1] = 0.0;
    }
    fftw_execute(bwd_);
    std::copy(real_, real_ + fine_count(n_s_), out.begin());
  }

 private:
  int n_s_;
  int padded_ = 0;
  double* real_ = nullptr;
  fftw_complex* spec_ = nullptr;
  fftw_plan fwd_ = nullptr;
  fftw_plan bwd_ = nullptr;
  std::vector<double> kernel_;
};

Image2 backproject(const std::vector<double>& filtered,
                   std::span<const double> angles,
                   std::span<const double> offsets, const Lattice2& out) {
  const int n_alpha = static_cast<int>(angles.size());
  const int n_s = RampFilter::fine_count(static_cast<int>(offsets.size()));
  const double s0 = offsets.front();
  const double ds = (offsets[1] - offsets[0]) / RampFilter::kUpsample;
  std::vector<double> cs(n_alpha), sn(n_alpha);
  for (int a = 0; a < n_alpha; ++a) {
    cs[a] = std::cos(angles[a]);
    sn[a] = std::sin(angles[a]);
  }
  const double weight = std::numbers::pi / n_alpha;
  Image2 img(out);
#pragma omp parallel for schedule(static)
  for (int iy = 0; iy < out.n; ++iy) {
    const double y = out.coordinate(iy);
    for (int ix = 0; ix < out.n; ++ix) {
      const double x = out.coordinate(ix);
      double acc = 0.0;
      for (int a = 0; a < n_alpha; ++a) {
        const double u = (x * cs[a] + y * sn[a] - s0) / ds;
        const double fu = std::floor(u);
        const int k = static_cast<int>(fu);
        if (k < 0 || k >= n_s - 1) {
          if (k == n_s - 1 && u - fu == 0.0) {
            acc += filtered[static_cast<std::size_t>(a) * n_s + k];
          }
          continue;
        }
        const double w = u - fu;
        const double* row = filtered.data() + static_cast<std::size_t>(a) * n_s;
        acc += (1.0 - w) * row[k] + w * row[k + 1];
      }
      img.at(ix, iy) = weight * acc;
    }
  }
  return img;
}

Image2 fbp_with(RampFilter& filter, std::span<const double> slab,
                std::span<const double> angles, std::span<const double> offsets,
                const Lattice2& out) {
  const std::size_t n_s = offsets.size();
  const std::size_t fine = RampFilter::fine_count(static_cast<int>(n_s));
  std::vector<double> filtered(angles.size() * fine);
  for (std::size_t a = 0; a < angles.size(); ++a) {
    filter.apply(slab.subspan(a * n_s, n_s),
                 std::span<double>(filtered).subspan(a * fine, fine));
  }
  return backproject(filtered, angles, offsets, out);
}

void check_fbp_inputs(std::span<const double> slab, std::span<const double> angles,
                      std::span<const double> offsets) {
  if (angles.size() < 2) throw std::invalid_argument("fbp: need >= 2 angles");
  require_uniform(offsets);
  if (slab.size() != angles.size() * offsets.size()) {
    throw std::invalid_argument("fbp: slab size does not match geometry");
  }
}

}  // namespace

Image2 disc_image(const Lattice2& lattice, double r, double cx, double cy,
                  int supersample) {
  if (!(r > 0.0) || supersample < 1) {
    throw std::invalid_argument("disc_image: need r > 0 and supersample >= 1");
  }
  const double h = lattice.spacing();
  const int m = supersample;
  Image2 img(lattice);
  for (int iy = 0; iy < lattice.n; ++iy) {
    for (int ix = 0; ix < lattice.n; ++ix) {
      const double x = lattice.coordinate(ix) - cx;
      const double y = lattice.coordinate(iy) - cy;
      int inside = 0;
      for (int b = 0; b < m; ++b) {
        const double yy = y + h * ((b + 0.5) / m - 0.5);
        for (int a = 0; a < m; ++a) {
          const double xx = x + h * ((a + 0.5) / m - 0.5);
          inside += (xx * xx + yy * yy < r * r) ? 1 : 0;
        }
      }
      img.at(ix, iy) = static_cast<double>(inside) / (m * m);
    }
  }
  return img;
}

std::vector<double> radon_slice(const Image2& image, std::span<const double> angles,
                                std::span<const double> offsets) {
  if (angles.empty() || offsets.empty()) {
    throw std::invalid_argument("radon: empty angle or offset list");
  }
  const Lattice2& l = image.lattice;
  const double h = l.spacing();
  // Nodes span [-b, b - h]; bilinear support reaches one cell further.
  const double extent = l.half_width + h;
  const std::size_t n_s = offsets.size();
  std::vector<double> out(angles.size() * n_s, 0.0);
  const int n_alpha = static_cast<int>(angles.size());
#pragma omp parallel for schedule(static)
  for (int a = 0; a < n_alpha; ++a) {
    const double c = std::cos(angles[a]);
    const double sn = std::sin(angles[a]);
    for (std::size_t j = 0; j < n_s; ++j) {
      const double s = offsets[j];
      double lo, hi;
      clip_line(s, c, sn, extent, lo, hi);
      if (lo > hi) continue;
      const long k0 = static_cast<long>(std::ceil(lo / h));
      const long k1 = static_cast<long>(std::floor(hi / h));
      double acc = 0.0;
      for (long k = k0; k <= k1; ++k) {
        const double t = h * static_cast<double>(k);
        acc += bilinear(image, s * c - t * sn, s * sn + t * c);
      }
      out[static_cast<std::size_t>(a) * n_s + j] = acc * h;
    }
  }
  return out;
}

Image2 fbp_slice(std::span<const double> slab, std::span<const double> angles,
                 std::span<const double> offsets, const Lattice2& out) {
  check_fbp_inputs(slab, angles, offsets);
  RampFilter filter(static_cast<int>(offsets.size()), offsets[1] - offsets[0]);
  return fbp_with(filter, slab, angles, offsets, out);
}

Sinogram::Sinogram(int n_alpha, int n_s, int n_z, double s_max,
                   double z_half_width)
    : n_alpha_(n_alpha),
      n_s_(n_s),
      n_z_(n_z),
      s_max_(s_max),
      z_half_width_(z_half_width) {
  if (n_alpha < 1 || n_s < 2 || n_z < 1) {
    throw std::invalid_argument("sinogram: need n_alpha >= 1, n_s >= 2, n_z >= 1");
  }
  if (!(s_max > 0.0) || !(z_half_width > 0.0)) {
    throw std::invalid_argument("sinogram: extents must be positive");
  }
  values_.assign(slab_size() * n_z, 0.0);
}

double Sinogram::angle(int ia) const { return std::numbers::pi * ia / n_alpha_; }
double Sinogram::offset_spacing() const { return 2.0 * s_max_ / (n_s_ - 1); }
double Sinogram::offset(int is) const { return -s_max_ + offset_spacing() * is; }
double Sinogram::height(int iz) const {
  return -z_half_width_ + 2.0 * z_half_width_ / n_z_ * iz;
}

double default_offset_extent(const Grid3& grid) {
  return grid.half_width() * std::numbers::sqrt2;
}

Sinogram radon3(const Field3& f, int n_alpha, int n_s,
                std::optional<double> s_max) {
  const Grid3& g = f.grid();
  Sinogram sino(n_alpha, n_s, g.n(), s_max.value_or(default_offset_extent(g)),
                g.half_width());
  const auto angles = sino.angles();
  const auto offsets = sino.offsets();
  const Lattice2 lat = Lattice2::of(g);
  const std::size_t plane = static_cast<std::size_t>(g.n()) * g.n();
  for (int iz = 0; iz < g.n(); ++iz) {
    Image2 img(lat);
    std::copy_n(f.data() + plane * iz, plane, img.values.begin());
    if (std::all_of(img.values.begin(), img.values.end(),
                    [](double v) { return v == 0.0; })) {
      continue;
    }
    const auto slab = radon_slice(img, angles, offsets);
    std::copy(slab.begin(), slab.end(), sino.slab(iz).begin());
  }
  return sino;
}

Sinogram restrict_Ma(Sinogram sino, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("restrict_Ma: R must be > 0");
  const double r2 = radius * radius;
  for (int iz = 0; iz < sino.n_z(); ++iz) {
    const double z = sino.height(iz);
    for (int ia = 0; ia < sino.n_alpha(); ++ia) {
      for (int is = 0; is < sino.n_s(); ++is) {
        const double s = sino.offset(is);
        if (s * s + z * z < r2) sino.at(ia, is, iz) = 0.0;
      }
    }
  }
  sino.set_mask_radius(radius);
  return sino;
}

Field3 fbp3(const Sinogram& sino, const Grid3& grid) {
  if (sino.n_z() != grid.n() ||
      std::abs(sino.z_half_width() - grid.half_width()) > 1e-12) {
    throw std::invalid_argument("fbp3: sinogram z sampling does not match grid");
  }
  const auto angles = sino.angles();
  const auto offsets = sino.offsets();
  check_fbp_inputs(sino.slab(0), angles, offsets);
  RampFilter filter(sino.n_s(), sino.offset_spacing());
  const Lattice2 lat = Lattice2::of(grid);
  const std::size_t plane = static_cast<std::size_t>(grid.n()) * grid.n();
  Field3 out(grid);
  for (int iz = 0; iz < grid.n(); ++iz) {
    const auto slab = sino.slab(iz);
    if (std::all_of(slab.begin(), slab.end(), [](double v) { return v == 0.0; })) {
      continue;
    }
    const Image2 img = fbp_with(filter, slab, angles, offsets, lat);
    std::copy(img.values.begin(), img.values.end(), out.data() + plane * iz);
  }
  return out;
}

void write_sinogram(const std::filesystem::path& meta_path, const Sinogram& sino) {
  nlohmann::json meta = {{"type", "sinogram"},
                         {"n_alpha", sino.n_alpha()},
                         {"n_s", sino.n_s()},
                         {"n_z", sino.n_z()},
                         {"s_max", sino.s_max()},
                         {"b", sino.z_half_width()},
                         {"mask_radius", nullptr},
                         {"order", "s-fastest"}};
  if (sino.mask_radius()) meta["mask_radius"] = *sino.mask_radius();
  write_text(meta_path, meta.dump(2) + "\n");
  write_raw_f64(binary_path_for(meta_path), sino.values());
}

Sinogram read_sinogram(const std::filesystem::path& meta_path) {
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(read_text(meta_path));
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("invalid JSON in " + meta_path.string() + ": " +
                             e.what());
  }
  for (const char* key : {"n_alpha", "n_s", "n_z", "s_max", "b", "mask_radius"}) {
    if (!meta.contains(key)) {
      throw std::runtime_error("sinogram metadata missing '" + std::string(key) +
                               "': " + meta_path.string());
    }
  }
  if (meta.value("type", "") != "sinogram" ||
      meta.value("order", "") != "s-fastest") {
    throw std::runtime_error("not a sinogram metadata file: " + meta_path.string());
  }
  Sinogram sino(meta["n_alpha"].get<int>(), meta["n_s"].get<int>(),
                meta["n_z"].get<int>(), meta["s_max"].get<double>(),
                meta["b"].get<double>());
  if (!meta["mask_radius"].is_null()) {
    sino.set_mask_radius(meta["mask_radius"].get<double>());
  }
  const auto values =
      read_raw_f64(binary_path_for(meta_path), sino.values().size());
  std::copy(values.begin(), values.end(), sino.values().begin());
  return sino;
}

}  // namespace ffdpat
