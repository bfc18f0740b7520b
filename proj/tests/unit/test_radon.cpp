#include <cmath>
#include <numbers>

#include "doctest.h"
#include "ffdpat/field_io.hpp"
#include "ffdpat/radon.hpp"
#include "json.hpp"
#include "support.hpp"

using namespace ffdpat;
using namespace ffdpat::testing;

namespace {

double image_rel_l2(const Image2& a, const Image2& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < b.values.size(); ++i) {
    num += (a.values[i] - b.values[i]) * (a.values[i] - b.values[i]);
    den += b.values[i] * b.values[i];
  }
  return std::sqrt(num / den);
}

template <class F>
Image2 sample(const Lattice2& lat, F&& f) {
  Image2 img(lat);
  for (int iy = 0; iy < lat.n; ++iy)
    for (int ix = 0; ix < lat.n; ++ix) img.at(ix, iy) = f(lat.coordinate(ix), lat.coordinate(iy));
  return img;
}

Image2 gaussian_image(const Lattice2& lat, double sigma) {
  return sample(lat, [sigma](double x, double y) {
    return std::exp(-(x * x + y * y) / (2 * sigma * sigma));
  });
}

}  // namespace

TEST_SUITE("radon") {

TEST_CASE("angle and offset lattices") {
  const auto a = uniform_angles(4);
  REQUIRE(a.size() == 4);
  CHECK(a[1] == doctest::Approx(std::numbers::pi / 4));
  CHECK(a[3] < std::numbers::pi);
  const auto s = uniform_offsets(5, 2.0);
  CHECK(s.front() == -2.0);
  CHECK(s.back() == 2.0);
  CHECK(s[2] == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("zero slice projects to zero") {
  const Lattice2 lat{32, 1.0};
  const auto out = radon_slice(Image2(lat), uniform_angles(8), uniform_offsets(17, 1.4));
  for (double v : out) CHECK(v == 0.0);
}

TEST_CASE("empty lists are rejected") {
  const Image2 img(Lattice2{8, 1.0});
  const std::vector<double> none;
  CHECK_THROWS_AS(radon_slice(img, none, uniform_offsets(5, 1.0)), std::invalid_argument);
  CHECK_THROWS_AS(radon_slice(img, uniform_angles(3), none), std::invalid_argument);
}

TEST_CASE("disc projections follow the chord length") {
  const Lattice2 lat{256, 1.0};
  const double r = 0.5;
  const Image2 disc = disc_image(lat, r);
  const auto angles = uniform_angles(45);
  const auto offsets = uniform_offsets(256, 1.0);
  const auto sino = radon_slice(disc, angles, offsets);
  double worst = 0.0;
  for (std::size_t a = 0; a < angles.size(); ++a) {
    for (std::size_t j = 0; j < offsets.size(); ++j) {
      const double s = offsets[j];
      const double chord = std::abs(s) < r ? 2 * std::sqrt(r * r - s * s) : 0.0;
      worst = std::max(worst, std::abs(sino[a * offsets.size() + j] - chord));
    }
  }
  CHECK(worst <= 2 * lat.spacing());
}

TEST_CASE("area-weighted disc has the disc area") {
  const Lattice2 lat{128, 1.0};
  const Image2 disc = disc_image(lat, 0.3, 0.1, -0.2);
  double area = 0.0;
  for (double v : disc.values) area += v;
  area *= lat.spacing() * lat.spacing();
  CHECK(area == doctest::Approx(std::numbers::pi * 0.09).epsilon(1e-3));
  CHECK_THROWS_AS(disc_image(lat, 0.0), std::invalid_argument);
}

TEST_CASE("gaussian projections") {
  const Lattice2 lat{256, 1.0};
  const double sigma = 0.1;
  const Image2 img = gaussian_image(lat, sigma);
  const auto angles = uniform_angles(30);
  const auto offsets = uniform_offsets(201, 1.0);
  const auto sino = radon_slice(img, angles, offsets);
  double num = 0.0, den = 0.0;
  for (std::size_t a = 0; a < angles.size(); ++a) {
    for (std::size_t j = 0; j < offsets.size(); ++j) {
      const double s = offsets[j];
      const double exact = sigma * std::sqrt(2 * std::numbers::pi) *
                           std::exp(-s * s / (2 * sigma * sigma));
      const double d = sino[a * offsets.size() + j] - exact;
      num += d * d;
      den += exact * exact;
    }
  }
  CHECK(std::sqrt(num / den) <= 0.01);
}

TEST_CASE("lines missing the lattice integrate to zero") {
  const Lattice2 lat{32, 1.0};
  const Image2 img(lat, 1.0);
  const std::vector<double> angles{0.0, std::numbers::pi / 2};
  const std::vector<double> offsets{-3.0, 3.0};
  for (double v : radon_slice(img, angles, offsets)) CHECK(v == 0.0);
}

TEST_CASE("projection is linear") {
  const Lattice2 lat{64, 1.0};
  const Image2 a = gaussian_image(lat, 0.2);
  const Image2 b = sample(lat, [](double x, double y) { return std::cos(3 * x) * (y > 0.1); });
  Image2 c(lat);
  for (std::size_t i = 0; i < c.values.size(); ++i) c.values[i] = 2 * a.values[i] - 3 * b.values[i];
  const auto angles = uniform_angles(12);
  const auto offsets = uniform_offsets(91, 1.4);
  const auto ra = radon_slice(a, angles, offsets), rb = radon_slice(b, angles, offsets);
  const auto rc = radon_slice(c, angles, offsets);
  for (std::size_t i = 0; i < rc.size(); ++i) {
    CHECK(rc[i] == doctest::Approx(2 * ra[i] - 3 * rb[i]).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("evenness: angle plus pi mirrors the offset") {
  const Lattice2 lat{64, 1.0};
  const Image2 img = sample(lat, [](double x, double y) {
    return std::exp(-((x - 0.2) * (x - 0.2) + 4 * (y + 0.1) * (y + 0.1)) / 0.05);
  });
  const auto base = uniform_angles(18);
  std::vector<double> shifted(base);
  for (double& a : shifted) a += std::numbers::pi;
  const auto offsets = uniform_offsets(65, 1.2);
  const auto r0 = radon_slice(img, base, offsets), r1 = radon_slice(img, shifted, offsets);
  const std::size_t ns = offsets.size();
  double worst = 0.0, peak = 0.0;
  for (std::size_t a = 0; a < base.size(); ++a) {
    for (std::size_t j = 0; j < ns; ++j) {
      worst = std::max(worst, std::abs(r1[a * ns + j] - r0[a * ns + (ns - 1 - j)]));
      peak = std::max(peak, std::abs(r0[a * ns + j]));
    }
  }
  CHECK(worst <= 1e-10 * peak);
}

TEST_CASE("rotating the input permutes the angle axis") {
  const Lattice2 lat{128, 1.0};
  const int n_alpha = 36;
  const double step = std::numbers::pi / n_alpha;
  auto blob = [](double x, double y) {
    return std::exp(-((x - 0.25) * (x - 0.25) / 0.02 + (y - 0.05) * (y - 0.05) / 0.005));
  };
  const Image2 img = sample(lat, blob);
  const Image2 rot = sample(lat, [&](double x, double y) {
    const double c = std::cos(step), s = std::sin(step);
    return blob(c * x + s * y, -s * x + c * y);
  });
  const auto angles = uniform_angles(n_alpha);
  const auto offsets = uniform_offsets(129, 1.4);
  const std::size_t ns = offsets.size();
  const auto r0 = radon_slice(img, angles, offsets), r1 = radon_slice(rot, angles, offsets);
  double worst = 0.0;
  for (int a = 0; a < n_alpha; ++a) {
    for (std::size_t j = 0; j < ns; ++j) {
      // alpha - step wraps to pi - step with s mirrored
      const double prev = a == 0 ? r0[(n_alpha - 1) * ns + (ns - 1 - j)] : r0[(a - 1) * ns + j];
      worst = std::max(worst, std::abs(r1[a * ns + j] - prev));
    }
  }
  CHECK(worst <= 2 * lat.spacing());
}

TEST_CASE("radon3 keeps slices independent and preserves mass") {
  const Grid3 g(128, 1.0);
  const double sigma = 0.25;
  Field3 f(g);
  for (int k = 0; k < g.n(); ++k)
    for (int j = 0; j < g.n(); ++j)
      for (int i = 0; i < g.n(); ++i) {
        if (k != 70) continue;
        const Vec3 x = g.node(i, j, k);
        f.at(i, j, k) = std::exp(-((x.x - 0.1) * (x.x - 0.1) + x.y * x.y) / (2 * sigma * sigma));
      }
  // Offsets every h / 2 through s = 0, so every node lies on a sampled line at alpha = 0.
  const int half = static_cast<int>(std::ceil(default_offset_extent(g) / (g.spacing() / 2)));
  const Sinogram sino = radon3(f, 24, 2 * half + 1, half * g.spacing() / 2);
  CHECK(sino.n_z() == 128);
  CHECK(sino.offset_spacing() == doctest::Approx(g.spacing() / 2));
  for (int iz = 0; iz < g.n(); ++iz) {
    if (iz == 70) continue;
    for (double v : sino.slab(iz)) REQUIRE(v == 0.0);
  }
  double mass = 0.0;
  for (int j = 0; j < g.n(); ++j)
    for (int i = 0; i < g.n(); ++i) mass += f.at(i, j, 70);
  mass *= g.spacing() * g.spacing();
  for (int ia = 0; ia < sino.n_alpha(); ++ia) {
    double line_mass = 0.0;
    for (int is = 0; is < sino.n_s(); ++is) line_mass += sino.at(ia, is, 70);
    line_mass *= sino.offset_spacing();
    CHECK(std::abs(line_mass - mass) <= 1e-6 * mass);
  }
  CHECK(sino.height(70) == doctest::Approx(g.coordinate(70)));
}

TEST_CASE("restriction to the admissible set") {
  const Grid3 g(16, 1.0);
  // Even offset count: no sample sits at s = 0.
  const Sinogram sino = radon3(random_field(g, 3), 6, 22);
  SUBCASE("zeroes exactly the inner samples and records R") {
    const Sinogram m = restrict_Ma(sino, 0.5);
    REQUIRE(m.mask_radius().has_value());
    CHECK(*m.mask_radius() == 0.5);
    for (int iz = 0; iz < m.n_z(); ++iz)
      for (int ia = 0; ia < m.n_alpha(); ++ia)
        for (int is = 0; is < m.n_s(); ++is) {
          const double s = m.offset(is), z = m.height(iz);
          if (s * s + z * z < 0.25) CHECK(m.at(ia, is, iz) == 0.0);
          else CHECK(m.at(ia, is, iz) == sino.at(ia, is, iz));
        }
  }
  SUBCASE("idempotent") {
    const Sinogram once = restrict_Ma(sino, 0.4);
    const Sinogram twice = restrict_Ma(once, 0.4);
    for (std::size_t i = 0; i < once.values().size(); ++i) CHECK(once.values()[i] == twice.values()[i]);
  }
  SUBCASE("tiny radius is the identity") {
    const Sinogram m = restrict_Ma(sino, 1e-9);
    for (std::size_t i = 0; i < m.values().size(); ++i) CHECK(m.values()[i] == sino.values()[i]);
  }
  SUBCASE("radius beyond every sample clears the data") {
    const Sinogram m = restrict_Ma(sino, std::sqrt(sino.s_max() * sino.s_max() + 1.0) + 0.1);
    for (double v : m.values()) CHECK(v == 0.0);
  }
  SUBCASE("non-positive radius") {
    CHECK_THROWS_AS(restrict_Ma(sino, 0.0), std::invalid_argument);
  }
}

TEST_CASE("fbp of zero is zero") {
  const Lattice2 lat{32, 1.0};
  const auto angles = uniform_angles(10);
  const auto offsets = uniform_offsets(33, 1.4);
  const std::vector<double> zero(angles.size() * offsets.size(), 0.0);
  for (double v : fbp_slice(zero, angles, offsets, lat).values) CHECK(v == 0.0);
}

TEST_CASE("fbp input checks") {
  const Lattice2 lat{16, 1.0};
  const std::vector<double> one_angle{0.0};
  const auto offsets = uniform_offsets(9, 1.0);
  CHECK_THROWS_AS(fbp_slice(std::vector<double>(9, 0.0), one_angle, offsets, lat),
                  std::invalid_argument);
  std::vector<double> bent = offsets;
  bent[3] += 0.01;
  const auto angles = uniform_angles(4);
  CHECK_THROWS_AS(fbp_slice(std::vector<double>(36, 0.0), angles, bent, lat),
                  std::invalid_argument);
  CHECK_THROWS_AS(fbp_slice(std::vector<double>(35, 0.0), angles, offsets, lat),
                  std::invalid_argument);
}

TEST_CASE("disc round trips through fbp") {
  const Lattice2 lat{256, 1.0};
  const auto angles = uniform_angles(180);
  const auto offsets = uniform_offsets(256, 1.0);
  for (const Image2& disc : {disc_image(lat, 0.5), disc_image(lat, 0.3, 0.25, -0.2)}) {
    const Image2 rec = fbp_slice(radon_slice(disc, angles, offsets), angles, offsets, lat);
    CHECK(image_rel_l2(rec, disc) <= 0.05);
  }
}

TEST_CASE("fbp is linear") {
  const Lattice2 lat{32, 1.0};
  const auto angles = uniform_angles(16);
  const auto offsets = uniform_offsets(45, 1.4);
  const std::size_t m = angles.size() * offsets.size();
  std::vector<double> u(m), v(m), w(m);
  for (std::size_t i = 0; i < m; ++i) {
    u[i] = std::sin(0.37 * i);
    v[i] = std::cos(0.11 * i * i);
    w[i] = 1.5 * u[i] - 0.5 * v[i];
  }
  const Image2 a = fbp_slice(u, angles, offsets, lat), b = fbp_slice(v, angles, offsets, lat);
  const Image2 c = fbp_slice(w, angles, offsets, lat);
  for (std::size_t i = 0; i < c.values.size(); ++i) {
    CHECK(c.values[i] == doctest::Approx(1.5 * a.values[i] - 0.5 * b.values[i]).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("smooth volume round trips through fbp3") {
  const Grid3 g(128, 1.0);
  Field3 f(g);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Vec3 x = g.node(i);
    f[i] = std::exp(-((x.x - 0.2) * (x.x - 0.2) + x.y * x.y + x.z * x.z) / (2 * 0.04)) +
           0.5 * std::exp(-((x.x + 0.3) * (x.x + 0.3) + (x.y - 0.2) * (x.y - 0.2) + x.z * x.z) / (2 * 0.01));
  }
  const double s_max = default_offset_extent(g);
  const int n_s = 2 * static_cast<int>(std::ceil(s_max / g.spacing())) + 1;
  const Field3 h = fbp3(radon3(f, 180, n_s), g);
  CHECK(relative_l2(h, f) <= 0.06);
}

TEST_CASE("fbp3 of zero data is zero and z sampling must match") {
  const Grid3 g(16, 1.0);
  const Sinogram zero(8, 23, 16, std::sqrt(2.0), 1.0);
  CHECK(fbp3(zero, g).max_abs() == 0.0);
  CHECK_THROWS_AS(fbp3(zero, Grid3(16, 2.0)), std::invalid_argument);
  CHECK_THROWS_AS(fbp3(zero, Grid3(8, 1.0)), std::invalid_argument);
}

TEST_CASE("sinogram files round trip") {
  const auto dir = scratch_dir("sino_rt");
  const Grid3 g(8, 1.0);
  const Sinogram sino = restrict_Ma(radon3(random_field(g, 1), 5, 13), 0.3);
  write_sinogram(dir / "s.json", sino);
  const Sinogram back = read_sinogram(dir / "s.json");
  CHECK(back.n_alpha() == 5);
  CHECK(back.n_s() == 13);
  CHECK(back.n_z() == 8);
  CHECK(back.s_max() == sino.s_max());
  CHECK(back.z_half_width() == 1.0);
  CHECK(back.mask_radius() == sino.mask_radius());
  for (std::size_t i = 0; i < sino.values().size(); ++i) CHECK(back.values()[i] == sino.values()[i]);
  const auto meta = nlohmann::json::parse(read_text(dir / "s.json"));
  CHECK(meta["type"] == "sinogram");
  CHECK(meta["order"] == "s-fastest");

  const Sinogram open = radon3(random_field(g, 2), 5, 13);
  write_sinogram(dir / "o.json", open);
  CHECK(nlohmann::json::parse(read_text(dir / "o.json"))["mask_radius"].is_null());
  CHECK_FALSE(read_sinogram(dir / "o.json").mask_radius().has_value());

  std::filesystem::resize_file(dir / "s.bin", 8);
  CHECK_THROWS_AS(read_sinogram(dir / "s.json"), std::runtime_error);
}

}
