#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "ffdpat/models.hpp"
#include "support.hpp"

using namespace ffdpat;

namespace {

double dist(const Vec3& a, const Vec3& b) {
  return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) +
                   (a.z - b.z) * (a.z - b.z));
}

// Independent restatement of the taper: 1 inside a - collar, 0 outside a.
double taper(double r, double a, double collar) {
  const double s = std::clamp((r - (a - collar)) / collar, 0.0, 1.0);
  return 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

}  // namespace

TEST_SUITE("models") {

TEST_CASE("presets by name") {
  CHECK(speed_preset("A").kind == SpeedKind::Gaussians);
  CHECK(speed_preset("B").pulses.size() == 1);
  CHECK(speed_preset("C").kind == SpeedKind::Cavity);
  CHECK(speed_preset("D").kind == SpeedKind::RadialSine);
  CHECK(speed_preset("constant").kind == SpeedKind::Constant);
  CHECK_THROWS_AS(speed_preset("E"), std::invalid_argument);
  CHECK(is_non_trapping(model_a()));
  CHECK(is_non_trapping(model_b()));
  CHECK(is_non_trapping(constant_speed()));
  CHECK_FALSE(is_non_trapping(model_c()));
  CHECK_FALSE(is_non_trapping(model_d()));
}

TEST_CASE("constant speed is flat") {
  const Field3 c = make_speed(constant_speed(1.0), Grid3(16, 1.0));
  for (std::size_t i = 0; i < c.size(); ++i) CHECK(c[i] == 1.0);
}

TEST_CASE("model D at the origin is the background") {
  CHECK(evaluate_speed(model_d(), Vec3{}) == 1.0);
}

TEST_CASE("model B samples match the formula at random nodes") {
  const Grid3 g(64, 2.0);
  const SpeedSpec spec = model_b();
  const Field3 c = make_speed(spec, g);
  std::mt19937_64 rng(99);
  const BallMask ball(g, 0.4);
  std::vector<std::size_t> inside;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (ball.contains(i)) inside.push_back(i);
  std::uniform_int_distribution<std::size_t> pick(0, inside.size() - 1);
  for (int t = 0; t < 10; ++t) {
    const std::size_t i = inside[pick(rng)];
    const Vec3 x = g.node(i);
    const double r = x.norm();
    const double expected = 1.0 + taper(r, 0.4, 0.1) * 0.3 * std::exp(-r * r / (2 * 0.2 * 0.2));
    CHECK(std::abs(c[i] - expected) <= 1e-12);
  }
}

TEST_CASE("model A is four pulses of width 0.08 and amplitude 0.3 inside 0.3") {
  const SpeedSpec a = model_a();
  REQUIRE(a.pulses.size() == 4);
  for (const auto& p : a.pulses) {
    CHECK(p.width == 0.08);
    CHECK(p.amplitude == 0.3);
    CHECK(p.center.norm() < 0.3);
  }
  const Vec3 y = a.pulses[0].center;
  double expected = 1.0;
  for (const auto& p : a.pulses) {
    const double d = dist(y, p.center);
    expected += taper(y.norm(), 0.4, 0.1) * 0.3 * std::exp(-d * d / (2 * 0.08 * 0.08));
  }
  CHECK(evaluate_speed(a, y) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("model C cavity and model D ripple match their formulas") {
  for (double r : {0.0, 0.05, 0.12, 0.25, 0.33}) {
    const Vec3 x{r / std::sqrt(3.0), -r / std::sqrt(3.0), r / std::sqrt(3.0)};
    const double t = taper(r, 0.4, 0.1);
    CHECK(evaluate_speed(model_c(), x) ==
          doctest::Approx(1.0 - t * 0.3 * std::exp(-r * r / (2 * 0.12 * 0.12))).epsilon(1e-14));
    CHECK(evaluate_speed(model_d(), x) ==
          doctest::Approx(1.0 + t * 0.3 * std::sin(40.0 * r * r)).epsilon(1e-14));
  }
}

TEST_CASE("every preset is positive, capped and background outside the ball") {
  const Grid3 g(48, 2.0);
  for (const char* name : {"A", "B", "C", "D"}) {
    const SpeedSpec spec = speed_preset(name);
    const Field3 c = make_speed(spec, g);
    for (std::size_t i = 0; i < c.size(); ++i) {
      CHECK(c[i] > 0.0);
      CHECK(std::abs(c[i] - 1.0) <= 0.3 * (1.0 + 1e-4));
      if (g.node(i).norm() >= 0.4) CHECK(c[i] == 1.0);
    }
  }
}

TEST_CASE("taper is C2 and pinned at its ends") {
  CHECK(collar_taper(0.0, 0.4, 0.1) == 1.0);
  CHECK(collar_taper(0.3, 0.4, 0.1) == 1.0);
  CHECK(collar_taper(0.4, 0.4, 0.1) == 0.0);
  CHECK(collar_taper(1.0, 0.4, 0.1) == 0.0);
  const double e = 1e-6;
  for (double r : {0.3, 0.4}) {
    const double d1 = (collar_taper(r + e, 0.4, 0.1) - collar_taper(r - e, 0.4, 0.1)) / (2 * e);
    const double d2 = (collar_taper(r + e, 0.4, 0.1) - 2 * collar_taper(r, 0.4, 0.1) +
                       collar_taper(r - e, 0.4, 0.1)) / (e * e);
    CHECK(std::abs(d1) < 1e-3);
    CHECK(std::abs(d2) < 1e-1);
  }
}

TEST_CASE("radial models are symmetric under axis permutations") {
  const Grid3 g(32, 1.0);
  for (const auto& spec : {model_c(), model_d()}) {
    const Field3 c = make_speed(spec, g);
    for (int k = 0; k < g.n(); k += 3)
      for (int j = 0; j < g.n(); j += 2)
        for (int i = 0; i < g.n(); ++i) {
          CHECK(c.at(i, j, k) == c.at(j, i, k));
          CHECK(c.at(i, j, k) == c.at(k, j, i));
        }
  }
}

TEST_CASE("speed errors") {
  const Grid3 g(16, 1.0);
  SpeedSpec neg = constant_speed(1.0);
  neg.kind = SpeedKind::Gaussians;
  neg.pulses = {{Vec3{}, 0.1, -1.5}};
  neg.enforce_cap = false;
  CHECK_THROWS_AS(make_speed(neg, g), std::invalid_argument);
  SpeedSpec loud = model_b();
  loud.pulses[0].amplitude = 0.5;
  CHECK_THROWS_AS(make_speed(loud, g), std::invalid_argument);
  loud.enforce_cap = false;
  CHECK_NOTHROW(make_speed(loud, g));
}

TEST_CASE("empty phantom is zero") {
  PhantomSpec spec;
  CHECK(make_phantom(spec, Grid3(16, 1.0)).max_abs() == 0.0);
}

TEST_CASE("single ball volume") {
  PhantomSpec spec;
  spec.balls = {{Vec3{0.03, -0.02, 0.01}, 0.25, 1.0}};
  const Grid3 g(128, 2.0);
  const Field3 f = make_phantom(spec, g);
  double vol = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) vol += f[i];
  vol *= g.cell_volume();
  const double exact = 4.0 / 3.0 * std::numbers::pi * std::pow(0.25, 3);
  CHECK(std::abs(vol - exact) <= 0.05 * exact);
  for (std::size_t i = 0; i < f.size(); ++i) CHECK((f[i] == 0.0 || f[i] == 1.0));
}

TEST_CASE("default phantom lives inside radius 0.4") {
  const PhantomSpec spec = default_phantom();
  CHECK(spec.balls.size() == 3);
  CHECK(spec.containment_radius == 0.4);
  for (const auto& b : spec.balls) CHECK(b.center.norm() + b.radius < 0.4);
  const Grid3 g(64, 2.0);
  const Field3 f = make_phantom(spec, g);
  double largest = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (g.node(i).norm() >= 0.4) CHECK(f[i] == 0.0);
    CHECK(f[i] >= 0.0);
    largest = std::max(largest, f[i]);
  }
  CHECK(largest == 1.0);
}

TEST_CASE("smoothed ball profile") {
  CHECK(ball_profile(0.0, 0.1, 0.0) == 1.0);
  CHECK(ball_profile(0.1, 0.1, 0.0) == 0.0);
  CHECK(ball_profile(0.1, 0.1, 0.02) == doctest::Approx(0.5));
  CHECK(ball_profile(0.08, 0.1, 0.02) == 1.0);
  CHECK(ball_profile(0.12, 0.1, 0.02) == 0.0);
}

TEST_CASE("phantom errors") {
  PhantomSpec spec;
  spec.balls = {{Vec3{0.3, 0.0, 0.0}, 0.15, 1.0}};
  CHECK_THROWS_AS(make_phantom(spec, Grid3(16, 1.0)), std::invalid_argument);
  spec.balls = {{Vec3{0.2, 0.0, 0.0}, 0.15, 1.0}};
  CHECK_NOTHROW(make_phantom(spec, Grid3(64, 1.0)));
  spec.edge_cells = 4.0;  // 4 h = 0.125 pushes the edge past 0.4
  CHECK_THROWS_AS(make_phantom(spec, Grid3(64, 1.0)), std::invalid_argument);
  spec.edge_cells = -1.0;
  CHECK_THROWS_AS(make_phantom(spec, Grid3(64, 1.0)), std::invalid_argument);
}

}
