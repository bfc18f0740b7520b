#include "ffdpat/models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ffdpat {

std::string to_string(SpeedKind kind) {
  switch (kind) {
    case SpeedKind::Constant: return "constant";
    case SpeedKind::Gaussians: return "gaussians";
    case SpeedKind::Cavity: return "cavity";
    case SpeedKind::RadialSine: return "radial-sine";
  }
  return "constant";
}

SpeedKind parse_speed_kind(const std::string& name) {
  if (name == "constant") return SpeedKind::Constant;
  if (name == "gaussians") return SpeedKind::Gaussians;
  if (name == "cavity") return SpeedKind::Cavity;
  if (name == "radial-sine") return SpeedKind::RadialSine;
  throw std::invalid_argument("unknown speed kind: " + name);
}

SpeedSpec constant_speed(double c) {
  SpeedSpec s;
  s.kind = SpeedKind::Constant;
  s.background = c;
  return s;
}

SpeedSpec model_a() {
  SpeedSpec s;
  s.kind = SpeedKind::Gaussians;
  const double r = 0.25 / std::sqrt(3.0);
  for (const Vec3 dir : {Vec3{1, 1, 1}, Vec3{1, -1, -1}, Vec3{-1, 1, -1},
                         Vec3{-1, -1, 1}}) {
    s.pulses.push_back({{r * dir.x, r * dir.y, r * dir.z}, 0.08, 0.3});
  }
  return s;
}

SpeedSpec model_b() {
  SpeedSpec s;
  s.kind = SpeedKind::Gaussians;
  s.pulses.push_back({{0.0, 0.0, 0.0}, 0.2, 0.3});
  return s;
}

SpeedSpec model_c() {
  SpeedSpec s;
  s.kind = SpeedKind::Cavity;
  s.cavity_center = {0.0, 0.0, 0.0};
  s.cavity_width = 0.12;
  s.cavity_depth = 0.3;
  return s;
}

SpeedSpec model_d() {
  SpeedSpec s;
  s.kind = SpeedKind::RadialSine;
  s.sine_alpha = 40.0;
  s.sine_beta = 0.3;
  return s;
}

SpeedSpec speed_preset(const std::string& name) {
  if (name == "constant") return constant_speed();
  if (name == "A") return model_a();
  if (name == "B") return model_b();
  if (name == "C") return model_c();
  if (name == "D") return model_d();
  throw std::invalid_argument("unknown speed preset: " + name);
}

bool is_non_trapping(const SpeedSpec& spec) {
  return spec.kind == SpeedKind::Constant || spec.kind == SpeedKind::Gaussians;
}

double collar_taper(double r, double radius, double collar) {
  if (r >= radius) return 0.0;
  if (collar <= 0.0) return 1.0;
  const double s = std::clamp((r - (radius - collar)) / collar, 0.0, 1.0);
  return 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

namespace {

double dist2(const Vec3& a, const Vec3& b) {
  const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  return dx * dx + dy * dy + dz * dz;
}

}  // namespace

double evaluate_speed(const SpeedSpec& spec, const Vec3& x) {
  const double r = x.norm();
  const double taper = collar_taper(r, spec.ball_radius, spec.collar);
  if (spec.kind == SpeedKind::Constant || taper == 0.0) return spec.background;
  double perturbation = 0.0;
  switch (spec.kind) {
    case SpeedKind::Gaussians:
      for (const auto& p : spec.pulses) {
        perturbation += p.amplitude *
                        std::exp(-dist2(x, p.center) / (2.0 * p.width * p.width));
      }
      break;
    case SpeedKind::Cavity:
      perturbation = -spec.cavity_depth *
                     std::exp(-dist2(x, spec.cavity_center) /
                              (2.0 * spec.cavity_width * spec.cavity_width));
      break;
    case SpeedKind::RadialSine:
      perturbation = spec.sine_beta * std::sin(spec.sine_alpha * r * r);
      break;
    case SpeedKind::Constant:
      break;
  }
  return spec.background + taper * perturbation;
}

Field3 make_speed(const SpeedSpec& spec, const Grid3& grid) {
  if (!(spec.background > 0.0)) {
    throw std::invalid_argument("speed: background must be positive");
  }
  if (!(spec.ball_radius > 0.0) || spec.ball_radius > grid.half_width()) {
    throw std::invalid_argument("speed: ball radius must lie in (0, b]");
  }
  if (spec.collar < 0.0 || spec.collar > spec.ball_radius) {
    throw std::invalid_argument("speed: collar must lie in [0, a]");
  }
  Field3 c(grid);
  double worst = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double v = evaluate_speed(spec, grid.node(i));
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("speed: model produces non-positive speed");
    }
    worst = std::max(worst, std::abs(v - spec.background));
    c[i] = v;
  }
  if (spec.enforce_cap &&
      worst > spec.deviation_cap * spec.background * (1.0 + 1e-4)) {
    throw std::invalid_argument("speed: deviation " + std::to_string(worst) +
                                " exceeds the cap of " +
                                std::to_string(spec.deviation_cap) +
                                " x background");
  }
  return c;
}

PhantomSpec default_phantom() {
  PhantomSpec p;
  p.containment_radius = 0.4;
  p.balls = {{{0.15, 0.0, 0.1}, 0.10, 1.0},
             {{-0.15, 0.1, -0.05}, 0.08, 1.0},
             {{0.0, -0.18, 0.0}, 0.06, 1.0}};
  return p;
}

double ball_profile(double d, double radius, double edge_width) {
  if (edge_width <= 0.0) return d < radius ? 1.0 : 0.0;
  if (d <= radius - edge_width) return 1.0;
  if (d >= radius + edge_width) return 0.0;
  const double s = (d - (radius - edge_width)) / (2.0 * edge_width);
  return std::clamp(1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s), 0.0, 1.0);
}

Field3 make_phantom(const PhantomSpec& spec, const Grid3& grid) {
  if (!(spec.edge_cells >= 0.0)) {
    throw std::invalid_argument("phantom: edge_cells must be >= 0");
  }
  const double edge = spec.edge_cells * grid.spacing();
  for (const auto& b : spec.balls) {
    if (!(b.radius > 0.0)) throw std::invalid_argument("phantom: radius must be > 0");
    if (b.center.norm() + b.radius + edge >= spec.containment_radius) {
      throw std::invalid_argument("phantom: ball escapes the containment radius");
    }
  }
  Field3 f(grid);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Vec3 x = grid.node(i);
    double v = 0.0;
    for (const auto& b : spec.balls) {
      v += b.amplitude * ball_profile(std::sqrt(dist2(x, b.center)), b.radius, edge);
    }
    f[i] = v;
  }
  return f;
}

}  // namespace ffdpat
