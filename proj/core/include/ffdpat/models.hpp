#pragma once

#include <string>
#include <vector>

#include "ffdpat/grid.hpp"

namespace ffdpat {

enum class SpeedKind { Constant, Gaussians, Cavity, RadialSine };

std::string to_string(SpeedKind kind);
SpeedKind parse_speed_kind(const std::string& name);

/// amplitude * exp(-|x - center|^2 / (2 width^2))
struct GaussianPulse {
  Vec3 center;
  double width = 0.1;
  double amplitude = 0.3;
};

/// Parametrized sound speed: c = c_bg + taper(|x|) * perturbation(x).
///
/// The taper is 1 for |x| <= a - collar, 0 for |x| >= a, and C^2 in between,
/// standing in for the sharp cutoff at the ball boundary.
struct SpeedSpec {
  SpeedKind kind = SpeedKind::Constant;
  double background = 1.0;
  double ball_radius = 0.4;
  double collar = 0.1;

  std::vector<GaussianPulse> pulses;  // Gaussians

  Vec3 cavity_center;  // Cavity: -depth * exp(-|x - center|^2 / (2 width^2))
  double cavity_width = 0.12;
  double cavity_depth = 0.3;

  double sine_alpha = 40.0;  // RadialSine: beta * sin(alpha |x|^2)
  double sine_beta = 0.3;

  /// Largest allowed |c - c_bg| / c_bg; checked when enforce_cap is set.
  double deviation_cap = 0.3;
  bool enforce_cap = true;
};

SpeedSpec constant_speed(double c = 1.0);
/// Four narrow pulses (width 0.08, amplitude 0.3) on a tetrahedron of radius 0.25.
SpeedSpec model_a();
/// One wide pulse at the origin, width 0.2, amplitude 0.3.
SpeedSpec model_b();
/// Central cavity 1 - 0.3 exp(-|x|^2 / (2 * 0.12^2)).
SpeedSpec model_c();
/// 1 + 0.3 taper(|x|) sin(40 |x|^2).
SpeedSpec model_d();
/// "constant", "A", "B", "C" or "D".
SpeedSpec speed_preset(const std::string& name);

/// Non-trapping presets (A, B and constant) decay locally; C and D trap rays.
bool is_non_trapping(const SpeedSpec& spec);

/// C^2 taper: 1 - (10 s^3 - 15 s^4 + 6 s^5), s = clamp((r - a + collar) / collar).
double collar_taper(double r, double radius, double collar);

double evaluate_speed(const SpeedSpec& spec, const Vec3& x);

/// Throws std::invalid_argument on non-positive speed or, with enforce_cap,
/// when the deviation exceeds the cap.
Field3 make_speed(const SpeedSpec& spec, const Grid3& grid);

struct Ball {
  Vec3 center;
  double radius = 0.1;
  double amplitude = 1.0;
};

struct PhantomSpec {
  std::vector<Ball> balls;
  double containment_radius = 0.4;
  /// Edge half-width in grid cells. 0 samples sharp indicators; otherwise
  /// each edge is a C^2 ramp over [radius - e h, radius + e h].
  double edge_cells = 0.0;
};

/// Three unit-amplitude balls inside radius 0.4, sharp edges.
PhantomSpec default_phantom();

/// Radial profile of one ball at distance d from its centre.
double ball_profile(double d, double radius, double edge_width);

/// Throws std::invalid_argument when a ball (with its edge on this grid)
/// escapes the containment radius.
Field3 make_phantom(const PhantomSpec& spec, const Grid3& grid);

}  // namespace ffdpat
