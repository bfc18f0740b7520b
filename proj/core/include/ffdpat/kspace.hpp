#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ffdpat/fourier.hpp"
#include "ffdpat/grid.hpp"

namespace ffdpat {

enum class AdjointMode { DiscreteTranspose, TimeReversal };

std::string to_string(AdjointMode mode);
/// Accepts "discrete-transpose" and "time-reversal".
AdjointMode parse_adjoint_mode(const std::string& name);

/// How w(-h_t) is initialised.
enum class StartRule {
  /// w(-h_t) = w(0) - 2 L[p(0)], the time-symmetric start implied by
  /// p_t(0) = 0. Exact for constant speed.
  KSpace,
  /// w(-h_t) = w(0), first order in h_t.
  FirstOrder,
};

std::string to_string(StartRule rule);
StartRule parse_start_rule(const std::string& name);

struct WaveOptions {
  double final_time = 1.4;
  /// 0 selects the smallest M with c_ref * h_t / h <= cfl_limit.
  int steps = 0;
  double cfl_limit = 0.3;
  bool enforce_cfl = true;
  /// Reference speed of the k-space multiplier; defaults to max(c).
  std::optional<double> c_ref;
  /// Speed outside the ball.
  double background = 1.0;
  double ball_radius = 0.4;
  StartRule start = StartRule::KSpace;
};

/// Validated propagation setup: speed map, reference speed, time grid, ball.
class WaveConfig {
 public:
  /// Throws std::invalid_argument when c is not positive, differs from the
  /// background outside the ball, c_ref < max(c), or the CFL limit is
  /// exceeded with enforce_cfl set.
  WaveConfig(Field3 speed, const WaveOptions& options);

  const Grid3& grid() const { return speed_.grid(); }
  const Field3& speed() const { return speed_; }
  const BallMask& mask() const { return mask_; }
  double c_ref() const { return c_ref_; }
  double background() const { return background_; }
  double final_time() const { return final_time_; }
  int steps() const { return steps_; }
  double time_step() const { return final_time_ / steps_; }
  /// c_ref * h_t / h
  double cfl() const;
  StartRule start() const { return start_; }
  const WaveOptions& options() const { return options_; }

  /// Same speed and time step, `steps` steps long.
  WaveConfig with_steps(int steps) const;

 private:
  Field3 speed_;
  BallMask mask_;
  WaveOptions options_;
  double c_ref_;
  double background_;
  double final_time_;
  int steps_;
  StartRule start_;
};

/// Smallest M with c_ref * (T / M) / h <= cfl_limit.
int steps_for_cfl(double c_ref, double final_time, double spacing,
                  double cfl_limit);

/// Auxiliary field w at times t - h_t and t.
struct LeapfrogState {
  Field3 w_prev;
  Field3 w_curr;
  int step = 0;
};

/// k-space pseudospectral propagator for p_tt = c^2 Lap p on the periodic cube.
///
/// With D = c^2 / c_ref^2 and L = IFFT sin^2(c_ref |xi| h_t / 2) FFT, the
/// auxiliary w = p / D advances as
///
///   w_{j+1} = 2 w_j - w_{j-1} - 4 L[D w_j],   p_j = D w_j.
///
/// A propagator owns FFT buffers; use one per thread.
class WavePropagator {
 public:
  explicit WavePropagator(WaveConfig config);

  const WaveConfig& config() const { return config_; }

  /// Throws std::invalid_argument when f is not supported in the ball.
  LeapfrogState init_state(const Field3& f);
  /// Advances one step in place; throws std::out_of_range when step >= M.
  void advance(LeapfrogState& state);
  LeapfrogState step(LeapfrogState state);
  /// p = D * w_curr
  Field3 pressure(const LeapfrogState& state) const;

  /// p(., T) for ball-supported f.
  Field3 forward(const Field3& f);
  /// Masked transpose of forward() under the selected construction.
  Field3 transpose(const Field3& g, AdjointMode mode);

  /// Pressure after each requested step count (ascending, may exceed M).
  /// No support check on the initial data.
  std::vector<Field3> pressure_history(const Field3& initial,
                                       std::span<const int> record_steps);

 private:
  LeapfrogState start_from(const Field3& initial);
  void advance_unchecked(LeapfrogState& state);

  WaveConfig config_;
  Field3 ratio_;      // c^2 / c_ref^2
  Field3 inv_ratio_;  // c_ref^2 / c^2
  FourierMultiplier multiplier_;
  Field3 scratch_;
};

struct DotTestReport {
  std::vector<double> discrete_transpose;
  std::vector<double> time_reversal;

  double max_discrete() const;
  double max_time_reversal() const;
};

/// |<A f, g> - <f, A^T g>| / (||A f|| ||g||) for random f in X_N and g.
/// A vanishing denominator gives 0.
double adjoint_mismatch(const Field3& f, const Field3& Af, const Field3& g,
                        const Field3& Atg);

DotTestReport dot_test(const WaveConfig& config, int trials, std::uint64_t seed);

/// Strict-JSON record of a propagation: n, b, T, M, h_t, c_ref, CFL, mode and
/// a checksum of the speed map.
std::string propagation_manifest(const WaveConfig& config,
                                 const std::string& mode);

}  // namespace ffdpat
