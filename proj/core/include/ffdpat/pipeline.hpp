#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ffdpat/config.hpp"
#include "ffdpat/inversion.hpp"
#include "ffdpat/radon.hpp"

namespace ffdpat {

struct Metrics {
  std::optional<double> rel_l2;     // over B_a
  std::optional<double> max_error;  // over B_a
  std::optional<double> mask_leakage;
  std::map<std::string, double> timings_s;

  /// Timings vary run to run; leave them out of persisted artifacts.
  std::string to_json(bool with_timings = true) const;
};

/// Energy of the sinogram at s^2 + z^2 < R^2 over its total energy (0 for
/// an all-zero sinogram).
double mask_leakage(const Sinogram& unmasked, double radius);

/// Relative L2 error over the ball of radius a; the reference must be nonzero.
double relative_error_in_ball(const Field3& estimate, const Field3& truth,
                              const BallMask& ball);
double max_error_in_ball(const Field3& estimate, const Field3& truth,
                         const BallMask& ball);

/// Speed field for `spec` with the config's ball radius.
Field3 build_speed(const ExperimentConfig& cfg, const SpeedSpec& spec);
Field3 build_phantom(const ExperimentConfig& cfg);
WaveConfig build_wave_config(const ExperimentConfig& cfg, const SpeedSpec& spec);

struct Simulation {
  Sinogram data;  // g_a = R_a A f
  Field3 p_T;
  Field3 f_true;
  Field3 speed;
  Metrics metrics;
};

Simulation simulate(const ExperimentConfig& cfg);

struct Reconstruction {
  Field3 f_hat;
  Field3 stage_one;  // fbp3 output, h ~ A f
  Metrics metrics;
  ReconReport report;
};

/// Stage one: fbp3 of the (already zero-extended) data. Stage two: CG on the
/// normal equations with the configured adjoint. Throws ConfigError when the
/// sinogram metadata disagree with the config.
Reconstruction reconstruct(const ExperimentConfig& cfg, const Sinogram& data,
                           const Field3* f_true = nullptr);

struct DecayRow {
  double time = 0.0;
  int step = 0;
  double max_in_ball = 0.0;
};

struct DecayTable {
  std::vector<DecayRow> rows;
  bool non_trapping = false;
  double at_T = 0.0;
  double at_2T = 0.0;
  /// Strict decrease from T to 2T; only enforced for non-trapping speeds.
  bool decreasing = false;
  bool violated() const { return non_trapping && !decreasing; }
  std::string to_json() const;
};

/// max over B_a of |p(., t)| for each t in (0, 2T]; T and 2T are always
/// included.
DecayTable decay_report(const ExperimentConfig& cfg, std::span<const double> times);

/// Writes <stem>.json/.bin and <stem>.manifest.json.
void write_field_artifact(const std::filesystem::path& dir, const std::string& stem,
                          const Field3& field, const ExperimentConfig& cfg,
                          const std::string& producer,
                          const std::map<std::string, std::string>& inputs = {});
void write_sinogram_artifact(const std::filesystem::path& dir,
                             const std::string& stem, const Sinogram& sino,
                             const ExperimentConfig& cfg,
                             const std::string& producer,
                             const std::map<std::string, std::string>& inputs = {});
/// Manifest beside a non-binary output (report, image).
void write_text_artifact(const std::filesystem::path& path, const std::string& text,
                         const ExperimentConfig& cfg, const std::string& producer,
                         const std::map<std::string, std::string>& inputs = {});

/// Writes p_T, f_true, speed, sinogram and metrics under `dir`.
void write_simulation(const std::filesystem::path& dir, const Simulation& sim,
                      const ExperimentConfig& cfg);

std::string config_hash(const ExperimentConfig& cfg);

}  // namespace ffdpat
