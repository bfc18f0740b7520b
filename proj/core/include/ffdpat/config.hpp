#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ffdpat/kspace.hpp"
#include "ffdpat/models.hpp"

namespace ffdpat {

/// Invalid configuration or input metadata. The CLI maps it to exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Profile { Ci, Paper };
Profile parse_profile(const std::string& name);
std::string to_string(Profile p);

struct GridSettings {
  int n = 64;
  double b = 2.0;
};

struct WaveSettings {
  double T = 1.4;
  int M = 0;  // 0: derived from the CFL limit
  double cfl = 0.3;
  std::optional<double> c_ref;  // default max(c)
  StartRule start = StartRule::KSpace;
};

struct RadonSettings {
  int n_alpha = 180;
  int n_s = 0;                  // 0: offset spacing close to h / 4
  std::optional<double> s_max;  // default b * sqrt(2)
  std::optional<double> R;      // default a
};

struct CgSettings {
  int max_iter = 4;
  double rel_tol = 1e-12;
  AdjointMode adjoint = AdjointMode::DiscreteTranspose;
};

struct OutputSettings {
  std::string directory = "out";
  std::vector<std::string> slices = {"z"};
  std::vector<std::string> report_formats = {"json", "csv"};
};

struct ExperimentConfig {
  GridSettings grid;
  double a = 0.4;  // object ball radius
  WaveSettings wave;
  SpeedSpec speed;
  /// Speed assumed by the reconstruction; defaults to `speed`.
  std::optional<SpeedSpec> recon_speed;
  PhantomSpec phantom;
  RadonSettings radon;
  CgSettings cg;
  OutputSettings outputs;
  std::uint64_t seed = 1;

  Grid3 make_grid() const { return Grid3(grid.n, grid.b); }
  WaveOptions wave_options() const;
  double mask_radius() const { return radon.R.value_or(a); }
  double offset_extent() const;
  int offset_count() const;
  const SpeedSpec& reconstruction_speed() const {
    return recon_speed ? *recon_speed : speed;
  }
};

/// b = 2, T = 1.4, a = 0.4, model A, default phantom; n = 64 (ci) or 128 (paper).
ExperimentConfig default_config(Profile profile = Profile::Ci);

/// Strict JSON: unknown keys and wrong types raise ConfigError. Keys absent
/// from the document keep the profile defaults.
ExperimentConfig parse_config(const std::string& json_text,
                              Profile profile = Profile::Ci);
ExperimentConfig load_config(const std::string& path,
                             Profile profile = Profile::Ci);
std::string to_json(const ExperimentConfig& cfg);

/// Checks cross-field invariants; throws ConfigError.
void validate(const ExperimentConfig& cfg);

}  // namespace ffdpat
