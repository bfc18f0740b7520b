#include "ffdpat/suites.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ffdpat/kspace.hpp"
#include "ffdpat/models.hpp"
#include "ffdpat/pipeline.hpp"
#include "ffdpat/radon.hpp"
#include "json.hpp"

namespace ffdpat {

bool SuiteOutcome::passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const SuiteCheck& c) { return c.passed; });
}

std::string SuiteOutcome::to_json() const {
  nlohmann::json cs = nlohmann::json::array();
  for (const auto& c : checks) {
    cs.push_back({{"name", c.name},
                  {"value", c.value},
                  {"threshold", c.threshold},
                  {"passed", c.passed}});
  }
  nlohmann::json rec = nlohmann::json::object();
  for (const auto& [k, v] : recorded) rec[k] = v;
  return nlohmann::json{{"suite", name},
                        {"passed", passed()},
                        {"checks", cs},
                        {"recorded", rec}}
      .dump(2);
}

std::vector<std::string> suite_names() {
  return {"adjoint", "planewave", "fbp-roundtrip", "full-A",
          "full-B",  "full-C",    "full-D",        "wrong-speed"};
}

namespace {

SuiteCheck at_most(const std::string& name, double value, double threshold) {
  return {name, value, threshold, value <= threshold};
}

SuiteCheck below(const std::string& name, double value, double threshold) {
  return {name, value, threshold, value < threshold};
}

// Dense matrices of forward and discrete transpose at n = 8, M = 4, model B.
double dense_transpose_deviation() {
  const Grid3 grid(8, 0.5);
  SpeedSpec spec = model_b();
  WaveOptions opts;
  opts.final_time = 0.1;
  opts.steps = 4;
  WaveConfig cfg(make_speed(spec, grid), opts);
  WavePropagator prop(cfg);
  const std::size_t n = grid.size();
  std::vector<std::size_t> cols;
  for (std::size_t i = 0; i < n; ++i) {
    if (cfg.mask().contains(i)) cols.push_back(i);
  }
  std::vector<Field3> a_cols;
  for (std::size_t i : cols) {
    Field3 e(grid);
    e[i] = 1.0;
    a_cols.push_back(prop.forward(e));
  }
  double worst = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    Field3 e(grid);
    e[j] = 1.0;
    const Field3 row = prop.transpose(e, AdjointMode::DiscreteTranspose);
    for (std::size_t c = 0; c < cols.size(); ++c) {
      worst = std::max(worst, std::abs(a_cols[c][j] - row[cols[c]]));
    }
  }
  return worst;
}

SuiteOutcome adjoint_suite() {
  SuiteOutcome out{"adjoint", {}, {}};
  out.checks.push_back(at_most("dense_transpose_max_dev", dense_transpose_deviation(), 1e-12));
  const Grid3 grid(32, 2.0);
  WaveOptions opts;
  WaveConfig cfg(make_speed(model_b(), grid), opts);
  const DotTestReport rep = dot_test(cfg, 3, 7);
  out.checks.push_back(at_most("dot_test_discrete_max", rep.max_discrete(), 1e-10));
  out.recorded.emplace_back("dot_test_time_reversal_max", rep.max_time_reversal());
  return out;
}

SuiteOutcome planewave_suite() {
  SuiteOutcome out{"planewave", {}, {}};
  const Grid3 grid(64, 2.0);
  WaveOptions opts;
  opts.final_time = 1.4;
  opts.background = 1.0;
  WaveConfig cfg(Field3(grid, 1.0), opts);
  WavePropagator prop(cfg);
  const double k = std::numbers::pi / grid.half_width();
  const double kx = 3 * k, ky = 2 * k, kz = -5 * k;
  const double kmag = std::sqrt(kx * kx + ky * ky + kz * kz);
  Field3 p0(grid);
  for (std::size_t i = 0; i < p0.size(); ++i) {
    const Vec3 x = grid.node(i);
    p0[i] = std::cos(kx * x.x + ky * x.y + kz * x.z);
  }
  std::vector<int> steps;
  for (int j = 1; j <= cfg.steps(); j += std::max(1, cfg.steps() / 8)) steps.push_back(j);
  if (steps.back() != cfg.steps()) steps.push_back(cfg.steps());
  const auto hist = prop.pressure_history(p0, steps);
  double worst = 0.0;
  for (std::size_t s = 0; s < steps.size(); ++s) {
    const double mod = std::cos(kmag * steps[s] * cfg.time_step());
    for (std::size_t i = 0; i < p0.size(); ++i) {
      worst = std::max(worst, std::abs(hist[s][i] - p0[i] * mod));
    }
  }
  out.checks.push_back(at_most("max_error", worst, 1e-10));
  return out;
}

double image_rel_l2(const Image2& approx, const Image2& exact) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < exact.values.size(); ++i) {
    const double d = approx.values[i] - exact.values[i];
    num += d * d;
    den += exact.values[i] * exact.values[i];
  }
  return std::sqrt(num / den);
}

SuiteOutcome fbp_suite() {
  SuiteOutcome out{"fbp-roundtrip", {}, {}};
  const Lattice2 lat{256, 1.0};
  const double r = 0.5;
  const Image2 disc = disc_image(lat, r);
  const auto angles = uniform_angles(180);
  const auto offsets = uniform_offsets(256, lat.half_width);
  const auto sino = radon_slice(disc, angles, offsets);
  double chord = 0.0;
  for (std::size_t a = 0; a < angles.size(); ++a) {
    for (std::size_t j = 0; j < offsets.size(); ++j) {
      const double s = offsets[j];
      const double exact = std::abs(s) < r ? 2.0 * std::sqrt(r * r - s * s) : 0.0;
      chord = std::max(chord, std::abs(sino[a * offsets.size() + j] - exact));
    }
  }
  out.checks.push_back(at_most("chord_max_error_over_h", chord / lat.spacing(), 2.0));
  const Image2 rec = fbp_slice(sino, angles, offsets, lat);
  out.checks.push_back(at_most("roundtrip_rel_l2", image_rel_l2(rec, disc), 0.05));

  const Image2 shifted = disc_image(lat, 0.3, 0.25, -0.2);
  const Image2 rec_shifted =
      fbp_slice(radon_slice(shifted, angles, offsets), angles, offsets, lat);
  out.checks.push_back(
      at_most("shifted_roundtrip_rel_l2", image_rel_l2(rec_shifted, shifted), 0.05));
  return out;
}

SuiteOutcome full_suite(const std::string& model, const ExperimentConfig& base) {
  SuiteOutcome out{"full-" + model, {}, {}};
  ExperimentConfig cfg = base;
  cfg.speed = speed_preset(model);
  cfg.recon_speed.reset();
  const Simulation sim = simulate(cfg);
  const Reconstruction rec = reconstruct(cfg, sim.data, &sim.f_true);
  const auto errs = rec.report.relative_errors();
  const bool non_trapping = is_non_trapping(cfg.speed);
  for (std::size_t k = 0; k < errs.size(); ++k) {
    out.recorded.emplace_back("rel_err_iter_" + std::to_string(k), errs[k]);
  }
  out.recorded.emplace_back("mask_leakage", *sim.metrics.mask_leakage);
  bool monotone = true;
  for (std::size_t k = 1; k < errs.size(); ++k) monotone = monotone && errs[k] < errs[k - 1];
  const double rate = fitted_geometric_rate(errs);
  out.recorded.emplace_back("fitted_rate", rate);
  if (non_trapping) {
    out.checks.push_back({"monotone_error_decrease", monotone ? 1.0 : 0.0, 1.0, monotone});
    out.checks.push_back(below("fitted_rate", rate, 1.0));
    if (errs.size() > 4) {
      out.checks.push_back(below("err_iter4_minus_iter1", errs[4] - errs[1], 0.0));
      out.checks.push_back(at_most("rel_err_iter4", errs[4], 0.25));
    }
    out.checks.push_back(at_most("mask_leakage", *sim.metrics.mask_leakage, 0.01));
  } else {
    out.recorded.emplace_back("monotone", monotone ? 1.0 : 0.0);
  }
  return out;
}

SuiteOutcome wrong_speed_suite(const ExperimentConfig& base) {
  SuiteOutcome out{"wrong-speed", {}, {}};
  ExperimentConfig cfg = base;
  cfg.speed = model_b();
  cfg.recon_speed.reset();
  const Simulation sim = simulate(cfg);
  const double right = *reconstruct(cfg, sim.data, &sim.f_true).metrics.rel_l2;
  cfg.recon_speed = constant_speed(1.0);
  const double wrong = *reconstruct(cfg, sim.data, &sim.f_true).metrics.rel_l2;
  out.recorded.emplace_back("rel_err_true_speed", right);
  out.recorded.emplace_back("rel_err_constant_speed", wrong);
  out.checks.push_back(below("true_minus_wrong", right - wrong, 0.0));
  return out;
}

}  // namespace

SuiteOutcome run_suite(const std::string& name, const ExperimentConfig& base) {
  if (name == "adjoint") return adjoint_suite();
  if (name == "planewave") return planewave_suite();
  if (name == "fbp-roundtrip") return fbp_suite();
  if (name == "wrong-speed") return wrong_speed_suite(base);
  for (const char* m : {"A", "B", "C", "D"}) {
    if (name == std::string("full-") + m) return full_suite(m, base);
  }
  throw ConfigError("unknown suite: " + name);
}

}  // namespace ffdpat
