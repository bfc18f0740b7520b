#include "ffdpat/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "ffdpat/checksum.hpp"
#include "ffdpat/field_io.hpp"
#include "json.hpp"

namespace ffdpat {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

std::string Metrics::to_json(bool with_timings) const {
  json j = {{"rel_l2", opt(rel_l2)},
            {"max_error", opt(max_error)},
            {"mask_leakage", opt(mask_leakage)}};
  if (with_timings) {
    json t = json::object();
    for (const auto& [k, v] : timings_s) t[k] = v;
    j["timings_s"] = t;
  }
  return j.dump(2);
}

double mask_leakage(const Sinogram& unmasked, double radius) {
  const double r2 = radius * radius;
  double inside = 0.0;
  double total = 0.0;
  for (int iz = 0; iz < unmasked.n_z(); ++iz) {
    const double z = unmasked.height(iz);
    for (int ia = 0; ia < unmasked.n_alpha(); ++ia) {
      for (int is = 0; is < unmasked.n_s(); ++is) {
        const double s = unmasked.offset(is);
        const double v = unmasked.at(ia, is, iz);
        total += v * v;
        if (s * s + z * z < r2) inside += v * v;
      }
    }
  }
  return total > 0.0 ? inside / total : 0.0;
}

double relative_error_in_ball(const Field3& estimate, const Field3& truth,
                              const BallMask& ball) {
  require_same_grid(estimate, truth);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (!ball.contains(i)) continue;
    const double d = estimate[i] - truth[i];
    num += d * d;
    den += truth[i] * truth[i];
  }
  if (den == 0.0) {
    throw std::invalid_argument("relative error: reference vanishes in the ball");
  }
  return std::sqrt(num / den);
}

double max_error_in_ball(const Field3& estimate, const Field3& truth,
                         const BallMask& ball) {
  require_same_grid(estimate, truth);
  double m = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (ball.contains(i)) m = std::max(m, std::abs(estimate[i] - truth[i]));
  }
  return m;
}

Field3 build_speed(const ExperimentConfig& cfg, const SpeedSpec& spec) {
  SpeedSpec s = spec;
  s.ball_radius = cfg.a;
  s.collar = std::min(s.collar, cfg.a);
  return make_speed(s, cfg.make_grid());
}

Field3 build_phantom(const ExperimentConfig& cfg) {
  PhantomSpec p = cfg.phantom;
  p.containment_radius = cfg.a;
  return make_phantom(p, cfg.make_grid());
}

WaveConfig build_wave_config(const ExperimentConfig& cfg, const SpeedSpec& spec) {
  WaveOptions opts = cfg.wave_options();
  opts.background = spec.background;
  return WaveConfig(build_speed(cfg, spec), opts);
}

Simulation simulate(const ExperimentConfig& cfg) {
  validate(cfg);
  Metrics metrics;
  auto t0 = std::chrono::steady_clock::now();
  const WaveConfig wave = build_wave_config(cfg, cfg.speed);
  Field3 f = build_phantom(cfg);
  WavePropagator prop(wave);
  Field3 p_T = prop.forward(f);
  metrics.timings_s["forward_wave"] = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  Sinogram full = radon3(p_T, cfg.radon.n_alpha, cfg.offset_count(),
                         cfg.offset_extent());
  metrics.mask_leakage = mask_leakage(full, cfg.mask_radius());
  Sinogram data = restrict_Ma(std::move(full), cfg.mask_radius());
  metrics.timings_s["radon"] = seconds_since(t0);

  return {std::move(data), std::move(p_T), std::move(f), wave.speed(), metrics};
}

Reconstruction reconstruct(const ExperimentConfig& cfg, const Sinogram& data,
                           const Field3* f_true) {
  validate(cfg);
  const Grid3 grid = cfg.make_grid();
  if (data.n_z() != grid.n() ||
      std::abs(data.z_half_width() - grid.half_width()) > 1e-12) {
    throw ConfigError("sinogram z sampling does not match grid {n, b}");
  }
  if (data.n_alpha() != cfg.radon.n_alpha || data.n_s() != cfg.offset_count() ||
      std::abs(data.s_max() - cfg.offset_extent()) > 1e-12) {
    throw ConfigError("sinogram geometry does not match radon settings");
  }

  Metrics metrics;
  auto t0 = std::chrono::steady_clock::now();
  Field3 h = fbp3(data, grid);
  metrics.timings_s["fbp"] = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  const WaveConfig wave = build_wave_config(cfg, cfg.reconstruction_speed());
  WavePropagator prop(wave);
  const AdjointMode mode = cfg.cg.adjoint;
  const LinearMap A = [&prop](const Field3& x) { return prop.forward(x); };
  const LinearMap At = [&prop, mode](const Field3& y) {
    return prop.transpose(y, mode);
  };
  CgConfig cg;
  cg.max_iter = cfg.cg.max_iter;
  cg.rel_tol = cfg.cg.rel_tol;
  cg.support = wave.mask();
  cg.preflight_seed = cfg.seed;
  // Time reversal is only approximately adjoint for variable speed.
  if (mode == AdjointMode::TimeReversal) cg.preflight = false;
  CgResult result = cg_normal(A, At, h, cg, f_true);
  metrics.timings_s["cg"] = seconds_since(t0);

  if (f_true) {
    double ref = 0.0;
    for (std::size_t i = 0; i < f_true->size(); ++i) {
      if (wave.mask().contains(i)) ref = std::max(ref, std::abs((*f_true)[i]));
    }
    if (ref > 0.0) {
      metrics.rel_l2 = relative_error_in_ball(result.solution, *f_true, wave.mask());
    }
    metrics.max_error = max_error_in_ball(result.solution, *f_true, wave.mask());
  }
  return {std::move(result.solution), std::move(h), metrics,
          std::move(result.report)};
}

std::string DecayTable::to_json() const {
  json rows_j = json::array();
  for (const auto& r : rows) {
    rows_j.push_back(
        {{"t", r.time}, {"step", r.step}, {"max_in_ball", r.max_in_ball}});
  }
  return json{{"rows", rows_j},
              {"non_trapping", non_trapping},
              {"max_at_T", at_T},
              {"max_at_2T", at_2T},
              {"decreasing", decreasing},
              {"asserted", non_trapping}}
      .dump(2);
}

DecayTable decay_report(const ExperimentConfig& cfg, std::span<const double> times) {
  validate(cfg);
  const WaveConfig base = build_wave_config(cfg, cfg.speed);
  const double ht = base.time_step();
  const int m = base.steps();
  const double two_t = 2.0 * base.final_time();

  std::vector<int> steps = {m, 2 * m};
  for (double t : times) {
    if (!(t > 0.0) || t > two_t * (1.0 + 1e-12)) {
      throw ConfigError("decay: times must lie in (0, 2T]");
    }
    steps.push_back(std::clamp(static_cast<int>(std::lround(t / ht)), 1, 2 * m));
  }
  std::sort(steps.begin(), steps.end());
  steps.erase(std::unique(steps.begin(), steps.end()), steps.end());

  WavePropagator prop(base.with_steps(2 * m));
  const Field3 f = build_phantom(cfg);
  const auto history = prop.pressure_history(f, steps);

  DecayTable table;
  table.non_trapping = is_non_trapping(cfg.speed);
  for (std::size_t k = 0; k < steps.size(); ++k) {
    double mx = 0.0;
    for (std::size_t i = 0; i < history[k].size(); ++i) {
      if (base.mask().contains(i)) mx = std::max(mx, std::abs(history[k][i]));
    }
    table.rows.push_back({steps[k] * ht, steps[k], mx});
    if (steps[k] == m) table.at_T = mx;
    if (steps[k] == 2 * m) table.at_2T = mx;
  }
  table.decreasing = table.at_2T < table.at_T;
  return table;
}

std::string config_hash(const ExperimentConfig& cfg) {
  return to_hex(fnv1a64(to_json(cfg)));
}

namespace {

void write_manifest(const fs::path& path, const ExperimentConfig& cfg,
                    const std::string& producer,
                    const std::map<std::string, std::string>& inputs,
                    const std::string& output_checksum) {
  json in = json::object();
  for (const auto& [k, v] : inputs) in[k] = v;
  const json m = {{"producer", producer},
                  {"config_hash", config_hash(cfg)},
                  {"config", json::parse(to_json(cfg))},
                  {"inputs", in},
                  {"output_checksum", output_checksum}};
  write_text(path, m.dump(2) + "\n");
}

}  // namespace

void write_field_artifact(const fs::path& dir, const std::string& stem,
                          const Field3& field, const ExperimentConfig& cfg,
                          const std::string& producer,
                          const std::map<std::string, std::string>& inputs) {
  fs::create_directories(dir);
  write_field(dir / (stem + ".json"), field);
  write_manifest(dir / (stem + ".manifest.json"), cfg, producer, inputs,
                 to_hex(fnv1a64(field.values())));
}

void write_sinogram_artifact(const fs::path& dir, const std::string& stem,
                             const Sinogram& sino, const ExperimentConfig& cfg,
                             const std::string& producer,
                             const std::map<std::string, std::string>& inputs) {
  fs::create_directories(dir);
  write_sinogram(dir / (stem + ".json"), sino);
  write_manifest(dir / (stem + ".manifest.json"), cfg, producer, inputs,
                 to_hex(fnv1a64(sino.values())));
}

void write_text_artifact(const fs::path& path, const std::string& text,
                         const ExperimentConfig& cfg, const std::string& producer,
                         const std::map<std::string, std::string>& inputs) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_text(path, text);
  auto manifest = path;
  manifest.replace_extension(".manifest.json");
  write_manifest(manifest, cfg, producer, inputs, to_hex(fnv1a64(text)));
}

void write_simulation(const fs::path& dir, const Simulation& sim,
                      const ExperimentConfig& cfg) {
  const std::map<std::string, std::string> inputs = {
      {"speed", to_hex(fnv1a64(sim.speed.values()))},
      {"f_true", to_hex(fnv1a64(sim.f_true.values()))}};
  write_field_artifact(dir, "speed", sim.speed, cfg, "simulate");
  write_field_artifact(dir, "f_true", sim.f_true, cfg, "simulate");
  write_field_artifact(dir, "p_T", sim.p_T, cfg, "simulate", inputs);
  write_sinogram_artifact(dir, "sinogram", sim.data, cfg, "simulate", inputs);
  write_text_artifact(dir / "simulate_metrics.json", sim.metrics.to_json(false) + "\n",
                      cfg, "simulate", inputs);
  const WaveConfig wave = build_wave_config(cfg, cfg.speed);
  write_text(dir / "propagation.json",
             propagation_manifest(wave, "forward") + "\n");
}

}  // namespace ffdpat
