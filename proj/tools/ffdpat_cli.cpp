// Command-line driver: simulate, reconstruct, fbp, dot-test, decay, suite, export.
//
// Exit codes: 0 success, 2 validation failure, 3 acceptance threshold failure,
// 1 anything else (I/O, numerical breakdown).

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ffdpat/config.hpp"
#include "ffdpat/export.hpp"
#include "ffdpat/field_io.hpp"
#include "ffdpat/fourier.hpp"
#include "ffdpat/kspace.hpp"
#include "ffdpat/pipeline.hpp"
#include "ffdpat/suites.hpp"

namespace fs = std::filesystem;
using namespace ffdpat;

namespace {

constexpr int kValidationFailure = 2;
constexpr int kThresholdFailure = 3;

struct GlobalOptions {
  std::string config_path;
  std::string out_dir;
  int threads = 0;
  std::string profile = "ci";
};

ExperimentConfig load(const GlobalOptions& g) {
  const Profile profile = parse_profile(g.profile);
  ExperimentConfig cfg = g.config_path.empty() ? default_config(profile)
                                               : load_config(g.config_path, profile);
  if (!g.out_dir.empty()) cfg.outputs.directory = g.out_dir;
  validate(cfg);
  return cfg;
}

void export_configured_slices(const Field3& field, const std::string& stem,
                              const ExperimentConfig& cfg) {
  const fs::path dir = cfg.outputs.directory;
  for (const auto& axis : cfg.outputs.slices) {
    const int mid = field.grid().n() / 2;
    export_slice(field, parse_axis(axis), mid,
                 dir / (stem + "_" + axis + std::to_string(mid) + ".pgm"));
  }
}

int cmd_simulate(const GlobalOptions& g) {
  const ExperimentConfig cfg = load(g);
  const Simulation sim = simulate(cfg);
  write_simulation(cfg.outputs.directory, sim, cfg);
  export_configured_slices(sim.p_T, "p_T", cfg);
  export_configured_slices(sim.f_true, "f_true", cfg);
  std::cout << sim.metrics.to_json() << "\n";
  return 0;
}

int cmd_reconstruct(const GlobalOptions& g, const std::string& data_path,
                    const std::string& truth_path) {
  const ExperimentConfig cfg = load(g);
  const fs::path dir = cfg.outputs.directory;
  const fs::path data = data_path.empty() ? dir / "sinogram.json" : fs::path(data_path);
  const Sinogram sino = read_sinogram(data);

  std::optional<Field3> truth;
  fs::path tpath = truth_path.empty() ? dir / "f_true.json" : fs::path(truth_path);
  if (fs::exists(tpath)) truth = read_field(tpath);

  const Reconstruction rec = reconstruct(cfg, sino, truth ? &*truth : nullptr);
  const std::map<std::string, std::string> inputs = {
      {"sinogram", fs::absolute(data).string()}};
  write_field_artifact(dir, "stage_one", rec.stage_one, cfg, "reconstruct", inputs);
  write_field_artifact(dir, "f_hat", rec.f_hat, cfg, "reconstruct", inputs);
  for (const auto& fmt : cfg.outputs.report_formats) {
    if (fmt == "json") {
      write_text_artifact(dir / "recon_report.json", rec.report.to_json() + "\n",
                          cfg, "reconstruct", inputs);
    } else if (fmt == "csv") {
      write_text_artifact(dir / "recon_report.csv", rec.report.to_csv(), cfg,
                          "reconstruct", inputs);
    }
  }
  write_text_artifact(dir / "recon_metrics.json", rec.metrics.to_json(false) + "\n",
                      cfg, "reconstruct", inputs);
  export_configured_slices(rec.f_hat, "f_hat", cfg);
  std::cout << rec.metrics.to_json() << "\n";
  return 0;
}

int cmd_fbp(const GlobalOptions& g, const std::string& data_path) {
  const ExperimentConfig cfg = load(g);
  const fs::path dir = cfg.outputs.directory;
  const fs::path data = data_path.empty() ? dir / "sinogram.json" : fs::path(data_path);
  const Sinogram sino = read_sinogram(data);
  const Field3 h = fbp3(sino, cfg.make_grid());
  write_field_artifact(dir, "stage_one", h, cfg, "fbp",
                       {{"sinogram", fs::absolute(data).string()}});
  return 0;
}

int cmd_dot_test(const GlobalOptions& g, int trials, std::uint64_t seed) {
  const ExperimentConfig cfg = load(g);
  const WaveConfig wave = build_wave_config(cfg, cfg.speed);
  const DotTestReport rep = dot_test(wave, trials, seed);
  std::cout << "discrete-transpose max " << rep.max_discrete() << "\n"
            << "time-reversal      max " << rep.max_time_reversal() << "\n";
  std::cout << propagation_manifest(wave, to_string(AdjointMode::DiscreteTranspose))
            << "\n";
  return rep.max_discrete() <= 1e-10 ? 0 : kThresholdFailure;
}

int cmd_decay(const GlobalOptions& g, const std::vector<double>& times) {
  const ExperimentConfig cfg = load(g);
  const DecayTable table = decay_report(cfg, times);
  const fs::path dir = cfg.outputs.directory;
  write_text_artifact(dir / "decay.json", table.to_json() + "\n", cfg, "decay");
  std::cout << table.to_json() << "\n";
  return table.violated() ? kThresholdFailure : 0;
}

int cmd_suite(const GlobalOptions& g, const std::string& name) {
  const ExperimentConfig cfg = load(g);
  const SuiteOutcome out = run_suite(name, cfg);
  const fs::path dir = cfg.outputs.directory;
  write_text_artifact(dir / ("suite_" + name + ".json"), out.to_json() + "\n", cfg,
                      "suite");
  for (const auto& c : out.checks) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << name << ": " << c.name << " = "
              << c.value << " (threshold " << c.threshold << ")\n";
  }
  for (const auto& [k, v] : out.recorded) {
    std::cout << "     " << name << ": " << k << " = " << v << " (recorded)\n";
  }
  return out.passed() ? 0 : kThresholdFailure;
}

int cmd_export(const std::string& field_path, const std::string& axis, int index,
               const std::string& output) {
  const Field3 f = read_field(field_path);
  export_slice(f, parse_axis(axis), index, output);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Full-field photoacoustic tomography: simulation and two-stage "
               "reconstruction"};
  app.require_subcommand(1);

  GlobalOptions g;
  app.add_option("--config", g.config_path, "Experiment config (strict JSON)");
  app.add_option("--out", g.out_dir, "Output directory (overrides config)");
  app.add_option("--threads", g.threads, "Worker threads (0: OpenMP default)");
  app.add_option("--profile", g.profile, "Default sizing profile")
      ->check(CLI::IsMember({"ci", "paper"}));

  auto* simulate_cmd = app.add_subcommand("simulate", "Forward data g_a = R_a A f");

  std::string data_path, truth_path;
  auto* recon_cmd = app.add_subcommand("reconstruct", "FBP then CG on the wave inversion");
  recon_cmd->add_option("--data", data_path, "Sinogram metadata (default <out>/sinogram.json)");
  recon_cmd->add_option("--truth", truth_path, "Ground truth field for metrics");

  auto* fbp_cmd = app.add_subcommand("fbp", "Stage one only: per-slice FBP");
  fbp_cmd->add_option("--data", data_path, "Sinogram metadata (default <out>/sinogram.json)");

  int trials = 3;
  std::uint64_t seed = 1;
  auto* dot_cmd = app.add_subcommand("dot-test", "Adjoint consistency of A and A^T");
  dot_cmd->add_option("--trials", trials)->check(CLI::PositiveNumber);
  dot_cmd->add_option("--seed", seed);

  std::vector<double> times;
  auto* decay_cmd = app.add_subcommand("decay", "max |p| over the ball at given times");
  decay_cmd->add_option("--times", times, "Times in (0, 2T]; T and 2T always included");

  std::string suite_name;
  auto* suite_cmd = app.add_subcommand("suite", "Run a named acceptance scenario");
  suite_cmd->add_option("name", suite_name)->required()->check(
      CLI::IsMember(suite_names()));

  std::string field_path, axis = "z", output;
  int index = -1;
  auto* export_cmd = app.add_subcommand("export", "Write a field slice as 16-bit PGM");
  export_cmd->add_option("--field", field_path)->required();
  export_cmd->add_option("--axis", axis)->check(CLI::IsMember({"x", "y", "z"}));
  export_cmd->add_option("--index", index, "Slice index (default: middle)");
  export_cmd->add_option("--output", output)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kValidationFailure;
  }

  try {
    set_thread_count(g.threads);
    if (*simulate_cmd) return cmd_simulate(g);
    if (*recon_cmd) return cmd_reconstruct(g, data_path, truth_path);
    if (*fbp_cmd) return cmd_fbp(g, data_path);
    if (*dot_cmd) return cmd_dot_test(g, trials, seed);
    if (*decay_cmd) return cmd_decay(g, times);
    if (*suite_cmd) return cmd_suite(g, suite_name);
    if (*export_cmd) {
      if (index < 0) index = read_field(field_path).grid().n() / 2;
      return cmd_export(field_path, axis, index, output);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kValidationFailure;
  } catch (const std::out_of_range& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kValidationFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
