#include <cmath>
#include <fstream>
#include <iterator>

#include "doctest.h"
#include "ffdpat/config.hpp"
#include "ffdpat/export.hpp"
#include "ffdpat/field_io.hpp"
#include "ffdpat/pipeline.hpp"
#include "ffdpat/suites.hpp"
#include "json.hpp"
#include "support.hpp"

using namespace ffdpat;
using namespace ffdpat::testing;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg = default_config();
  cfg.grid.n = 48;
  cfg.radon.n_alpha = 36;
  cfg.cg.max_iter = 2;
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("defaults follow the experiment layout") {
  const ExperimentConfig ci = default_config(Profile::Ci);
  CHECK(ci.grid.b == 2.0);
  CHECK(ci.wave.T == 1.4);
  CHECK(ci.a == 0.4);
  CHECK(ci.grid.n == 64);
  CHECK(ci.mask_radius() == 0.4);
  CHECK(ci.cg.max_iter == 4);
  CHECK(ci.cg.adjoint == AdjointMode::DiscreteTranspose);
  CHECK(default_config(Profile::Paper).grid.n == 128);
  CHECK(parse_profile("paper") == Profile::Paper);
  CHECK_THROWS_AS(parse_profile("huge"), ConfigError);
}

TEST_CASE("config parsing is strict") {
  CHECK_THROWS_AS(parse_config(R"({"grid":{"n":64,"bb":2}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"gird":{}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"grid":{"n":"64"}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"grid":{"n":63}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"a":3.0})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"speed":{"preset":"Q"}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"cg":{"adjoint":"guess"}})"), ConfigError);
  CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"cg":{"max_iter":0}})"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("config accepts presets with overrides and round trips") {
  const ExperimentConfig cfg = parse_config(
      R"({"grid":{"n":32,"b":2.0},"speed":{"preset":"B","background":1.0},
          "phantom":{"balls":[{"center":[0.0,0.0,0.0],"radius":0.1,"amplitude":2.0}]},
          "cg":{"max_iter":3,"adjoint":"time-reversal"},"seed":7})");
  CHECK(cfg.grid.n == 32);
  CHECK(cfg.speed.kind == SpeedKind::Gaussians);
  CHECK(cfg.speed.pulses.size() == 1);
  CHECK(cfg.phantom.balls.at(0).amplitude == 2.0);
  CHECK(cfg.cg.adjoint == AdjointMode::TimeReversal);
  CHECK(cfg.seed == 7);
  const ExperimentConfig back = parse_config(to_json(cfg));
  CHECK(to_json(back) == to_json(cfg));
  CHECK(config_hash(back) == config_hash(cfg));
}

TEST_CASE("zero phantom gives zero data and a zero reconstruction") {
  ExperimentConfig cfg = small_config();
  cfg.phantom.balls.clear();
  const Simulation sim = simulate(cfg);
  CHECK(sim.p_T.max_abs() == 0.0);
  for (double v : sim.data.values()) CHECK(v == 0.0);
  CHECK(*sim.metrics.mask_leakage == 0.0);
  const Reconstruction rec = reconstruct(cfg, sim.data);
  CHECK(rec.f_hat.max_abs() == 0.0);
  CHECK_FALSE(rec.metrics.rel_l2.has_value());
}

TEST_CASE("simulation writes deterministic artifacts with manifests") {
  const ExperimentConfig cfg = small_config();
  const fs::path dir = scratch_dir("sim_det");
  write_simulation(dir, simulate(cfg), cfg);
  std::map<std::string, std::string> first;
  for (const auto& e : fs::directory_iterator(dir)) first[e.path().filename()] = slurp(e.path());
  write_simulation(dir, simulate(cfg), cfg);
  for (const auto& [name, bytes] : first) CHECK_MESSAGE(slurp(dir / name) == bytes, name);

  for (const char* stem : {"speed", "f_true", "p_T", "sinogram"}) {
    REQUIRE(fs::exists(dir / (std::string(stem) + ".json")));
    REQUIRE(fs::exists(dir / (std::string(stem) + ".bin")));
    const auto m = nlohmann::json::parse(slurp(dir / (std::string(stem) + ".manifest.json")));
    CHECK(m["producer"] == "simulate");
    CHECK(m["config_hash"] == config_hash(cfg));
    CHECK(m["output_checksum"].is_string());
    CHECK(m["config"]["grid"]["n"] == 48);
  }
  const Sinogram sino = read_sinogram(dir / "sinogram.json");
  CHECK(sino.mask_radius() == std::optional<double>(0.4));
  const auto metrics = nlohmann::json::parse(slurp(dir / "simulate_metrics.json"));
  CHECK_FALSE(metrics.contains("timings_s"));
  const auto prop = nlohmann::json::parse(slurp(dir / "propagation.json"));
  CHECK(prop["CFL"].get<double>() <= 0.3);
}

TEST_CASE("default model A wavefront has left the ball") {
  const ExperimentConfig cfg = default_config();
  const Simulation sim = simulate(cfg);
  const BallMask ball(sim.p_T.grid(), cfg.a);
  double inside = 0.0;
  for (std::size_t i = 0; i < sim.p_T.size(); ++i)
    if (ball.contains(i)) inside = std::max(inside, std::abs(sim.p_T[i]));
  CHECK(inside <= 0.2 * sim.f_true.max_abs());
  CHECK(*sim.metrics.mask_leakage <= 0.01);
}

TEST_CASE("reconstruction rejects mismatched data") {
  const ExperimentConfig cfg = small_config();
  const Grid3 g = cfg.make_grid();
  const Sinogram wrong_z(cfg.radon.n_alpha, cfg.offset_count(), 32, cfg.offset_extent(), 2.0);
  CHECK_THROWS_AS(reconstruct(cfg, wrong_z), ConfigError);
  const Sinogram wrong_s(cfg.radon.n_alpha, cfg.offset_count() + 2, g.n(), cfg.offset_extent(), 2.0);
  CHECK_THROWS_AS(reconstruct(cfg, wrong_s), ConfigError);
  const Sinogram wrong_a(cfg.radon.n_alpha + 1, cfg.offset_count(), g.n(), cfg.offset_extent(), 2.0);
  CHECK_THROWS_AS(reconstruct(cfg, wrong_a), ConfigError);
}

TEST_CASE("small reconstruction improves on the initial guess") {
  const ExperimentConfig cfg = small_config();
  const Simulation sim = simulate(cfg);
  const Reconstruction rec = reconstruct(cfg, sim.data, &sim.f_true);
  const auto errs = rec.report.relative_errors();
  REQUIRE(errs.size() == 3);
  CHECK(errs[0] == 1.0);
  CHECK(errs[2] < errs[1]);
  CHECK(errs[1] < errs[0]);
  CHECK(BallMask(cfg.make_grid(), cfg.a).supports(rec.f_hat));
  CHECK(rec.metrics.rel_l2.has_value());
  CHECK(*rec.metrics.rel_l2 == doctest::Approx(errs.back()));
}

TEST_CASE("decay table") {
  SUBCASE("zero phantom") {
    ExperimentConfig cfg = small_config();
    cfg.phantom.balls.clear();
    const std::vector<double> times{0.5};
    const DecayTable t = decay_report(cfg, times);
    CHECK(t.rows.size() == 3);
    for (const auto& r : t.rows) CHECK(r.max_in_ball == 0.0);
  }
  SUBCASE("model A decays") {
    const ExperimentConfig cfg = default_config();
    const DecayTable t = decay_report(cfg, {});
    CHECK(t.non_trapping);
    CHECK(t.at_2T < t.at_T);
    CHECK_FALSE(t.violated());
    CHECK(t.rows.back().time == doctest::Approx(2 * cfg.wave.T));
  }
  SUBCASE("trapping models are recorded only") {
    ExperimentConfig cfg = small_config();
    cfg.speed = model_d();
    const DecayTable t = decay_report(cfg, {});
    CHECK_FALSE(t.non_trapping);
    CHECK_FALSE(t.violated());
    CHECK(nlohmann::json::parse(t.to_json())["asserted"] == false);
  }
  SUBCASE("times outside (0, 2T]") {
    const ExperimentConfig cfg = small_config();
    const std::vector<double> bad{3.0};
    CHECK_THROWS_AS(decay_report(cfg, bad), ConfigError);
  }
}

TEST_CASE("mask leakage of zero data is zero") {
  CHECK(mask_leakage(Sinogram(4, 9, 8, 1.0, 1.0), 0.4) == 0.0);
}

TEST_CASE("slice export") {
  const fs::path dir = scratch_dir("export");
  SUBCASE("flat field") {
    const Field3 f(Grid3(8, 1.0), 3.5);
    export_slice(f, Axis::Z, 4, dir / "flat.pgm");
    const auto side = nlohmann::json::parse(slurp(dir / "flat.json"));
    CHECK(side["scale"] == 0.0);
    CHECK(side["flat"] == true);
    const std::string pgm = slurp(dir / "flat.pgm");
    CHECK(pgm.rfind("P5\n8 8\n65535\n", 0) == 0);
    const SliceImage back = import_slice(dir / "flat.pgm");
    for (double v : back.values) CHECK(v == 3.5);
  }
  SUBCASE("round trip within quantisation") {
    const Field3 f = random_field(Grid3(16, 1.0), 5);
    for (Axis axis : {Axis::X, Axis::Y, Axis::Z}) {
      export_slice(f, axis, 3, dir / "r.pgm");
      const SliceImage orig = extract_slice(f, axis, 3);
      const SliceImage back = import_slice(dir / "r.pgm");
      const auto [lo, hi] = std::minmax_element(orig.values.begin(), orig.values.end());
      REQUIRE(back.values.size() == orig.values.size());
      for (std::size_t i = 0; i < orig.values.size(); ++i) {
        CHECK(std::abs(back.values[i] - orig.values[i]) <= (*hi - *lo) / 65535 * (1 + 1e-9));
      }
    }
  }
  SUBCASE("index range") {
    const Field3 f(Grid3(8, 1.0));
    CHECK_THROWS_AS(export_slice(f, Axis::Z, 8, dir / "x.pgm"), std::out_of_range);
    CHECK_THROWS_AS(extract_slice(f, Axis::X, -1), std::out_of_range);
  }
  SUBCASE("default phantom cross-sections at z = 0") {
    const Grid3 g(64, 2.0);
    const PhantomSpec spec = default_phantom();
    const Field3 f = make_phantom(spec, g);
    const int k = g.n() / 2;
    REQUIRE(g.coordinate(k) == 0.0);
    const SliceImage s = extract_slice(f, Axis::Z, k);
    const double edge = spec.edge_cells * g.spacing();
    for (int j = 0; j < g.n(); ++j) {
      for (int i = 0; i < g.n(); ++i) {
        const double x = g.coordinate(i), y = g.coordinate(j);
        bool core = false, reach = false;
        for (const auto& b : spec.balls) {
          const double d = std::sqrt((x - b.center.x) * (x - b.center.x) +
                                     (y - b.center.y) * (y - b.center.y) + b.center.z * b.center.z);
          core = core || d <= b.radius - edge;
          reach = reach || d < b.radius + edge;
        }
        const double v = s.values[static_cast<std::size_t>(j) * s.width + i];
        if (core) CHECK(v == 1.0);
        if (!reach) CHECK(v == 0.0);
      }
    }
  }
}

TEST_CASE("suite registry") {
  const auto names = suite_names();
  CHECK(names.size() == 8);
  CHECK_THROWS_AS(run_suite("bogus", default_config()), ConfigError);
  const SuiteOutcome out = run_suite("planewave", default_config());
  CHECK(out.passed());
  CHECK(nlohmann::json::parse(out.to_json())["passed"] == true);
}

}

TEST_SUITE("pipeline-stage-one") {

TEST_CASE("masked stage one approximates A f for model A") {
  const ExperimentConfig cfg = default_config();
  const Simulation sim = simulate(cfg);
  const Field3 h = fbp3(sim.data, cfg.make_grid());
  CHECK(relative_l2(h, sim.p_T) <= 0.10);
}

}
