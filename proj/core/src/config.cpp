#include "ffdpat/config.hpp"

#include <cmath>
#include <initializer_list>
#include <numbers>
#include <set>

#include "ffdpat/field_io.hpp"
#include "json.hpp"

namespace ffdpat {

using json = nlohmann::json;

Profile parse_profile(const std::string& name) {
  if (name == "ci") return Profile::Ci;
  if (name == "paper") return Profile::Paper;
  throw ConfigError("unknown profile: " + name + " (expected ci or paper)");
}

std::string to_string(Profile p) { return p == Profile::Ci ? "ci" : "paper"; }

WaveOptions ExperimentConfig::wave_options() const {
  WaveOptions w;
  w.final_time = wave.T;
  w.steps = wave.M;
  w.cfl_limit = wave.cfl;
  w.c_ref = wave.c_ref;
  w.background = speed.background;
  w.ball_radius = a;
  w.start = wave.start;
  return w;
}

double ExperimentConfig::offset_extent() const {
  return radon.s_max.value_or(grid.b * std::numbers::sqrt2);
}

int ExperimentConfig::offset_count() const {
  if (radon.n_s > 0) return radon.n_s;
  const double ds = 0.25 * (2.0 * grid.b / grid.n);
  return 2 * static_cast<int>(std::ceil(offset_extent() / ds)) + 1;
}

ExperimentConfig default_config(Profile profile) {
  ExperimentConfig cfg;
  cfg.grid.n = profile == Profile::Paper ? 128 : 64;
  cfg.speed = model_a();
  cfg.phantom = default_phantom();
  return cfg;
}

namespace {

// Rejects keys outside `allowed`; `where` names the section in messages.
void check_keys(const json& obj, const char* where,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(std::string(where) + ": expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : obj.items()) {
    if (!ok.count(key)) {
      throw ConfigError(std::string(where) + ": unknown key '" + key + "'");
    }
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out, const char* where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string(where) + "." + key + ": wrong type");
  }
}

void read_opt(const json& obj, const char* key, std::optional<double>& out,
              const char* where) {
  if (!obj.contains(key)) return;
  if (obj.at(key).is_null()) {
    out.reset();
    return;
  }
  if (!obj.at(key).is_number()) {
    throw ConfigError(std::string(where) + "." + key + ": expected number or null");
  }
  out = obj.at(key).get<double>();
}

Vec3 read_vec3(const json& v, const char* where) {
  if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() ||
      !v[2].is_number()) {
    throw ConfigError(std::string(where) + ": expected [x, y, z]");
  }
  return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

json vec3_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

SpeedSpec parse_speed(const json& j, const char* where) {
  check_keys(j, where,
             {"preset", "kind", "background", "collar", "pulses", "cavity",
              "radial_sine", "deviation_cap", "enforce_cap"});
  SpeedSpec s;
  if (j.contains("preset")) {
    try {
      s = speed_preset(j.at("preset").get<std::string>());
    } catch (const std::exception& e) {
      throw ConfigError(std::string(where) + ".preset: " + e.what());
    }
  }
  if (j.contains("kind")) {
    try {
      s.kind = parse_speed_kind(j.at("kind").get<std::string>());
    } catch (const std::exception& e) {
      throw ConfigError(std::string(where) + ".kind: " + e.what());
    }
  }
  read(j, "background", s.background, where);
  read(j, "collar", s.collar, where);
  read(j, "deviation_cap", s.deviation_cap, where);
  read(j, "enforce_cap", s.enforce_cap, where);
  if (j.contains("pulses")) {
    if (!j["pulses"].is_array()) throw ConfigError(std::string(where) + ".pulses: expected array");
    s.pulses.clear();
    for (const auto& p : j["pulses"]) {
      check_keys(p, "speed.pulses[]", {"center", "width", "amplitude"});
      GaussianPulse g;
      if (p.contains("center")) g.center = read_vec3(p["center"], "speed.pulses[].center");
      read(p, "width", g.width, "speed.pulses[]");
      read(p, "amplitude", g.amplitude, "speed.pulses[]");
      s.pulses.push_back(g);
    }
  }
  if (j.contains("cavity")) {
    const auto& c = j["cavity"];
    check_keys(c, "speed.cavity", {"center", "width", "depth"});
    if (c.contains("center")) s.cavity_center = read_vec3(c["center"], "speed.cavity.center");
    read(c, "width", s.cavity_width, "speed.cavity");
    read(c, "depth", s.cavity_depth, "speed.cavity");
  }
  if (j.contains("radial_sine")) {
    const auto& r = j["radial_sine"];
    check_keys(r, "speed.radial_sine", {"alpha", "beta"});
    read(r, "alpha", s.sine_alpha, "speed.radial_sine");
    read(r, "beta", s.sine_beta, "speed.radial_sine");
  }
  return s;
}

json speed_json(const SpeedSpec& s) {
  json pulses = json::array();
  for (const auto& p : s.pulses) {
    pulses.push_back({{"center", vec3_json(p.center)},
                      {"width", p.width},
                      {"amplitude", p.amplitude}});
  }
  return {{"kind", to_string(s.kind)},
          {"background", s.background},
          {"collar", s.collar},
          {"pulses", pulses},
          {"cavity",
           {{"center", vec3_json(s.cavity_center)},
            {"width", s.cavity_width},
            {"depth", s.cavity_depth}}},
          {"radial_sine", {{"alpha", s.sine_alpha}, {"beta", s.sine_beta}}},
          {"deviation_cap", s.deviation_cap},
          {"enforce_cap", s.enforce_cap}};
}

json opt_json(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text, Profile profile) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j, "config",
             {"grid", "a", "wave", "speed", "recon_speed", "phantom", "radon",
              "cg", "outputs", "seed"});
  ExperimentConfig cfg = default_config(profile);

  if (j.contains("grid")) {
    check_keys(j["grid"], "grid", {"n", "b"});
    read(j["grid"], "n", cfg.grid.n, "grid");
    read(j["grid"], "b", cfg.grid.b, "grid");
  }
  read(j, "a", cfg.a, "config");
  if (j.contains("wave")) {
    const auto& w = j["wave"];
    check_keys(w, "wave", {"T", "M", "cfl", "c_ref", "start"});
    read(w, "T", cfg.wave.T, "wave");
    read(w, "M", cfg.wave.M, "wave");
    read(w, "cfl", cfg.wave.cfl, "wave");
    read_opt(w, "c_ref", cfg.wave.c_ref, "wave");
    if (w.contains("start")) {
      try {
        cfg.wave.start = parse_start_rule(w["start"].get<std::string>());
      } catch (const std::exception& e) {
        throw ConfigError(std::string("wave.start: ") + e.what());
      }
    }
  }
  if (j.contains("speed")) cfg.speed = parse_speed(j["speed"], "speed");
  if (j.contains("recon_speed") && !j["recon_speed"].is_null()) {
    cfg.recon_speed = parse_speed(j["recon_speed"], "recon_speed");
  }
  if (j.contains("phantom")) {
    const auto& p = j["phantom"];
    check_keys(p, "phantom", {"balls", "edge_cells"});
    read(p, "edge_cells", cfg.phantom.edge_cells, "phantom");
    if (p.contains("balls")) {
      if (!p["balls"].is_array()) throw ConfigError("phantom.balls: expected array");
      cfg.phantom.balls.clear();
      for (const auto& b : p["balls"]) {
        check_keys(b, "phantom.balls[]", {"center", "radius", "amplitude"});
        Ball ball;
        if (b.contains("center")) ball.center = read_vec3(b["center"], "phantom.balls[].center");
        read(b, "radius", ball.radius, "phantom.balls[]");
        read(b, "amplitude", ball.amplitude, "phantom.balls[]");
        cfg.phantom.balls.push_back(ball);
      }
    }
  }
  if (j.contains("radon")) {
    const auto& r = j["radon"];
    check_keys(r, "radon", {"n_alpha", "n_s", "s_max", "R"});
    read(r, "n_alpha", cfg.radon.n_alpha, "radon");
    read(r, "n_s", cfg.radon.n_s, "radon");
    read_opt(r, "s_max", cfg.radon.s_max, "radon");
    read_opt(r, "R", cfg.radon.R, "radon");
  }
  if (j.contains("cg")) {
    const auto& c = j["cg"];
    check_keys(c, "cg", {"max_iter", "rel_tol", "adjoint"});
    read(c, "max_iter", cfg.cg.max_iter, "cg");
    read(c, "rel_tol", cfg.cg.rel_tol, "cg");
    if (c.contains("adjoint")) {
      try {
        cfg.cg.adjoint = parse_adjoint_mode(c["adjoint"].get<std::string>());
      } catch (const std::exception& e) {
        throw ConfigError(std::string("cg.adjoint: ") + e.what());
      }
    }
  }
  if (j.contains("outputs")) {
    const auto& o = j["outputs"];
    check_keys(o, "outputs", {"directory", "slices", "reports"});
    read(o, "directory", cfg.outputs.directory, "outputs");
    read(o, "slices", cfg.outputs.slices, "outputs");
    read(o, "reports", cfg.outputs.report_formats, "outputs");
  }
  read(j, "seed", cfg.seed, "config");

  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path, Profile profile) {
  std::string text;
  try {
    text = read_text(path);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return parse_config(text, profile);
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.grid.n < 4 || cfg.grid.n % 2 != 0) {
    throw ConfigError("grid.n must be even and >= 4");
  }
  if (!(cfg.grid.b > 0.0)) throw ConfigError("grid.b must be positive");
  if (!(cfg.a > 0.0) || cfg.a > cfg.grid.b) throw ConfigError("a must lie in (0, b]");
  if (!(cfg.wave.T > 0.0)) throw ConfigError("wave.T must be positive");
  if (cfg.wave.M < 0) throw ConfigError("wave.M must be >= 0");
  if (!(cfg.wave.cfl > 0.0)) throw ConfigError("wave.cfl must be positive");
  if (cfg.radon.n_alpha < 2) throw ConfigError("radon.n_alpha must be >= 2");
  if (cfg.radon.n_s < 0 || cfg.radon.n_s == 1) {
    throw ConfigError("radon.n_s must be 0 (auto) or >= 2");
  }
  if (cfg.radon.R && !(*cfg.radon.R > 0.0)) throw ConfigError("radon.R must be > 0");
  if (cfg.radon.s_max && !(*cfg.radon.s_max > 0.0)) {
    throw ConfigError("radon.s_max must be > 0");
  }
  if (cfg.cg.max_iter < 1) throw ConfigError("cg.max_iter must be >= 1");
  if (!(cfg.cg.rel_tol > 0.0 && cfg.cg.rel_tol < 1.0)) {
    throw ConfigError("cg.rel_tol must lie in (0, 1)");
  }
  for (const auto& s : cfg.outputs.slices) {
    if (s != "x" && s != "y" && s != "z") {
      throw ConfigError("outputs.slices entries must be x, y or z");
    }
  }
  for (const auto& f : cfg.outputs.report_formats) {
    if (f != "json" && f != "csv") {
      throw ConfigError("outputs.reports entries must be json or csv");
    }
  }
  if (!(cfg.phantom.edge_cells >= 0.0)) throw ConfigError("phantom.edge_cells must be >= 0");
  const double edge = cfg.phantom.edge_cells * (2.0 * cfg.grid.b / cfg.grid.n);
  for (const auto& b : cfg.phantom.balls) {
    if (b.center.norm() + b.radius + edge >= cfg.a) {
      throw ConfigError("phantom ball escapes the ball of radius a");
    }
  }
}

std::string to_json(const ExperimentConfig& cfg) {
  json balls = json::array();
  for (const auto& b : cfg.phantom.balls) {
    balls.push_back({{"center", vec3_json(b.center)},
                     {"radius", b.radius},
                     {"amplitude", b.amplitude}});
  }
  json j = {
      {"grid", {{"n", cfg.grid.n}, {"b", cfg.grid.b}}},
      {"a", cfg.a},
      {"wave",
       {{"T", cfg.wave.T},
        {"M", cfg.wave.M},
        {"cfl", cfg.wave.cfl},
        {"c_ref", opt_json(cfg.wave.c_ref)},
        {"start", to_string(cfg.wave.start)}}},
      {"speed", speed_json(cfg.speed)},
      {"recon_speed",
       cfg.recon_speed ? speed_json(*cfg.recon_speed) : json(nullptr)},
      {"phantom", {{"balls", balls}, {"edge_cells", cfg.phantom.edge_cells}}},
      {"radon",
       {{"n_alpha", cfg.radon.n_alpha},
        {"n_s", cfg.radon.n_s},
        {"s_max", opt_json(cfg.radon.s_max)},
        {"R", opt_json(cfg.radon.R)}}},
      {"cg",
       {{"max_iter", cfg.cg.max_iter},
        {"rel_tol", cfg.cg.rel_tol},
        {"adjoint", to_string(cfg.cg.adjoint)}}},
      {"outputs",
       {{"directory", cfg.outputs.directory},
        {"slices", cfg.outputs.slices},
        {"reports", cfg.outputs.report_formats}}},
      {"seed", cfg.seed}};
  return j.dump(2);
}

}  // namespace ffdpat
