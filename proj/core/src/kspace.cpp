#include "ffdpat/kspace.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "ffdpat/checksum.hpp"
#include "json.hpp"

namespace ffdpat {

std::string to_string(AdjointMode mode) {
  return mode == AdjointMode::DiscreteTranspose ? "discrete-transpose"
                                                : "time-reversal";
}

AdjointMode parse_adjoint_mode(const std::string& name) {
  if (name == "discrete-transpose") return AdjointMode::DiscreteTranspose;
  if (name == "time-reversal") return AdjointMode::TimeReversal;
  throw std::invalid_argument("unknown adjoint mode: " + name);
}

std::string to_string(StartRule rule) {
  return rule == StartRule::KSpace ? "kspace" : "first-order";
}

StartRule parse_start_rule(const std::string& name) {
  if (name == "kspace") return StartRule::KSpace;
  if (name == "first-order") return StartRule::FirstOrder;
  throw std::invalid_argument("unknown start rule: " + name);
}

int steps_for_cfl(double c_ref, double final_time, double spacing,
                  double cfl_limit) {
  if (!(cfl_limit > 0.0)) {
    throw std::invalid_argument("CFL limit must be positive");
  }
  const double exact = c_ref * final_time / (cfl_limit * spacing);
  int m = std::max(1, static_cast<int>(std::ceil(exact - 1e-9)));
  while (c_ref * (final_time / m) / spacing > cfl_limit) ++m;
  return m;
}

WaveConfig::WaveConfig(Field3 speed, const WaveOptions& options)
    : speed_(std::move(speed)),
      mask_(speed_.grid(), options.ball_radius),
      options_(options),
      c_ref_(0.0),
      background_(options.background),
      final_time_(options.final_time),
      steps_(options.steps),
      start_(options.start) {
  if (!(final_time_ > 0.0)) {
    throw std::invalid_argument("wave: final time T must be positive");
  }
  if (!(background_ > 0.0)) {
    throw std::invalid_argument("wave: background speed must be positive");
  }
  double c_max = 0.0;
  for (std::size_t i = 0; i < speed_.size(); ++i) {
    const double c = speed_[i];
    if (!(c > 0.0) || !std::isfinite(c)) {
      throw std::invalid_argument("wave: sound speed must be positive and finite");
    }
    if (!mask_.contains(i) && std::abs(c - background_) > 1e-12) {
      throw std::invalid_argument(
          "wave: sound speed differs from the background outside the ball");
    }
    c_max = std::max(c_max, c);
  }
  c_ref_ = options.c_ref.value_or(c_max);
  if (c_ref_ < c_max) {
    throw std::invalid_argument("wave: c_ref must be >= max(c)");
  }
  const double h = speed_.grid().spacing();
  if (steps_ <= 0) {
    steps_ = steps_for_cfl(c_ref_, final_time_, h, options.cfl_limit);
  } else if (options.enforce_cfl && cfl() > options.cfl_limit + 1e-12) {
    throw std::invalid_argument("wave: CFL number " + std::to_string(cfl()) +
                                " exceeds limit " +
                                std::to_string(options.cfl_limit));
  }
  options_.steps = steps_;
  options_.c_ref = c_ref_;
}

double WaveConfig::cfl() const {
  return c_ref_ * time_step() / grid().spacing();
}

WaveConfig WaveConfig::with_steps(int steps) const {
  if (steps < 1) throw std::invalid_argument("wave: steps must be >= 1");
  WaveOptions opts = options_;
  opts.final_time = time_step() * steps;
  opts.steps = steps;
  opts.enforce_cfl = false;
  return WaveConfig(speed_, opts);
}

namespace {

Field3 speed_ratio(const WaveConfig& cfg, bool inverse) {
  Field3 r(cfg.grid());
  const double cr2 = cfg.c_ref() * cfg.c_ref();
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double c2 = cfg.speed()[i] * cfg.speed()[i];
    r[i] = inverse ? cr2 / c2 : c2 / cr2;
  }
  return r;
}

void multiply_into(const Field3& a, const Field3& b, Field3& out) {
  const std::size_t n = a.size();
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

}  // namespace

WavePropagator::WavePropagator(WaveConfig config)
    : config_(std::move(config)),
      ratio_(speed_ratio(config_, false)),
      inv_ratio_(speed_ratio(config_, true)),
      multiplier_(config_.grid(),
                  [c_ref = config_.c_ref(), ht = config_.time_step()](double k) {
                    const double s = std::sin(0.5 * c_ref * k * ht);
                    return s * s;
                  }),
      scratch_(config_.grid()) {}

LeapfrogState WavePropagator::start_from(const Field3& initial) {
  require_same_grid(initial, ratio_);
  LeapfrogState s{Field3(config_.grid()), Field3(config_.grid()), 0};
  multiply_into(inv_ratio_, initial, s.w_curr);
  s.w_prev = s.w_curr;
  if (config_.start() == StartRule::KSpace) {
    multiplier_.apply(initial, scratch_);
    s.w_prev.axpy(-2.0, scratch_);
  }
  return s;
}

LeapfrogState WavePropagator::init_state(const Field3& f) {
  require_same_grid(f, ratio_);
  if (!config_.mask().supports(f)) {
    throw std::invalid_argument(
        "init_state: initial pressure must vanish outside the ball");
  }
  return start_from(f);
}

void WavePropagator::advance_unchecked(LeapfrogState& s) {
  multiply_into(ratio_, s.w_curr, scratch_);
  multiplier_.apply(scratch_, scratch_);
  const std::size_t n = scratch_.size();
  double* prev = s.w_prev.data();
  const double* curr = s.w_curr.data();
  const double* lap = scratch_.data();
  // prev becomes next, then the two buffers swap roles.
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    prev[i] = 2.0 * curr[i] - prev[i] - 4.0 * lap[i];
  }
  std::swap(s.w_prev, s.w_curr);
  ++s.step;
}

void WavePropagator::advance(LeapfrogState& state) {
  if (state.step >= config_.steps()) {
    throw std::out_of_range("step: state already at final step M");
  }
  advance_unchecked(state);
}

LeapfrogState WavePropagator::step(LeapfrogState state) {
  advance(state);
  return state;
}

Field3 WavePropagator::pressure(const LeapfrogState& state) const {
  Field3 p(config_.grid());
  multiply_into(ratio_, state.w_curr, p);
  return p;
}

Field3 WavePropagator::forward(const Field3& f) {
  LeapfrogState s = init_state(f);
  while (s.step < config_.steps()) advance_unchecked(s);
  return pressure(s);
}

Field3 WavePropagator::transpose(const Field3& g, AdjointMode mode) {
  require_same_grid(g, ratio_);
  if (mode == AdjointMode::TimeReversal) {
    LeapfrogState s = start_from(g);
    while (s.step < config_.steps()) advance_unchecked(s);
    Field3 q = pressure(s);
    config_.mask().apply_in_place(q);
    return q;
  }

  // Reverse sweep of the forward program. Adjoint of
  //   (a, b) -> (2a - b - 4 L D a, a)
  // is (abar', bbar') -> (2 abar' - 4 D L abar' + bbar', -abar').
  Field3 a_bar(config_.grid());
  multiply_into(ratio_, g, a_bar);
  Field3 b_bar(config_.grid(), 0.0);
  const std::size_t n = a_bar.size();
  for (int j = 0; j < config_.steps(); ++j) {
    multiplier_.apply(a_bar, scratch_);
    double* ab = a_bar.data();
    double* bb = b_bar.data();
    const double* lap = scratch_.data();
    const double* d = ratio_.data();
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n; ++i) {
      const double next_a = 2.0 * ab[i] - 4.0 * d[i] * lap[i] + bb[i];
      bb[i] = -ab[i];
      ab[i] = next_a;
    }
  }
  // Initial map: w0 = Dinv f, w_-1 = Dinv f - 2 s L f.
  Field3 out(config_.grid());
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = inv_ratio_[i] * (a_bar[i] + b_bar[i]);
  }
  if (config_.start() == StartRule::KSpace) {
    multiplier_.apply(b_bar, scratch_);
    out.axpy(-2.0, scratch_);
  }
  config_.mask().apply_in_place(out);
  return out;
}

std::vector<Field3> WavePropagator::pressure_history(
    const Field3& initial, std::span<const int> record_steps) {
  if (!std::is_sorted(record_steps.begin(), record_steps.end())) {
    throw std::invalid_argument("pressure_history: steps must be ascending");
  }
  std::vector<Field3> out;
  out.reserve(record_steps.size());
  LeapfrogState s = start_from(initial);
  for (int target : record_steps) {
    if (target < 0) throw std::invalid_argument("pressure_history: negative step");
    while (s.step < target) advance_unchecked(s);
    out.push_back(pressure(s));
  }
  return out;
}

double DotTestReport::max_discrete() const {
  return discrete_transpose.empty()
             ? 0.0
             : *std::max_element(discrete_transpose.begin(),
                                 discrete_transpose.end());
}

double DotTestReport::max_time_reversal() const {
  return time_reversal.empty()
             ? 0.0
             : *std::max_element(time_reversal.begin(), time_reversal.end());
}

double adjoint_mismatch(const Field3& f, const Field3& Af, const Field3& g,
                        const Field3& Atg) {
  const double denom = norm(Af) * norm(g);
  if (denom == 0.0) return 0.0;
  return std::abs(inner_product(Af, g) - inner_product(f, Atg)) / denom;
}

DotTestReport dot_test(const WaveConfig& config, int trials, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("dot_test: trials must be >= 1");
  WavePropagator prop(config);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  DotTestReport report;
  for (int t = 0; t < trials; ++t) {
    Field3 f(config.grid());
    Field3 g(config.grid());
    for (std::size_t i = 0; i < f.size(); ++i) {
      f[i] = uni(rng);
      g[i] = uni(rng);
    }
    config.mask().apply_in_place(f);
    const Field3 Af = prop.forward(f);
    report.discrete_transpose.push_back(adjoint_mismatch(
        f, Af, g, prop.transpose(g, AdjointMode::DiscreteTranspose)));
    report.time_reversal.push_back(
        adjoint_mismatch(f, Af, g, prop.transpose(g, AdjointMode::TimeReversal)));
  }
  return report;
}

std::string propagation_manifest(const WaveConfig& config,
                                 const std::string& mode) {
  const nlohmann::json m = {
      {"n", config.grid().n()},
      {"b", config.grid().half_width()},
      {"T", config.final_time()},
      {"M", config.steps()},
      {"h_t", config.time_step()},
      {"c_ref", config.c_ref()},
      {"CFL", config.cfl()},
      {"mode", mode},
      {"start", to_string(config.start())},
      {"speed_checksum", to_hex(fnv1a64(config.speed().values()))}};
  return m.dump(2);
}

}  // namespace ffdpat
