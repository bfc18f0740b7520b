#include "ffdpat/inversion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "json.hpp"

namespace ffdpat {

AdjointMismatchError::AdjointMismatchError(double ratio)
    : std::runtime_error("adjoint preflight failed: dot-test ratio " +
                         std::to_string(ratio)),
      ratio_(ratio) {}

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::MaxIterations: return "max-iterations";
    case StopReason::Tolerance: return "tolerance";
    case StopReason::Breakdown: return "breakdown";
  }
  return "max-iterations";
}

namespace {

Field3 random_field(const Field3& prototype, std::mt19937_64& rng,
                    const std::optional<BallMask>& support) {
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Field3 f(prototype.grid());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = uni(rng);
  if (support) support->apply_in_place(f);
  return f;
}

double error_norm(const Field3& f, const Field3& truth,
                  const std::optional<BallMask>& support) {
  Field3 diff = f - truth;
  if (support) support->apply_in_place(diff);
  return norm(diff);
}

void preflight(const LinearMap& A, const LinearMap& At, const Field3& h,
               const CgConfig& cfg) {
  std::mt19937_64 rng(cfg.preflight_seed);
  const Field3 f = random_field(h, rng, cfg.support);
  const Field3 g = random_field(h, rng, std::nullopt);
  const Field3 Af = A(f);
  const Field3 Atg = At(g);
  const double denom = norm(Af) * norm(g);
  if (denom == 0.0) return;
  const double ratio =
      std::abs(inner_product(Af, g) - inner_product(f, Atg)) / denom;
  if (!(ratio <= cfg.preflight_tolerance)) throw AdjointMismatchError(ratio);
}

std::optional<double> finite_or_null(double v) {
  return std::isfinite(v) ? std::optional<double>(v) : std::nullopt;
}

nlohmann::json opt(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::string csv_cell(const std::optional<double>& v) {
  if (!v) return "";
  std::ostringstream ss;
  ss.precision(17);
  ss << *v;
  return ss.str();
}

}  // namespace

CgResult cg_normal(const LinearMap& apply_A, const LinearMap& apply_At,
                   const Field3& h, const CgConfig& cfg, const Field3* f_true) {
  if (cfg.max_iter < 1) throw std::invalid_argument("cg: max_iter must be >= 1");
  if (!(cfg.rel_tol > 0.0 && cfg.rel_tol < 1.0)) {
    throw std::invalid_argument("cg: rel_tol must lie in (0, 1)");
  }
  Field3 f = cfg.f0.value_or(Field3(h.grid()));
  require_same_grid(f, h);
  if (cfg.support && !cfg.support->supports(f)) {
    throw std::invalid_argument("cg: initial guess must be supported in the ball");
  }
  if (f_true) require_same_grid(*f_true, h);
  if (cfg.preflight) preflight(apply_A, apply_At, h, cfg);

  ReconReport report;
  if (f_true) {
    report.reference_norm =
        error_norm(*f_true, Field3(h.grid()), cfg.support);
    report.initial_error = error_norm(f, *f_true, cfg.support);
  }
  auto rel_err = [&](const Field3& x) -> std::optional<double> {
    if (!f_true) return std::nullopt;
    const double e = error_norm(x, *f_true, cfg.support);
    return *report.reference_norm > 0.0 ? e / *report.reference_norm : e;
  };
  auto confine = [&](Field3& x) {
    if (cfg.support) cfg.support->apply_in_place(x);
  };

  Field3 r = h - apply_A(f);
  Field3 s = apply_At(r);
  confine(s);
  Field3 d = s;
  double gamma = inner_product(s, s);
  const double gamma0 = gamma;

  report.records.push_back(
      {0, std::nullopt, std::nullopt, std::sqrt(gamma), norm(r), rel_err(f),
       std::nullopt});
  if (gamma == 0.0) {
    report.stop = StopReason::Tolerance;
    return {std::move(f), std::move(report)};
  }

  report.stop = StopReason::MaxIterations;
  for (int k = 0; k < cfg.max_iter; ++k) {
    const Field3 q = apply_A(d);
    const double delta = inner_product(q, q);
    const double d_norm2 = inner_product(d, d);
    if (!(delta > 0.0)) {
      report.stop = StopReason::Breakdown;
      break;
    }
    const double alpha = gamma / delta;
    f.axpy(alpha, d);
    r.axpy(-alpha, q);
    s = apply_At(r);
    confine(s);
    const double gamma_next = inner_product(s, s);
    const double beta = gamma_next / gamma;
    d *= beta;
    d += s;

    CgRecord& cur = report.records.back();
    cur.alpha = alpha;
    cur.beta = beta;
    cur.rayleigh = finite_or_null(delta / d_norm2);

    const double r_norm = norm(r);
    if (r_norm > cur.norm_r * (1.0 + 1e-10)) report.residual_increased = true;
    if (std::sqrt(gamma_next) > cur.norm_At_r) report.normal_residual_increased = true;
    report.records.push_back({k + 1, std::nullopt, std::nullopt,
                              std::sqrt(gamma_next), r_norm, rel_err(f),
                              std::nullopt});
    gamma = gamma_next;
    if (gamma == 0.0 || std::sqrt(gamma / gamma0) <= cfg.rel_tol) {
      report.stop = StopReason::Tolerance;
      break;
    }
  }
  return {std::move(f), std::move(report)};
}

std::vector<double> ReconReport::relative_errors() const {
  std::vector<double> out;
  for (const auto& r : records) {
    if (r.rel_err) out.push_back(*r.rel_err);
  }
  return out;
}

std::string ReconReport::to_json() const {
  nlohmann::json recs = nlohmann::json::array();
  for (const auto& r : records) {
    recs.push_back({{"iter", r.iter},
                    {"alpha", opt(r.alpha)},
                    {"beta", opt(r.beta)},
                    {"norm_At_r", r.norm_At_r},
                    {"norm_r", r.norm_r},
                    {"rel_err", opt(r.rel_err)},
                    {"rayleigh", opt(r.rayleigh)}});
  }
  nlohmann::json summary = {
      {"iterations", records.empty() ? 0 : records.back().iter},
      {"stop_reason", to_string(stop)},
      {"reference_norm", opt(reference_norm)},
      {"initial_error", opt(initial_error)},
      {"final_rel_err", records.empty() ? nlohmann::json(nullptr)
                                        : opt(records.back().rel_err)},
      {"residual_increased", residual_increased},
      {"normal_residual_increased", normal_residual_increased}};
  return nlohmann::json{{"records", recs}, {"summary", summary}}.dump(2);
}

std::string ReconReport::to_csv() const {
  std::ostringstream ss;
  ss.precision(17);
  ss << "iter,alpha,beta,norm_At_r,norm_r,rel_err\n";
  for (const auto& r : records) {
    ss << r.iter << ',' << csv_cell(r.alpha) << ',' << csv_cell(r.beta) << ','
       << r.norm_At_r << ',' << r.norm_r << ',' << csv_cell(r.rel_err) << '\n';
  }
  return ss.str();
}

double fitted_geometric_rate(const std::vector<double>& errors) {
  std::vector<double> ks, ls;
  for (std::size_t k = 0; k < errors.size(); ++k) {
    if (errors[k] > 0.0) {
      ks.push_back(static_cast<double>(k));
      ls.push_back(std::log(errors[k]));
    }
  }
  if (ks.size() < 2) return 0.0;
  const double n = static_cast<double>(ks.size());
  double sk = 0, sl = 0, skk = 0, skl = 0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    sk += ks[i];
    sl += ls[i];
    skk += ks[i] * ks[i];
    skl += ks[i] * ls[i];
  }
  const double slope = (n * skl - sk * sl) / (n * skk - sk * sk);
  return std::exp(slope);
}

RateCheck rate_check(const ReconReport& report, double norm_A, double b_low) {
  if (!report.reference_norm || !report.initial_error) {
    throw std::invalid_argument("rate_check: report has no reference solution");
  }
  if (!(b_low > 0.0) || norm_A < b_low) {
    throw std::invalid_argument("rate_check: need norm_A >= b_low > 0");
  }
  RateCheck out;
  out.contraction = (norm_A - b_low) / (norm_A + b_low);
  const double e0 = *report.initial_error;
  const double ref = *report.reference_norm > 0.0 ? *report.reference_norm : 1.0;
  out.holds = true;
  out.holds_squared = true;
  for (const auto& r : report.records) {
    if (!r.rel_err) continue;
    const double abs_err = *r.rel_err * ref;
    const double factor = 2.0 * (norm_A / b_low) * std::pow(out.contraction, r.iter);
    out.bound.push_back(factor * e0);
    out.bound_squared.push_back(factor * e0 * e0);
    // A hair of slack absorbs rounding when the bound is attained.
    const double slack = 1e-12 * std::max(1.0, e0);
    if (abs_err > out.bound.back() + slack) out.holds = false;
    if (abs_err > out.bound_squared.back() + slack) out.holds_squared = false;
  }
  out.fitted_rate = fitted_geometric_rate(report.relative_errors());
  return out;
}

OperatorBounds estimate_operator_bounds(const LinearMap& apply_A,
                                        const LinearMap& apply_At,
                                        const Field3& prototype,
                                        const std::optional<BallMask>& support,
                                        int power_iterations, int probes,
                                        std::uint64_t seed,
                                        const ReconReport* report) {
  std::mt19937_64 rng(seed);
  double min_rq = std::numeric_limits<double>::infinity();
  auto rayleigh = [&](const Field3& v, const Field3& Av) {
    const double vv = inner_product(v, v);
    if (vv > 0.0) min_rq = std::min(min_rq, inner_product(Av, Av) / vv);
  };

  Field3 v = random_field(prototype, rng, support);
  double lambda = 0.0;
  for (int it = 0; it < std::max(1, power_iterations); ++it) {
    const double nv = norm(v);
    if (nv == 0.0) break;
    v *= 1.0 / nv;
    const Field3 Av = apply_A(v);
    rayleigh(v, Av);
    lambda = inner_product(Av, Av);
    v = apply_At(Av);
    if (support) support->apply_in_place(v);
  }
  for (int p = 0; p < probes; ++p) {
    const Field3 w = random_field(prototype, rng, support);
    rayleigh(w, apply_A(w));
  }
  if (report) {
    for (const auto& r : report->records) {
      if (r.rayleigh) min_rq = std::min(min_rq, *r.rayleigh);
    }
  }
  OperatorBounds b;
  b.norm_A = std::sqrt(lambda);
  b.b_low = std::isfinite(min_rq) ? std::sqrt(min_rq) : 0.0;
  b.b_low = std::min(b.b_low, b.norm_A);
  return b;
}

double half_identity_diagnostic(const LinearMap& apply_A,
                                const LinearMap& apply_At, const Field3& f) {
  const double nf = norm(f);
  if (nf == 0.0) return 0.0;
  Field3 r = apply_At(apply_A(f));
  r.axpy(-0.5, f);
  return norm(r) / nf;
}

}  // namespace ffdpat
