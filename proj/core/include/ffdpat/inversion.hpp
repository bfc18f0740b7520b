#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ffdpat/grid.hpp"

namespace ffdpat {

using LinearMap = std::function<Field3(const Field3&)>;

/// Raised when the preflight dot test finds apply_At is not the adjoint of
/// apply_A.
class AdjointMismatchError : public std::runtime_error {
 public:
  explicit AdjointMismatchError(double ratio);
  double ratio() const { return ratio_; }

 private:
  double ratio_;
};

struct CgConfig {
  int max_iter = 4;
  /// Stop once ||A^T r_k|| <= rel_tol * ||A^T r_0||.
  double rel_tol = 1e-12;
  std::optional<Field3> f0;
  /// Iterates are confined to this ball when set.
  std::optional<BallMask> support;
  bool preflight = true;
  double preflight_tolerance = 1e-6;
  std::uint64_t preflight_seed = 20240601;
};

enum class StopReason { MaxIterations, Tolerance, Breakdown };
std::string to_string(StopReason reason);

/// State at the start of iteration k plus the step taken from it.
struct CgRecord {
  int iter = 0;
  std::optional<double> alpha;
  std::optional<double> beta;
  double norm_At_r = 0.0;
  double norm_r = 0.0;
  std::optional<double> rel_err;
  /// ||A d_k||^2 / ||d_k||^2 for the search direction taken from f_k.
  std::optional<double> rayleigh;
};

struct ReconReport {
  std::vector<CgRecord> records;
  StopReason stop = StopReason::MaxIterations;
  /// ||f_true|| over the support, when a reference was supplied.
  std::optional<double> reference_norm;
  /// ||f_0 - f_true||.
  std::optional<double> initial_error;
  /// ||r_k|| grew by more than 1e-10 relative at some step.
  bool residual_increased = false;
  /// ||A^T r_k|| grew at some step (allowed for CGNE, recorded only).
  bool normal_residual_increased = false;

  std::vector<double> relative_errors() const;
  /// {"records":[...], "summary":{...}}
  std::string to_json() const;
  /// Header: iter,alpha,beta,norm_At_r,norm_r,rel_err
  std::string to_csv() const;
};

struct CgResult {
  Field3 solution;
  ReconReport report;
};

/// Conjugate gradients on A^T A f = A^T h:
///   r_0 = h - A f_0, d_0 = A^T r_0
///   alpha_k = ||A^T r_k||^2 / ||A d_k||^2
///   f_{k+1} = f_k + alpha_k d_k,  r_{k+1} = r_k - alpha_k A d_k
///   beta_k = ||A^T r_{k+1}||^2 / ||A^T r_k||^2,  d_{k+1} = A^T r_{k+1} + beta_k d_k
/// Norms are the h^3-weighted grid norms. `f_true` enables relative errors.
CgResult cg_normal(const LinearMap& apply_A, const LinearMap& apply_At,
                   const Field3& h, const CgConfig& cfg,
                   const Field3* f_true = nullptr);

struct RateCheck {
  bool holds = false;          // ||f_k - f|| <= 2 (|A|/b) q^k ||f_0 - f||
  bool holds_squared = false;  // same with ||f_0 - f||^2
  double contraction = 0.0;    // q = (|A| - b) / (|A| + b)
  double fitted_rate = 0.0;    // exp(slope) of a least-squares fit to log errors
  std::vector<double> bound;
  std::vector<double> bound_squared;
};

/// Throws std::invalid_argument when the report lacks errors or the
/// constants violate norm_A >= b_low > 0.
RateCheck rate_check(const ReconReport& report, double norm_A, double b_low);

/// exp of the least-squares slope of log(errors[k]) against k over positive
/// entries; 0 with fewer than two.
double fitted_geometric_rate(const std::vector<double>& errors);

struct OperatorBounds {
  double norm_A = 0.0;
  double b_low = 0.0;
};

/// ||A|| from power iteration on A^T A; b from the smallest Rayleigh quotient
/// ||A v||^2 / ||v||^2 seen over the power iterates, random probes and the
/// CG directions recorded in `report`.
OperatorBounds estimate_operator_bounds(const LinearMap& apply_A,
                                        const LinearMap& apply_At,
                                        const Field3& prototype,
                                        const std::optional<BallMask>& support,
                                        int power_iterations, int probes,
                                        std::uint64_t seed,
                                        const ReconReport* report = nullptr);

/// ||A^T A f - f / 2|| / ||f||; 0 for f = 0.
double half_identity_diagnostic(const LinearMap& apply_A,
                                const LinearMap& apply_At, const Field3& f);

}  // namespace ffdpat
