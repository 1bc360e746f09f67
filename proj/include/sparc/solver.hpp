#pragma once

// SpaRSA: proximal gradient with Barzilai-Borwein step selection and a
// monotone acceptance loop, for  min_x 0.5 * ||y - A x||^2 + penalty(x).

#include "sparc/prox.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sparc {

struct Objective {
  Matrix A;
  Vector y;
  Regularizer regularizer;

  Objective(Matrix design, Vector response, Regularizer reg)
      : A(std::move(design)), y(std::move(response)), regularizer(reg) {
    detail::require(A.rows() == y.size(), "design matrix rows (" + std::to_string(A.rows()) +
                                              ") do not match response length (" +
                                              std::to_string(y.size()) + ")");
    detail::require(A.allFinite() && y.allFinite(), "objective data contains non-finite entries");
    validate(regularizer);
  }

  Index dimension() const { return A.cols(); }
};

struct SolverConfig {
  double eta = 2.0;            // step inflation inside the acceptance loop
  double alpha_min = 1e-30;
  double alpha_max = 1e30;
  int max_iterations = 5000;   // outer
  int max_inner = 50;          // acceptance attempts per outer iteration
  double tolerance = 1e-8;     // relative objective change
  double sigma = 0.01;         // sufficient-decrease constant

  void validate() const {
    detail::require(eta > 1.0, "eta must exceed 1");
    detail::require(alpha_min > 0.0 && alpha_max > alpha_min, "need 0 < alpha_min < alpha_max");
    detail::require(max_iterations >= 1 && max_inner >= 1, "iteration caps must be positive");
    detail::require(tolerance > 0.0, "tolerance must be positive");
    detail::require(sigma > 0.0 && sigma < 1.0, "sigma must lie in (0, 1)");
  }
};

enum class Termination { Tolerance, MaxIterations };

inline const char* to_string(Termination t) {
  return t == Termination::Tolerance ? "tolerance" : "max-iterations";
}

struct SolverResult {
  Vector x;
  std::vector<double> trace;  // objective at x_0 and every accepted iterate
  int iterations = 0;
  Termination termination = Termination::MaxIterations;
  double alpha = 0.0;         // step scale of the last accepted iterate
  bool inner_cap_hit = false;
};

/// Raised when an iterate or intermediate quantity becomes non-finite.
class SolverDivergence : public std::runtime_error {
 public:
  SolverDivergence(const std::string& what, int iteration, double alpha, double objective)
      : std::runtime_error(describe(what, iteration, alpha, objective)),
        iteration_(iteration), alpha_(alpha), objective_(objective) {}

  int iteration() const { return iteration_; }
  double alpha() const { return alpha_; }
  double last_objective() const { return objective_; }

 private:
  static std::string describe(const std::string& what, int iteration, double alpha, double objective) {
    std::ostringstream os;
    os << "solver diverged: " << what << " (iteration " << iteration << ", alpha " << alpha
       << ", last objective " << objective << ")";
    return os.str();
  }

  int iteration_;
  double alpha_;
  double objective_;
};

inline void check_dimension(const Objective& obj, const Eigen::Ref<const Vector>& x) {
  detail::require(x.size() == obj.dimension(), "iterate length " + std::to_string(x.size()) +
                                                   " does not match p=" +
                                                   std::to_string(obj.dimension()));
}

inline double objective_value(const Objective& obj, const Eigen::Ref<const Vector>& x) {
  check_dimension(obj, x);
  const double penalty = penalty_value(obj.regularizer, x);
  if (std::isinf(penalty)) return penalty;
  return 0.5 * (obj.y - obj.A * x).squaredNorm() + penalty;
}

/// A^T (A x - y)
inline Vector gradient_smooth(const Objective& obj, const Eigen::Ref<const Vector>& x) {
  check_dimension(obj, x);
  return obj.A.transpose() * (obj.A * x - obj.y);
}

/// Rayleigh quotient ||A s||^2 / ||s||^2 of A^T A along s. Returns 0 for a
/// zero step; the caller treats that as convergence.
inline double bb_step(const Eigen::Ref<const Vector>& s, const Eigen::Ref<const Matrix>& A) {
  const double ss = s.squaredNorm();
  if (ss == 0.0) return 0.0;
  return (A * s).squaredNorm() / ss;
}

namespace detail {

inline double clamp_step(double alpha, const SolverConfig& cfg) {
  return std::max(cfg.alpha_min, std::min(alpha, cfg.alpha_max));
}

struct StepOutcome {
  Vector x;
  double objective;
  double alpha;
  bool accepted;
};

// One pass of the acceptance loop: prox-gradient steps with alpha inflated by
// eta until sufficient decrease holds. On exhausting max_inner, returns the
// best candidate tried if it does not increase the objective, else x itself.
inline StepOutcome accept_step(const Objective& obj, const SolverConfig& cfg,
                               const Vector& x, double fx, const Vector& grad,
                               double alpha, int iteration) {
  StepOutcome best{x, fx, alpha, false};
  for (int attempt = 0; attempt < cfg.max_inner; ++attempt) {
    const Vector v = x - grad / alpha;
    if (!v.allFinite()) throw SolverDivergence("non-finite gradient step", iteration, alpha, fx);
    Vector candidate = prox_scaled(obj.regularizer, v, alpha);
    if (!candidate.allFinite()) throw SolverDivergence("non-finite prox output", iteration, alpha, fx);
    const double fc = objective_value(obj, candidate);
    if (std::isnan(fc)) throw SolverDivergence("NaN objective", iteration, alpha, fx);
    if (fc <= fx - 0.5 * cfg.sigma * alpha * (candidate - x).squaredNorm()) {
      return {std::move(candidate), fc, alpha, true};
    }
    if (fc < best.objective) best = {std::move(candidate), fc, alpha, false};
    alpha = std::min(cfg.eta * alpha, cfg.alpha_max);
  }
  return best;
}

}  // namespace detail

/// Runs SpaRSA from x0. For a SPARC penalty x0 is first projected onto the
/// K-sparse set. The trace starts with the objective at the (projected) x0
/// and gains one entry per accepted iterate; it never increases.
inline SolverResult sparsa_solve(const Objective& obj, const SolverConfig& cfg,
                                 const Eigen::Ref<const Vector>& x0) {
  cfg.validate();
  check_dimension(obj, x0);
  detail::require_finite(x0, "initial iterate");

  SolverResult result;
  Vector x = x0;
  if (const auto* s = std::get_if<Sparc>(&obj.regularizer)) x = project_k_sparse(x, s->k);
  double fx = objective_value(obj, x);
  result.trace.push_back(fx);

  // First step: the curvature of A^T A along the initial gradient seeds alpha_0.
  Vector grad = gradient_smooth(obj, x);
  double alpha = grad.squaredNorm() > 0.0 ? bb_step(grad, obj.A) : 1.0;
  alpha = detail::clamp_step(alpha > 0.0 ? alpha : 1.0, cfg);

  Vector x_prev = x;
  for (int k = 1;; ++k) {
    const detail::StepOutcome step = detail::accept_step(obj, cfg, x, fx, grad, alpha, k);
    result.inner_cap_hit = result.inner_cap_hit || !step.accepted;
    x_prev = x;
    x = step.x;
    const double change = std::abs(fx - step.objective) / std::max(1.0, std::abs(fx));
    fx = step.objective;
    result.trace.push_back(fx);
    result.alpha = step.alpha;
    result.iterations = k;

    if (change < cfg.tolerance) {
      result.termination = Termination::Tolerance;
      break;
    }
    if (k >= cfg.max_iterations) {
      result.termination = Termination::MaxIterations;
      break;
    }
    const Vector s = x - x_prev;
    const double curvature = bb_step(s, obj.A);
    if (s.squaredNorm() == 0.0) {
      result.termination = Termination::Tolerance;
      break;
    }
    if (!std::isfinite(curvature)) throw SolverDivergence("non-finite BB step", k, alpha, fx);
    alpha = detail::clamp_step(curvature, cfg);
    grad = gradient_smooth(obj, x);
  }
  result.x = std::move(x);
  return result;
}

inline SolverResult sparsa_solve(const Objective& obj, const SolverConfig& cfg = {}) {
  return sparsa_solve(obj, cfg, Vector::Zero(obj.dimension()));
}

}  // namespace sparc
