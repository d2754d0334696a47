#pragma once

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/SparseCore>
#include <nlohmann/json_fwd.hpp>

#include "ldrift/grid.hpp"
#include "ldrift/models.hpp"

namespace ldrift {

/// -div[A(x, t, grad u) + s(x) B(x, t, u)] at a frozen time t, where s is the
/// share of the drift kept in the operator: s = 1 - theta_M for the truncated
/// operator, s = 1 for the full one, s = 0 for pure diffusion.
///
/// A is evaluated on faces from the staggered gradient. B is evaluated at the
/// nodes and each face takes the mean of its two nodes (a boundary node
/// contributes zero), which pairs B with the centred nodal gradient.
///
/// Holds a pointer to the problem data; the data must outlive the operator.
class TruncatedOperator {
 public:
  /// Truncated operator at level M. M = +inf drops the drift entirely.
  static TruncatedOperator truncated(const ProblemData& data, double level, double t);
  /// Full operator -div[A + B].
  static TruncatedOperator full(const ProblemData& data, double t);
  /// Diffusion only, -div A.
  static TruncatedOperator diffusion(const ProblemData& data, double t);

  const ProblemData& data() const { return *data_; }
  const BoxDomain& domain() const { return data_->domain; }
  double time() const { return t_; }
  double level() const { return level_; }
  double alpha() const { return data_->diffusion.alpha; }
  double beta() const { return data_->diffusion.beta; }
  const std::vector<double>& drift_share() const { return share_; }
  bool has_drift() const { return has_drift_; }

  /// A(grad u) + s B(u) on the faces.
  VectorField flux(const GridFunction& u) const;
  /// (1 - s) B(u) on the faces: the part the operator leaves out. For the
  /// truncated operator this is theta_M B(u).
  VectorField complementary_drift(const GridFunction& u) const;
  GridFunction apply(const GridFunction& u) const;
  /// inner_vec(flux(u), grad v) = inner(apply(u), v).
  double pairing(const GridFunction& u, const GridFunction& v) const;
  /// Jacobian of apply() at u.
  Eigen::SparseMatrix<double> jacobian(const GridFunction& u) const;

 private:
  TruncatedOperator(const ProblemData& data, double t, double level, std::vector<double> share);
  VectorField drift_faces(const GridFunction& u, bool complement) const;

  const ProblemData* data_;
  double t_;
  double level_;
  std::vector<double> share_;
  bool has_drift_ = false;
  std::vector<Point> nodes_;
  std::array<std::vector<Point>, 3> faces_;
  std::array<std::vector<std::array<std::ptrdiff_t, 2>>, 3> adj_;
};

/// <A~u - A~v, u - v> - (alpha / 2) ||grad(u - v)||^2.
double accretivity_margin(const TruncatedOperator& op, const GridFunction& u, const GridFunction& v);

enum class SolverMethod { picard, newton };
SolverMethod parse_solver_method(const std::string& name);
std::string to_string(SolverMethod m);

struct ResolventConfig {
  double lambda = 1.0;
  double tol = 1e-10;
  int max_iter = 2000;
  SolverMethod method = SolverMethod::picard;
  double relaxation = 0.0;  ///< Picard damping rho in (0, 1]; <= 0 picks the guaranteed value

  void validate() const;
};

struct SolverDiagnostics {
  std::string method;
  int iterations = 0;
  bool converged = false;
  double relaxation = 0.0;
  std::vector<double> residual_history;
};

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, SolverDiagnostics diagnostics)
      : std::runtime_error(what), diagnostics_(std::move(diagnostics)) {}
  const SolverDiagnostics& diagnostics() const { return diagnostics_; }

 private:
  SolverDiagnostics diagnostics_;
};

/// Factorisation of shift * I + scale * (-Delta_h), reused across solves.
class ShiftedLaplacian {
 public:
  ShiftedLaplacian(const BoxDomain& domain, double shift, double scale);
  ~ShiftedLaplacian();
  ShiftedLaplacian(ShiftedLaplacian&&) noexcept;
  ShiftedLaplacian& operator=(ShiftedLaplacian&&) noexcept;

  double shift() const { return shift_; }
  double scale() const { return scale_; }
  GridFunction solve(const GridFunction& r) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  BoxDomain domain_;
  double shift_;
  double scale_;
};

struct SolveResult {
  GridFunction solution;
  SolverDiagnostics diagnostics;
};

/// Solves mass * u + lambda * A~u = rhs. The iteration stops once
/// residual_norm(mass u + lambda A~u - rhs) <= target. Picard uses
/// K = mass I + lambda (-Delta_h) as preconditioner with rho = m / L^2, m and L
/// the monotonicity and Lipschitz constants of the map in the K norm.
SolveResult solve_monotone(const TruncatedOperator& op, double mass, double lambda, const GridFunction& rhs,
                           const ResolventConfig& cfg, const std::function<double(const GridFunction&)>& residual_norm,
                           double target, const GridFunction* guess = nullptr,
                           const ShiftedLaplacian* preconditioner = nullptr);

/// Resolvent J_lambda g = (I + lambda A~)^{-1} g with
/// ||u + lambda A~u - g||_{L2} <= tol (1 + ||g||).
SolveResult resolve(const TruncatedOperator& op, const GridFunction& g, const ResolventConfig& cfg,
                    const GridFunction* guess = nullptr, const ShiftedLaplacian* preconditioner = nullptr);

void to_json(nlohmann::json& j, const SolverDiagnostics& d);

}  // namespace ldrift
