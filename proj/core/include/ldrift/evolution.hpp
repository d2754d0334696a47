#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ldrift/accretive_op.hpp"
#include "ldrift/io.hpp"
#include "ldrift/models.hpp"

namespace ldrift {

enum class Splitting {
  fully_implicit,   ///< all of B implicit in every step
  paper_splitting,  ///< theta_M B explicit at u_{j-1}, (1 - theta_M) B implicit
};
Splitting parse_splitting(const std::string& name);
std::string to_string(Splitting s);

struct EvolutionConfig {
  double dt = 1e-2;
  double horizon = 1.0;
  Splitting splitting = Splitting::fully_implicit;
  TruncationPlan truncation;
  ResolventConfig resolvent;
  double energy_tol = 1e-10;

  /// Number of steps; dt must divide the horizon up to 1e-9 relative.
  int steps() const;
  void validate() const;
};

struct TraceRow {
  int step = 0;
  double t = 0.0;
  double l2_norm = 0.0;
  double h1_seminorm = 0.0;
  double cumulative_dissipation = 0.0;  ///< sum_j dt ||grad u_j||^2
  double level = 0.0;
  int resolvent_iters = 0;
  double energy_violation = 0.0;  ///< max(0, lhs - rhs) of the per-step energy inequality
};

struct EvolutionTrace {
  std::vector<TraceRow> rows;
  int energy_violations = 0;  ///< steps with energy_violation > energy_tol
  double max_energy_violation = 0.0;
  /// (sup ||u_j||^2 + sum dt ||grad u_j||^2) / (||u_0||^2 + T + sum dt ||F(t_j)||^2)
  double trace_bound_constant = 0.0;
  std::vector<std::string> warnings;

  CsvTable table() const;
};

struct StepResult {
  GridFunction solution;
  SolverDiagnostics diagnostics;
  double energy_violation = 0.0;
};

/// One implicit Euler step from t to t + dt with coefficients frozen at t + dt.
StepResult step(const GridFunction& u_prev, double t, const EvolutionConfig& cfg, const ProblemData& data,
                double level, const ShiftedLaplacian* preconditioner = nullptr);

class EvolutionError : public SolverError {
 public:
  EvolutionError(const std::string& what, int step, EvolutionTrace partial, SolverDiagnostics diag)
      : SolverError(what, std::move(diag)), step_(step), partial_(std::move(partial)) {}
  int step() const { return step_; }
  const EvolutionTrace& partial_trace() const { return partial_; }

 private:
  int step_;
  EvolutionTrace partial_;
};

struct EvolveOptions {
  std::optional<double> level;         ///< defaults to the last plan level
  std::optional<GridFunction> initial;  ///< defaults to data.initial
  bool keep_states = false;
};

struct EvolutionResult {
  GridFunction final_state;
  EvolutionTrace trace;
  std::vector<GridFunction> states;  ///< u_0 ... u_n when keep_states
};

EvolutionResult evolve(const ProblemData& data, const EvolutionConfig& cfg, const EvolveOptions& opts = {});

struct ContinuationReport {
  std::vector<double> levels;
  std::vector<bool> certified;
  std::vector<EvolutionResult> runs;
  std::vector<double> differences;  ///< ||u^(k+1)(T) - u^(k)(T)||
  std::size_t saturation_index = 0;  ///< first level >= max sampled b (levels.size() if none)
  bool nonincreasing = true;  ///< over every consecutive pair of levels
  bool nonincreasing_after_saturation = true;
  std::vector<std::string> warnings;
};

/// Runs evolve for every level of cfg.truncation (at least two).
ContinuationReport continuation(const ProblemData& data, const EvolutionConfig& cfg);

struct UniquenessReport {
  std::vector<double> times;
  std::vector<double> differences;  ///< ||u_j - v_j||
  double growth_constant = 0.0;     ///< C in ||u_j - v_j|| <= e^{C t_j} ||u_0 - v_0||
  double observed_exponent = 0.0;   ///< max_j ln(d_j / d_0) / t_j
  bool bound_holds = true;          ///< with relative slack 1e-8
  bool monotone = true;             ///< d_j nonincreasing
};

/// Two trajectories from u0 and v0 under the same data and level.
UniquenessReport uniqueness_harness(const ProblemData& data, const EvolutionConfig& cfg, const GridFunction& u0,
                                    const GridFunction& v0, std::optional<double> level = {});

/// Product test function psi(x) chi(t) with chi(T) = 0.
struct TestFunction {
  std::string name;
  std::function<double(const Point&)> space;
  std::function<double(double)> time;
  std::function<double(double)> time_derivative;
};

/// Eigenfunction, second mode and polynomial bump in space, times
/// (1 - t/T)^2 and (t/T)(1 - t/T)^2 in time.
std::vector<TestFunction> standard_test_functions(const BoxDomain& domain, double horizon);

struct WeakResidualEntry {
  std::string name;
  double residual = 0.0;
  double scale = 0.0;  ///< sum of absolute values of the individual terms
  double relative = 0.0;  ///< |residual| / largest scale in the battery
};

struct WeakResidualReport {
  std::vector<WeakResidualEntry> entries;
  double max_abs = 0.0;
  double max_relative = 0.0;
};

/// R(phi) = sum_j dt [ -<u_j, d_t phi(t_j)> + <A(grad u_j) + B(u_j) - F(t_j), grad phi(t_j)> ] - <u_0, phi(0)>
/// for states u_0 ... u_n at times t_0 = 0 < ... < t_n.
WeakResidualReport weak_residual(std::span<const GridFunction> states, std::span<const double> times,
                                 const ProblemData& data, std::span<const TestFunction> tests);

void to_json(nlohmann::json& j, const ContinuationReport& r);
void to_json(nlohmann::json& j, const UniquenessReport& r);
void to_json(nlohmann::json& j, const WeakResidualReport& r);

}  // namespace ldrift
