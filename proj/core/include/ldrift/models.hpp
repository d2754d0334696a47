#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ldrift/grid.hpp"

namespace ldrift {

/// Diffusion flux A(x, t, eta), restricted to the axis-separable form
/// A_a(x, t, eta) = component(x, t, a, eta_a). That keeps each face flux a
/// function of the one gradient component stored on the face, so the strong
/// monotonicity of A carries over to the discrete operator unchanged.
struct DiffusionFlux {
  double alpha = 1.0;  ///< strong monotonicity constant
  double beta = 1.0;   ///< growth / Lipschitz constant
  std::function<double(const Point&, double, int, double)> component;
  std::function<double(const Point&, double, int, double)> slope;  ///< d component / d eta_a
  std::function<double(const Point&, double)> growth_offset;       ///< g(x, t); empty means zero

  Vec3 evaluate(const Point& x, double t, const Vec3& eta, int dim) const;
  double offset(const Point& x, double t) const { return growth_offset ? growth_offset(x, t) : 0.0; }
};

/// Drift flux B(x, t, z) with |B(x,t,z) - B(x,t,z*)| <= b(x,t) |z - z*| and B(x,t,0) = 0.
struct DriftFlux {
  std::function<double(const Point&, double)> coefficient;  ///< b(x, t) >= 0
  std::function<Vec3(const Point&, double, double)> evaluate;
  std::function<Vec3(const Point&, double, double)> slope;  ///< dB/dz

  bool active() const { return static_cast<bool>(evaluate); }
};

using SourceField = std::function<double(const Point&, double, int)>;
using ExactSolution = std::function<double(const Point&, double)>;

struct ProblemData {
  std::string name;
  BoxDomain domain;
  DiffusionFlux diffusion;
  DriftFlux drift;
  SourceField source;  ///< face components of F; empty means F = 0
  GridFunction initial;
  double horizon = 1.0;
  bool time_dependent = false;  ///< any of A, b, F depends on t
  ExactSolution exact;          ///< set for manufactured problems
};

/// b(., t) sampled at the interior nodes (zero without drift).
GridFunction drift_coefficient(const ProblemData& data, double t);
/// F(., t) sampled at the faces.
VectorField source_field(const ProblemData& data, double t);
/// Times at which time-dependent coefficients are sampled for certificates.
std::vector<double> coefficient_sample_times(const ProblemData& data, int count = 9);

/// theta_M = T_M(b) / b with theta = 1 where b = 0.
GridFunction truncation_weight(const GridFunction& b, double level);

struct TruncationCertificate {
  double level = 0.0;
  double measured = 0.0;             ///< sup_t ||b - T_M b||_{N,inf}
  double truncated_norm = 0.0;       ///< sup_t ||T_M b||_{N,inf}
  double evolution_threshold = 0.0;  ///< alpha / (2 S_{N,2}); NaN when N < 3
  double longtime_threshold = 0.0;   ///< alpha / (4 S_{N,2}); NaN when N < 3
  bool embedding_defined = false;
  bool evolution_pass = false;
  bool longtime_pass = false;
};

/// Compares the weak-L^N remainder of the truncated drift against the
/// feasibility bounds. For N < 3 no embedding constant exists; a level then
/// passes only if the remainder vanishes on the grid.
TruncationCertificate certify_truncation(std::span<const GridFunction> b_samples, double level, double alpha);
TruncationCertificate certify_truncation(const ProblemData& data, double level);

/// Flags a distance-to-L^inf obstruction: the remainder norms measured on a
/// refinement ladder have levelled off (last two within `plateau_tol`
/// relative) above the threshold.
bool distance_obstruction(std::span<const double> ladder, double threshold, double plateau_tol = 0.1);

struct TruncationPlan {
  std::vector<double> levels;
  double feasibility_bound = 0.0;  ///< alpha / (2 S_{N,2}); NaN when N < 3
  std::vector<TruncationCertificate> certificates;

  bool certified(std::size_t k) const { return certificates.at(k).evolution_pass; }
  double final_level() const { return levels.back(); }
};

TruncationPlan make_truncation_plan(const ProblemData& data, std::vector<double> levels);

/// M_k = m0 * factor^k. With m0 <= 0 the start is the 0.9-quantile of the
/// sampled drift; levels stop one step after the first level that saturates
/// the sampled b, or after max_levels.
TruncationPlan default_truncation_plan(const ProblemData& data, double m0 = 0.0, double factor = 2.0,
                                       int max_levels = 24);

struct ModelParams {
  std::string initial = "eigenfunction";  ///< eigenfunction | mode2 | bump | zero | random
  double initial_amplitude = 1.0;
  std::string source = "none";  ///< none | eigen-gradient
  double source_amplitude = 1.0;
  double contrast = 0.5;        ///< delta for variable-diffusion, kappa for lipschitz-nonlinear
  double drift_strength = 0.05;  ///< c in b = c / |x - x0|
  std::optional<Point> singularity;
  std::optional<GridFunction> drift_field;  ///< replaces b with a loaded field (B = z b e)
  double horizon = 1.0;
  std::uint64_t seed = 1;
};

struct ModelEntry {
  std::string name;
  std::string description;
  std::function<ProblemData(const BoxDomain&, const ModelParams&)> build;
};

const std::vector<ModelEntry>& builtin_models();
ProblemData make_model(const std::string& name, const BoxDomain& domain, const ModelParams& params = {});

/// Default singular point: centre of the cell whose lower corner is the node
/// nearest the domain centre, so no node coincides with it.
Point default_singularity(const BoxDomain& domain);

/// Unit drift direction (1, ..., 1) / sqrt(N).
Vec3 drift_direction(int dim);

/// Initial and source shapes shared by the catalog.
GridFunction initial_state(const BoxDomain& domain, const std::string& kind, double amplitude, std::uint64_t seed);

struct HypothesisCheck {
  std::string name;
  int samples = 0;
  int violations = 0;
  double worst = 0.0;  ///< most negative slack seen (>= 0 means no violation)
};

struct HypothesisReport {
  std::string model;
  std::vector<HypothesisCheck> checks;
  bool pass() const;
};

/// Random spot checks of growth, strong monotonicity, drift Lipschitz bound and
/// B(x,t,0) = 0 on `samples` draws of (x, t, eta, eta*, z, z*).
HypothesisReport verify_hypotheses(const ProblemData& data, int samples, std::uint64_t seed);

void to_json(nlohmann::json& j, const TruncationCertificate& c);
void to_json(nlohmann::json& j, const HypothesisReport& r);

}  // namespace ldrift
