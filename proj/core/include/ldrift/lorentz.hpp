#pragma once

#include <limits>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ldrift/grid.hpp"

namespace ldrift {

/// Exponents (p, q) of L^{p,q}. q == infinity selects the weak space L^{p,inf}.
struct LorentzExponents {
  static constexpr double kInf = std::numeric_limits<double>::infinity();

  double p;
  double q;

  LorentzExponents(double p_, double q_);
  static LorentzExponents weak(double p) { return {p, kInf}; }
  static LorentzExponents lebesgue(double p) { return {p, p}; }
  bool is_weak() const { return q == kInf; }
};

/// Distribution function of a grid function viewed as a simple function whose
/// node values are carried on sets of measure cell_volume().
///
/// measures[i] is mu(m) on [thresholds[i-1], thresholds[i]) with thresholds[-1] = 0,
/// and mu(m) = 0 for m >= thresholds.back().
struct DistributionFunction {
  std::vector<double> thresholds;
  std::vector<double> measures;

  double operator()(double m) const;
};

DistributionFunction distribution(const GridFunction& u);

/// Lorentz quasi-norm (p \int mu^{q/p} m^{q-1} dm)^{1/q}, or sup_m m mu(m)^{1/p}
/// when q is infinite. Exact for simple functions.
double lorentz_norm(const DistributionFunction& mu, const LorentzExponents& e);
double lorentz_norm(const GridFunction& u, const LorentzExponents& e);

/// Pointwise clamp to [-n, n].
GridFunction truncate(const GridFunction& u, double n);

/// ||u - T_n u||_{p,inf} for every level in `levels` (positive, increasing).
std::vector<double> dist_to_bounded(const GridFunction& u, double p, std::span<const double> levels);

/// Volume of the unit ball in R^N.
double unit_ball_volume(int n);

/// Sobolev-Lorentz embedding constant omega_N^{-1/N} p / (N - p); requires 1 < p < N.
double sobolev_constant(int n, double p);

struct HolderReport {
  double lhs = 0.0;   ///< ||u v||_{p,q}
  double rhs = 0.0;   ///< ||u||_{p1,q1} ||v||_{p2,q2}
  double margin = 0.0;
  /// rhs scaled by 2^{1/p}; the product inequality is guaranteed with this
  /// constant through (uv)^*(t) <= u^*(t/2) v^*(t/2).
  double guaranteed_rhs = 0.0;
  LorentzExponents first{2.0, 2.0};
  LorentzExponents second{2.0, 2.0};
  LorentzExponents product{2.0, 2.0};
};

/// Evaluates both sides of ||uv||_{p,q} <= ||u||_{p1,q1} ||v||_{p2,q2} where
/// 1/p = 1/p1 + 1/p2 and 1/q = 1/q1 + 1/q2. Throws std::invalid_argument when
/// the product exponents leave p > 1, q >= 1.
HolderReport check_holder(const GridFunction& u, const GridFunction& v, const LorentzExponents& e1,
                          const LorentzExponents& e2);

void to_json(nlohmann::json& j, const LorentzExponents& e);
void to_json(nlohmann::json& j, const HolderReport& r);

/// Ratio ||u||_{2*,2} / (S_{N,2} ||grad u||_{L^2}); the embedding bounds it by one.
/// Requires N >= 3.
double sobolev_lorentz_ratio(const GridFunction& u);

}  // namespace ldrift
