#include "ldrift/lorentz.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace ldrift {

LorentzExponents::LorentzExponents(double p_, double q_) : p(p_), q(q_) {
  if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument("Lorentz exponent p must lie in (1, inf)");
  if (!(q >= 1.0)) throw std::invalid_argument("Lorentz exponent q must be >= 1 or infinite");
}

double DistributionFunction::operator()(double m) const {
  // First threshold strictly above m; mu is right-continuous.
  const auto it = std::upper_bound(thresholds.begin(), thresholds.end(), m);
  if (it == thresholds.end()) return 0.0;
  return measures[static_cast<std::size_t>(it - thresholds.begin())];
}

DistributionFunction distribution(const GridFunction& u) {
  std::vector<double> mags;
  mags.reserve(u.size());
  for (double v : u.values()) {
    if (v != 0.0) mags.push_back(std::abs(v));
  }
  std::sort(mags.begin(), mags.end());

  DistributionFunction mu;
  const double w = u.domain().cell_volume();
  const std::size_t n = mags.size();
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && mags[j] == mags[i]) ++j;
    // Nodes with |u| >= mags[i] number n - i; they exceed every m < mags[i].
    mu.thresholds.push_back(mags[i]);
    mu.measures.push_back(static_cast<double>(n - i) * w);
    i = j;
  }
  return mu;
}

double lorentz_norm(const DistributionFunction& mu, const LorentzExponents& e) {
  const auto& m = mu.thresholds;
  const auto& meas = mu.measures;
  if (m.empty()) return 0.0;
  if (e.is_weak()) {
    double best = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) best = std::max(best, m[i] * std::pow(meas[i], 1.0 / e.p));
    return best;
  }
  // Summation by parts of p/q * sum_i mu_i^{q/p} (m_i^q - m_{i-1}^q); every
  // term is nonnegative.
  const double r = e.q / e.p;
  double s = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double next = i + 1 < m.size() ? std::pow(meas[i + 1], r) : 0.0;
    s += std::pow(m[i], e.q) * (std::pow(meas[i], r) - next);
  }
  return std::pow(e.p / e.q * s, 1.0 / e.q);
}

double lorentz_norm(const GridFunction& u, const LorentzExponents& e) { return lorentz_norm(distribution(u), e); }

GridFunction truncate(const GridFunction& u, double n) {
  if (!(n > 0.0)) throw std::invalid_argument("truncate: level must be positive");
  GridFunction t = u;
  for (double& v : t.values()) v = std::clamp(v, -n, n);
  return t;
}

std::vector<double> dist_to_bounded(const GridFunction& u, double p, std::span<const double> levels) {
  const auto e = LorentzExponents::weak(p);
  std::vector<double> out;
  out.reserve(levels.size());
  double prev = 0.0;
  for (std::size_t k = 0; k < levels.size(); ++k) {
    if (!(levels[k] > 0.0) || (k > 0 && !(levels[k] > prev))) {
      throw std::invalid_argument("dist_to_bounded: levels must be positive and increasing");
    }
    prev = levels[k];
    GridFunction rem = u;
    rem -= truncate(u, levels[k]);
    out.push_back(lorentz_norm(rem, e));
  }
  return out;
}

double unit_ball_volume(int n) {
  return std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

double sobolev_constant(int n, double p) {
  if (n < 1) throw std::invalid_argument("sobolev_constant: dimension must be positive");
  if (!(p > 1.0) || !(p < n)) {
    throw std::invalid_argument("sobolev_constant: the Lorentz-Sobolev embedding needs 1 < p < N");
  }
  return std::pow(unit_ball_volume(n), -1.0 / n) * p / (n - p);
}

HolderReport check_holder(const GridFunction& u, const GridFunction& v, const LorentzExponents& e1,
                          const LorentzExponents& e2) {
  const double inv_p = 1.0 / e1.p + 1.0 / e2.p;
  const double inv_q = (e1.is_weak() ? 0.0 : 1.0 / e1.q) + (e2.is_weak() ? 0.0 : 1.0 / e2.q);
  if (!(inv_p < 1.0)) throw std::invalid_argument("check_holder: 1/p1 + 1/p2 must be < 1");
  if (inv_q > 1.0) throw std::invalid_argument("check_holder: 1/q1 + 1/q2 must be <= 1");
  const LorentzExponents prod(1.0 / inv_p, inv_q == 0.0 ? LorentzExponents::kInf : 1.0 / inv_q);

  GridFunction uv = u;
  for (std::size_t i = 0; i < uv.size(); ++i) uv[i] *= v[i];

  HolderReport r;
  r.first = e1;
  r.second = e2;
  r.product = prod;
  r.lhs = lorentz_norm(uv, prod);
  r.rhs = lorentz_norm(u, e1) * lorentz_norm(v, e2);
  r.margin = r.rhs - r.lhs;
  r.guaranteed_rhs = std::pow(2.0, 1.0 / prod.p) * r.rhs;
  return r;
}

void to_json(nlohmann::json& j, const LorentzExponents& e) {
  j = nlohmann::json{{"p", e.p}, {"q", e.is_weak() ? nlohmann::json("inf") : nlohmann::json(e.q)}};
}

void to_json(nlohmann::json& j, const HolderReport& r) {
  j = nlohmann::json{{"lhs", r.lhs},
                     {"rhs", r.rhs},
                     {"margin", r.margin},
                     {"guaranteed_rhs", r.guaranteed_rhs},
                     {"exponents", {{"first", r.first}, {"second", r.second}, {"product", r.product}}}};
}

double sobolev_lorentz_ratio(const GridFunction& u) {
  const int n = u.domain().dim();
  const double s = sobolev_constant(n, 2.0);
  const double p_star = 2.0 * n / (n - 2.0);
  const double grad = h1_seminorm(u);
  if (grad == 0.0) return 0.0;
  return lorentz_norm(u, LorentzExponents(p_star, 2.0)) / (s * grad);
}

}  // namespace ldrift
