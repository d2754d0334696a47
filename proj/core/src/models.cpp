#include "ldrift/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "ldrift/lorentz.hpp"
#include "ldrift/random.hpp"

namespace ldrift {

namespace {

constexpr double kPi = std::numbers::pi;
const double kNaN = std::numeric_limits<double>::quiet_NaN();

double sine_product(const BoxDomain& d, const Point& x, double freq = 1.0) {
  double s = 1.0;
  for (int a = 0; a < d.dim(); ++a) s *= std::sin(freq * kPi * x[a] / d.length(a));
  return s;
}

// d/dx_axis of prod_a sin(pi x_a / L_a).
double sine_product_derivative(const BoxDomain& d, const Point& x, int axis) {
  double s = kPi / d.length(axis) * std::cos(kPi * x[axis] / d.length(axis));
  for (int a = 0; a < d.dim(); ++a) {
    if (a != axis) s *= std::sin(kPi * x[a] / d.length(a));
  }
  return s;
}

// Sum of (pi / L_a)^2: first Dirichlet eigenvalue of -Laplace on the box.
double continuum_first_eigenvalue(const BoxDomain& d) {
  double lam = 0.0;
  for (int a = 0; a < d.dim(); ++a) lam += (kPi / d.length(a)) * (kPi / d.length(a));
  return lam;
}

// sup_m m mu(m)^{1/p}, valid for every p >= 1 (including the N = 1 case).
double weak_norm(const GridFunction& u, double p) {
  const auto mu = distribution(u);
  double best = 0.0;
  for (std::size_t i = 0; i < mu.thresholds.size(); ++i) {
    best = std::max(best, mu.thresholds[i] * std::pow(mu.measures[i], 1.0 / p));
  }
  return best;
}

DiffusionFlux linear_diffusion() {
  DiffusionFlux a;
  a.alpha = 1.0;
  a.beta = 1.0;
  a.component = [](const Point&, double, int, double s) { return s; };
  a.slope = [](const Point&, double, int, double) { return 1.0; };
  return a;
}

DriftFlux coefficient_drift(std::function<double(const Point&, double)> b, Vec3 dir) {
  DriftFlux d;
  d.coefficient = b;
  d.evaluate = [b, dir](const Point& x, double t, double z) {
    const double bz = z * b(x, t);
    return Vec3{bz * dir[0], bz * dir[1], bz * dir[2]};
  };
  d.slope = [b, dir](const Point& x, double t, double) {
    const double bx = b(x, t);
    return Vec3{bx * dir[0], bx * dir[1], bx * dir[2]};
  };
  return d;
}

SourceField eigen_gradient_source(const BoxDomain& d, double amplitude) {
  return [d, amplitude](const Point& x, double, int axis) { return amplitude * sine_product_derivative(d, x, axis); };
}

// Nearest-node lookup so a loaded field defines b at any point of the box.
std::function<double(const Point&, double)> field_lookup(const GridFunction& field) {
  return [field](const Point& x, double) {
    const auto& d = field.domain();
    const auto& ext = d.interior_extents();
    std::array<int, 3> idx{0, 0, 0};
    for (int a = 0; a < d.dim(); ++a) {
      const int k = static_cast<int>(std::lround(x[a] / d.width(a))) - 1;
      if (k < 0 || k >= ext[a]) return 0.0;
      idx[a] = k;
    }
    return field[(static_cast<std::size_t>(idx[0]) * ext[1] + idx[1]) * ext[2] + idx[2]];
  };
}

void apply_common(ProblemData& p, const ModelParams& params) {
  p.initial = initial_state(p.domain, params.initial, params.initial_amplitude, params.seed);
  if (params.source == "eigen-gradient") {
    p.source = eigen_gradient_source(p.domain, params.source_amplitude);
  } else if (params.source != "none") {
    throw std::invalid_argument("unknown source kind '" + params.source + "'");
  }
  if (params.drift_field) {
    if (!(params.drift_field->domain() == p.domain)) {
      throw DomainMismatch("drift field grid does not match the problem domain");
    }
    for (double v : params.drift_field->values()) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("drift field must be finite and >= 0");
    }
    p.drift = coefficient_drift(field_lookup(*params.drift_field), drift_direction(p.domain.dim()));
  }
  if (!(params.horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  p.horizon = params.horizon;
}

ProblemData base_problem(const std::string& name, const BoxDomain& d) {
  return ProblemData{name, d, linear_diffusion(), {}, {}, GridFunction(d), 1.0, false, {}};
}

ProblemData build_heat(const BoxDomain& d, const ModelParams& params) {
  auto p = base_problem("heat", d);
  apply_common(p, params);
  return p;
}

ProblemData build_variable(const BoxDomain& d, const ModelParams& params) {
  const double delta = params.contrast;
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("variable-diffusion needs 0 < contrast < 1");
  auto p = base_problem("variable-diffusion", d);
  auto coeff = [d, delta](const Point& x, double t) {
    return 1.0 + delta * sine_product(d, x) * std::cos(2.0 * kPi * t);
  };
  p.diffusion.alpha = 1.0 - delta;
  p.diffusion.beta = 1.0 + delta;
  p.diffusion.component = [coeff](const Point& x, double t, int, double s) { return coeff(x, t) * s; };
  p.diffusion.slope = [coeff](const Point& x, double t, int, double) { return coeff(x, t); };
  p.time_dependent = true;
  apply_common(p, params);
  return p;
}

ProblemData build_nonlinear(const BoxDomain& d, const ModelParams& params) {
  const double kappa = params.contrast;
  if (!(kappa > 0.0 && kappa < 1.0)) throw std::invalid_argument("lipschitz-nonlinear needs 0 < contrast < 1");
  auto p = base_problem("lipschitz-nonlinear", d);
  // A(eta) = eta + (beta - alpha) phi(eta), phi_a(eta) = sin(eta_a) / 2, alpha = 1 - kappa, beta = 1 + kappa.
  p.diffusion.alpha = 1.0 - kappa;
  p.diffusion.beta = 1.0 + kappa;
  p.diffusion.component = [kappa](const Point&, double, int, double s) { return s + kappa * std::sin(s); };
  p.diffusion.slope = [kappa](const Point&, double, int, double s) { return 1.0 + kappa * std::cos(s); };
  apply_common(p, params);
  return p;
}

ProblemData build_singular(const BoxDomain& d, const ModelParams& params) {
  const double c = params.drift_strength;
  if (!(c >= 0.0)) throw std::invalid_argument("singular-drift needs drift strength >= 0");
  auto p = base_problem("singular-drift", d);
  const Point x0 = params.singularity.value_or(default_singularity(d));
  const int dim = d.dim();
  auto b = [c, x0, dim](const Point& x, double) {
    double r2 = 0.0;
    for (int a = 0; a < dim; ++a) r2 += (x[a] - x0[a]) * (x[a] - x0[a]);
    return r2 > 0.0 ? c / std::sqrt(r2) : std::numeric_limits<double>::infinity();
  };
  p.drift = coefficient_drift(b, drift_direction(dim));
  apply_common(p, params);
  return p;
}

ProblemData build_manufactured(const BoxDomain& d, const ModelParams& params) {
  auto p = base_problem("manufactured", d);
  const double lam = continuum_first_eigenvalue(d);
  const double scale = (lam - 1.0) / lam;
  p.exact = [d](const Point& x, double t) { return std::exp(-t) * sine_product(d, x); };
  p.source = [d, scale](const Point& x, double t, int axis) {
    return scale * std::exp(-t) * sine_product_derivative(d, x, axis);
  };
  p.time_dependent = true;
  if (!(params.horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  p.horizon = params.horizon;
  p.initial = GridFunction::sample(d, [&](const Point& x) { return p.exact(x, 0.0); });
  return p;
}

}  // namespace

Vec3 DiffusionFlux::evaluate(const Point& x, double t, const Vec3& eta, int dim) const {
  Vec3 out{0.0, 0.0, 0.0};
  for (int a = 0; a < dim; ++a) out[a] = component(x, t, a, eta[a]);
  return out;
}

GridFunction drift_coefficient(const ProblemData& data, double t) {
  if (!data.drift.active()) return GridFunction(data.domain);
  return GridFunction::sample(data.domain, [&](const Point& x) { return data.drift.coefficient(x, t); });
}

VectorField source_field(const ProblemData& data, double t) {
  if (!data.source) return VectorField(data.domain);
  return VectorField::sample(data.domain, [&](const Point& x, int axis) { return data.source(x, t, axis); });
}

std::vector<double> coefficient_sample_times(const ProblemData& data, int count) {
  if (!data.time_dependent || count < 2) return {0.0};
  std::vector<double> t(count);
  for (int i = 0; i < count; ++i) t[i] = data.horizon * i / (count - 1);
  return t;
}

GridFunction truncation_weight(const GridFunction& b, double level) {
  if (!(level > 0.0)) throw std::invalid_argument("truncation_weight: level must be positive");
  GridFunction theta = b;
  for (double& v : theta.values()) {
    if (v < 0.0) throw std::invalid_argument("truncation_weight: drift coefficient must be >= 0");
    v = v > level ? level / v : 1.0;
  }
  return theta;
}

TruncationCertificate certify_truncation(std::span<const GridFunction> b_samples, double level, double alpha) {
  if (b_samples.empty()) throw std::invalid_argument("certify_truncation: no drift samples");
  if (!(level > 0.0)) throw std::invalid_argument("certify_truncation: level must be positive");
  const int n = b_samples.front().domain().dim();
  TruncationCertificate c;
  c.level = level;
  for (const auto& b : b_samples) {
    const auto tb = truncate(b, level);
    auto rem = b;
    rem -= tb;
    c.measured = std::max(c.measured, weak_norm(rem, n));
    c.truncated_norm = std::max(c.truncated_norm, weak_norm(tb, n));
  }
  c.embedding_defined = n >= 3;
  if (c.embedding_defined) {
    const double s = sobolev_constant(n, 2.0);
    c.evolution_threshold = alpha / (2.0 * s);
    c.longtime_threshold = alpha / (4.0 * s);
    c.evolution_pass = c.measured <= c.evolution_threshold;
    c.longtime_pass = c.measured <= c.longtime_threshold;
  } else {
    c.evolution_threshold = kNaN;
    c.longtime_threshold = kNaN;
    c.evolution_pass = c.measured == 0.0;
    c.longtime_pass = c.measured == 0.0;
  }
  return c;
}

TruncationCertificate certify_truncation(const ProblemData& data, double level) {
  std::vector<GridFunction> samples;
  for (double t : coefficient_sample_times(data)) samples.push_back(drift_coefficient(data, t));
  return certify_truncation(samples, level, data.diffusion.alpha);
}

bool distance_obstruction(std::span<const double> ladder, double threshold, double plateau_tol) {
  if (ladder.size() < 2) return false;
  const double last = ladder[ladder.size() - 1];
  const double prev = ladder[ladder.size() - 2];
  if (!(last > threshold && prev > threshold)) return false;
  return std::abs(last - prev) <= plateau_tol * std::max(last, prev);
}

TruncationPlan make_truncation_plan(const ProblemData& data, std::vector<double> levels) {
  if (levels.empty()) throw std::invalid_argument("truncation plan needs at least one level");
  for (std::size_t k = 1; k < levels.size(); ++k) {
    if (!(levels[k] > levels[k - 1])) throw std::invalid_argument("truncation levels must increase");
  }
  TruncationPlan plan;
  plan.levels = std::move(levels);
  const int n = data.domain.dim();
  plan.feasibility_bound = n >= 3 ? data.diffusion.alpha / (2.0 * sobolev_constant(n, 2.0)) : kNaN;
  std::vector<GridFunction> samples;
  for (double t : coefficient_sample_times(data)) samples.push_back(drift_coefficient(data, t));
  for (double m : plan.levels) plan.certificates.push_back(certify_truncation(samples, m, data.diffusion.alpha));
  return plan;
}

TruncationPlan default_truncation_plan(const ProblemData& data, double m0, double factor, int max_levels) {
  if (!(factor > 1.0)) throw std::invalid_argument("truncation factor must exceed 1");
  std::vector<double> all;
  for (double t : coefficient_sample_times(data)) {
    const auto b = drift_coefficient(data, t);
    all.insert(all.end(), b.values().begin(), b.values().end());
  }
  const double bmax = all.empty() ? 0.0 : *std::max_element(all.begin(), all.end());
  if (!(m0 > 0.0)) {
    if (bmax == 0.0) {
      m0 = 1.0;
    } else {
      auto sorted = all;
      std::sort(sorted.begin(), sorted.end());
      m0 = sorted[static_cast<std::size_t>(0.9 * static_cast<double>(sorted.size() - 1))];
      if (!(m0 > 0.0)) m0 = bmax / 16.0;
    }
  }
  std::vector<double> levels;
  int saturated = 0;
  for (double m = m0; static_cast<int>(levels.size()) < max_levels; m *= factor) {
    levels.push_back(m);
    if (m >= bmax && ++saturated == 2) break;
  }
  return make_truncation_plan(data, std::move(levels));
}

Point default_singularity(const BoxDomain& d) {
  Point x0{};
  for (int a = 0; a < d.dim(); ++a) x0[a] = (std::floor(d.cells(a) / 2.0) + 0.5) * d.width(a);
  return x0;
}

Vec3 drift_direction(int dim) {
  Vec3 e{0.0, 0.0, 0.0};
  for (int a = 0; a < dim; ++a) e[a] = 1.0 / std::sqrt(static_cast<double>(dim));
  return e;
}

GridFunction initial_state(const BoxDomain& d, const std::string& kind, double amplitude, std::uint64_t seed) {
  if (kind == "eigenfunction") {
    return GridFunction::sample(d, [&](const Point& x) { return amplitude * sine_product(d, x); });
  }
  if (kind == "mode2") {
    return GridFunction::sample(d, [&](const Point& x) { return amplitude * sine_product(d, x, 2.0); });
  }
  if (kind == "bump") {
    return GridFunction::sample(d, [&](const Point& x) {
      double v = amplitude;
      for (int a = 0; a < d.dim(); ++a) {
        const double s = 4.0 * x[a] * (d.length(a) - x[a]) / (d.length(a) * d.length(a));
        v *= s * s;
      }
      return v;
    });
  }
  if (kind == "zero") return GridFunction(d);
  if (kind == "random") {
    Rng rng(seed);
    GridFunction g(d);
    for (double& v : g.values()) v = amplitude * rng.uniform(-1.0, 1.0);
    return g;
  }
  throw std::invalid_argument("unknown initial state kind '" + kind + "'");
}

const std::vector<ModelEntry>& builtin_models() {
  static const std::vector<ModelEntry> catalog{
      {"heat", "A = eta, B = 0 (alpha = beta = 1)", build_heat},
      {"variable-diffusion", "A = a(x,t) eta with 1 - delta <= a <= 1 + delta", build_variable},
      {"lipschitz-nonlinear", "A(eta) = eta + kappa sin(eta) componentwise (alpha = 1 - kappa, beta = 1 + kappa)",
       build_nonlinear},
      {"singular-drift", "A = eta, B = z b(x) e with b = c / |x - x0|", build_singular},
      {"manufactured", "heat flow with F = grad Phi and exact solution e^{-t} prod sin(pi x_i / L_i)",
       build_manufactured},
  };
  return catalog;
}

ProblemData make_model(const std::string& name, const BoxDomain& domain, const ModelParams& params) {
  for (const auto& m : builtin_models()) {
    if (m.name == name) return m.build(domain, params);
  }
  throw std::invalid_argument("unknown model '" + name + "'");
}

bool HypothesisReport::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const HypothesisCheck& c) { return c.violations == 0; });
}

HypothesisReport verify_hypotheses(const ProblemData& data, int samples, std::uint64_t seed) {
  const auto& d = data.domain;
  const int n = d.dim();
  const auto& A = data.diffusion;
  Rng rng(seed);

  HypothesisCheck growth{"growth |A| <= beta |eta| + g", samples, 0, 0.0};
  HypothesisCheck mono{"monotonicity <A - A*, eta - eta*> >= alpha |eta - eta*|^2", samples, 0, 0.0};
  HypothesisCheck lip{"drift |B(z) - B(z*)| <= b |z - z*|", samples, 0, 0.0};
  HypothesisCheck zero{"drift B(x, t, 0) = 0", samples, 0, 0.0};
  HypothesisCheck a_zero{"A(x, t, 0) = 0", samples, 0, 0.0};

  auto note = [](HypothesisCheck& c, double slack) {
    c.worst = std::min(c.worst, slack);
    if (slack < 0.0) ++c.violations;
  };
  auto norm = [n](const Vec3& v) {
    double s = 0.0;
    for (int a = 0; a < n; ++a) s += v[a] * v[a];
    return std::sqrt(s);
  };

  for (int s = 0; s < samples; ++s) {
    Point x{};
    for (int a = 0; a < n; ++a) x[a] = rng.uniform(0.0, d.length(a));
    const double t = rng.uniform(0.0, data.horizon);
    Vec3 eta{}, eta_star{};
    for (int a = 0; a < n; ++a) {
      eta[a] = rng.uniform(-5.0, 5.0);
      eta_star[a] = rng.uniform(-5.0, 5.0);
    }
    const double z = rng.uniform(-5.0, 5.0);
    const double z_star = rng.uniform(-5.0, 5.0);

    const Vec3 ae = A.evaluate(x, t, eta, n);
    const Vec3 as = A.evaluate(x, t, eta_star, n);
    const double scale = 1.0 + A.beta * norm(eta);
    note(growth, A.beta * norm(eta) + A.offset(x, t) - norm(ae) + 1e-12 * scale);

    double pair = 0.0;
    double diff2 = 0.0;
    for (int a = 0; a < n; ++a) {
      pair += (ae[a] - as[a]) * (eta[a] - eta_star[a]);
      diff2 += (eta[a] - eta_star[a]) * (eta[a] - eta_star[a]);
    }
    note(mono, pair - A.alpha * diff2 + 1e-12 * (1.0 + A.beta * diff2));
    note(a_zero, -norm(A.evaluate(x, t, Vec3{0.0, 0.0, 0.0}, n)));

    if (data.drift.active()) {
      const double b = data.drift.coefficient(x, t);
      const Vec3 bz = data.drift.evaluate(x, t, z);
      const Vec3 bs = data.drift.evaluate(x, t, z_star);
      Vec3 db{bz[0] - bs[0], bz[1] - bs[1], bz[2] - bs[2]};
      const double bound = b * std::abs(z - z_star);
      note(lip, bound - norm(db) + 1e-12 * (1.0 + bound));
      note(zero, -norm(data.drift.evaluate(x, t, 0.0)));
    }
  }
  return {data.name, {growth, mono, lip, zero, a_zero}};
}

void to_json(nlohmann::json& j, const TruncationCertificate& c) {
  auto num = [](double v) { return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v); };
  j = nlohmann::json{{"level", c.level},
                     {"measured_remainder", c.measured},
                     {"truncated_norm", c.truncated_norm},
                     {"evolution_threshold", num(c.evolution_threshold)},
                     {"longtime_threshold", num(c.longtime_threshold)},
                     {"embedding_defined", c.embedding_defined},
                     {"evolution_pass", c.evolution_pass},
                     {"longtime_pass", c.longtime_pass}};
}

void to_json(nlohmann::json& j, const HypothesisReport& r) {
  j = nlohmann::json::object();
  j["model"] = r.model;
  j["pass"] = r.pass();
  auto arr = nlohmann::json::array();
  for (const auto& c : r.checks) {
    arr.push_back({{"name", c.name}, {"samples", c.samples}, {"violations", c.violations}, {"worst_slack", c.worst}});
  }
  j["checks"] = arr;
}

}  // namespace ldrift
