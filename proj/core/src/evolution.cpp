#include "ldrift/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>

#include <nlohmann/json.hpp>

namespace ldrift {

Splitting parse_splitting(const std::string& name) {
  if (name == "fully-implicit") return Splitting::fully_implicit;
  if (name == "paper-splitting") return Splitting::paper_splitting;
  throw std::invalid_argument("unknown splitting '" + name + "'");
}

std::string to_string(Splitting s) { return s == Splitting::fully_implicit ? "fully-implicit" : "paper-splitting"; }

int EvolutionConfig::steps() const {
  const double n = horizon / dt;
  const double r = std::round(n);
  if (std::abs(n - r) > 1e-9 * std::max(1.0, n)) throw std::invalid_argument("dt must divide the horizon");
  return static_cast<int>(r);
}

void EvolutionConfig::validate() const {
  if (!(dt > 0.0) || !(dt < 1.0)) throw std::invalid_argument("dt must lie in (0, 1)");
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  if (steps() < 1) throw std::invalid_argument("horizon must cover at least one step");
  if (!(energy_tol >= 0.0)) throw std::invalid_argument("energy_tol must be >= 0");
  resolvent.validate();
}

CsvTable EvolutionTrace::table() const {
  CsvTable t;
  t.header = {"step",  "t",          "l2_norm", "h1_seminorm", "cumulative_dissipation",
              "M_level", "resolvent_iters", "energy_violation"};
  for (const auto& r : rows) {
    t.rows.push_back({static_cast<double>(r.step), r.t, r.l2_norm, r.h1_seminorm, r.cumulative_dissipation, r.level,
                      static_cast<double>(r.resolvent_iters), r.energy_violation});
  }
  return t;
}

namespace {

VectorField drift_part(const ProblemData& data, double level, double t, const GridFunction& u) {
  if (!data.drift.active()) return VectorField(data.domain);
  return TruncatedOperator::truncated(data, level, t).complementary_drift(u);
}

double level_or_default(const EvolutionConfig& cfg, std::optional<double> level) {
  if (level) return *level;
  if (!cfg.truncation.levels.empty()) return cfg.truncation.final_level();
  return std::numeric_limits<double>::infinity();
}

double max_truncated_drift(const ProblemData& data, double level) {
  double m = 0.0;
  for (double t : coefficient_sample_times(data)) m = std::max(m, drift_coefficient(data, t).max_abs());
  return std::min(m, level);
}

double max_drift(const ProblemData& data) {
  return max_truncated_drift(data, std::numeric_limits<double>::infinity());
}

}  // namespace

StepResult step(const GridFunction& u_prev, double t, const EvolutionConfig& cfg, const ProblemData& data,
                double level, const ShiftedLaplacian* preconditioner) {
  const double tau = cfg.dt;
  const double tj = t + tau;
  const auto F = source_field(data, tj);

  ResolventConfig rc = cfg.resolvent;
  rc.lambda = tau;

  const bool implicit = cfg.splitting == Splitting::fully_implicit;
  const auto op = implicit ? TruncatedOperator::full(data, tj) : TruncatedOperator::truncated(data, level, tj);
  VectorField q = F;
  VectorField explicit_drift(data.domain);
  if (!implicit) {
    explicit_drift = op.complementary_drift(u_prev);
    q -= explicit_drift;
  }
  auto g = divergence(q);
  g *= -tau;
  g += u_prev;

  auto res = resolve(op, g, rc, &u_prev, preconditioner);
  const auto& u = res.solution;

  // 1/2 ||u_j||^2 + tau alpha/2 ||grad u_j||^2 <= 1/2 ||u_{j-1}||^2 + tau <F - theta B(u*), grad u_j>
  const auto grad = gradient(u);
  const double l2 = l2_norm(u);
  const double lp = l2_norm(u_prev);
  const double lhs = 0.5 * l2 * l2 + 0.5 * tau * data.diffusion.alpha * inner_vec(grad, grad);
  VectorField rhs_flux = F;
  rhs_flux -= implicit ? drift_part(data, level, tj, u) : explicit_drift;
  const double rhs = 0.5 * lp * lp + tau * inner_vec(rhs_flux, grad);
  return {std::move(res.solution), std::move(res.diagnostics), std::max(0.0, lhs - rhs)};
}

EvolutionResult evolve(const ProblemData& data, const EvolutionConfig& cfg, const EvolveOptions& opts) {
  cfg.validate();
  const int n = cfg.steps();
  const double level = level_or_default(cfg, opts.level);
  GridFunction u = opts.initial ? *opts.initial : data.initial;
  if (!(u.domain() == data.domain)) throw DomainMismatch("initial state does not match the problem domain");

  EvolutionResult out{u, {}, {}};
  auto& trace = out.trace;
  for (std::size_t k = 0; k < cfg.truncation.levels.size(); ++k) {
    if (cfg.truncation.levels[k] == level && !cfg.truncation.certified(k)) {
      trace.warnings.push_back("truncation level " + format_number(level) +
                               " is not certified against the evolution bound");
    }
  }

  std::unique_ptr<ShiftedLaplacian> pre;
  if (cfg.resolvent.method == SolverMethod::picard) pre = std::make_unique<ShiftedLaplacian>(data.domain, 1.0, cfg.dt);

  const double u0 = l2_norm(u);
  double dissipation = 0.0;
  double sup_l2 = u0 * u0;
  double source_sum = 0.0;
  trace.rows.push_back({0, 0.0, u0, h1_seminorm(u), 0.0, level, 0, 0.0});
  if (opts.keep_states) out.states.push_back(u);

  for (int j = 1; j <= n; ++j) {
    const double t = (j - 1) * cfg.dt;
    StepResult s{GridFunction(data.domain), {}, 0.0};
    try {
      s = step(u, t, cfg, data, level, pre.get());
    } catch (const SolverError& e) {
      throw EvolutionError("step " + std::to_string(j) + ": " + e.what(), j, trace, e.diagnostics());
    }
    u = std::move(s.solution);
    const double tj = j * cfg.dt;
    const double l2 = l2_norm(u);
    const double h1 = h1_seminorm(u);
    dissipation += cfg.dt * h1 * h1;
    sup_l2 = std::max(sup_l2, l2 * l2);
    if (data.source) {
      const auto F = source_field(data, tj);
      source_sum += cfg.dt * inner_vec(F, F);
    }
    if (s.energy_violation > cfg.energy_tol) ++trace.energy_violations;
    trace.max_energy_violation = std::max(trace.max_energy_violation, s.energy_violation);
    trace.rows.push_back({j, tj, l2, h1, dissipation, level, s.diagnostics.iterations, s.energy_violation});
    if (opts.keep_states) out.states.push_back(u);
  }
  trace.trace_bound_constant = (sup_l2 + dissipation) / (u0 * u0 + cfg.horizon + source_sum);
  out.final_state = std::move(u);
  return out;
}

ContinuationReport continuation(const ProblemData& data, const EvolutionConfig& cfg) {
  const auto& plan = cfg.truncation;
  if (plan.levels.size() < 2) throw std::invalid_argument("continuation needs at least two truncation levels");
  ContinuationReport r;
  r.levels = plan.levels;
  const double bmax = max_drift(data);
  r.saturation_index = plan.levels.size();
  for (std::size_t k = 0; k < plan.levels.size(); ++k) {
    r.certified.push_back(plan.certified(k));
    if (!plan.certified(k)) {
      r.warnings.push_back("level " + format_number(plan.levels[k]) + " fails the evolution certificate");
    }
    if (r.saturation_index == plan.levels.size() && plan.levels[k] >= bmax) r.saturation_index = k;
    EvolveOptions opts;
    opts.level = plan.levels[k];
    r.runs.push_back(evolve(data, cfg, opts));
    if (k > 0) r.differences.push_back(l2_norm(r.runs[k].final_state - r.runs[k - 1].final_state));
  }
  // differences[k] compares levels k and k + 1.
  for (std::size_t k = 1; k < r.differences.size(); ++k) {
    if (r.differences[k] > r.differences[k - 1]) {
      r.nonincreasing = false;
      if (k >= r.saturation_index) r.nonincreasing_after_saturation = false;
    }
  }
  return r;
}

UniquenessReport uniqueness_harness(const ProblemData& data, const EvolutionConfig& cfg, const GridFunction& u0,
                                    const GridFunction& v0, std::optional<double> level) {
  const double m = level_or_default(cfg, level);
  EvolveOptions ou;
  ou.level = m;
  ou.initial = u0;
  ou.keep_states = true;
  EvolveOptions ov = ou;
  ov.initial = v0;
  const auto ru = evolve(data, cfg, ou);
  const auto rv = evolve(data, cfg, ov);

  UniquenessReport rep;
  if (data.drift.active()) {
    const double bt = max_truncated_drift(data, m);
    // The accretive share of alpha: all of it once the remainder vanishes.
    const bool saturated = m >= max_drift(data);
    const double a = saturated ? data.diffusion.alpha : 0.5 * data.diffusion.alpha;
    const double kappa = bt * bt / (4.0 * a);
    if (cfg.splitting == Splitting::fully_implicit) {
      rep.growth_constant =
          cfg.dt * kappa < 1.0 ? -std::log1p(-cfg.dt * kappa) / cfg.dt : std::numeric_limits<double>::infinity();
    } else {
      rep.growth_constant = kappa;
    }
  }
  const double d0 = l2_norm(u0 - v0);
  rep.observed_exponent = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < ru.states.size(); ++j) {
    const double t = ru.trace.rows[j].t;
    const double dj = l2_norm(ru.states[j] - rv.states[j]);
    rep.times.push_back(t);
    rep.differences.push_back(dj);
    if (dj > std::exp(rep.growth_constant * t) * d0 * (1.0 + 1e-8)) rep.bound_holds = false;
    if (j > 0 && dj > rep.differences[j - 1]) rep.monotone = false;
    if (j > 0 && d0 > 0.0 && dj > 0.0) rep.observed_exponent = std::max(rep.observed_exponent, std::log(dj / d0) / t);
  }
  if (!std::isfinite(rep.observed_exponent)) rep.observed_exponent = 0.0;
  return rep;
}

std::vector<TestFunction> standard_test_functions(const BoxDomain& d, double horizon) {
  const double pi = std::numbers::pi;
  const int n = d.dim();
  std::vector<double> len(n);
  for (int a = 0; a < n; ++a) len[a] = d.length(a);
  auto mode = [len, n, pi](double k) {
    return [len, n, pi, k](const Point& x) {
      double s = 1.0;
      for (int a = 0; a < n; ++a) s *= std::sin(k * pi * x[a] / len[a]);
      return s;
    };
  };
  auto bump = [len, n](const Point& x) {
    double s = 1.0;
    for (int a = 0; a < n; ++a) {
      const double r = 4.0 * x[a] * (len[a] - x[a]) / (len[a] * len[a]);
      s *= r * r;
    }
    return s;
  };
  const double T = horizon;
  auto chi1 = [T](double t) { return (1.0 - t / T) * (1.0 - t / T); };
  auto dchi1 = [T](double t) { return -2.0 * (1.0 - t / T) / T; };
  auto chi2 = [T](double t) { return (t / T) * (1.0 - t / T) * (1.0 - t / T); };
  auto dchi2 = [T](double t) { return (1.0 - t / T) * (1.0 - t / T) / T - 2.0 * (t / T) * (1.0 - t / T) / T; };

  std::vector<TestFunction> out;
  const std::pair<std::string, std::function<double(const Point&)>> spaces[] = {
      {"eigenfunction", mode(1.0)}, {"mode2", mode(2.0)}, {"bump", bump}};
  for (const auto& [name, psi] : spaces) {
    out.push_back({name + "*decay", psi, chi1, dchi1});
    out.push_back({name + "*hump", psi, chi2, dchi2});
  }
  return out;
}

WeakResidualReport weak_residual(std::span<const GridFunction> states, std::span<const double> times,
                                 const ProblemData& data, std::span<const TestFunction> tests) {
  if (states.size() != times.size() || states.empty()) {
    throw std::invalid_argument("weak_residual: states and times must be nonempty and of equal length");
  }
  const auto& d = data.domain;
  // Per-step fluxes do not depend on the test function.
  std::vector<VectorField> flux;
  flux.reserve(states.size());
  for (std::size_t j = 1; j < states.size(); ++j) {
    auto q = TruncatedOperator::full(data, times[j]).flux(states[j]);
    q -= source_field(data, times[j]);
    flux.push_back(std::move(q));
  }
  WeakResidualReport rep;
  for (const auto& tf : tests) {
    const auto psi = GridFunction::sample(d, tf.space);
    const auto gpsi = gradient(psi);
    double r = -tf.time(times[0]) * inner(states[0], psi);
    double scale = std::abs(r);
    for (std::size_t j = 1; j < states.size(); ++j) {
      const double tau = times[j] - times[j - 1];
      const double a = -tau * tf.time_derivative(times[j]) * inner(states[j], psi);
      const double b = tau * tf.time(times[j]) * inner_vec(flux[j - 1], gpsi);
      r += a + b;
      scale += std::abs(a) + std::abs(b);
    }
    rep.entries.push_back({tf.name, r, scale, 0.0});
    rep.max_abs = std::max(rep.max_abs, std::abs(r));
  }
  // Relative to the largest term magnitude of the battery, so test functions
  // nearly orthogonal to the solution do not report round-off as O(1).
  double ref = 0.0;
  for (const auto& e : rep.entries) ref = std::max(ref, e.scale);
  for (auto& e : rep.entries) {
    e.relative = ref > 0.0 ? std::abs(e.residual) / ref : 0.0;
    rep.max_relative = std::max(rep.max_relative, e.relative);
  }
  return rep;
}

void to_json(nlohmann::json& j, const ContinuationReport& r) {
  j = nlohmann::json::object();
  j["levels"] = r.levels;
  j["certified"] = r.certified;
  j["differences"] = r.differences;
  j["saturation_index"] = r.saturation_index;
  j["nonincreasing"] = r.nonincreasing;
  j["nonincreasing_after_saturation"] = r.nonincreasing_after_saturation;
  j["warnings"] = r.warnings;
  auto finals = nlohmann::json::array();
  for (const auto& run : r.runs) finals.push_back(run.trace.rows.back().l2_norm);
  j["final_l2_norms"] = finals;
}

void to_json(nlohmann::json& j, const UniquenessReport& r) {
  j = nlohmann::json{{"growth_constant", r.growth_constant},
                     {"observed_exponent", r.observed_exponent},
                     {"bound_holds", r.bound_holds},
                     {"monotone", r.monotone},
                     {"times", r.times},
                     {"differences", r.differences}};
}

void to_json(nlohmann::json& j, const WeakResidualReport& r) {
  j = nlohmann::json::object();
  j["max_abs"] = r.max_abs;
  j["max_relative"] = r.max_relative;
  auto arr = nlohmann::json::array();
  for (const auto& e : r.entries) {
    arr.push_back({{"name", e.name}, {"residual", e.residual}, {"scale", e.scale}, {"relative", e.relative}});
  }
  j["entries"] = arr;
}

}  // namespace ldrift
