#include "ldrift/steady_longtime.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>

#include <nlohmann/json.hpp>

#include "ldrift/lorentz.hpp"

namespace ldrift {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

nlohmann::json nullable(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace

ProblemData time_averaged(const ProblemData& data, int samples) {
  if (samples < 1) throw std::invalid_argument("time average needs at least one sample");
  if (!data.time_dependent) return data;
  auto src = std::make_shared<const ProblemData>(data);
  std::vector<double> ts;
  for (int k = 0; k < samples; ++k) ts.push_back((k + 0.5) * data.horizon / samples);
  const double w = 1.0 / samples;

  ProblemData out = data;
  out.time_dependent = false;
  out.exact = nullptr;
  out.diffusion.component = [src, ts, w](const Point& x, double, int a, double eta) {
    double s = 0.0;
    for (double t : ts) s += src->diffusion.component(x, t, a, eta);
    return w * s;
  };
  out.diffusion.slope = [src, ts, w](const Point& x, double, int a, double eta) {
    double s = 0.0;
    for (double t : ts) s += src->diffusion.slope(x, t, a, eta);
    return w * s;
  };
  if (data.diffusion.growth_offset) {
    out.diffusion.growth_offset = [src, ts, w](const Point& x, double) {
      double s = 0.0;
      for (double t : ts) s += src->diffusion.growth_offset(x, t);
      return w * s;
    };
  }
  if (data.drift.active()) {
    out.drift.coefficient = [src, ts, w](const Point& x, double) {
      double s = 0.0;
      for (double t : ts) s += src->drift.coefficient(x, t);
      return w * s;
    };
    auto mean_vec = [src, ts, w](auto member) {
      return [src, ts, w, member](const Point& x, double, double z) {
        Vec3 s{0.0, 0.0, 0.0};
        for (double t : ts) {
          const Vec3 v = ((src->drift).*member)(x, t, z);
          for (int a = 0; a < 3; ++a) s[a] += w * v[a];
        }
        return s;
      };
    };
    out.drift.evaluate = mean_vec(&DriftFlux::evaluate);
    out.drift.slope = mean_vec(&DriftFlux::slope);
  }
  if (data.source) {
    out.source = [src, ts, w](const Point& x, double, int a) {
      double s = 0.0;
      for (double t : ts) s += src->source(x, t, a);
      return w * s;
    };
  }
  return out;
}

SteadyResult solve_steady(const ProblemData& input, const SteadyConfig& cfg) {
  if (!(cfg.tol > 0.0)) throw std::invalid_argument("steady tol must be positive");
  std::optional<ProblemData> averaged;
  if (cfg.time_average) averaged = time_averaged(input, cfg.average_samples);
  const ProblemData& data = averaged ? *averaged : input;
  const double t = cfg.time.value_or(data.horizon);
  const auto op = TruncatedOperator::full(data, t);
  auto rhs = divergence(source_field(data, t));
  rhs *= -1.0;

  // The Laplacian factorisation serves as Picard preconditioner and as the
  // Riesz map for the dual norm.
  const ShiftedLaplacian lap(data.domain, 0.0, 1.0);
  auto dual = [&](const GridFunction& r) { return std::sqrt(std::max(0.0, inner(r, lap.solve(r)))); };

  ResolventConfig rc;
  rc.lambda = 1.0;
  rc.tol = cfg.tol;
  rc.max_iter = cfg.max_iter;
  rc.method = cfg.method;
  rc.relaxation = cfg.relaxation;
  const GridFunction* guess = cfg.initial_guess ? &*cfg.initial_guess : nullptr;
  if (guess && !(guess->domain() == data.domain)) throw DomainMismatch("steady initial guess does not match the domain");

  auto res = solve_monotone(op, 0.0, 1.0, rhs, rc, dual, cfg.tol, guess, &lap);
  SteadyResult out{std::move(res.solution), std::move(res.diagnostics), 0.0};
  out.residual = out.diagnostics.residual_history.back();
  return out;
}

SteadyUniquenessReport steady_uniqueness(const ProblemData& data, const SteadyConfig& cfg, int guesses,
                                         std::uint64_t seed) {
  if (guesses < 2) throw std::invalid_argument("steady uniqueness needs at least two guesses");
  SteadyUniquenessReport rep;
  std::vector<GridFunction> sols;
  for (int k = 0; k < guesses; ++k) {
    SteadyConfig c = cfg;
    if (k == 0) {
      c.initial_guess = GridFunction(data.domain);
    } else {
      c.initial_guess = initial_state(data.domain, "random", 1.0, seed + static_cast<std::uint64_t>(k));
    }
    auto r = solve_steady(data, c);
    rep.residuals.push_back(r.residual);
    sols.push_back(std::move(r.solution));
  }
  for (std::size_t i = 0; i < sols.size(); ++i) {
    for (std::size_t k = i + 1; k < sols.size(); ++k) {
      rep.max_pairwise_difference = std::max(rep.max_pairwise_difference, l2_norm(sols[i] - sols[k]));
    }
  }
  return rep;
}

SmallDataCheck small_data_check(const ProblemData& data, double level) {
  SmallDataCheck c;
  const int n = data.domain.dim();
  c.level = level;
  c.embedding_defined = n >= 3;
  const double alpha = data.diffusion.alpha;
  if (!data.drift.active()) {
    c.remainder_threshold = c.embedding_defined ? alpha / (4.0 * sobolev_constant(n, 2.0)) : NAN;
    c.literal_pass = true;
    c.pass = true;
    return c;
  }
  const auto cert = certify_truncation(data, level);
  c.remainder = cert.measured;
  c.truncated_norm = cert.truncated_norm;
  if (!c.embedding_defined) {
    c.remainder_threshold = NAN;
    c.product = NAN;
    c.literal_product = NAN;
    return c;
  }
  const double s = sobolev_constant(n, 2.0);
  c.remainder_threshold = cert.longtime_threshold;
  c.product = c.truncated_norm * s;
  c.literal_product = level * s;
  c.literal_pass = c.literal_product < alpha / 4.0;
  c.pass = cert.longtime_pass && c.product < alpha / 4.0;
  return c;
}

std::optional<double> log_linear_slope(const std::vector<double>& t, const std::vector<double>& values,
                                       double t_start, double floor) {
  if (t.size() != values.size()) throw std::invalid_argument("log_linear_slope: size mismatch");
  double st = 0, sy = 0, stt = 0, sty = 0;
  int n = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_start || !(values[i] > floor)) continue;
    const double y = std::log(values[i]);
    st += t[i];
    sy += y;
    stt += t[i] * t[i];
    sty += t[i] * y;
    ++n;
  }
  if (n < 2) return std::nullopt;
  const double den = n * stt - st * st;
  if (!(den > 0.0)) return std::nullopt;
  return (n * sty - st * sy) / den;
}

CsvTable DecayReport::series() const {
  CsvTable t;
  t.header = {"step", "t", "y"};
  for (std::size_t j = 0; j < y.size(); ++j) t.rows.push_back({static_cast<double>(j), times[j], y[j]});
  return t;
}

DecayReport decay_experiment(const ProblemData& data, const EvolutionConfig& evo, const SteadyConfig& steady) {
  evo.validate();
  DecayReport r;
  const double alpha = data.diffusion.alpha;
  const auto& d = data.domain;

  r.poincare_constant = poincare(d, 1e-12).constant;
  double diam2 = 0.0;
  for (int a = 0; a < d.dim(); ++a) diam2 += d.length(a) * d.length(a);
  r.poincare_bound = diam2 / (std::numbers::pi * std::numbers::pi);
  r.theoretical_omega = alpha / (4.0 * r.poincare_constant);
  r.intro_omega = alpha / (2.0 * r.poincare_constant);
  r.bound_omega = alpha / (4.0 * r.poincare_bound);

  const double level =
      evo.truncation.levels.empty() ? std::numeric_limits<double>::infinity() : evo.truncation.final_level();
  r.small_data = small_data_check(data, level);
  r.small_data_pass = r.small_data.pass;

  const auto steady_state = solve_steady(data, steady);
  r.steady_residual = steady_state.residual;
  const auto& u_inf = steady_state.solution;

  EvolveOptions opts;
  opts.keep_states = true;
  auto run = evolve(data, evo, opts);
  r.trace = std::move(run.trace);
  for (std::size_t j = 0; j < run.states.size(); ++j) {
    const double e = l2_norm(run.states[j] - u_inf);
    r.times.push_back(r.trace.rows[j].t);
    r.y.push_back(e * e);
  }

  const double T = evo.horizon;
  r.window = {0.5 * T, T};
  const double y0 = r.y.front();
  const double floor = 1e2 * kEps * y0;
  const auto slope = y0 > 0.0 ? log_linear_slope(r.times, r.y, r.window[0], floor) : std::nullopt;
  r.saturated = !slope.has_value();
  // y is the squared norm; the rate of ||u - u_inf|| is half its log slope.
  r.fitted_rate = slope ? -0.5 * *slope : std::numeric_limits<double>::infinity();
  r.margin = r.fitted_rate - r.theoretical_omega;
  r.rate_pass = r.saturated || r.fitted_rate >= (1.0 - r.fit_tolerance) * r.theoretical_omega;

  for (std::size_t j = 1; j < r.y.size(); ++j) {
    if (r.y[j] > r.y[j - 1] + 1e-12 * y0) ++r.lyapunov_violations;
  }
  r.lyapunov_monotone = r.lyapunov_violations == 0;

  // With the full drift implicit and a fixed limit, every step contracts the
  // distance to u_inf by at least 1 + dt alpha / (2 C_P).
  r.contraction_checked =
      evo.splitting == Splitting::fully_implicit && (!data.time_dependent || u_inf.max_abs() == 0.0);
  if (r.contraction_checked) {
    const double c = alpha / (2.0 * r.poincare_constant);
    for (std::size_t j = 1; j < r.y.size(); ++j) {
      if (r.y[j] > r.y[j - 1] / (1.0 + evo.dt * c) + 1e-12 * y0) ++r.contraction_violations;
    }
  }

  r.pass = !r.small_data_pass || (r.rate_pass && r.lyapunov_monotone && r.contraction_violations == 0);
  return r;
}

void to_json(nlohmann::json& j, const SmallDataCheck& c) {
  j = nlohmann::json{{"embedding_defined", c.embedding_defined},
                     {"level", nullable(c.level)},
                     {"remainder", c.remainder},
                     {"remainder_threshold", nullable(c.remainder_threshold)},
                     {"truncated_norm", c.truncated_norm},
                     {"product", nullable(c.product)},
                     {"literal_product", nullable(c.literal_product)},
                     {"literal_pass", c.literal_pass},
                     {"pass", c.pass}};
}

void to_json(nlohmann::json& j, const DecayReport& r) {
  j = nlohmann::json{{"theoretical_omega", r.theoretical_omega},
                     {"fitted_rate", nullable(r.fitted_rate)},
                     {"margin", nullable(r.margin)},
                     {"small_data_pass", r.small_data_pass},
                     {"window", r.window},
                     {"y_series_path", r.y_series_path},
                     {"intro_omega", r.intro_omega},
                     {"bound_omega", r.bound_omega},
                     {"poincare_constant", r.poincare_constant},
                     {"poincare_bound", r.poincare_bound},
                     {"fit_tolerance", r.fit_tolerance},
                     {"saturated", r.saturated},
                     {"small_data", r.small_data},
                     {"lyapunov_monotone", r.lyapunov_monotone},
                     {"lyapunov_violations", r.lyapunov_violations},
                     {"contraction_checked", r.contraction_checked},
                     {"contraction_violations", r.contraction_violations},
                     {"rate_pass", r.rate_pass},
                     {"asserted", r.small_data_pass},
                     {"pass", r.pass},
                     {"steady_residual", r.steady_residual},
                     {"energy_violations", r.trace.energy_violations}};
}

void to_json(nlohmann::json& j, const SteadyUniquenessReport& r) {
  j = nlohmann::json{{"residuals", r.residuals}, {"max_pairwise_difference", r.max_pairwise_difference}};
}

}  // namespace ldrift
