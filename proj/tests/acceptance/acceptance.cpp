// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Tolerances are pinned here and echoed on every line.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "generators.hpp"
#include "ldrift/experiment.hpp"
#include "ldrift/lorentz.hpp"

using namespace ldrift;
using ldrift::testing::random_function;
using ldrift::testing::random_simple;
using ldrift::testing::random_smooth;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

/// Rough, smooth and nearby pairs in turn, so the low modes where the
/// inequalities are nearly tight get sampled too.
std::pair<GridFunction, GridFunction> random_pair(const BoxDomain& d, Rng& rng, int k) {
  switch (k % 3) {
    case 0:
      return {random_function(d, rng), random_function(d, rng)};
    case 1:
      return {random_smooth(d, rng), random_smooth(d, rng)};
    default: {
      auto u = random_smooth(d, rng);
      auto v = u;
      v.axpy(1e-3, random_smooth(d, rng));
      return {u, v};
    }
  }
}

std::vector<ProblemData> catalog(const BoxDomain& d) {
  std::vector<ProblemData> out;
  ModelParams p;
  p.source = "eigen-gradient";
  for (const auto& m : builtin_models()) out.push_back(m.build(d, p));
  return out;
}

/// Certified levels of the default plan; every level of a drift-free model.
std::vector<double> certified_levels(const ProblemData& data) {
  const auto plan = default_truncation_plan(data);
  std::vector<double> out;
  for (std::size_t k = 0; k < plan.levels.size(); ++k) {
    if (plan.certified(k)) out.push_back(plan.levels[k]);
  }
  return out;
}

ResolventConfig solver_for(const TruncatedOperator& op, double lambda, double tol) {
  ResolventConfig rc;
  rc.lambda = lambda;
  rc.tol = tol;
  rc.max_iter = 20000;
  rc.method = op.has_drift() ? SolverMethod::newton : SolverMethod::picard;
  return rc;
}

EvolutionConfig evo_for(const ProblemData& data, double dt, double T,
                        Splitting s = Splitting::fully_implicit) {
  EvolutionConfig cfg;
  cfg.dt = dt;
  cfg.horizon = T;
  cfg.splitting = s;
  cfg.truncation = default_truncation_plan(data);
  if (data.drift.active()) cfg.resolvent.method = SolverMethod::newton;
  return cfg;
}

std::vector<std::filesystem::path> presets() {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(LDRIFT_PRESET_DIR)) {
    if (e.path().extension() == ".cfg") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

// 1. ||J g1 - J g2|| <= ||g1 - g2|| + 2e-10 on 32^2.
Outcome resolvent_nonexpansive() {
  const auto d = BoxDomain::cube(2, 1.0, 32);
  Rng rng(101);
  double worst = -INFINITY;
  double tightest = 0.0;
  int checks = 0;
  for (const auto& data : catalog(d)) {
    for (double level : certified_levels(data)) {
      const auto op = TruncatedOperator::truncated(data, level, 0.5 * data.horizon);
      for (double lambda : {1e-3, 1e-2, 0.1, 1.0}) {
        const auto pre = ShiftedLaplacian(d, 1.0, lambda);
        for (int k = 0; k < 100 / 4; ++k) {
          const auto [g1, g2] = random_pair(d, rng, k);
          // Each solve is within tol (1 + ||g||) <= 1e-10 of the exact resolvent.
          const auto rc = solver_for(op, lambda, 4e-11);
          const auto u1 = resolve(op, g1, rc, nullptr, &pre).solution;
          const auto u2 = resolve(op, g2, rc, nullptr, &pre).solution;
          worst = std::max(worst, l2_norm(u1 - u2) - l2_norm(g1 - g2));
          tightest = std::max(tightest, l2_norm(u1 - u2) / l2_norm(g1 - g2));
          ++checks;
        }
      }
    }
  }
  return {worst <= 2e-10, "max(||Jg1-Jg2|| - ||g1-g2||) = " + num(worst) + " <= 2e-10 over " +
                              std::to_string(checks) + " pairs (largest ratio " + num(tightest) + ")"};
}

// 2. <A~u - A~v, u - v> >= (alpha/2) ||grad(u - v)||^2 - 1e-10.
Outcome accretivity_margin_check() {
  const auto d = BoxDomain::cube(2, 1.0, 32);
  const auto d3 = BoxDomain::cube(3, 1.0, 12);
  Rng rng(202);
  double worst = INFINITY;
  double relative = INFINITY;
  int checks = 0;
  auto sweep = [&](const std::vector<ProblemData>& models, const BoxDomain& dom) {
    for (const auto& data : models) {
      for (double level : certified_levels(data)) {
        const auto op = TruncatedOperator::truncated(data, level, 0.5 * data.horizon);
        for (int k = 0; k < 100; ++k) {
          const auto [u, v] = random_pair(dom, rng, k);
          const double m = accretivity_margin(op, u, v);
          const auto g = gradient(u - v);
          worst = std::min(worst, m);
          relative = std::min(relative, m / inner_vec(g, g));
          ++checks;
        }
      }
    }
  };
  sweep(catalog(d), d);
  sweep({make_model("singular-drift", d3, ModelParams{})}, d3);
  return {worst >= -1e-10, "min margin = " + num(worst) + " >= -1e-10 over " + std::to_string(checks) +
                                 " pairs (min margin / ||grad w||^2 = " + num(relative) + ")"};
}

// 3. Heat eigen-decay: product formula to 1e-12, fitted rate within 5% of 2 pi^2.
Outcome eigen_decay() {
  const auto d = BoxDomain::cube(2, 1.0, 64);
  const auto data = make_model("heat", d, ModelParams{});
  const auto evo = evo_for(data, 1e-3, 0.3);
  const auto r = decay_experiment(data, evo, SteadyConfig{});
  const double lam = discrete_first_eigenvalue(d);
  const double expect = std::pow(1.0 + evo.dt * lam, -evo.steps()) * l2_norm(data.initial);
  const double rel = std::abs(r.trace.rows.back().l2_norm - expect) / expect;
  const double target = 2.0 * std::numbers::pi * std::numbers::pi;
  const double rate_err = std::abs(r.fitted_rate - target) / target;
  return {rel <= 1e-12 && rate_err <= 0.05, "product formula rel err = " + num(rel) + " <= 1e-12; fitted rate " +
                                                num(r.fitted_rate) + " vs 2pi^2 rel " + num(rate_err) + " <= 0.05"};
}

// 4. Manufactured solution: time order >= 0.9 at fixed fine h, space order >= 1.8 at small dt.
Outcome manufactured() {
  auto error = [](int n, double dt) {
    ModelParams p;
    p.horizon = 1.0;
    const auto data = make_model("manufactured", BoxDomain::cube(2, 1.0, n), p);
    EvolutionConfig cfg;
    cfg.dt = dt;
    cfg.horizon = 1.0;
    cfg.truncation = make_truncation_plan(data, {1.0});
    const auto r = evolve(data, cfg);
    const auto exact = GridFunction::sample(data.domain, [&](const Point& x) { return data.exact(x, 1.0); });
    return l2_norm(r.final_state - exact);
  };
  double space = INFINITY;
  double time = INFINITY;
  double prev = error(8, 1e-4);
  for (int n : {16, 32}) {
    const double e = error(n, 1e-4);
    space = std::min(space, std::log2(prev / e));
    prev = e;
  }
  prev = error(128, 0.1);
  for (double dt : {0.05, 0.025}) {
    const double e = error(128, dt);
    time = std::min(time, std::log2(prev / e));
    prev = e;
  }
  return {space >= 1.8 && time >= 0.9, "space order (h = 1/8..1/32, dt = 1e-4) = " + num(space) +
                                           " >= 1.8; time order (dt = 0.1..0.025, h = 1/128) = " + num(time) +
                                           " >= 0.9"};
}

// 5. Zero energy-inequality violations (1e-10 per step) on every shipped preset.
Outcome energy_presets() {
  int runs = 0;
  int violations = 0;
  double worst = 0.0;
  std::string names;
  for (const auto& path : presets()) {
    const auto cfg = Config::load(path);
    const auto seed = static_cast<std::uint64_t>(cfg.get_integer("seed"));
    std::vector<ProblemData> models;
    if (cfg.get_string("model.name") == "all") {
      for (const auto& m : builtin_models()) {
        Config one = cfg;
        one.apply_override("model.name=" + m.name, 0);
        models.push_back(build_problem(one, seed));
      }
    } else {
      models.push_back(build_problem(cfg, seed));
    }
    for (const auto& data : models) {
      const auto evo = build_evolution(cfg, data);
      const bool ladder = cfg.get_string("experiment") == "continuation";
      std::vector<double> levels{evo.truncation.final_level()};
      if (ladder) levels = evo.truncation.levels;
      for (double level : levels) {
        EvolveOptions o;
        o.level = level;
        const auto r = evolve(data, evo, o);
        violations += r.trace.energy_violations;
        worst = std::max(worst, r.trace.max_energy_violation);
        ++runs;
      }
    }
    names += (names.empty() ? "" : ",") + path.stem().string();
  }
  return {violations == 0 && runs > 0, std::to_string(violations) + " violating steps in " + std::to_string(runs) +
                                           " runs (max excess " + num(worst) + ", tol 1e-10) over " + names};
}

// 6. Continuation on the 2D singular-drift preset (32^2).
Outcome continuation_check() {
  const auto cfg = Config::load(std::filesystem::path(LDRIFT_PRESET_DIR) / "singular-drift.cfg");
  const auto data = build_problem(cfg, 4);
  const auto evo = build_evolution(cfg, data);
  const auto r = continuation(data, evo);
  const bool saturated = r.saturation_index + 1 < r.levels.size();
  std::string diffs;
  for (double v : r.differences) diffs += (diffs.empty() ? "" : " ") + num(v);
  return {r.nonincreasing && saturated && r.differences.back() <= 1e-9,
          "differences [" + diffs + "] nonincreasing = " + (r.nonincreasing ? "yes" : "no") +
              ", saturated difference <= 1e-9"};
}

// 7. Contraction without drift; Gronwall bound (1 + 1e-8) with certified drift.
Outcome uniqueness_check() {
  Rng rng(707);
  int runs = 0;
  bool ok = true;
  std::string bad;
  const auto d2 = BoxDomain::cube(2, 1.0, 16);
  for (const auto& data : catalog(d2)) {
    if (data.drift.active()) continue;
    for (int k = 0; k < 3; ++k) {
      const auto rep = uniqueness_harness(data, evo_for(data, 0.02, 0.3), random_function(d2, rng),
                                          random_function(d2, rng));
      ++runs;
      if (!rep.monotone || !rep.bound_holds) {
        ok = false;
        bad += " " + data.name;
      }
    }
  }
  const auto d3 = BoxDomain::cube(3, 1.0, 10);
  const auto sd = make_model("singular-drift", d3, ModelParams{});
  double max_ratio = -INFINITY;
  for (auto s : {Splitting::fully_implicit, Splitting::paper_splitting}) {
    const auto cfg = evo_for(sd, 0.02, 0.2, s);
    for (double level : certified_levels(sd)) {
      const auto rep = uniqueness_harness(sd, cfg, random_function(d3, rng), random_function(d3, rng), level);
      ++runs;
      max_ratio = std::max(max_ratio, rep.observed_exponent - rep.growth_constant);
      if (!rep.bound_holds) {
        ok = false;
        bad += " singular-drift/" + to_string(s);
      }
    }
  }
  return {ok, std::to_string(runs) + " pairs; drift-free runs monotone; max(observed - C) = " + num(max_ratio) +
                  " under the bound (slack 1e-8)" + (bad.empty() ? "" : "; failing:" + bad)};
}

// 8. Decay on every certified preset: fitted rate >= 0.95 omega and y nonincreasing.
Outcome decay_presets() {
  bool ok = true;
  int certified = 0;
  std::string detail;
  for (const auto& path : presets()) {
    const auto cfg = Config::load(path);
    if (cfg.get_string("experiment") != "decay") continue;
    const auto data = build_problem(cfg, static_cast<std::uint64_t>(cfg.get_integer("seed")));
    const auto r = decay_experiment(data, build_evolution(cfg, data), build_steady(cfg, data));
    detail += " " + path.stem().string() + ":";
    if (!r.small_data_pass) {
      detail += "uncertified";
      continue;
    }
    ++certified;
    const bool good = r.rate_pass && r.lyapunov_monotone;
    ok = ok && good;
    detail += num(r.saturated ? INFINITY : r.fitted_rate) + "/" + num(r.theoretical_omega) +
              (r.lyapunov_monotone ? "" : "(y increased)");
  }
  return {ok && certified > 0, "fitted/omega," + detail + " (need >= 0.95)"};
}

// 9. Steady state: three guesses within 1e-8, residual <= 1e-10, eigen-source oracle order >= 1.8.
Outcome steady_check() {
  double spread = 0.0;
  double residual = 0.0;
  for (const auto& data : catalog(BoxDomain::cube(2, 1.0, 24))) {
    if (data.time_dependent && data.name == "manufactured") continue;
    SteadyConfig sc;
    sc.method = data.drift.active() ? SolverMethod::newton : SolverMethod::picard;
    const auto rep = steady_uniqueness(data, sc, 3, 909);
    spread = std::max(spread, rep.max_pairwise_difference);
    for (double r : rep.residuals) residual = std::max(residual, r);
  }
  auto err = [](int n) {
    const auto d = BoxDomain::cube(2, 1.0, n);
    ModelParams p;
    p.source = "eigen-gradient";
    const auto u = solve_steady(make_model("heat", d, p), SteadyConfig{}).solution;
    return l2_norm(u - initial_state(d, "eigenfunction", 1.0, 0));
  };
  const double e16 = err(16), e32 = err(32), e64 = err(64);
  const double order = std::min(std::log2(e16 / e32), std::log2(e32 / e64));
  return {spread <= 1e-8 && residual <= 1e-10 && order >= 1.8,
          "max spread = " + num(spread) + " <= 1e-8; max residual = " + num(residual) +
              " <= 1e-10; oracle order = " + num(order) + " >= 1.8"};
}

// 10. Lorentz suite.
Outcome lorentz_suite() {
  Rng rng(1010);
  const auto d = BoxDomain::cube(2, 1.0, 16);
  double lp_err = 0.0;
  for (int k = 0; k < 50; ++k) {
    const auto u = random_simple(d, rng);
    for (double p : {1.5, 2.0, 3.0, 4.0}) {
      double s = 0.0;
      for (double v : u.values()) s += std::pow(std::abs(v), p) * d.cell_volume();
      const double lp = std::pow(s, 1.0 / p);
      lp_err = std::max(lp_err, std::abs(lorentz_norm(u, LorentzExponents::lebesgue(p)) - lp) / lp);
    }
  }
  double ind_err = 0.0;
  for (int k = 1; k < 40; ++k) {
    GridFunction g(d);
    for (int i = 0; i < k; ++i) g[static_cast<std::size_t>(i * 7) % g.size()] = 1.0;
    const double measure = k * d.cell_volume();
    for (double p : {1.5, 2.0, 3.0}) {
      ind_err = std::max(ind_err, std::abs(lorentz_norm(g, LorentzExponents::weak(p)) - std::pow(measure, 1.0 / p)));
    }
  }
  const LorentzExponents pairs[][2] = {{{4.0, 2.0}, {4.0, 2.0}},
                                       {{3.0, 3.0}, {6.0, 6.0}},
                                       {LorentzExponents::weak(4.0), LorentzExponents::weak(4.0)},
                                       {{6.0, 1.0}, LorentzExponents::weak(3.0)}};
  double holder = INFINITY;
  for (int k = 0; k < 100; ++k) {
    const auto& e = pairs[k % 4];
    holder = std::min(holder, check_holder(random_function(d, rng), random_function(d, rng), e[0], e[1]).margin);
  }
  const auto d3 = BoxDomain::cube(3, 1.0, 16);
  double ratio = 0.0;
  for (int k = 0; k < 12; ++k) ratio = std::max(ratio, sobolev_lorentz_ratio(random_smooth(d3, rng)));
  const bool ok = lp_err <= 1e-12 && ind_err <= 1e-12 && holder >= -1e-12 && ratio <= 1.05;
  return {ok, "L^{p,p} vs L^p rel = " + num(lp_err) + "; indicator weak err = " + num(ind_err) +
                  "; min Holder margin = " + num(holder) + " >= -1e-12; Sobolev ratio on 16^3 = " + num(ratio) +
                  " <= 1.05"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"resolvent-nonexpansive", resolvent_nonexpansive},
      {"accretivity-margin", accretivity_margin_check},
      {"eigen-decay-oracle", eigen_decay},
      {"manufactured-convergence", manufactured},
      {"energy-inequality-presets", energy_presets},
      {"truncation-continuation", continuation_check},
      {"uniqueness-contraction", uniqueness_check},
      {"decay-rate", decay_presets},
      {"steady-uniqueness", steady_check},
      {"lorentz-suite", lorentz_suite},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failed;
    std::printf("%s %2zu %-26s %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str(), sec);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
