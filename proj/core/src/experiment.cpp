#include "ldrift/experiment.hpp"

#include <chrono>
#include <cmath>
#include <fstream>

#include "ldrift/lorentz.hpp"

#ifndef LDRIFT_VERSION
#define LDRIFT_VERSION "unknown"
#endif

namespace ldrift {

std::string version() { return LDRIFT_VERSION; }

namespace {

std::vector<double> broadcast(const Config& cfg, const std::string& key, int dim) {
  auto v = cfg.get_list(key);
  if (v.size() == 1) v.assign(dim, v.front());
  if (static_cast<int>(v.size()) != dim) throw cfg.invalid(key, "needs 1 or " + std::to_string(dim) + " values");
  return v;
}

SolverMethod method_for(const Config& cfg, const std::string& key, const ProblemData& data) {
  const auto m = cfg.get_string(key);
  if (m == "auto") return data.drift.active() ? SolverMethod::newton : SolverMethod::picard;
  return parse_solver_method(m);
}

/// Collects every file written into the output directory.
class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path dir) : dir_(std::move(dir)) { std::filesystem::create_directories(dir_); }

  const std::filesystem::path& path() const { return dir_; }
  const std::vector<std::string>& files() const { return files_; }

  void csv(const std::string& name, const CsvTable& t) {
    write_csv(dir_ / name, t);
    files_.push_back(name);
  }
  void json(const std::string& name, const nlohmann::json& j) {
    std::ofstream os(dir_ / name);
    if (!os) throw std::runtime_error("cannot write " + (dir_ / name).string());
    os << j.dump(2) << '\n';
    files_.push_back(name);
  }
  void grid(const std::string& name, const GridFunction& u) {
    write_gridfunction(dir_ / name, u);
    files_.push_back(name);
  }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> files_;
};

struct Context {
  const Config& cfg;
  std::uint64_t seed;
  OutputDir& out;
  std::vector<std::string>& failures;
  nlohmann::json& summary;
  bool write_grids;

  void check(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
};

nlohmann::json iteration_summary(const EvolutionTrace& trace, const EvolutionConfig& evo) {
  std::vector<int> iters;
  int total = 0;
  int worst = 0;
  for (std::size_t j = 1; j < trace.rows.size(); ++j) {
    iters.push_back(trace.rows[j].resolvent_iters);
    total += iters.back();
    worst = std::max(worst, iters.back());
  }
  return {{"method", to_string(evo.resolvent.method)},
          {"tol", evo.resolvent.tol},
          {"max_iter", evo.resolvent.max_iter},
          {"relaxation", evo.resolvent.relaxation},
          {"steps", iters.size()},
          {"total_iterations", total},
          {"max_iterations", worst},
          {"iterations_per_step", iters}};
}

nlohmann::json trace_summary(const EvolutionTrace& t) {
  return {{"energy_violations", t.energy_violations},
          {"max_energy_violation", t.max_energy_violation},
          {"trace_bound_constant", t.trace_bound_constant},
          {"final_l2_norm", t.rows.back().l2_norm},
          {"warnings", t.warnings}};
}

std::optional<double> run_level(const Config& cfg) {
  if (cfg.has("truncation.level")) return cfg.get_number("truncation.level");
  return std::nullopt;
}

void run_evolve(Context& c, const ProblemData& data) {
  const auto evo = build_evolution(c.cfg, data);
  EvolveOptions o;
  o.level = run_level(c.cfg);
  const auto r = evolve(data, evo, o);
  c.out.csv("trace.csv", r.trace.table());
  auto rep = trace_summary(r.trace);
  rep["level"] = r.trace.rows.back().level;
  rep["splitting"] = to_string(evo.splitting);
  rep["truncation"] = evo.truncation.certificates;
  if (data.exact) {
    const auto exact = GridFunction::sample(data.domain, [&](const Point& x) { return data.exact(x, evo.horizon); });
    rep["l2_error_at_T"] = l2_norm(r.final_state - exact);
  }
  c.out.json("evolve_report.json", rep);
  c.out.json("solver_diagnostics.json", iteration_summary(r.trace, evo));
  if (c.write_grids) c.out.grid("final_state.gf", r.final_state);
  c.check(r.trace.energy_violations == 0, "energy inequality violated in " +
                                              std::to_string(r.trace.energy_violations) + " steps");
  c.summary["energy_violations"] = r.trace.energy_violations;
}

void run_continuation(Context& c, const ProblemData& data) {
  const auto evo = build_evolution(c.cfg, data);
  const auto r = continuation(data, evo);
  nlohmann::json diag = nlohmann::json::array();
  int violations = 0;
  for (std::size_t k = 0; k < r.runs.size(); ++k) {
    c.out.csv("trace_level_" + std::to_string(k) + ".csv", r.runs[k].trace.table());
    diag.push_back(iteration_summary(r.runs[k].trace, evo));
    violations += r.runs[k].trace.energy_violations;
  }
  c.out.csv("trace.csv", r.runs.back().trace.table());
  auto rep = nlohmann::json(r);
  rep["truncation"] = evo.truncation.certificates;
  rep["energy_violations"] = violations;
  c.out.json("continuation_report.json", rep);
  c.out.json("solver_diagnostics.json", diag);
  if (c.write_grids) c.out.grid("final_state.gf", r.runs.back().final_state);

  c.check(violations == 0, "energy inequality violated in " + std::to_string(violations) + " steps");
  c.check(r.nonincreasing, "successive level differences increase");
  if (r.saturation_index + 1 < r.levels.size()) {
    c.check(r.differences.back() <= 1e-9, "saturated levels differ by " + format_number(r.differences.back()));
  } else {
    c.failures.push_back("the ladder never reaches two saturated levels");
  }
  c.summary["differences"] = r.differences;
}

void run_uniqueness(Context& c, const ProblemData& data) {
  const auto evo = build_evolution(c.cfg, data);
  const auto u0 = data.initial;
  auto v0 = u0;
  v0 += initial_state(data.domain, "random", c.cfg.get_number("uniqueness.perturbation"), c.seed + 1);
  const auto r = uniqueness_harness(data, evo, u0, v0, run_level(c.cfg));
  CsvTable t{{"step", "t", "difference", "bound"}, {}};
  for (std::size_t j = 0; j < r.times.size(); ++j) {
    t.rows.push_back({static_cast<double>(j), r.times[j], r.differences[j],
                      std::exp(r.growth_constant * r.times[j]) * r.differences.front()});
  }
  c.out.csv("uniqueness_series.csv", t);
  auto rep = nlohmann::json(r);
  rep["drift"] = data.drift.active();
  c.out.json("uniqueness_report.json", rep);
  c.check(r.bound_holds, "difference exceeds the Gronwall bound");
  if (!data.drift.active()) c.check(r.monotone, "difference grows without drift");
}

void run_steady(Context& c, const ProblemData& data) {
  const auto sc = build_steady(c.cfg, data);
  const auto guesses = c.cfg.get_integer("steady.guesses");
  if (guesses < 2) throw c.cfg.invalid("steady.guesses", "must be at least 2");
  const auto r = solve_steady(data, sc);
  const auto u = steady_uniqueness(data, sc, static_cast<int>(guesses), c.seed);
  nlohmann::json rep{{"residual", r.residual},
                     {"tol", sc.tol},
                     {"iterations", r.diagnostics.iterations},
                     {"uniqueness", u},
                     {"l2_norm", l2_norm(r.solution)},
                     {"slice", sc.time_average ? "average" : "final"}};
  c.out.json("steady_report.json", rep);
  c.out.json("solver_diagnostics.json", r.diagnostics);
  if (c.write_grids) c.out.grid("steady_solution.gf", r.solution);
  c.check(r.residual <= sc.tol, "steady residual above tolerance");
  c.check(u.max_pairwise_difference <= 1e-8,
          "steady solutions differ by " + format_number(u.max_pairwise_difference));
}

void run_decay(Context& c, const ProblemData& data) {
  const auto evo = build_evolution(c.cfg, data);
  const auto sc = build_steady(c.cfg, data);
  auto r = decay_experiment(data, evo, sc);
  r.y_series_path = "decay_series.csv";
  c.out.csv("trace.csv", r.trace.table());
  c.out.csv("decay_series.csv", r.series());
  c.out.json("decay_report.json", r);
  c.out.json("solver_diagnostics.json", iteration_summary(r.trace, evo));
  c.check(r.trace.energy_violations == 0, "energy inequality violated in " +
                                              std::to_string(r.trace.energy_violations) + " steps");
  if (r.small_data_pass) {
    c.check(r.rate_pass, "fitted rate " + format_number(r.fitted_rate) + " below (1 - 0.05) omega = " +
                             format_number((1.0 - r.fit_tolerance) * r.theoretical_omega));
    c.check(r.lyapunov_monotone, "y increased in " + std::to_string(r.lyapunov_violations) + " steps");
    c.check(r.contraction_violations == 0,
            "one-step contraction failed in " + std::to_string(r.contraction_violations) + " steps");
  }
  c.summary["fitted_rate"] = r.fitted_rate;
  c.summary["theoretical_omega"] = r.theoretical_omega;
}

void run_hypotheses(Context& c, const ProblemData& first) {
  const auto samples = c.cfg.get_integer("hypotheses.samples");
  if (samples < 1) throw c.cfg.invalid("hypotheses.samples", "must be positive");
  std::vector<ProblemData> models;
  if (c.cfg.get_string("model.name") == "all") {
    for (const auto& m : builtin_models()) {
      Config one = c.cfg;
      one.apply_override("model.name=" + m.name, 0);
      models.push_back(build_problem(one, c.seed));
    }
  } else {
    models.push_back(first);
  }
  auto reps = nlohmann::json::array();
  for (const auto& m : models) {
    const auto r = verify_hypotheses(m, static_cast<int>(samples), c.seed);
    reps.push_back(r);
    c.check(r.pass(), "hypotheses fail for " + m.name);
  }
  c.out.json("hypotheses_report.json", {{"samples", samples}, {"models", reps}});
}

void run_lorentz(Context& c, const ProblemData& data) {
  const LorentzExponents e1(c.cfg.get_number("lorentz.p1"), c.cfg.get_number("lorentz.q1"));
  const LorentzExponents e2(c.cfg.get_number("lorentz.p2"), c.cfg.get_number("lorentz.q2"));
  const auto pairs = c.cfg.get_integer("lorentz.pairs");
  if (pairs < 1) throw c.cfg.invalid("lorentz.pairs", "must be positive");

  std::optional<HolderReport> worst;
  int violations = 0;
  int guaranteed_violations = 0;
  double min_guaranteed = INFINITY;
  for (std::int64_t k = 0; k < pairs; ++k) {
    const auto u = initial_state(data.domain, "random", 1.0, c.seed + 2 * static_cast<std::uint64_t>(k));
    const auto v = initial_state(data.domain, "random", 1.0, c.seed + 2 * static_cast<std::uint64_t>(k) + 1);
    HolderReport r;
    try {
      r = check_holder(u, v, e1, e2);
    } catch (const std::invalid_argument& e) {
      throw c.cfg.invalid("lorentz.p1", e.what());
    }
    if (r.margin < -1e-12) ++violations;
    const double g = r.guaranteed_rhs - r.lhs;
    if (g < -1e-12) ++guaranteed_violations;
    min_guaranteed = std::min(min_guaranteed, g);
    if (!worst || r.margin < worst->margin) worst = r;
  }
  auto rep = nlohmann::json(*worst);
  rep["pairs"] = pairs;
  rep["violations"] = violations;
  rep["guaranteed_violations"] = guaranteed_violations;
  rep["min_guaranteed_margin"] = min_guaranteed;

  if (data.drift.active()) {
    const auto b = drift_coefficient(data, 0.0);
    const auto plan = default_truncation_plan(data);
    rep["drift_weak_norm"] = lorentz_norm(b, LorentzExponents::weak(data.domain.dim()));
    rep["drift_levels"] = plan.levels;
    rep["drift_remainders"] = dist_to_bounded(b, data.domain.dim(), plan.levels);
  }
  if (data.domain.dim() >= 3 && data.initial.max_abs() > 0.0) {
    rep["sobolev_ratio_initial"] = sobolev_lorentz_ratio(data.initial);
  }
  c.out.json("lorentz_report.json", rep);
  c.check(guaranteed_violations == 0, "product bound with constant 2^{1/p} violated");
  c.summary["holder_violations"] = violations;
}

void run_convergence(Context& c, const ProblemData& data) {
  if (!data.exact) throw c.cfg.invalid("model.name", "convergence needs a model with an exact solution");
  const auto evo = build_evolution(c.cfg, data);
  const auto ladder_h = c.cfg.get_list("refinement.cells");
  const auto ladder_dt = c.cfg.get_list("refinement.dts");
  const double fine_dt = c.cfg.get_number("refinement.fine_dt");
  const auto fine_cells = c.cfg.get_integer("refinement.fine_cells");
  if (ladder_h.size() < 2 || ladder_dt.size() < 2) throw c.cfg.invalid("refinement.cells", "ladders need two entries");

  const int dim = data.domain.dim();
  const auto lengths = broadcast(c.cfg, "domain.length", dim);
  auto error_at = [&](int cells, double dt) {
    Config one = c.cfg;
    one.apply_override("domain.cells=" + std::to_string(cells), 0);
    const auto d = build_problem(one, c.seed);
    auto e = evo;
    e.dt = dt;
    e.truncation = make_truncation_plan(d, {1.0});
    const auto r = evolve(d, e);
    const auto exact = GridFunction::sample(d.domain, [&](const Point& x) { return d.exact(x, e.horizon); });
    return l2_norm(r.final_state - exact);
  };

  CsvTable t{{"ladder", "h", "dt", "error", "order"}, {}};
  auto rep = nlohmann::json::object();
  auto ladder = [&](int id, const std::vector<double>& values, bool space) {
    std::vector<double> orders;
    double prev_err = 0.0;
    double prev_param = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) {
      const int cells = space ? static_cast<int>(values[k]) : static_cast<int>(fine_cells);
      const double dt = space ? fine_dt : values[k];
      const double h = lengths.front() / cells;
      const double err = error_at(cells, dt);
      const double param = space ? h : dt;
      double order = NAN;
      if (k > 0) {
        order = std::log(prev_err / err) / std::log(prev_param / param);
        orders.push_back(order);
      }
      t.rows.push_back({static_cast<double>(id), h, dt, err, order});
      prev_err = err;
      prev_param = param;
    }
    return orders;
  };
  const auto oh = ladder(0, ladder_h, true);
  const auto ot = ladder(1, ladder_dt, false);
  c.out.csv("convergence.csv", t);
  rep["space_orders"] = oh;
  rep["time_orders"] = ot;
  rep["space_order_min"] = *std::min_element(oh.begin(), oh.end());
  rep["time_order_min"] = *std::min_element(ot.begin(), ot.end());
  c.out.json("convergence_report.json", rep);
  for (double o : oh) c.check(o >= 1.8, "space order " + format_number(o) + " below 1.8");
  for (double o : ot) c.check(o >= 0.9, "time order " + format_number(o) + " below 0.9");
}

}  // namespace

ProblemData build_problem(const Config& cfg, std::uint64_t seed) {
  const auto dim = cfg.get_integer("domain.dim");
  if (dim < 1 || dim > 3) throw cfg.invalid("domain.dim", "must be 1, 2 or 3");
  const int n = static_cast<int>(dim);
  const auto lengths = broadcast(cfg, "domain.length", n);
  std::vector<int> cells;
  for (double v : broadcast(cfg, "domain.cells", n)) {
    if (v != std::floor(v) || v < 2) throw cfg.invalid("domain.cells", "cell counts must be integers >= 2");
    cells.push_back(static_cast<int>(v));
  }
  std::optional<BoxDomain> d;
  try {
    d.emplace(lengths, cells);
  } catch (const std::invalid_argument& e) {
    throw cfg.invalid("domain.length", e.what());
  }

  ModelParams p;
  p.initial = cfg.get_string("model.initial");
  p.initial_amplitude = cfg.get_number("model.initial_amplitude");
  p.source = cfg.get_string("model.source");
  p.source_amplitude = cfg.get_number("model.source_amplitude");
  p.contrast = cfg.get_number("model.contrast");
  p.drift_strength = cfg.get_number("model.drift.strength");
  p.horizon = cfg.has("model.horizon") ? cfg.get_number("model.horizon") : cfg.get_number("time.horizon");
  p.seed = seed;
  if (cfg.has("model.drift.singularity")) {
    const auto x = cfg.get_list("model.drift.singularity");
    if (static_cast<int>(x.size()) != n) throw cfg.invalid("model.drift.singularity", "needs one value per axis");
    Point pt{0.0, 0.0, 0.0};
    for (int a = 0; a < n; ++a) pt[a] = x[a];
    p.singularity = pt;
  }
  if (cfg.has("model.drift.file")) {
    std::filesystem::path f = cfg.get_string("model.drift.file");
    if (f.is_relative()) f = cfg.directory() / f;
    if (!std::filesystem::exists(f)) throw cfg.invalid("model.drift.file", "file " + f.string() + " does not exist");
    p.drift_field = read_gridfunction(f);
  }
  auto name = cfg.get_string("model.name");
  if (name == "all") name = builtin_models().front().name;
  try {
    return make_model(name, *d, p);
  } catch (const std::invalid_argument& e) {
    throw cfg.invalid("model.name", e.what());
  }
}

EvolutionConfig build_evolution(const Config& cfg, const ProblemData& data) {
  EvolutionConfig e;
  e.dt = cfg.get_number("time.dt");
  e.horizon = cfg.get_number("time.horizon");
  e.splitting = parse_splitting(cfg.get_string("time.splitting"));
  e.resolvent.tol = cfg.get_number("solver.tol");
  e.resolvent.max_iter = static_cast<int>(cfg.get_integer("solver.max_iter"));
  e.resolvent.relaxation = cfg.get_number("solver.relaxation");
  e.resolvent.method = method_for(cfg, "solver.method", data);
  try {
    if (cfg.has("truncation.levels")) {
      e.truncation = make_truncation_plan(data, cfg.get_list("truncation.levels"));
    } else {
      e.truncation = default_truncation_plan(data, cfg.get_number("truncation.m0"), cfg.get_number("truncation.factor"),
                                             static_cast<int>(cfg.get_integer("truncation.max_levels")));
    }
  } catch (const std::invalid_argument& ex) {
    throw cfg.invalid("truncation.levels", ex.what());
  }
  try {
    e.validate();
  } catch (const std::invalid_argument& ex) {
    throw cfg.invalid("time.dt", ex.what());
  }
  return e;
}

SteadyConfig build_steady(const Config& cfg, const ProblemData& data) {
  SteadyConfig s;
  s.tol = cfg.get_number("steady.tol");
  if (!(s.tol > 0.0)) throw cfg.invalid("steady.tol", "must be positive");
  s.max_iter = static_cast<int>(cfg.get_integer("steady.max_iter"));
  s.method = method_for(cfg, "steady.method", data);
  s.relaxation = cfg.get_number("solver.relaxation");
  s.time_average = cfg.get_string("steady.slice") == "average";
  s.average_samples = static_cast<int>(cfg.get_integer("steady.samples"));
  if (cfg.has("steady.time")) s.time = cfg.get_number("steady.time");
  return s;
}

RunManifest run_experiment(const Config& cfg, const RunOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  const auto experiment = cfg.get_string("experiment");
  const std::uint64_t seed = opts.seed ? *opts.seed : static_cast<std::uint64_t>(cfg.get_integer("seed"));
  const auto dir = opts.output_dir ? *opts.output_dir : std::filesystem::path(cfg.get_string("output.directory"));

  // Everything that can fail on bad input runs before the directory is touched.
  const auto data = build_problem(cfg, seed);
  if (cfg.get_string("model.name") == "all" && experiment != "verify-hypotheses") {
    throw cfg.invalid("model.name", "'all' is only valid for verify-hypotheses");
  }
  if (experiment == "evolve" || experiment == "continuation" || experiment == "uniqueness" || experiment == "decay" ||
      experiment == "convergence") {
    build_evolution(cfg, data);
  }
  if (experiment == "steady" || experiment == "decay") build_steady(cfg, data);

  OutputDir out(dir);
  RunManifest m;
  m.directory = dir;
  nlohmann::json summary = nlohmann::json::object();
  Context c{cfg, seed, out, m.failures, summary, cfg.get_bool("output.gridfunctions")};

  try {
    if (experiment == "evolve") run_evolve(c, data);
    else if (experiment == "continuation") run_continuation(c, data);
    else if (experiment == "uniqueness") run_uniqueness(c, data);
    else if (experiment == "steady") run_steady(c, data);
    else if (experiment == "decay") run_decay(c, data);
    else if (experiment == "verify-hypotheses") run_hypotheses(c, data);
    else if (experiment == "lorentz-report") run_lorentz(c, data);
    else if (experiment == "convergence") run_convergence(c, data);
    m.status = m.failures.empty() ? exit_pass : exit_assertion;
  } catch (const EvolutionError& e) {
    out.csv("trace.csv", e.partial_trace().table());
    out.json("solver_diagnostics.json", {{"error", e.what()}, {"step", e.step()}, {"diagnostics", e.diagnostics()}});
    m.failures.push_back(e.what());
    m.status = exit_solver;
  } catch (const SolverError& e) {
    out.json("solver_diagnostics.json", {{"error", e.what()}, {"diagnostics", e.diagnostics()}});
    m.failures.push_back(e.what());
    m.status = exit_solver;
  }

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  m.files = out.files();
  m.files.push_back("manifest.json");
  m.json = {{"version", version()},
            {"experiment", experiment},
            {"model", data.name},
            {"seed", seed},
            {"config_source", cfg.source()},
            {"config", cfg.echo()},
            {"status", m.status},
            {"pass", m.status == exit_pass},
            {"failures", m.failures},
            {"summary", summary},
            {"files", m.files},
            {"wall_time_seconds", wall}};
  out.json("manifest.json", m.json);
  return m;
}

PlotKind parse_plot_kind(const std::string& name) {
  if (name == "energy") return PlotKind::energy;
  if (name == "decay") return PlotKind::decay;
  if (name == "convergence") return PlotKind::convergence;
  throw std::invalid_argument("unknown plot kind '" + name + "' (energy, decay, convergence)");
}

PlotOutput emit_plot_data(const std::filesystem::path& trace, PlotKind kind,
                          const std::optional<std::filesystem::path>& out) {
  const auto t = read_csv(trace);
  const auto src = trace.string();
  if (t.rows.empty()) throw FormatError(src, 1, "trace has no rows");
  auto column = [&](const std::string& name) {
    try {
      return csv_column(t, name);
    } catch (const std::out_of_range&) {
      throw FormatError(src, 1, "missing column '" + name + "'");
    }
  };

  CsvTable plot;
  nlohmann::json side = nlohmann::json::object();
  side["source"] = trace.filename().string();
  std::string suffix;
  switch (kind) {
    case PlotKind::energy: {
      suffix = "energy";
      plot.header = {"t", "energy"};
      const auto ts = column("t");
      const auto l2 = column("l2_norm");
      for (std::size_t i = 0; i < ts.size(); ++i) plot.rows.push_back({ts[i], 0.5 * l2[i] * l2[i]});
      side["reference"] = {{"name", "initial energy"}, {"value", plot.rows.front()[1]}};
      break;
    }
    case PlotKind::decay: {
      suffix = "decay";
      plot.header = {"t", "log_y"};
      const auto ts = column("t");
      const auto y = column("y");
      for (std::size_t i = 0; i < ts.size(); ++i) {
        if (y[i] > 0.0) plot.rows.push_back({ts[i], std::log(y[i])});
      }
      const auto report = trace.parent_path() / "decay_report.json";
      if (std::filesystem::exists(report)) {
        std::ifstream is(report);
        const auto j = nlohmann::json::parse(is);
        const double omega = j.at("theoretical_omega").get<double>();
        side["reference"] = {{"name", "y0 exp(-2 omega t)"},
                             {"omega", omega},
                             {"slope", -2.0 * omega},
                             {"intercept", y.front() > 0.0 ? std::log(y.front()) : -INFINITY}};
      }
      break;
    }
    case PlotKind::convergence: {
      suffix = "convergence";
      plot.header = {"log_dt", "log_error"};
      const auto ladder = column("ladder");
      const auto h = column("h");
      const auto dt = column("dt");
      const auto err = column("error");
      auto space = nlohmann::json::array();
      for (std::size_t i = 0; i < ladder.size(); ++i) {
        if (ladder[i] == 1.0) {
          plot.rows.push_back({std::log(dt[i]), std::log(err[i])});
        } else {
          space.push_back({std::log(h[i]), std::log(err[i])});
        }
      }
      side["reference"] = {{"time_slope", 1.0}, {"space_slope", 2.0}};
      side["space_ladder_log_h_log_error"] = space;
      break;
    }
  }
  if (plot.rows.empty()) throw FormatError(src, 1, "no plottable rows");

  PlotOutput po;
  po.data = out ? *out : trace.parent_path() / (trace.stem().string() + "_" + suffix + "_plot.csv");
  po.sidecar = po.data;
  po.sidecar.replace_extension(".json");
  write_csv(po.data, plot);
  std::ofstream os(po.sidecar);
  os << side.dump(2) << '\n';
  return po;
}

}  // namespace ldrift
