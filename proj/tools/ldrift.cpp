// ldrift: run experiments from a config file and turn their traces into plot data.
//
//   ldrift run presets/heat-decay.cfg --output-dir out/heat --override time.dt=5e-4
//   ldrift plot out/heat/decay_series.csv --kind decay

#include <iostream>

#include <CLI11.hpp>

#include "ldrift/experiment.hpp"

namespace {

int run_command(const std::string& path, const std::string& output_dir, const std::optional<std::uint64_t>& seed,
                const std::vector<std::string>& overrides) {
  auto cfg = ldrift::Config::load(path);
  for (std::size_t i = 0; i < overrides.size(); ++i) cfg.apply_override(overrides[i], static_cast<int>(i) + 1);
  ldrift::RunOptions opts;
  if (!output_dir.empty()) opts.output_dir = output_dir;
  opts.seed = seed;
  const auto m = ldrift::run_experiment(cfg, opts);

  std::cout << m.json.at("experiment").get<std::string>() << " (" << m.json.at("model").get<std::string>()
            << ") -> " << m.directory.string() << '\n';
  for (const auto& f : m.files) std::cout << "  " << f << '\n';
  for (const auto& f : m.failures) std::cerr << (m.status == ldrift::exit_solver ? "solver failure: " : "FAIL: ") << f
                                             << '\n';
  std::cout << (m.status == ldrift::exit_pass ? "pass" : "fail") << '\n';
  return m.status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Truncated drift-diffusion experiments"};
  app.set_version_flag("--version", ldrift::version());
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run the experiment described by a config file");
  std::string config;
  std::string output_dir;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  run->add_option("config", config, "config file")->required();
  run->add_option("--output-dir", output_dir, "output directory (overrides output.directory)");
  run->add_option("--seed", seed, "seed (overrides the config seed)");
  run->add_option("--override", overrides, "key=value applied after the file; repeatable")->take_all();

  auto* plot = app.add_subcommand("plot", "write plot-ready (x, y) data from a trace");
  std::string trace;
  std::string kind;
  std::string plot_out;
  plot->add_option("trace", trace, "trace.csv, decay_series.csv or convergence.csv")->required();
  plot->add_option("--kind", kind, "energy | decay | convergence")->required();
  plot->add_option("--output", plot_out, "output CSV (default next to the trace)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : ldrift::exit_parse;
  }

  try {
    if (*run) return run_command(config, output_dir, seed, overrides);
    std::optional<std::filesystem::path> out;
    if (!plot_out.empty()) out = plot_out;
    const auto po = ldrift::emit_plot_data(trace, ldrift::parse_plot_kind(kind), out);
    std::cout << po.data.string() << '\n' << po.sidecar.string() << '\n';
    return ldrift::exit_pass;
  } catch (const ldrift::FormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return ldrift::exit_parse;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return ldrift::exit_parse;
  } catch (const ldrift::SolverError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return ldrift::exit_solver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return ldrift::exit_parse;
  }
}
