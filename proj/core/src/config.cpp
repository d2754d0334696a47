#include "ldrift/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace ldrift {

namespace {

using Kind = Config::Kind;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::optional<double> to_number(const std::string& s) {
  if (s == "inf") return INFINITY;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || std::isnan(v)) return std::nullopt;
  return v;
}

std::optional<std::int64_t> to_integer(const std::string& s) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<bool> to_bool(const std::string& s) {
  if (s == "true" || s == "yes" || s == "1") return true;
  if (s == "false" || s == "no" || s == "0") return false;
  return std::nullopt;
}

std::optional<std::vector<double>> to_list(const std::string& s) {
  std::vector<double> out;
  std::istringstream is(s);
  for (std::string item; std::getline(is, item, ',');) {
    const auto v = to_number(trim(item));
    if (!v) return std::nullopt;
    out.push_back(*v);
  }
  if (out.empty()) return std::nullopt;
  return out;
}

bool valid_key_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-';
}

}  // namespace

const std::vector<Config::KeySpec>& Config::schema() {
  static const std::vector<KeySpec> s = {
      {"experiment", Kind::choice, "",
       {"evolve", "continuation", "uniqueness", "steady", "decay", "verify-hypotheses", "lorentz-report", "convergence"},
       "experiment to run (required)"},
      {"seed", Kind::integer, "1", {}, "seed of every random battery and random initial state"},
      {"model.name", Kind::choice, "heat",
       {"heat", "variable-diffusion", "lipschitz-nonlinear", "singular-drift", "manufactured", "all"},
       "built-in model; 'all' only for verify-hypotheses"},
      {"model.initial", Kind::choice, "eigenfunction", {"eigenfunction", "mode2", "bump", "zero", "random"}, "u0 shape"},
      {"model.initial_amplitude", Kind::number, "1", {}, "u0 amplitude"},
      {"model.source", Kind::choice, "none", {"none", "eigen-gradient"}, "source F"},
      {"model.source_amplitude", Kind::number, "1", {}, "source amplitude"},
      {"model.contrast", Kind::number, "0.5", {}, "delta (variable-diffusion) or kappa (lipschitz-nonlinear)"},
      {"model.horizon", Kind::number, "", {}, "period of time-dependent coefficients; defaults to time.horizon"},
      {"model.drift.strength", Kind::number, "0.05", {}, "c in b = c / |x - x0|"},
      {"model.drift.singularity", Kind::list, "", {}, "x0; defaults to a cell centre near the domain centre"},
      {"model.drift.file", Kind::string, "", {}, "GridFunction file replacing b (relative to the config file)"},
      {"domain.dim", Kind::integer, "2", {}, "space dimension 1..3"},
      {"domain.cells", Kind::list, "32", {}, "cells per axis; one value applies to every axis"},
      {"domain.length", Kind::list, "1", {}, "box side lengths; one value applies to every axis"},
      {"time.dt", Kind::number, "0.01", {}, "time step"},
      {"time.horizon", Kind::number, "1", {}, "final time T"},
      {"time.splitting", Kind::choice, "fully-implicit", {"fully-implicit", "paper-splitting"}, "drift splitting"},
      {"truncation.levels", Kind::list, "", {}, "explicit truncation levels; default ladder when unset"},
      {"truncation.m0", Kind::number, "0", {}, "first level of the default ladder; 0 picks the 0.9-quantile of b"},
      {"truncation.factor", Kind::number, "2", {}, "ladder growth factor"},
      {"truncation.max_levels", Kind::integer, "24", {}, "ladder length cap"},
      {"truncation.level", Kind::number, "", {}, "level used by single runs; defaults to the last ladder level"},
      {"solver.method", Kind::choice, "auto", {"auto", "picard", "damped-picard", "newton"},
       "resolvent solver; auto picks newton with drift, picard otherwise"},
      {"solver.tol", Kind::number, "1e-10", {}, "resolvent tolerance"},
      {"solver.max_iter", Kind::integer, "2000", {}, "resolvent iteration cap"},
      {"solver.relaxation", Kind::number, "0", {}, "Picard damping; 0 picks the guaranteed value"},
      {"steady.tol", Kind::number, "1e-10", {}, "steady residual bound in the discrete H^-1 norm"},
      {"steady.max_iter", Kind::integer, "5000", {}, "steady iteration cap"},
      {"steady.method", Kind::choice, "auto", {"auto", "picard", "damped-picard", "newton"}, "steady solver"},
      {"steady.slice", Kind::choice, "final", {"final", "average"}, "how time-dependent data is frozen"},
      {"steady.time", Kind::number, "", {}, "freeze time for slice = final; defaults to the horizon"},
      {"steady.samples", Kind::integer, "16", {}, "midpoint samples for slice = average"},
      {"steady.guesses", Kind::integer, "3", {}, "initial guesses compared by the steady experiment"},
      {"uniqueness.perturbation", Kind::number, "0.1", {}, "amplitude of the random offset v0 - u0"},
      {"hypotheses.samples", Kind::integer, "1000", {}, "spot checks per hypothesis"},
      {"lorentz.p1", Kind::number, "4", {}, "first factor exponent p1"},
      {"lorentz.q1", Kind::number, "4", {}, "first factor exponent q1 (inf for weak)"},
      {"lorentz.p2", Kind::number, "4", {}, "second factor exponent p2"},
      {"lorentz.q2", Kind::number, "4", {}, "second factor exponent q2 (inf for weak)"},
      {"lorentz.pairs", Kind::integer, "100", {}, "random pairs for the product inequality"},
      {"refinement.cells", Kind::list, "8,16,32", {}, "h ladder (cells per axis) at dt = refinement.fine_dt"},
      {"refinement.fine_dt", Kind::number, "1e-4", {}, "fixed small dt of the h ladder"},
      {"refinement.dts", Kind::list, "0.02,0.01", {}, "dt ladder at refinement.fine_cells"},
      {"refinement.fine_cells", Kind::integer, "64", {}, "fixed fine grid of the dt ladder"},
      {"output.directory", Kind::string, "out", {}, "output directory; --output-dir wins"},
      {"output.gridfunctions", Kind::boolean, "true", {}, "write final states as GridFunction files"},
  };
  return s;
}

const Config::KeySpec& Config::spec(const std::string& key) const {
  for (const auto& s : schema()) {
    if (s.key == key) return s;
  }
  throw std::logic_error("config key '" + key + "' is not in the schema");
}

void Config::set(const std::string& key, const std::string& value, const std::string& source, int line) {
  const auto& all = schema();
  const auto it = std::find_if(all.begin(), all.end(), [&](const KeySpec& s) { return s.key == key; });
  if (it == all.end()) throw FormatError(source, line, "unknown key '" + key + "'");
  if (value.empty()) throw FormatError(source, line, "empty value for '" + key + "'");
  bool ok = true;
  switch (it->kind) {
    case Kind::string:
      break;
    case Kind::choice:
      ok = std::find(it->choices.begin(), it->choices.end(), value) != it->choices.end();
      if (!ok) {
        std::string opts;
        for (const auto& c : it->choices) opts += (opts.empty() ? "" : ", ") + c;
        throw FormatError(source, line, "'" + value + "' is not one of {" + opts + "} for '" + key + "'");
      }
      break;
    case Kind::number:
      ok = to_number(value).has_value();
      break;
    case Kind::integer:
      ok = to_integer(value).has_value();
      break;
    case Kind::boolean:
      ok = to_bool(value).has_value();
      break;
    case Kind::list:
      ok = to_list(value).has_value();
      break;
  }
  if (!ok) throw FormatError(source, line, "malformed value '" + value + "' for '" + key + "'");
  values_[key] = Entry{value, source, line};
}

Config Config::parse(std::istream& is, const std::string& source) {
  Config c;
  c.source_ = source;
  std::string section;
  std::string raw;
  int ln = 0;
  while (std::getline(is, raw)) {
    ++ln;
    const auto hash = raw.find('#');
    const auto line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw FormatError(source, ln, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty() || !std::all_of(section.begin(), section.end(), valid_key_char)) {
        throw FormatError(source, ln, "bad section name '" + section + "'");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError(source, ln, "expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    if (key.empty() || !std::all_of(key.begin(), key.end(), valid_key_char)) {
      throw FormatError(source, ln, "bad key '" + key + "'");
    }
    const auto full = section.empty() ? key : section + "." + key;
    if (c.values_.count(full)) {
      throw FormatError(source, ln, "duplicate key '" + full + "' (first set on line " +
                                        std::to_string(c.values_.at(full).line) + ")");
    }
    c.set(full, trim(line.substr(eq + 1)), source, ln);
  }
  if (!c.values_.count("experiment")) throw FormatError(source, std::max(ln, 1), "missing required key 'experiment'");
  return c;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw FormatError(path.string(), 0, "cannot open config file");
  auto c = parse(is, path.string());
  c.directory_ = path.parent_path();
  return c;
}

void Config::apply_override(const std::string& assignment, int index) {
  const std::string source = "--override #" + std::to_string(index);
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw FormatError(source, 1, "expected key=value, got '" + assignment + "'");
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)), source, 1);
}

bool Config::has(const std::string& key) const { return values_.count(key) > 0; }

std::optional<Config::Entry> Config::lookup(const std::string& key) const {
  const auto& s = spec(key);
  if (const auto it = values_.find(key); it != values_.end()) return it->second;
  if (s.fallback.empty()) return std::nullopt;
  return Entry{s.fallback, "<default>", 0};
}

std::string Config::get_string(const std::string& key) const {
  const auto e = lookup(key);
  if (!e) throw FormatError(source_, 0, "key '" + key + "' is required here");
  return e->value;
}

double Config::get_number(const std::string& key) const { return *to_number(get_string(key)); }

std::int64_t Config::get_integer(const std::string& key) const { return *to_integer(get_string(key)); }

bool Config::get_bool(const std::string& key) const { return *to_bool(get_string(key)); }

std::vector<double> Config::get_list(const std::string& key) const { return *to_list(get_string(key)); }

FormatError Config::invalid(const std::string& key, const std::string& what) const {
  if (const auto it = values_.find(key); it != values_.end()) {
    return FormatError(it->second.source, it->second.line, key + ": " + what);
  }
  return FormatError(source_, 0, key + ": " + what);
}

nlohmann::json Config::echo() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& s : schema()) {
    const auto e = lookup(s.key);
    if (e) j[s.key] = e->value;
  }
  return j;
}

}  // namespace ldrift
