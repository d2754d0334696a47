#include "ldrift/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

namespace ldrift {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  return os;
}

double parse_double(const std::string& tok, const std::string& source, int line) {
  if (tok == "inf") return INFINITY;
  if (tok == "-inf") return -INFINITY;
  if (tok == "nan") return NAN;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) throw FormatError(source, line, "bad number '" + tok + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void write_gridfunction(std::ostream& os, const GridFunction& u) {
  const auto& d = u.domain();
  os << "gridfunction v1\n";
  os << "dim " << d.dim() << "\n";
  os << "cells";
  for (int a = 0; a < d.dim(); ++a) os << ' ' << d.cells(a);
  os << "\nlengths";
  for (int a = 0; a < d.dim(); ++a) os << ' ' << format_number(d.length(a));
  os << "\nvalues\n";
  for (double v : u.values()) os << format_number(v) << '\n';
}

void write_gridfunction(const std::filesystem::path& path, const GridFunction& u) {
  auto os = open_out(path);
  write_gridfunction(os, u);
}

GridFunction read_gridfunction(std::istream& is, const std::string& source) {
  std::string line;
  int ln = 0;
  auto next = [&]() -> std::string {
    while (std::getline(is, line)) {
      ++ln;
      auto t = trim(line);
      if (!t.empty() && t[0] != '#') return t;
    }
    throw FormatError(source, ln, "unexpected end of file");
  };
  if (next() != "gridfunction v1") throw FormatError(source, ln, "expected 'gridfunction v1'");

  auto fields = [&](const std::string& key) {
    std::istringstream ss(next());
    std::string k;
    ss >> k;
    if (k != key) throw FormatError(source, ln, "expected '" + key + "'");
    std::vector<std::string> toks;
    for (std::string t; ss >> t;) toks.push_back(t);
    return toks;
  };
  const auto dim_tok = fields("dim");
  if (dim_tok.size() != 1) throw FormatError(source, ln, "dim takes one value");
  const int dim = static_cast<int>(parse_double(dim_tok[0], source, ln));
  const auto cell_tok = fields("cells");
  const int cells_line = ln;
  const auto len_tok = fields("lengths");
  if (static_cast<int>(cell_tok.size()) != dim || static_cast<int>(len_tok.size()) != dim) {
    throw FormatError(source, ln, "cells/lengths must list dim values");
  }
  std::vector<int> cells;
  std::vector<double> lengths;
  for (int a = 0; a < dim; ++a) {
    cells.push_back(static_cast<int>(parse_double(cell_tok[a], source, cells_line)));
    lengths.push_back(parse_double(len_tok[a], source, ln));
  }
  std::optional<BoxDomain> d;
  try {
    d.emplace(lengths, cells);
  } catch (const std::invalid_argument& e) {
    throw FormatError(source, ln, e.what());
  }
  if (next() != "values") throw FormatError(source, ln, "expected 'values'");
  std::vector<double> vals;
  vals.reserve(d->interior_count());
  while (std::getline(is, line)) {
    ++ln;
    const auto t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    vals.push_back(parse_double(t, source, ln));
  }
  if (vals.size() != d->interior_count()) {
    throw FormatError(source, ln,
                      "expected " + std::to_string(d->interior_count()) + " values, found " + std::to_string(vals.size()));
  }
  return GridFunction(*d, std::move(vals));
}

GridFunction read_gridfunction(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  return read_gridfunction(is, path.string());
}

void write_csv(std::ostream& os, const CsvTable& t) {
  for (std::size_t i = 0; i < t.header.size(); ++i) os << (i ? "," : "") << t.header[i];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_number(row[i]);
    os << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const CsvTable& t) {
  auto os = open_out(path);
  write_csv(os, t);
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  const auto source = path.string();
  CsvTable t;
  std::string line;
  int ln = 0;
  while (std::getline(is, line)) {
    ++ln;
    line = trim(line);
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (t.header.empty()) {
      for (const auto& c : cells) t.header.push_back(trim(c));
      continue;
    }
    if (cells.size() != t.header.size()) throw FormatError(source, ln, "row width differs from header");
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(parse_double(trim(c), source, ln));
    t.rows.push_back(std::move(row));
  }
  if (t.header.empty()) throw FormatError(source, ln, "empty CSV file");
  return t;
}

std::vector<double> csv_column(const CsvTable& t, const std::string& name) {
  for (std::size_t i = 0; i < t.header.size(); ++i) {
    if (t.header[i] == name) {
      std::vector<double> col;
      col.reserve(t.rows.size());
      for (const auto& r : t.rows) col.push_back(r[i]);
      return col;
    }
  }
  throw std::out_of_range("CSV column '" + name + "' not found");
}

}  // namespace ldrift
