#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "ldrift/grid.hpp"

namespace ldrift {

class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& source, int line, const std::string& what)
      : std::runtime_error(source + ":" + std::to_string(line) + ": " + what), source_(source), line_(line) {}
  const std::string& source() const { return source_; }
  int line() const { return line_; }

 private:
  std::string source_;
  int line_;
};

/// Shortest round-trip decimal form; inf/nan spelled "inf", "-inf", "nan".
std::string format_number(double v);

/// GridFunction text format (docs/formats.md):
///
///   gridfunction v1
///   dim N
///   cells n_1 ... n_N
///   lengths L_1 ... L_N
///   values
///   <one interior value per line, row-major, axis 0 slowest>
void write_gridfunction(std::ostream& os, const GridFunction& u);
void write_gridfunction(const std::filesystem::path& path, const GridFunction& u);
GridFunction read_gridfunction(std::istream& is, const std::string& source = "<stream>");
GridFunction read_gridfunction(const std::filesystem::path& path);

/// Plain CSV with a header row. Cells are written as given.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

void write_csv(std::ostream& os, const CsvTable& t);
void write_csv(const std::filesystem::path& path, const CsvTable& t);
CsvTable read_csv(const std::filesystem::path& path);

/// Column lookup by name; throws std::out_of_range when absent.
std::vector<double> csv_column(const CsvTable& t, const std::string& name);

}  // namespace ldrift
