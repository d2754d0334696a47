#include <filesystem>
#include <sstream>

#include <gtest/gtest.h>

#include "generators.hpp"
#include "ldrift/io.hpp"

using namespace ldrift;

TEST(FormatNumber, RoundTrips) {
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    const double v = rng.uniform(-1e6, 1e6) * std::pow(10.0, rng.uniform(-20, 20));
    EXPECT_EQ(std::stod(format_number(v)), v);
  }
  EXPECT_EQ(format_number(INFINITY), "inf");
  EXPECT_EQ(format_number(-INFINITY), "-inf");
  EXPECT_EQ(format_number(NAN), "nan");
}

TEST(GridFunctionFile, RoundTripsExactly) {
  Rng rng(5);
  for (int dim = 1; dim <= 3; ++dim) {
    const BoxDomain d(std::vector<double>(dim, 1.5), std::vector<int>(dim, 5));
    const auto u = ldrift::testing::random_function(d, rng);
    std::stringstream ss;
    write_gridfunction(ss, u);
    const auto v = read_gridfunction(ss);
    EXPECT_TRUE(v.domain() == d);
    EXPECT_EQ(v.values(), u.values());
  }
}

TEST(GridFunctionFile, CommentsAllowed) {
  std::istringstream is("# header\ngridfunction v1\ndim 1\ncells 3\nlengths 1\nvalues\n# two nodes\n0.5\n-1\n");
  const auto u = read_gridfunction(is);
  EXPECT_EQ(u.size(), 2u);
  EXPECT_EQ(u[1], -1.0);
}

TEST(GridFunctionFile, ErrorsCarryLine) {
  auto line_of = [](const std::string& text) {
    std::istringstream is(text);
    try {
      read_gridfunction(is, "f.gf");
    } catch (const FormatError& e) {
      EXPECT_EQ(e.source(), "f.gf");
      return e.line();
    }
    return -1;
  };
  EXPECT_EQ(line_of("gridfunction v2\n"), 1);
  EXPECT_EQ(line_of("gridfunction v1\ndim 1\ncells 3\nlengths 1\nvalues\n0.5\nabc\n"), 7);
  EXPECT_EQ(line_of("gridfunction v1\ndim 2\ncells 3\nlengths 1 1\n"), 4);
  EXPECT_GT(line_of("gridfunction v1\ndim 1\ncells 3\nlengths 1\nvalues\n0.5\n"), 0);
  EXPECT_EQ(line_of("gridfunction v1\ndim 1\ncells 1\nlengths 1\nvalues\n"), 4);
}

TEST(Csv, RoundTripAndColumns) {
  const auto dir = std::filesystem::temp_directory_path() / "ldrift_test_io";
  std::filesystem::remove_all(dir);
  CsvTable t{{"a", "b"}, {{1.0, 0.1}, {2.0, INFINITY}}};
  write_csv(dir / "sub" / "t.csv", t);
  const auto r = read_csv(dir / "sub" / "t.csv");
  EXPECT_EQ(r.header, t.header);
  EXPECT_EQ(r.rows, t.rows);
  EXPECT_EQ(csv_column(r, "b")[0], 0.1);
  EXPECT_THROW(csv_column(r, "c"), std::out_of_range);
  std::filesystem::remove_all(dir);
}
