#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "ldrift/grid.hpp"
#include "ldrift/random.hpp"

namespace ldrift::testing {

inline GridFunction random_function(const BoxDomain& d, Rng& rng, double amp = 1.0) {
  GridFunction g(d);
  for (double& v : g.values()) v = rng.uniform(-amp, amp);
  return g;
}

inline VectorField random_field(const BoxDomain& d, Rng& rng, double amp = 1.0) {
  VectorField q(d);
  for (int a = 0; a < d.dim(); ++a) {
    for (double& v : q.component(a)) v = rng.uniform(-amp, amp);
  }
  return q;
}

/// Simple function taking a handful of distinct levels, some of them repeated,
/// with a share of zeros.
inline GridFunction random_simple(const BoxDomain& d, Rng& rng, int levels = 5) {
  std::vector<double> vals(levels);
  for (double& v : vals) v = rng.uniform(-4.0, 4.0);
  GridFunction g(d);
  for (double& v : g.values()) {
    const auto k = static_cast<int>(rng.uniform() * (levels + 1));
    v = k >= levels ? 0.0 : vals[k];
  }
  return g;
}

/// Smooth Dirichlet function: a random combination of the first few sine modes.
inline GridFunction random_smooth(const BoxDomain& d, Rng& rng, int modes = 3) {
  std::vector<std::array<int, 3>> ks;
  std::vector<double> cs;
  for (int m = 0; m < modes; ++m) {
    std::array<int, 3> k{1, 1, 1};
    for (int a = 0; a < d.dim(); ++a) k[a] = 1 + static_cast<int>(rng.uniform() * 3.0);
    ks.push_back(k);
    cs.push_back(rng.uniform(-1.0, 1.0));
  }
  return GridFunction::sample(d, [&](const Point& x) {
    double s = 0.0;
    for (std::size_t m = 0; m < ks.size(); ++m) {
      double p = cs[m];
      for (int a = 0; a < d.dim(); ++a) p *= std::sin(ks[m][a] * 3.141592653589793 * x[a] / d.length(a));
      s += p;
    }
    return s;
  });
}

}  // namespace ldrift::testing
