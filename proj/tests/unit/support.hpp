#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "weightlab/grid.hpp"

namespace wltest {

using weightlab::Box;
using weightlab::Grid;
using weightlab::GridFunction;
using weightlab::Point;

inline Grid line(int N, double L = 4.0, double c = 0.0) { return Grid(Box{1, {c, 0.0}, L}, N); }
inline Grid plane(int N, double L = 4.0) { return Grid(Box{2, {0.0, 0.0}, L}, N); }

inline GridFunction indicator(const Grid& g, double a, double b) {
  return weightlab::make_grid_function(g, [=](const Point& x) { return (x[0] > a && x[0] < b) ? 1.0 : 0.0; }, true);
}

/// Random step function: values drawn from {-k/8 : |k| <= 16} on a random sub-block of
/// the central half, zero elsewhere. Dyadic values keep the arithmetic exact.
inline GridFunction random_step(const Grid& g, std::mt19937_64& rng) {
  GridFunction f(g, 0.0);
  int N = g.N();
  std::uniform_int_distribution<int> lo(N / 4, N / 2), len(1, N / 4), val(-16, 16);
  int a0 = lo(rng), a1 = a0 + len(rng);
  int b0 = g.n() == 2 ? lo(rng) : 0, b1 = g.n() == 2 ? b0 + len(rng) : 1;
  for (int j = b0; j < b1; ++j)
    for (int i = a0; i < a1; ++i) f.at(i, j) = val(rng) / 8.0;
  f.set_compact_support(true);
  return f;
}

inline GridFunction random_values(const Grid& g, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  GridFunction f(g, 0.0);
  for (std::size_t k = 0; k < f.size(); ++k) f[k] = u(rng);
  return f;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::fabs(a[k] - b[k]));
  return m;
}

}  // namespace wltest
