#include <algorithm>
#include <cmath>
#include <random>
#include <tuple>

#include "doctest.h"
#include "support.hpp"
#include "weightlab/czd.hpp"
#include "weightlab/error.hpp"
#include "weightlab/operators.hpp"

using namespace weightlab;
using namespace wltest;

namespace {

VectorFunction random_vector(const Grid& g, std::mt19937_64& rng, int K) {
  VectorFunction v;
  v.r = 2.0;
  for (int k = 0; k < K; ++k) v.components.push_back(random_values(g, rng, -1.0, 1.0));
  return v;
}

// Maximal dyadic cubes with normalized average above alpha, by exhaustive search.
std::vector<DyadicCube> oracle_selection(const GridFunction& mod, double alpha, const PhiSpec& phi, double eta) {
  const Grid& g = mod.grid();
  auto avg = [&](const DyadicCube& c) {
    auto b = c.cells(g);
    long double s = 0;
    for (int j = b.lo[1]; j < b.hi[1]; ++j)
      for (int i = b.lo[0]; i < b.hi[0]; ++i) s += std::fabs(mod.at(i, j));
    return static_cast<double>(s / b.count()) / std::pow(phi(c.volume(g)), eta);
  };
  std::vector<DyadicCube> out;
  for (const auto& c : enumerate_dyadic_cubes(g, 0, g.finest_generation())) {
    if (!(avg(c) > alpha)) continue;
    bool maximal = true;
    for (DyadicCube a = c; a.g > 0 && maximal;) {
      a = a.parent();
      maximal = !(avg(a) > alpha);
    }
    if (maximal) out.push_back(c);
  }
  return out;
}

// 70th percentile of the normalized averages over all dyadic cubes.
double percentile_alpha(const GridFunction& mod, const PhiSpec& phi, double eta) {
  std::vector<double> a;
  for (const auto& c : enumerate_dyadic_cubes(mod.grid(), 0, mod.grid().finest_generation()))
    a.push_back(dyadic_average(mod, c, phi, eta));
  std::sort(a.begin(), a.end());
  return a[a.size() * 7 / 10];
}

}  // namespace

TEST_SUITE("czd") {

TEST_CASE("threshold above the data selects nothing") {
  std::mt19937_64 rng(1);
  auto g = line(64, 4.0);
  auto v = random_vector(g, rng, 2);
  auto d = cz_decompose(v, 10.0, PhiSpec{1.0}, 1.0);
  CHECK(d.cubes.empty());
  CHECK(d.omega_cells() == 0);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(d.good[k].values() == v.components[k].values());
    for (double x : d.bad[k].values()) CHECK(x == 0.0);
    for (double x : d.fbar[k].values()) CHECK(x == 0.0);
    CHECK(fbar_mass_identity(d, k).cubes == 0);
  }
  auto c = certify(d);
  CHECK(c.passed());
  CHECK(c.checked_cells == 2 * g.size());
}

TEST_CASE("single spike selects the deepest cube above threshold") {
  auto g = line(64, 4.0);
  PhiSpec phi{1.0};
  GridFunction f(g, 0.0);
  f[37] = 5.0;
  VectorFunction v{{f}, 2.0};
  auto mod = ell_r_modulus(v);
  // Just below the finest cell's normalized average.
  double cell_avg = dyadic_average(mod, DyadicCube{6, {37, 0}}, phi, 1.0);
  double alpha = cell_avg * (1 - 1e-9);
  auto d = cz_decompose(v, alpha, phi, 1.0);
  auto oracle = oracle_selection(mod, alpha, phi, 1.0);
  REQUIRE(oracle.size() == 1);
  REQUIRE(d.cubes.size() == 1);
  CHECK(d.cubes[0].cube == oracle[0]);
  auto c = certify(d);
  CHECK(c.passed());
  CHECK(fbar_mass_identity(d, 0).passed);

  // A lower threshold lifts the selection to a coarser ancestor, still unique.
  double lower = dyadic_average(mod, DyadicCube{3, {4, 0}}, phi, 1.0) * 0.999;
  auto e = cz_decompose(v, lower, phi, 1.0);
  auto o2 = oracle_selection(mod, lower, phi, 1.0);
  REQUIRE(e.cubes.size() == o2.size());
  for (std::size_t i = 0; i < o2.size(); ++i) CHECK(e.cubes[i].cube == o2[i]);
  CHECK(certify(e).passed());
}

TEST_CASE("selection matches the exhaustive oracle on random data") {
  std::mt19937_64 rng(2);
  for (int n : {1, 2}) {
    auto g = n == 1 ? line(128, 2.0) : plane(16, 2.0);
    for (int t = 0; t < 10; ++t) {
      auto v = random_vector(g, rng, 3);
      PhiSpec phi{0.5 + t * 0.1};
      double eta = 0.5 + 0.25 * (t % 3);
      auto mod = ell_r_modulus(v);
      double alpha = percentile_alpha(mod, phi, eta);
      auto d = cz_decompose(v, alpha, phi, eta);
      auto oracle = oracle_selection(mod, alpha, phi, eta);
      std::vector<DyadicCube> grid_cubes;
      for (const auto& s : d.cubes)
        if (s.tiling_generation == s.cube.g) grid_cubes.push_back(s.cube);
      auto key = [](const DyadicCube& a, const DyadicCube& b) {
        return std::tie(a.g, a.k[1], a.k[0]) < std::tie(b.g, b.k[1], b.k[0]);
      };
      std::sort(grid_cubes.begin(), grid_cubes.end(), key);
      std::sort(oracle.begin(), oracle.end(), key);
      CHECK(grid_cubes == oracle);
    }
  }
}

TEST_CASE("random certificates, partition identity and mass identity") {
  std::mt19937_64 rng(3);
  auto g = line(128, 4.0);
  for (int t = 0; t < 20; ++t) {
    auto v = random_vector(g, rng, 3);
    PhiSpec phi{1.0};
    auto alpha = percentile_alpha(ell_r_modulus(v), phi, 1.0);
    auto d = cz_decompose(v, alpha, phi, 1.0);
    auto c = certify(d);
    CHECK(c.passed());
    CHECK(c.max_off_omega <= 1.0);
    for (std::size_t k = 0; k < 3; ++k) {
      for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(d.good[k][i] + d.bad[k][i] == v.components[k][i]);
        if (d.omega[i])
          CHECK(d.good[k][i] == 0.0);
        else
          CHECK(d.bad[k][i] == 0.0);
      }
      auto m = fbar_mass_identity(d, k);
      CHECK(m.passed);
      CHECK(m.max_relative_error <= 1e-12);
    }
  }
}

TEST_CASE("raising alpha shrinks Omega") {
  std::mt19937_64 rng(4);
  auto g = line(128, 4.0);
  for (int t = 0; t < 10; ++t) {
    auto v = random_vector(g, rng, 2);
    double a1 = 0.2 + 0.05 * t;
    auto lo = cz_decompose(v, a1, PhiSpec{1.0}, 1.0);
    auto hi = cz_decompose(v, a1 * 1.7, PhiSpec{1.0}, 1.0);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (hi.omega[i]) CHECK(lo.omega[i]);
  }
}

TEST_CASE("cells above alpha below grid resolution are tiled") {
  auto g = line(16, 4.0);
  VectorFunction v{{GridFunction(g, 1.0)}, 2.0};
  PhiSpec phi{1.0};
  // Each cell has volume 0.5, so its normalized average is 1/1.5; anything in (1/1.5, 1)
  // needs sub-cell tiles to capture the cell.
  auto d = cz_decompose(v, 0.9, phi, 1.0);
  CHECK(d.cubes.size() == 16);
  for (const auto& s : d.cubes) {
    CHECK(s.resolution_limited);
    CHECK(s.tiling_generation > s.cube.g);
    CHECK(s.average > 0.9);
    CHECK(1.0 / phi(2 * s.tile_volume) <= 0.9);
  }
  CHECK(d.omega_cells() == 16);
  CHECK(certify(d).passed());
  CHECK(fbar_mass_identity(d, 0).passed);

  auto root = cz_decompose(v, 0.01, phi, 1.0);
  CHECK(root.root_selected);
  CHECK(root.cubes.size() == 1);
  CHECK(certify(root).passed());
}

TEST_CASE("constant data on a selected cube") {
  auto g = line(32, 4.0);
  GridFunction f(g, 0.0);
  for (int i = 8; i < 16; ++i) f[i] = -3.0;
  VectorFunction v{{f}, 2.0};
  PhiSpec phi{1.0};
  DyadicCube q{2, {1, 0}};
  double alpha = 3.0 / std::pow(phi(q.volume(g)), 2.0) * 0.99;
  auto d = cz_decompose(v, alpha, phi, 2.0);
  REQUIRE(d.cubes.size() == 1);
  CHECK(d.cubes[0].cube == q);
  double expect = 3.0 / std::pow(phi(2.0), 2.0);
  for (int i = 8; i < 16; ++i) CHECK(d.fbar[0][i] == doctest::Approx(expect).epsilon(1e-15));
  CHECK(fbar_mass_identity(d, 0).max_relative_error <= 1e-15);
}

TEST_CASE("parameter checks") {
  auto g = line(8, 1.0);
  VectorFunction v{{GridFunction(g, 1.0)}, 2.0};
  CHECK_THROWS_AS(cz_decompose(v, 0.0, PhiSpec{1.0}, 1.0), ParameterError);
  CHECK_THROWS_AS(cz_decompose(v, 1.0, PhiSpec{1.0}, 0.0), ParameterError);
  CHECK_THROWS_AS(cz_decompose(v, 1.0, PhiSpec{-1.0}, 1.0), ParameterError);
  auto d = cz_decompose(v, 0.5, PhiSpec{1.0}, 1.0);
  CHECK_THROWS_AS(fbar_mass_identity(d, 1), ParameterError);
}

}  // TEST_SUITE
