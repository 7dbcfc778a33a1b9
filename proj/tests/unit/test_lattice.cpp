#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "support.hpp"
#include "weightlab/balls.hpp"
#include "weightlab/error.hpp"
#include "weightlab/numeric.hpp"
#include "weightlab/weight.hpp"

using namespace weightlab;
using namespace wltest;

TEST_SUITE("lattice") {

TEST_CASE("grid construction rejects bad shapes") {
  CHECK_THROWS_AS(Grid(Box{1, {0, 0}, 1.0}, 6), ParameterError);
  CHECK_THROWS_AS(Grid(Box{1, {0, 0}, 1.0}, 1), ParameterError);
  CHECK_THROWS_AS(Grid(Box{3, {0, 0}, 1.0}, 4), ParameterError);
  CHECK_THROWS_AS(Grid(Box{1, {0, 0}, -1.0}, 4), ParameterError);
  auto g = line(8, 4.0);
  CHECK(g.h() == 1.0);
  CHECK(g.finest_generation() == 3);
  CHECK(g.coord(0, 0) == -3.5);
  CHECK(g.locate(0, 0.2) == 4);
}

TEST_CASE("enumerate dyadic cubes") {
  auto g = line(4);
  auto one = enumerate_dyadic_cubes(g, 1, 1);
  REQUIRE(one.size() == 2);
  CHECK(one[0].cells(g) == CellBox{{0, 0}, {2, 1}});
  CHECK(one[1].cells(g) == CellBox{{2, 0}, {4, 1}});
  CHECK(enumerate_dyadic_cubes(g, 0, 2).size() == 7);
  CHECK_THROWS_AS(enumerate_dyadic_cubes(g, 0, 3), ParameterError);
  CHECK_THROWS_AS(enumerate_dyadic_cubes(g, 2, 1), ParameterError);

  // Pairwise disjointness and coverage by brute force over all pairs.
  auto p = plane(4);
  auto sq = enumerate_dyadic_cubes(p, 2, 2);
  REQUIRE(sq.size() == 16);
  std::size_t cells = 0;
  for (std::size_t a = 0; a < sq.size(); ++a) {
    cells += sq[a].cells(p).count();
    for (std::size_t b = a + 1; b < sq.size(); ++b) CHECK_FALSE(sq[a].cells(p).intersects(sq[b].cells(p)));
  }
  CHECK(cells == p.size());
}

TEST_CASE("every dyadic cube has one parent that contains it") {
  auto p = plane(16);
  auto cubes = enumerate_dyadic_cubes(p, 1, 4);
  for (const auto& c : cubes) {
    auto par = c.parent();
    CHECK(par.contains(c));
    CHECK(par.cells(p).contains(c.cells(p)));
    int parents = 0;
    for (const auto& d : enumerate_dyadic_cubes(p, c.g - 1, c.g - 1)) parents += d.cells(p).contains(c.cells(p));
    CHECK(parents == 1);
  }
  CHECK(dyadic_cube_of(p, 2, 13, 6) == DyadicCube{2, {3, 1}});
}

TEST_CASE("weighted measure closed forms") {
  auto g = line(8, 1.0);
  CHECK(weighted_measure(Weight::one(), g, CellBox{{4, 0}, {5, 1}}) == g.h());
  CHECK(weighted_measure(Weight::power(1.0), g, CellBox{{4, 0}, {8, 1}}) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(integrate_1d(Weight::power(2.0), -1.0, 2.0) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(integrate_1d(Weight::shifted(-2.0), 0.0, 1.0) == doctest::Approx(0.5).epsilon(1e-14));

  for (double beta : {-0.5, 0.5, 1.0, 2.5}) {
    for (double r : {0.1, 0.3, 1.0, 7.0}) {
      double ratio = weighted_measure(Weight::power(beta), Ball{{0, 0}, 2 * r}, 1) /
                     weighted_measure(Weight::power(beta), Ball{{0, 0}, r}, 1);
      CHECK(ratio == doctest::Approx(std::pow(2.0, beta + 1)).epsilon(1e-10));
      double ratio2 = weighted_measure(Weight::power(beta), Ball{{0, 0}, 2 * r}, 2) /
                      weighted_measure(Weight::power(beta), Ball{{0, 0}, r}, 2);
      CHECK(ratio2 == doctest::Approx(std::pow(2.0, beta + 2)).epsilon(1e-6));
    }
  }
}

TEST_CASE("non-integrable singularities give +inf") {
  auto g = line(8, 1.0);
  CHECK(std::isinf(weighted_measure(Weight::power(-1.0), g, CellBox{{3, 0}, {5, 1}})));
  CHECK(std::isinf(weighted_measure(Weight::power(-1.5), g, CellBox{{4, 0}, {5, 1}})));
  CHECK(std::isfinite(weighted_measure(Weight::power(-1.5), g, CellBox{{5, 0}, {8, 1}})));
  auto p = plane(8, 1.0);
  CHECK(std::isinf(weighted_measure(Weight::power(-2.0), p, DyadicCube{1, {1, 1}})));
  CHECK(std::isfinite(weighted_measure(Weight::power(-1.5), p, DyadicCube{1, {1, 1}})));

  GridFunction bad(g, 1.0);
  bad[3] = 0.0;
  CHECK_THROWS_AS(Weight::tabulated(bad), InvariantError);
}

TEST_CASE("2-D cell masses near the singular point against polar integration") {
  // The four cells touching 0 form the square [-h, h]^2; its mass of |x|^beta has the
  // closed form 8 * int_0^{pi/4} (h / cos t)^{beta+2} / (beta+2) dt, done here by Simpson.
  auto p = plane(16, 1.0);
  for (double beta : {-1.5, -0.5, 0.7}) {
    auto w = Weight::power(beta);
    double h = p.h();
    int M = 20000;
    double acc = 0.0;
    for (int k = 0; k <= M; ++k) {
      double t = (M_PI / 4) * k / M;
      double c = (k == 0 || k == M) ? 1 : (k % 2 ? 4 : 2);
      acc += c * std::pow(h / std::cos(t), beta + 2) / (beta + 2);
    }
    double exact = 8 * acc * (M_PI / 4) / (3.0 * M);
    double got = weighted_measure(w, p, CellBox{{7, 7}, {9, 9}});
    CHECK(got == doctest::Approx(exact).epsilon(1e-6));
  }
}

TEST_CASE("tiling, additivity and monotonicity of measures") {
  std::mt19937_64 rng(7);
  for (int n : {1, 2}) {
    auto g = n == 1 ? line(64, 2.0) : plane(16, 2.0);
    double total = std::pow(4.0, n);
    for (int gen = 0; gen <= g.finest_generation(); ++gen) {
      double s = 0.0;
      for (const auto& c : enumerate_dyadic_cubes(g, gen, gen)) s += weighted_measure(Weight::one(), g, c);
      CHECK(s == total);
    }
    for (const auto& w : {Weight::power(-0.5), Weight::shifted(1.5, {0.3, -0.2}), Weight::power(0.8, {0.25, 0.0})}) {
      double whole = weighted_measure(w, g, g.whole());
      for (int gen = 1; gen <= g.finest_generation(); ++gen) {
        double s = 0.0;
        for (const auto& c : enumerate_dyadic_cubes(g, gen, gen)) s += weighted_measure(w, g, c);
        CHECK(s == doctest::Approx(whole).epsilon(1e-12));
      }
      auto boxes = grid_cubes(g);
      std::uniform_int_distribution<std::size_t> pick(0, boxes.size() - 1);
      for (int t = 0; t < 300; ++t) {
        const auto& a = boxes[pick(rng)];
        const auto& b = boxes[pick(rng)];
        if (b.contains(a)) CHECK(weighted_measure(w, g, a) <= weighted_measure(w, g, b));
      }
    }
  }
  auto g = line(256, 4.0);
  for (double beta : {-0.7, 0.5, 3.0}) {
    auto w = Weight::power(beta, {0.1, 0.0});
    for (const auto& c : enumerate_dyadic_cubes(g, 0, 7)) {
      DyadicCube l{c.g + 1, {2 * c.k[0], 0}}, r{c.g + 1, {2 * c.k[0] + 1, 0}};
      double parent = weighted_measure(w, g, c);
      CHECK(parent == doctest::Approx(weighted_measure(w, g, l) + weighted_measure(w, g, r)).epsilon(1e-14));
    }
  }
}

TEST_CASE("weights: scaling, powers and products") {
  auto w = Weight::product(Weight::power(0.5), Weight::shifted(-1.0)).scaled(3.0);
  Point x{2.0, 0.0};
  CHECK(w(x) == doctest::Approx(3.0 * std::sqrt(2.0) / 3.0).epsilon(1e-15));
  CHECK(w.pow(2.0)(x) == doctest::Approx(9.0 * 2.0 / 9.0).epsilon(1e-14));
  CHECK(w.unscaled()(x) == doctest::Approx(std::sqrt(2.0) / 3.0).epsilon(1e-15));
  CHECK(PhiSpec{2.0}(3.0) == 16.0);
  CHECK_THROWS_AS(PhiSpec{0.0}.validate(), ParameterError);
  auto g = line(16, 1.0);
  auto samples = make_grid_function(g, [](const Point& p) { return 1.0 + p[0] * p[0]; });
  auto t = Weight::tabulated(samples);
  CHECK(weighted_measure(t, g, g.whole()) == doctest::Approx(g.h() * [&] {
                                                 double s = 0;
                                                 for (double v : samples.values()) s += v;
                                                 return s;
                                               }()).epsilon(1e-14));
}

TEST_CASE("make_grid_function samples cell centers") {
  auto g = line(4, 1.0);
  auto f = make_grid_function(g, [](const Point& x) { return std::fabs(x[0]); });
  CHECK(f.values() == std::vector<double>{0.75, 0.25, 0.25, 0.75});
  auto z = make_grid_function(g, [](const Point&) { return 0.0; });
  CHECK(z.support().empty());
  auto h = line(8, 4.0);
  auto chi = make_grid_function(h, [](const Point& x) { return (x[0] >= 0 && x[0] < 1) ? 1.0 : 0.0; }, true);
  CHECK(chi.support() == std::vector<std::size_t>{4});
  CHECK(chi.compact_support());
  CHECK_THROWS_AS(make_grid_function(g, [](const Point& x) { return std::log(x[0]); }), InputError);
}

TEST_CASE("csv round trip") {
  std::mt19937_64 rng(3);
  for (const auto& g : {line(16, 2.0, 0.5), plane(8, 1.0)}) {
    auto f = random_values(g, rng);
    std::stringstream ss;
    write_csv(ss, f);
    auto back = read_csv_real(ss);
    CHECK(back.grid() == g);
    CHECK(back.values() == f.values());
  }
  auto g = line(4, 1.0);
  ComplexGridFunction c(g, std::complex<double>(1.0, -0.5));
  std::stringstream ss;
  write_csv(ss, c);
  CHECK(read_csv(ss).values() == c.values());
  std::stringstream bad("# 1,4,1,0\n0,-0.75,1\n");
  CHECK_THROWS_AS(read_csv(bad), InputError);
}

TEST_CASE("ball sums agree with their member cells") {
  std::mt19937_64 rng(11);
  auto p = plane(16, 2.0);
  auto f = random_values(p, rng, 0.0, 1.0);
  const std::vector<double>* arrays[] = {&f.values()};
  int visited = 0;
  visit_balls(p, arrays, nullptr, 0.0, kInfinity, [&](const BallSums& b) {
    double s = 0.0;
    for (auto k : ball_cells(p, b.ball)) {
      s += f[k];
      auto c = p.center_of(k);
      CHECK(std::hypot(c[0] - b.ball.center[0], c[1] - b.ball.center[1]) <= b.ball.radius);
    }
    CHECK(b.sums[0] == doctest::Approx(s).epsilon(1e-13));
    ++visited;
  });
  CHECK(visited > 0);
  auto g = line(16, 2.0);
  auto h = random_values(g, rng, 0.0, 1.0);
  const std::vector<double>* a1[] = {&h.values()};
  std::size_t count = 0;
  visit_balls(g, a1, nullptr, 0.0, kInfinity, [&](const BallSums&) { ++count; });
  CHECK(count == 16 * 17 / 2);
}

}  // TEST_SUITE
