#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "support.hpp"
#include "weightlab/error.hpp"
#include "weightlab/spaces.hpp"

using namespace weightlab;
using namespace wltest;

namespace {

// Cell masses straight from the 1-D antiderivative, bypassing the mass tables.
std::vector<double> oracle_masses(const Weight& w, const Grid& g) {
  std::vector<double> m(g.size());
  for (int i = 0; i < g.N(); ++i) m[i] = integrate_1d(w, g.node(0, i), g.node(0, i + 1));
  return m;
}

double oracle_lebesgue(const GridFunction& f, double p, const Weight& w) {
  auto m = oracle_masses(w, f.grid());
  long double s = 0;
  for (std::size_t k = 0; k < f.size(); ++k) s += std::pow(std::fabs(f[k]), p) * m[k];
  return std::pow(static_cast<double>(s), 1.0 / p);
}

// Brute-force 1-D weighted Morrey: every interval, sums from scratch.
double oracle_morrey_1d(const GridFunction& f, double q, double kappa, const Weight& w) {
  auto m = oracle_masses(w, f.grid());
  int N = f.grid().N();
  double best = 0.0;
  for (int a = 0; a < N; ++a)
    for (int b = a + 1; b <= N; ++b) {
      long double in = 0, wq = 0;
      for (int i = a; i < b; ++i) {
        in += std::pow(std::fabs(f[i]), q) * m[i];
        wq += m[i];
      }
      best = std::max(best, std::pow(static_cast<double>(in / std::pow(wq, kappa)), 1.0 / q));
    }
  return best;
}

}  // namespace

TEST_SUITE("spaces") {

TEST_CASE("distribution function") {
  auto g = line(8, 4.0);
  auto chi = indicator(g, 0.0, 2.0);
  CHECK(distribution_function(chi, Weight::one(), 0.5) == 2.0);
  CHECK(distribution_function(chi, Weight::one(), 1.0) == 0.0);
  auto h = line(4, 1.0);
  auto f = make_grid_function(h, [](const Point& x) { return std::fabs(x[0]); });
  CHECK(distribution_function(f, Weight::one(), 0.5) == 1.0);
  CHECK_THROWS_AS(distribution_function(f, Weight::one(), -1.0), ParameterError);
}

TEST_CASE("rearrangement") {
  auto g = line(16, 2.0);
  auto chi = indicator(g, -0.5, 1.0);
  auto c = rearrangement(chi, Weight::power(0.5));
  REQUIRE(c.v.size() == 1);
  CHECK(c.v[0] == 1.0);
  CHECK(c.t[0] == doctest::Approx(integrate_1d(Weight::power(0.5), -0.5, 1.0)).epsilon(1e-14));
  CHECK(c(0.0) == 1.0);
  CHECK(c(c.t[0]) == 0.0);

  auto one = rearrangement(GridFunction(g, 3.0), Weight::one());
  CHECK(one.t == std::vector<double>{4.0});
  CHECK(one.v == std::vector<double>{3.0});

  std::mt19937_64 rng(5);
  for (int t = 0; t < 10; ++t) {
    auto f = random_step(g, rng);
    auto w = Weight::power(0.5);
    auto cur = rearrangement(f, w);
    for (int k = 0; k < 100; ++k) {
      double alpha = 2.0 * k / 99;
      CHECK(cur.level_length(alpha) == doctest::Approx(distribution_function(f, w, alpha)).epsilon(1e-14));
    }
  }
}

TEST_CASE("Lorentz norm of an indicator is w(E)^(1/p)") {
  auto g = line(64, 4.0);
  struct Case {
    double a, b, p, q;
    Weight w;
  };
  const Case cases[] = {
      {0, 1, 2, 1, Weight::one()},          {0, 1, 2, kInfinity, Weight::one()},
      {-1, 0.5, 1.5, 3, Weight::one()},     {-1, 0.5, 4, 0.5, Weight::one()},
      {0, 1, 2, 2, Weight::power(0.5)},     {0, 1, 3, 1, Weight::power(0.5)},
      {-2, 1, 1.2, kInfinity, Weight::power(0.5)}, {-0.5, 0.5, 2, 7, Weight::power(-0.5)},
      {0.25, 2, 5, 1, Weight::shifted(-1)}, {-3, 3, 2, 0.8, Weight::shifted(-1)},
      {1, 1.5, 1, 1, Weight::power(1.5)},   {-1, 1, 2.5, kInfinity, Weight::shifted(2)},
  };
  for (const auto& c : cases) {
    auto chi = indicator(g, c.a, c.b);
    double wE = 0.0;
    for (auto k : chi.support()) wE += integrate_1d(c.w, g.node(0, int(k)), g.node(0, int(k) + 1));
    CHECK(lorentz_norm(chi, c.p, c.q, c.w) == doctest::Approx(std::pow(wE, 1.0 / c.p)).epsilon(1e-10));
  }
  CHECK_THROWS_AS(lorentz_norm(GridFunction(g, 1.0), kInfinity, 2.0, Weight::one()), UnsupportedError);
}

TEST_CASE("Lorentz(p, p) equals the Lebesgue norm and decreases in q") {
  std::mt19937_64 rng(9);
  auto g = line(128, 4.0);
  for (const auto& w : {Weight::one(), Weight::power(0.5), Weight::shifted(-0.5)}) {
    for (int t = 0; t < 20; ++t) {
      auto f = random_step(g, rng);
      if (f.support().empty()) continue;
      for (double p : {1.0, 1.5, 2.0, 3.0}) {
        double oracle = oracle_lebesgue(f, p, w);
        CHECK(lorentz_norm(f, p, p, w) == doctest::Approx(oracle).epsilon(1e-10));
        CHECK(lebesgue_norm(f, p, w) == doctest::Approx(oracle).epsilon(1e-12));
        double prev = kInfinity;
        for (double q : {0.5, 1.0, 2.0, 4.0, kInfinity}) {
          double v = lorentz_norm(f, p, q, w);
          CHECK(v <= prev * (1 + 1e-12));
          prev = v;
        }
        // ||f||_p^p is the unweighted integral of (f*)^p over [0, inf).
        auto cur = rearrangement(f, w);
        double s = 0.0, prev_t = 0.0;
        for (std::size_t i = 0; i < cur.t.size(); ++i) {
          s += std::pow(cur.v[i], p) * (cur.t[i] - prev_t);
          prev_t = cur.t[i];
        }
        CHECK(std::pow(s, 1 / p) == doctest::Approx(oracle).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("Morrey norms: closed forms and brute force") {
  auto g = line(64, 4.0);
  GridFunction c(g, 0.75);
  auto v = morrey_norm(c, norms::WeightedMorrey{2.0, 0.5, Weight::one()});
  CHECK(v.value == doctest::Approx(0.75 * std::pow(8.0, 0.5 / 2.0)).epsilon(1e-14));
  CHECK(v.window_limited);

  auto chi = indicator(g, 0.0, 1.0);
  auto m = morrey_norm(chi, norms::WeightedMorrey{1.0, 0.5, Weight::one()});
  CHECK(m.value == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(m.region.cells == CellBox{{32, 0}, {40, 1}});
  CHECK_FALSE(m.window_limited);

  std::mt19937_64 rng(17);
  auto h = line(32, 2.0);
  for (int t = 0; t < 10; ++t) {
    auto f = random_step(h, rng);
    for (const auto& w : {Weight::one(), Weight::power(0.5), Weight::shifted(-1.0)})
      for (double q : {1.0, 2.0})
        for (double kappa : {0.25, 0.5, 0.9})
          CHECK(morrey_norm(f, norms::WeightedMorrey{q, kappa, w}).value ==
                doctest::Approx(oracle_morrey_1d(f, q, kappa, w)).epsilon(1e-12));
  }

  CHECK_THROWS_AS(morrey_norm(c, norms::WeightedMorrey{1.0, 1.0, Weight::one()}), ParameterError);
  CHECK_THROWS_AS(morrey_norm(c, norms::WeightedMorrey{0.5, 0.5, Weight::one()}), ParameterError);
  CHECK_THROWS_AS(morrey_norm(GridFunction(line(2, 4.0), 1.0), norms::LocalMorrey{1.0, 0.5}), ParameterError);
}

TEST_CASE("ball Morrey variants") {
  auto g = line(64, 4.0);
  auto chi = indicator(g, 0.0, 1.0);
  // Local: radius < 1 only. The best ball is [0, 1] itself, value 1^(1 - 0.5) = 1.
  CHECK(morrey_norm(chi, norms::LocalMorrey{1.0, 0.5}).value == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(morrey_norm(chi, norms::LocalMorrey{1.0, 0.5}).region.radius < 1.0);
  // Inhomogeneous: radius >= 1, so the smallest admissible ball has length 2.
  CHECK(morrey_norm(chi, norms::InhomMorrey{1.0, 0.5, Weight::one()}).value ==
        doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
  // Central: B_R(0) contains [0, min(R, 1)], best at R = 1 where the ratio is 1/sqrt(2).
  auto cm = morrey_norm(chi, norms::CentralMorrey{1.0, 0.5, Weight::one()});
  CHECK(cm.value == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
  CHECK(cm.region.radius == 1.0);
  CHECK(morrey_norm(chi, norms::CentralLocalMorrey{1.0, 0.5, Weight::one()}).value <= cm.value);
  // Two weights: w1 = w2 = 1 reduces to the cube family in 1-D.
  CHECK(morrey_norm(chi, norms::TwoWeightMorrey{1.0, 0.5, Weight::one(), Weight::one()}).value ==
        doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("norm chain links at unit constants") {
  std::mt19937_64 rng(23);
  auto g = line(64, 4.0);
  for (const auto& w : {Weight::one(), Weight::power(0.5)}) {
    for (int t = 0; t < 10; ++t) {
      auto f = random_step(g, rng);
      double p = 3.0, q = 1.5;
      double weak = morrey_norm(f, norms::WeakMorrey{p, q, w}).value;
      double strong = morrey_norm(f, morrey_pq(p, q, w)).value;
      CHECK(weak <= strong * (1 + 8 * 2.2e-16));
      double wmpp = morrey_norm(f, norms::WeakMorrey{p, p, w}).value;
      CHECK(wmpp == doctest::Approx(lorentz_norm(f, p, kInfinity, w)).epsilon(1e-10));
    }
  }
}

TEST_CASE("norms are absolutely homogeneous") {
  std::mt19937_64 rng(29);
  auto g = line(32, 2.0);
  const NormSpec specs[] = {norms::Lebesgue{2.0, Weight::power(0.5)},
                            norms::Lorentz{2.0, 1.0, Weight::one()},
                            norms::WeightedMorrey{1.0, 0.5, Weight::power(0.5)},
                            norms::WeakMorrey{2.0, 1.0, Weight::one()},
                            norms::CentralMorrey{2.0, 0.25, Weight::shifted(1.0)},
                            norms::BMO{},
                            norms::BMOp{2.0}};
  for (int t = 0; t < 5; ++t) {
    auto f = random_step(g, rng);
    for (const auto& s : specs) {
      double base = norm(f, s).value;
      for (double c : {-1.0, 0.5, 4.0, -0.125}) {
        GridFunction cf(g);
        for (std::size_t k = 0; k < f.size(); ++k) cf[k] = c * f[k];
        CHECK(norm(cf, s).value == std::fabs(c) * base);
      }
      GridFunction cf(g);
      for (std::size_t k = 0; k < f.size(); ++k) cf[k] = -2.7 * f[k];
      CHECK(norm(cf, s).value == doctest::Approx(2.7 * base).epsilon(1e-13));
    }
  }
}

TEST_CASE("BMO") {
  auto g = line(64, 4.0);
  CHECK(bmo_norm(GridFunction(g, 2.5)).value == 0.0);
  auto step = make_grid_function(g, [](const Point& x) { return x[0] >= 0 ? 1.0 : 0.0; });
  auto r = bmo_norm(step);
  CHECK(r.value == 0.5);
  CHECK(r.region.center[0] == 0.0);

  // Telescoping averages of log|x| over dilates of a small ball.
  auto h = line(256, 8.0);
  auto b = make_grid_function(h, [](const Point& x) { return std::log(std::fabs(x[0])); });
  double norm1 = bmo_norm(b).value;
  for (int c0 : {128, 100, 150}) {
    auto avg = [&](int half) {
      return cell_average(b, CellBox{{std::max(0, c0 - half), 0}, {std::min(256, c0 + half), 1}});
    };
    double bB = avg(1);
    for (int j = 0; j <= 6; ++j) {
      if (c0 - (2 << j) < 0 || c0 + (2 << j) > 256) break;
      CHECK(std::fabs(avg(2 << j) - bB) <= 2.0 * (j + 1) * norm1);
    }
  }
  CHECK(bmo_norm(b, 2.0).value >= norm1);
}

TEST_CASE("l^r modulus") {
  std::mt19937_64 rng(31);
  auto g = line(32, 2.0);
  auto f = random_values(g, rng);
  CHECK(ell_r_modulus(VectorFunction{{f}, 3.0}).values() == abs(f).values());
  auto two = ell_r_modulus(VectorFunction{{f, f}, 2.0});
  for (std::size_t k = 0; k < f.size(); ++k) CHECK(two[k] == doctest::Approx(std::sqrt(2.0) * std::fabs(f[k])).epsilon(1e-15));
  for (double r : {1.0, 1.5, 2.0, 4.0}) {
    for (int t = 0; t < 20; ++t) {
      std::vector<GridFunction> a, b, s;
      for (int k = 0; k < 3; ++k) {
        a.push_back(random_values(g, rng));
        b.push_back(random_values(g, rng));
        GridFunction sum(g);
        for (std::size_t i = 0; i < sum.size(); ++i) sum[i] = a.back()[i] + b.back()[i];
        s.push_back(sum);
      }
      auto ms = ell_r_modulus({s, r}), ma = ell_r_modulus({a, r}), mb = ell_r_modulus({b, r});
      for (std::size_t i = 0; i < ms.size(); ++i) CHECK(ms[i] <= (ma[i] + mb[i]) * (1 + 1e-15));
    }
  }
  CHECK_THROWS_AS(ell_r_modulus(VectorFunction{{}, 2.0}), ParameterError);
}

}  // TEST_SUITE
