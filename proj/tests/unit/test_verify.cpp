#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "support.hpp"
#include "weightlab/error.hpp"
#include "weightlab/verify.hpp"

using namespace weightlab;
using namespace wltest;

namespace {

std::size_t csv_rows(const ExperimentReport& r) {
  std::ostringstream os;
  write_report_csv(os, r);
  std::istringstream in(os.str());
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) ++n;
  return n - 1;
}

// Closed forms for w = x on [0, l], p = 2: the witness quantities reduce to logarithms.
double oracle_witness_beta1(double l, double eps, double a0) {
  double mass = std::log((l + eps) / eps);
  double norm2 = std::log((l + eps) / eps) + eps / (l + eps) - 1.0;
  double lambda = mass / (2 * std::pow(1 + l, a0) * l);
  return lambda * std::sqrt(l * l / 2) / std::sqrt(norm2);
}

}  // namespace

TEST_SUITE("verify") {

TEST_CASE("function family is fixed and refinement-independent") {
  FamilySpec spec;
  auto a = function_family(spec, 1), b = function_family(spec, 1);
  REQUIRE(a.size() == 26);
  std::set<std::string> names;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].name == b[i].name);
    names.insert(a[i].name);
  }
  CHECK(names.size() == a.size());
  // A cell center of the coarse grid is a point of every finer sampling of the same function.
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (const auto& f : a)
    for (int t = 0; t < 50; ++t) {
      Point x{u(rng), 0.0};
      CHECK(f.sampler(x) == b[&f - &a[0]].sampler(x));
      if (std::fabs(x[0]) >= 1.0) CHECK(f.sampler(x) == 0.0);
    }
  auto coarse = make_grid_function(line(64), a[10].sampler), fine = make_grid_function(line(256), a[10].sampler);
  CHECK(lebesgue_norm(coarse, 2.0, Weight::one()) == doctest::Approx(lebesgue_norm(fine, 2.0, Weight::one())).epsilon(1e-14));

  FamilySpec other = spec;
  other.seed += 1;
  auto c = function_family(other, 1);
  bool differs = false;
  for (double x = -0.97; x < 1.0; x += 0.125) differs = differs || c[10].sampler({x, 0}) != a[10].sampler({x, 0});
  CHECK(differs);
  CHECK(function_family(spec, 2).size() == 26);
  CHECK_THROWS_AS(function_family(spec, 3), ParameterError);
}

TEST_CASE("norm ratio examples") {
  auto g = line(128, 4.0);
  auto f = indicator(g, -0.3, 1.1);
  NormSpec l2 = norms::Lebesgue{2.0, Weight::power(0.5)};
  CHECK(norm_ratio(identity_operator(), f, l2, l2) == 1.0);

  auto one = GridFunction(g, 1.0);
  auto hl = OperatorHandle::maximal(maximal_variants::HL{});
  NormSpec l3 = norms::Lebesgue{3.0, Weight::one()};
  CHECK(norm_ratio(hl, one, l3, l3) == doctest::Approx(1.0).epsilon(1e-14));

  // chi_[0,1] on [-8, 8]: L^2 into L^{2,inf}, stable under refinement.
  NormSpec src = norms::Lebesgue{2.0, Weight::one()}, tgt = norms::Lorentz{2.0, kInfinity, Weight::one()};
  double r128 = norm_ratio(hl, indicator(line(128, 8.0), 0.0, 1.0), src, tgt);
  double r256 = norm_ratio(hl, indicator(line(256, 8.0), 0.0, 1.0), src, tgt);
  CHECK(std::isfinite(r256));
  CHECK(std::fabs(r256 / r128 - 1) < 0.05);

  CHECK_THROWS_AS(norm_ratio(identity_operator(), GridFunction(g, 0.0), l2, l2), ParameterError);
  // A cell at the origin has infinite |x|^-1 mass; the ratio is +inf, not an error.
  NormSpec singular = norms::Lebesgue{1.0, Weight::power(-1.0)};
  CHECK(std::isinf(norm_ratio(identity_operator(), indicator(g, -0.5, 0.5), src, singular)));
}

TEST_CASE("exponent calculator examples") {
  auto d = exponent_calculator("sublinear", {{"n", 1}, {"p", 2}, {"lambda", 0.25}, {"kappa", 0.75}});
  CHECK(d.ranges.at("beta").lo == doctest::Approx(-1.0 / 3).epsilon(1e-15));
  CHECK(d.ranges.at("beta").hi == doctest::Approx(1.0).epsilon(1e-15));
  auto e = exponent_calculator("sublinear", {{"n", 1}, {"p", 2}, {"lambda", 0.25}, {"kappa", 0.75}, {"beta", 0.5}});
  CHECK(e.values.at("kappa1_max") == doctest::Approx(0.75 - 0.5 / 1.5).epsilon(1e-15));
  CHECK_FALSE(e.ranges.at("kappa1").contains(0.0));
  CHECK(e.ranges.at("kappa1").contains(0.75 - 0.5 / 1.5));
  try {
    exponent_calculator("sublinear", {{"n", 1}, {"p", 2}, {"lambda", 0.25}, {"kappa", 0.75}, {"beta", 1.0}});
    FAIL("beta at the open end was accepted");
  } catch (const HypothesisError& err) {
    CHECK(err.violated().find("beta") != std::string::npos);
  }

  auto k = exponent_calculator("kappa_star", {{"p", 4}, {"pstar", 1}, {"zeta", 1}, {"kappa", 0.5}});
  CHECK(k.values.at("kappa_star") == 0.875);
  CHECK_THROWS_AS(exponent_calculator("kappa_star", {{"p", 4}, {"pstar", 1}, {"zeta", 1}, {"kappa", 0.5}, {"r_omega", 1.2}}),
                  HypothesisError);

  try {
    exponent_calculator("strong", {{"n", 1}, {"s", 1}, {"lambda", 0.6}});
    FAIL("lambda > ns/2 was accepted");
  } catch (const HypothesisError& err) {
    CHECK(err.violated() == "0 < lambda < n*s/2");
  }
  auto s = exponent_calculator("strong", {{"n", 1}, {"s", 1}, {"lambda", 0.25}, {"p", 2}});
  CHECK(s.ranges.at("p").lo == doctest::Approx(4.0 / 3).epsilon(1e-15));
  CHECK(s.ranges.at("p").hi == 4.0);
  CHECK_THROWS_AS(exponent_calculator("strong", {{"n", 1}, {"s", 1}, {"lambda", 0.25}, {"p", 4}}), HypothesisError);

  auto t = exponent_calculator("tstar", {{"p", 2}, {"delta", 2}});
  CHECK(t.values.at("kappa_max") == 0.25);
  CHECK_THROWS_AS(exponent_calculator("tstar", {{"p", 2}, {"delta", 2}, {"kappa", 0.25}}), HypothesisError);
  CHECK_THROWS_AS(exponent_calculator("nope", {}), ParameterError);
  CHECK_THROWS_AS(exponent_calculator("strong", {{"n", 1}}), ParameterError);
}

TEST_CASE("chain check on indicators and random steps") {
  auto g = line(64, 4.0);
  std::vector<GridFunction> chis;
  for (double a : {-1.0, -0.25, 0.0, 0.5}) chis.push_back(indicator(g, a, a + 0.75));
  for (const Weight& w : {Weight::one(), Weight::power(0.5)}) {
    auto c = chain_check(chis, 2.0, 1.5, 1.0, w);
    CHECK(c.unit_links_hold());
    CHECK(c.max_weak_over_strong == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::isfinite(c.observed_C));
    CHECK(c.observed_C > 0);
  }

  std::mt19937_64 rng(11);
  std::vector<GridFunction> steps;
  for (int i = 0; i < 15; ++i) steps.push_back(random_step(g, rng));
  for (const Weight& w : {Weight::one(), Weight::power(0.5)}) {
    auto c = chain_check(steps, 3.0, 2.0, 1.0, w, 1.0, 2.5);
    CHECK(c.functions == 15);
    CHECK(c.weak_le_strong_violations == 0);
    CHECK(c.lorentz_q2_le_q1_violations == 0);
    CHECK(c.lorentz_inf_le_q2_violations == 0);
    CHECK(c.max_weakp_lorentz_rel_diff <= 1e-10);
    CHECK(c.strong_le_weakp_violations == 0);
    CHECK(c.strong_weakp_constant == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));
  }
  CHECK_THROWS_AS(chain_check(steps, 2.0, 2.5, 1.0, Weight::one()), ParameterError);
}

TEST_CASE("probe specs validate before running") {
  auto s = ExperimentSpec::make("t36", {{"kappa", "0.5"}, {"seed", "9"}});
  CHECK(s.param("kappa") == 0.5);
  CHECK(s.family.seed == 9);
  try {
    ExperimentSpec::make("t36", {{"kappa", "1.5"}});
    FAIL("kappa outside (0,1) was accepted");
  } catch (const HypothesisError& e) {
    CHECK(e.violated() == "0 < kappa < 1");
  }
  CHECK_THROWS_AS(ExperimentSpec::make("t36", {{"kapa", "0.5"}}), ParameterError);
  CHECK_THROWS_AS(ExperimentSpec::make("t31", {{"ladder", "128,64"}}), ParameterError);
  CHECK_THROWS_AS(ExperimentSpec::make("t31", {{"ladder", "64,96"}}), ParameterError);
  CHECK_THROWS_AS(ExperimentSpec::make("t31", {{"p", "two"}}), ParameterError);
  CHECK_THROWS_AS(ExperimentSpec::make("t99"), ParameterError);
  CHECK_THROWS_AS(ExperimentSpec::make("t46", {{"lambda", "0.6"}}), HypothesisError);
  CHECK_THROWS_AS(ExperimentSpec::make("t38", {{"r", "1.5"}}), HypothesisError);
  CHECK(ExperimentSpec::make("t31", {{"ladder", "32, 64"}}).ladder == std::vector<int>{32, 64});
  CHECK(probe_tags().size() == 9);
}

TEST_CASE("identity probe is bounded and deterministic") {
  auto spec = ExperimentSpec::make("identity", {{"ladder", "32,64,128"}});
  auto a = boundedness_probe(spec), b = boundedness_probe(spec);
  CHECK(to_json_text(a) == to_json_text(b));
  CHECK(a.trend == Trend::Bounded);
  for (const auto& row : a.rows) CHECK(row.ratios[0] == 1.0);
  CHECK(csv_rows(a) == spec.ladder.size() * function_family(spec.family, 1).size());
  CHECK(a.parameters.at("ladder") == "32,64,128");

  auto other = ExperimentSpec::make("identity", {{"ladder", "32,64,128"}, {"seed", "5"}});
  CHECK(to_json_text(boundedness_probe(other)) != to_json_text(a));
}

TEST_CASE("report JSON round trip and CSV shape") {
  auto spec = ExperimentSpec::make("t32", {{"ladder", "64,128"}});
  auto r = boundedness_probe(spec);
  auto text = to_json_text(r);
  auto back = report_from_json_text(text);
  CHECK(back == r);
  CHECK(to_json_text(back) == text);
  CHECK(csv_rows(r) == 2 * 6);

  ExperimentReport empty;
  empty.theorem = "identity";
  auto e = report_from_json_text(to_json_text(empty));
  CHECK(e == empty);
  CHECK(to_json_text(empty).find("\"rows\": []") != std::string::npos);

  ExperimentReport inf = empty;
  inf.series.push_back(Series{"s", "a", "b", {1.0, kInfinity}, {"f", "g"}, {kInfinity}, Trend::Diverging});
  inf.rows.push_back({0, 64, "f", {kInfinity}});
  CHECK(report_from_json_text(to_json_text(inf)) == inf);

  CHECK_THROWS_AS(report_from_json_text("{"), InputError);
  CHECK_THROWS_AS(report_from_json_text("{\"schema_version\": 1}"), InputError);
}

TEST_CASE("t36 witness rows agree with closed-form integrals") {
  auto spec = ExperimentSpec::make("t36", {{"beta", "1"}, {"eps", "1e-3"}, {"a0", "0.5"}, {"steps", "6"}});
  auto r = boundedness_probe(spec);
  REQUIRE(r.rows.size() == 6);
  for (const auto& row : r.rows) {
    double l = std::ldexp(1.0, -row.step);
    CHECK(row.scale == l);
    CHECK(row.ratios[0] == doctest::Approx(oracle_witness_beta1(l, 1e-3, 0.5)).epsilon(1e-9));
  }
  CHECK(r.ladder_kind == "Q-halving");
}

TEST_CASE("probe directions follow the weight class") {
  auto pos = boundedness_probe(ExperimentSpec::make("t32", {{"ladder", "64,128"}}));
  CHECK(pos.direction == "positive");
  auto neg = boundedness_probe(ExperimentSpec::make("t36"));
  CHECK(neg.direction == "contrapositive");
}

}  // TEST_SUITE
