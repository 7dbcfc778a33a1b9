#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "weightlab/grid.hpp"
#include "weightlab/operators.hpp"
#include "weightlab/spaces.hpp"
#include "weightlab/weights.hpp"

namespace weightlab {

// ---------------------------------------------------------------- function families

struct TestFunction {
  std::string name;
  Sampler sampler;
};

/// Fixed, versioned family: four indicators at dyadic positions, two truncated Gaussians and
/// `random_steps` seeded step functions on a lattice of spacing radius/8. Everything is
/// supported in [-radius, radius)^n, so the same function is sampled at every refinement.
struct FamilySpec {
  static constexpr int kVersion = 1;
  std::uint64_t seed = 20170601;
  int random_steps = 20;
  bool indicators = true;
  bool gaussians = true;
  double radius = 1.0;
};

std::vector<TestFunction> function_family(const FamilySpec& spec, int n);

OperatorHandle identity_operator();

/// ||T f||_target / ||f||_source; ParameterError on a zero source norm, +inf propagates.
double norm_ratio(const OperatorHandle& op, const GridFunction& f, const NormSpec& source,
                  const NormSpec& target);
double norm_ratio(const GridFunction& tf, const GridFunction& f, const NormSpec& source,
                  const NormSpec& target);

// ---------------------------------------------------------------- probes

/// Probe tags: identity, t31, t32, t34, t36, t38, t41, t46, t48. Parameters are a flat
/// name -> number map; unknown names are rejected, missing ones take documented defaults.
struct ExperimentSpec {
  std::string theorem;
  std::vector<int> ladder{64, 128, 256};
  double L = 4.0;
  FamilySpec family{};
  std::map<std::string, double> params;

  /// Defaults for a tag, with `overrides` applied (keys: ladder, L, seed, random_steps,
  /// radius, and the tag's parameter names).
  static ExperimentSpec make(const std::string& theorem,
                             const std::map<std::string, std::string>& overrides = {});
  /// Throws ParameterError / HypothesisError naming the violated bound.
  void validate() const;
  double param(const std::string& key) const;
};

std::vector<std::string> probe_tags();

struct RatioRow {
  int step = 0;
  double scale = 0.0;  // N, or the cube side for witness ladders
  std::string function;
  std::vector<double> ratios;  // one per series
};

struct Series {
  std::string name;
  std::string source;
  std::string target;
  std::vector<double> suprema;
  std::vector<std::string> witnesses;
  std::vector<double> growth;
  Trend trend = Trend::Inconclusive;
};

struct ExperimentReport {
  static constexpr int kSchemaVersion = 1;
  std::string theorem;
  std::string title;
  std::string direction;
  std::map<std::string, std::string> parameters;
  std::uint64_t seed = 0;
  std::string ladder_kind;
  std::vector<double> ladder;
  std::vector<Series> series;
  std::vector<RatioRow> rows;
  Trend trend = Trend::Inconclusive;
  std::vector<std::string> notes;

  friend bool operator==(const ExperimentReport&, const ExperimentReport&) = default;
};

inline bool operator==(const RatioRow& a, const RatioRow& b) {
  return a.step == b.step && a.scale == b.scale && a.function == b.function && a.ratios == b.ratios;
}
inline bool operator==(const Series& a, const Series& b) {
  return a.name == b.name && a.source == b.source && a.target == b.target && a.suprema == b.suprema &&
         a.witnesses == b.witnesses && a.growth == b.growth && a.trend == b.trend;
}

/// Probe growth rule: diverging when the supremum grew by 1.5 per ladder step over the
/// last two steps; bounded when it grew by at most 1.25 over them.
constexpr double kProbeStepFactor = 1.5;

ExperimentReport boundedness_probe(const ExperimentSpec& spec);

std::string to_json_text(const ExperimentReport& report);
ExperimentReport report_from_json_text(const std::string& text);
/// Header plus one row per (ladder step, function), one ratio column per series.
void write_report_csv(std::ostream& out, const ExperimentReport& report);

// ---------------------------------------------------------------- norm chain

struct ChainReport {
  double p = 0, q = 0, r = 0, q1 = 0, q2 = 0;
  std::size_t functions = 0;
  /// min over f of WM^p_q / M^p_r, the observed constant of the first link.
  double observed_C = kInfinity;
  std::size_t weak_le_strong_violations = 0;
  double max_weak_over_strong = 0.0;
  /// M^p_q <= WM^p_p is tested with the layer-cake constant (p/(p-q))^(1/q); literal
  /// constant-1 violations are counted separately.
  double strong_weakp_constant = 1.0;
  std::size_t strong_le_weakp_violations = 0;
  std::size_t strong_le_weakp_literal_violations = 0;
  double max_strong_over_weakp = 0.0;
  double max_weakp_lorentz_rel_diff = 0.0;
  std::size_t lorentz_inf_le_q2_violations = 0;
  std::size_t lorentz_q2_le_q1_violations = 0;

  bool unit_links_hold(double tolerance = 1e-10) const {
    return weak_le_strong_violations == 0 && strong_le_weakp_violations == 0 &&
           max_weakp_lorentz_rel_diff <= tolerance && lorentz_inf_le_q2_violations == 0 &&
           lorentz_q2_le_q1_violations == 0;
  }
};

ChainReport chain_check(const std::vector<GridFunction>& fs, double p, double q, double r, const Weight& w,
                        double q1 = 1.0, double q2 = 2.0);

// ---------------------------------------------------------------- exponent arithmetic

struct Interval {
  double lo = 0.0, hi = 0.0;
  bool lo_open = true, hi_open = true;
  bool contains(double x) const {
    return (lo_open ? x > lo : x >= lo) && (hi_open ? x < hi : x <= hi);
  }
};

struct DerivedParameters {
  std::string theorem;
  std::map<std::string, double> inputs;
  std::map<std::string, double> values;
  std::map<std::string, Interval> ranges;
};

/// Tags and inputs:
///   sublinear  : n, p, lambda, kappa [, beta]  -> beta range, kappa1 range (with beta)
///   kappa_star : p, pstar, zeta, kappa [, r_omega] -> kappa_star
///   strong     : n, s, lambda [, p]            -> admissible p window
///   tstar      : p, delta [, kappa]            -> kappa range
/// Violated hypotheses raise HypothesisError naming the inequality.
DerivedParameters exponent_calculator(const std::string& theorem, const std::map<std::string, double>& inputs);

}  // namespace weightlab
