#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "weightlab/grid.hpp"
#include "weightlab/numeric.hpp"
#include "weightlab/weight.hpp"

namespace weightlab {

namespace classes {
struct Ap {
  double p = 2.0;
};
struct A1 {};
/// Lorentz-adapted class, tested through subset ratios (|E|/|Q|) (w(Q)/w(E))^{1/p}.
struct Ap1 {
  double p = 2.0;
};
struct ApPhi {
  double p = 2.0;
  PhiSpec phi{};
};
struct ApDyadicPhi {
  double p = 2.0;
  PhiSpec phi{};
  double eta = 1.0;
};
struct RH {
  double r = 2.0;
};
struct Doubling {};
}  // namespace classes

using ClassSpec = std::variant<classes::Ap, classes::A1, classes::Ap1, classes::ApPhi,
                               classes::ApDyadicPhi, classes::RH, classes::Doubling>;

void validate(const ClassSpec& spec);
std::string describe(const ClassSpec& spec);

struct CubeFamily {
  enum class Kind { Dyadic, All };
  Grid grid;
  Kind kind = Kind::Dyadic;
  /// Dyadic generations 0..g_max; -1 means the finest generation.
  int g_max = -1;

  std::vector<CellBox> cubes() const;
  std::string describe() const;
};

using FamilyLadder = std::vector<CubeFamily>;

/// Dyadic families of generations 0..g for g = 0..g_max on one grid.
FamilyLadder dyadic_family_ladder(const Grid& grid, int g_max);
/// All grid cubes on windows [-L, L]^n of fixed cell size h, one family per L.
FamilyLadder window_family_ladder(int n, double h, const std::vector<double>& Ls);

double class_constant(const Weight& w, const ClassSpec& spec, const CubeFamily& family);

enum class Trend { Bounded, Diverging, Inconclusive };
std::string to_string(Trend t);

/// Trend of a ladder of suprema: diverging if the last value is +inf or it grew by at least
/// `two_step_factor` over the last two enlargements; bounded if that growth is at most 1.25.
Trend classify_trend(const std::vector<double>& values, double two_step_factor = 2.0);

struct CriticalIndex {
  enum class Status { Bracketed, Capped, NotAInfinity };
  Status status = Status::Bracketed;
  double r_lo = 1.0, r_hi = kCriticalCap;
  int bisections = 0;

  static constexpr double kCriticalCap = 64.0;
};

struct WeightReport {
  std::string weight;
  std::string spec;
  std::vector<std::string> families;
  std::vector<double> constants;
  Trend trend = Trend::Inconclusive;
  std::optional<CriticalIndex> critical;
};

WeightReport classify(const Weight& w, const ClassSpec& spec, const FamilyLadder& ladder);

/// max over cell centers of M(w)(x)/w(x), or M_phi(w)(x)/w(x) when phi is given.
double a1_check(const Weight& w, const Grid& grid, const std::optional<PhiSpec>& phi = std::nullopt);
WeightReport a1_report(const Weight& w, const std::vector<Grid>& grids,
                       const std::optional<PhiSpec>& phi = std::nullopt);

/// Bisection on r over the trend of RH(r) on the dyadic ladder 0..g_max of the grid.
CriticalIndex critical_index(const Weight& w, const Grid& grid, int g_max = -1);

struct ComparabilitySample {
  Ball ball;
  double e_lo = 0.0, e_hi = 0.0;  // E = [e_lo, e_hi] inside the ball
};

struct ComparabilityReport {
  /// min over samples of (w(E)/w(B)) / (|E|/|B|)^p and max of (w(E)/w(B)) / (|E|/|B|)^{(r-1)/r}.
  double C1 = kInfinity, C2 = 0.0;
  std::size_t witness_C1 = 0, witness_C2 = 0;
  bool collapsed = false;
  /// Largest observed (1/|B|) int_B |f| / ((1/w(B)) int_B |f|^p w)^{1/p}.
  std::optional<double> averaging_constant;
};

/// One-dimensional; balls and subsets are intervals, measures exact integrals.
ComparabilityReport comparability_check(const Weight& w, double p, double r,
                                        const std::vector<ComparabilitySample>& samples,
                                        const std::vector<GridFunction>& fs = {});

}  // namespace weightlab
