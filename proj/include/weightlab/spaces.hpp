#pragma once

#include <limits>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "weightlab/grid.hpp"
#include "weightlab/numeric.hpp"
#include "weightlab/weight.hpp"

namespace weightlab {

namespace norms {

struct Lebesgue {
  double p = 2.0;
  Weight w{};
};
/// q may be +inf.
struct Lorentz {
  double p = 2.0, q = 2.0;
  Weight w{};
};
/// Cubes, normalizer w(Q)^kappa, integrand |f|^q w.
struct WeightedMorrey {
  double q = 1.0, kappa = 0.5;
  Weight w{};
};
/// Balls, normalizer w1(B)^kappa, integrand |f|^q w2.
struct TwoWeightMorrey {
  double q = 1.0, kappa = 0.5;
  Weight w1{}, w2{};
};
/// Cubes, sup over lambda of lambda * w({|f| > lambda} in Q)^{1/q} / w(Q)^{1/q - 1/p}.
struct WeakMorrey {
  double p = 2.0, q = 1.0;
  Weight w{};
};
/// Balls with radius < 1, unweighted.
struct LocalMorrey {
  double q = 1.0, kappa = 0.5;
};
/// Balls with radius >= 1, normalizer w(B)^kappa, integrand |f|^q w.
struct InhomMorrey {
  double q = 1.0, kappa = 0.5;
  Weight w{};
};
/// Balls about the origin, normalizer w(B_R(0))^kappa, unweighted integrand.
struct CentralMorrey {
  double q = 1.0, kappa = 0.5;
  Weight w{};
};
struct CentralLocalMorrey {
  double q = 1.0, kappa = 0.5;
  Weight w{};
};
struct BMO {};
struct BMOp {
  double p = 2.0;
};

}  // namespace norms

using NormSpec =
    std::variant<norms::Lebesgue, norms::Lorentz, norms::WeightedMorrey, norms::TwoWeightMorrey,
                 norms::WeakMorrey, norms::LocalMorrey, norms::InhomMorrey, norms::CentralMorrey,
                 norms::CentralLocalMorrey, norms::BMO, norms::BMOp>;

/// M^p_q = weighted Morrey with kappa = 1 - q/p.
NormSpec morrey_pq(double p, double q, const Weight& w);

/// Throws ParameterError naming the violated bound.
void validate(const NormSpec& spec);
std::string describe(const NormSpec& spec);

struct Region {
  enum class Kind { None, Cube, Ball };
  Kind kind = Kind::None;
  CellBox cells{};
  Point center{0.0, 0.0};
  double radius = 0.0;

  std::string describe(const Grid& grid) const;
};

struct NormValue {
  double value = 0.0;
  Region region{};
  bool window_limited = false;
};

struct VectorFunction {
  std::vector<GridFunction> components;
  double r = 2.0;

  const Grid& grid() const;
  void validate() const;
};

/// Step function f*(t) = v[i] on [t[i-1], t[i]) (t[-1] = 0), zero beyond t.back().
struct RearrangementCurve {
  std::vector<double> t;
  std::vector<double> v;

  double operator()(double s) const;
  /// Measure of {s : f*(s) > alpha}.
  double level_length(double alpha) const;
};

double distribution_function(const GridFunction& f, const Weight& w, double alpha);
RearrangementCurve rearrangement(const GridFunction& f, const Weight& w);

double lebesgue_norm(const GridFunction& f, double p, const Weight& w);
double lorentz_norm(const GridFunction& f, double p, double q, const Weight& w);
double lorentz_norm(const RearrangementCurve& curve, double p, double q);

NormValue morrey_norm(const GridFunction& f, const NormSpec& spec);
NormValue bmo_norm(const GridFunction& b, double p = 1.0);

/// Dispatches on the NormSpec alternative; Lebesgue/Lorentz carry no region.
NormValue norm(const GridFunction& f, const NormSpec& spec);

GridFunction ell_r_modulus(const VectorFunction& v);

/// Cell masses of w on grid, cached per (weight, grid).
std::shared_ptr<const MassTable> mass_table(const Weight& w, const Grid& grid);

/// Mean of b over the cells of a box, with compensated summation.
double cell_average(const GridFunction& b, const CellBox& box);

}  // namespace weightlab
