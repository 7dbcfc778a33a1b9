#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "weightlab/grid.hpp"
#include "weightlab/weight.hpp"

namespace weightlab {

// ---------------------------------------------------------------- maximal operators

namespace maximal_variants {
struct HL {};
struct Phi {
  PhiSpec phi{};
};
/// Balls, (1/w(5B)) * integral over B of |f| w.
struct Omega {
  Weight w{};
};
struct DyadicPhi {
  PhiSpec phi{};
  double eta = 1.0;
};
}  // namespace maximal_variants

using MaximalVariant = std::variant<maximal_variants::HL, maximal_variants::Phi,
                                    maximal_variants::Omega, maximal_variants::DyadicPhi>;

struct MaximalResult {
  GridFunction value;
  /// Some region of the family was skipped because it did not fit in the window.
  bool window_limited = false;
};

MaximalResult maximal_ex(const GridFunction& f, const MaximalVariant& variant);
GridFunction maximal(const GridFunction& f, const MaximalVariant& variant);

/// Normalized dyadic average (1/(phi(|Q|)^eta |Q|)) * integral over Q of |f|, with the
/// same summation order maximal() uses.
double dyadic_average(const GridFunction& f, const DyadicCube& q, const PhiSpec& phi, double eta);

// ---------------------------------------------------------------- singular integrals

struct KernelSpec {
  std::string name;
  int n = 1;
  std::function<double(const Point&)> K;
  double A = 1.0;
  std::function<double(double)> mu;
  double dini = 0.0;

  /// Samples the size bound, the doubling of mu and the Dini value.
  void validate() const;

  static KernelSpec hilbert();
  /// x_j / |x|^3 / (2 pi) in the plane.
  static KernelSpec riesz(int j);
};

GridFunction truncated_singular(const GridFunction& f, const KernelSpec& kernel, double eps);
/// Same quadrature evaluated at an arbitrary point x.
double truncated_singular_at(const GridFunction& f, const KernelSpec& kernel, double eps,
                             const Point& x);

/// h, 2h, 4h, ... up to 2L.
std::vector<double> dyadic_ladder(const Grid& grid);

GridFunction maximal_singular(const GridFunction& f, const KernelSpec& kernel,
                              const std::vector<double>& ladder);
double maximal_singular_at(const GridFunction& f, const KernelSpec& kernel,
                           const std::vector<double>& ladder, const Point& x);

// ---------------------------------------------------------------- oscillatory kernels

struct StrongKernelParams {
  double s = 1.0;
  double lambda = 0.25;
  /// Cho-Yang variant when both are set.
  std::optional<double> zeta;
  std::optional<int> k;

  bool cho_yang() const { return zeta.has_value(); }
  void validate(int n) const;
};

struct StrongResult {
  ComplexGridFunction value;
  bool low_confidence = false;
  /// Estimated relative quadrature error of the worst output point.
  double achieved_tolerance = 0.0;
};

StrongResult strongly_singular_ex(const GridFunction& f, const StrongKernelParams& params,
                                  long panel_budget = 4'000'000);
ComplexGridFunction strongly_singular(const GridFunction& f, const StrongKernelParams& params);

/// Integral over u in [U, inf) of e^{iu} u^{a-1}, a < 1, U > 0.
std::complex<double> oscillatory_tail(double U, double a);

/// Integral over t in [t0, t1] (0 < t0 < t1 <= 1) of e^{i t^{-s}} t^{-1-lambda}.
std::complex<double> radial_strong_integral(double t0, double t1, double s, double lambda);

// ---------------------------------------------------------------- pseudo-differential

struct SymbolSpec {
  std::string name;
  std::function<std::complex<double>(const Point& x, const Point& xi)> a;
  bool x_independent = false;
  /// Declared bounds C_{alpha,beta} for |alpha|, |beta| <= 2, indexed [alpha][beta].
  double C[3][3] = {{1, 1, 1}, {1, 1, 1}, {1, 1, 1}};

  void validate(const Grid& grid) const;

  static SymbolSpec identity();
  static SymbolSpec multiplier(std::function<double(const Point&)> g);
  /// exp(-|xi|^2 / width^2).
  static SymbolSpec bump(double width);
  /// (1 + 0.5 sin x_1) * xi_1 / sqrt(1 + |xi|^2).
  static SymbolSpec mixed();
};

/// Frequency of DFT index k (wrapped to [-N/2, N/2)) on the grid's lattice.
double frequency(const Grid& grid, int k);

ComplexGridFunction pseudo_differential(const ComplexGridFunction& f, const SymbolSpec& symbol);
ComplexGridFunction pseudo_differential(const GridFunction& f, const SymbolSpec& symbol);

// ---------------------------------------------------------------- handles and commutators

struct OperatorHandle {
  std::string name;
  bool linear = true;
  std::function<ComplexGridFunction(const GridFunction&)> apply;

  static OperatorHandle maximal(MaximalVariant variant);
  static OperatorHandle truncated(KernelSpec kernel, double eps);
  static OperatorHandle maximal_singular(KernelSpec kernel);
  static OperatorHandle strong(StrongKernelParams params);
  static OperatorHandle pseudo(SymbolSpec symbol);
};

/// b * T(f) - T(b f).
ComplexGridFunction commutator(const GridFunction& b, const OperatorHandle& op, const GridFunction& f);

}  // namespace weightlab
