#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "weightlab/grid.hpp"

namespace weightlab {

/// One factor of a symbolic weight: |x - c|^e (Power) or (1 + |x - c|)^e (Shifted).
struct WeightFactor {
  enum class Kind { Power, Shifted };
  Kind kind = Kind::Power;
  Point center{0.0, 0.0};
  double exponent = 0.0;
};

/// Positive weight: scale * product of factors, or a table of cell values.
class Weight {
 public:
  Weight() = default;

  static Weight one();
  static Weight power(double beta, Point center = {0.0, 0.0});
  static Weight shifted(double gamma, Point center = {0.0, 0.0});
  static Weight product(const Weight& a, const Weight& b);
  /// Throws InvariantError unless every sample is finite and > 0.
  static Weight tabulated(const GridFunction& samples);

  double operator()(const Point& x) const;

  /// w^e; for symbolic weights the exponents are multiplied by e.
  Weight pow(double e) const;
  Weight scaled(double c) const;
  /// The same weight with scale 1 (class constants are 0-homogeneous).
  Weight unscaled() const {
    Weight w = *this;
    w.scale_ = 1.0;
    return w;
  }

  double scale() const { return scale_; }
  const std::vector<WeightFactor>& factors() const { return factors_; }
  bool is_tabulated() const { return table_ != nullptr; }
  const GridFunction& table() const { return *table_; }
  const void* table_id() const { return table_.get(); }
  bool is_constant() const { return !table_ && factors_.empty(); }

  std::string describe() const;

 private:
  double scale_ = 1.0;
  std::vector<WeightFactor> factors_;
  std::shared_ptr<const GridFunction> table_;
};

/// phi(t) = (1 + t)^alpha0.
struct PhiSpec {
  double alpha0 = 1.0;

  double operator()(double t) const;
  void validate() const;
};

/// Per-cell masses of w on a grid, with O(1) queries over cell boxes.
class MassTable {
 public:
  MassTable() = default;
  MassTable(const Weight& w, const Grid& grid);

  const Grid& grid() const { return grid_; }
  double cell(std::size_t k) const { return cells_[k]; }
  const std::vector<double>& cells() const { return cells_; }
  /// w(box); exact antiderivative for single-factor 1-D weights, else a prefix-sum lookup.
  double operator()(const CellBox& box) const;
  double sum(std::span<const std::size_t> cells) const;

 private:
  Grid grid_{};
  Weight weight_{};
  bool closed_form_ = false;
  std::vector<double> cells_;
  std::vector<long double> prefix_;
  std::vector<int> inf_prefix_;
};

std::vector<double> cell_masses(const Weight& w, const Grid& grid);

/// Integral of w over a region of the grid box; +inf for non-integrable singularities.
double weighted_measure(const Weight& w, const Grid& grid, const CellBox& region);
double weighted_measure(const Weight& w, const Grid& grid, const DyadicCube& region);
double weighted_measure(const Weight& w, const Grid& grid, std::span<const std::size_t> cells);
/// Continuous measure of the ball {|x - c| < r} in dimension n.
double weighted_measure(const Weight& w, const Ball& ball, int n);

/// 1-D integral of w over [a, b] (closed form for a single factor).
double integrate_1d(const Weight& w, double a, double b);

}  // namespace weightlab
