#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace weightlab {

using Point = std::array<double, 2>;

/// Cube of side 2L centered at `center`; n in {1, 2}. Axis 1 is unused in 1-D.
struct Box {
  int n = 1;
  Point center{0.0, 0.0};
  double L = 1.0;

  void validate() const;
};

/// Half-open block of cell indices [lo, hi) per axis. In 1-D axis 1 is [0, 1).
struct CellBox {
  std::array<int, 2> lo{0, 0};
  std::array<int, 2> hi{1, 1};

  int extent(int axis) const { return hi[axis] - lo[axis]; }
  bool empty() const { return hi[0] <= lo[0] || hi[1] <= lo[1]; }
  std::size_t count() const {
    return empty() ? 0 : static_cast<std::size_t>(extent(0)) * static_cast<std::size_t>(extent(1));
  }
  bool contains(const CellBox& other) const;
  bool intersects(const CellBox& other) const;
  bool contains_cell(int i, int j) const {
    return i >= lo[0] && i < hi[0] && j >= lo[1] && j < hi[1];
  }
  friend bool operator==(const CellBox&, const CellBox&) = default;
};

class Grid {
 public:
  Grid() = default;
  Grid(Box box, int cells_per_axis);

  int n() const { return box_.n; }
  int N() const { return N_; }
  double h() const { return h_; }
  double L() const { return box_.L; }
  const Box& box() const { return box_; }
  int finest_generation() const { return levels_; }

  std::size_t size() const { return n() == 1 ? N_ : static_cast<std::size_t>(N_) * N_; }
  double cell_volume() const { return n() == 1 ? h_ : h_ * h_; }

  /// Lower node coordinate of cell index i along `axis`; node(axis, N) is the upper edge.
  double node(int axis, int i) const { return box_.center[axis] - box_.L + i * h_; }
  double coord(int axis, int i) const { return box_.center[axis] - box_.L + (i + 0.5) * h_; }

  std::size_t flat(int i, int j = 0) const { return static_cast<std::size_t>(j) * N_ + i; }
  std::array<int, 2> unflat(std::size_t k) const {
    return {static_cast<int>(k % N_), static_cast<int>(k / N_)};
  }
  Point center_of(std::size_t k) const;

  CellBox whole() const;
  /// Cell index containing coordinate x along axis (clamped to the grid).
  int locate(int axis, double x) const;

  /// Cube side length / volume of a CellBox with equal extents (or interval in 1-D).
  double side(const CellBox& b) const { return b.extent(0) * h_; }
  double volume(const CellBox& b) const;

  bool operator==(const Grid& o) const {
    return box_.n == o.box_.n && box_.center == o.box_.center && box_.L == o.box_.L && N_ == o.N_;
  }

 private:
  Box box_{};
  int N_ = 2;
  double h_ = 1.0;
  int levels_ = 1;
};

struct DyadicCube {
  int g = 0;
  std::array<int, 2> k{0, 0};

  CellBox cells(const Grid& grid) const;
  double side(const Grid& grid) const;
  double volume(const Grid& grid) const;
  DyadicCube parent() const { return {g - 1, {k[0] >> 1, k[1] >> 1}}; }
  bool contains(const DyadicCube& other) const;
  friend bool operator==(const DyadicCube&, const DyadicCube&) = default;
};

/// All dyadic cubes of generations g_min..g_max, generation-major, row-major within.
std::vector<DyadicCube> enumerate_dyadic_cubes(const Grid& grid, int g_min, int g_max);

/// Generation-g dyadic cube containing the cell (i, j).
DyadicCube dyadic_cube_of(const Grid& grid, int g, int i, int j = 0);

struct Ball {
  Point center{0.0, 0.0};
  double r = 1.0;

  Ball dilate(double c) const { return {center, c * r}; }
};

/// Grid-anchored cube family: every node-aligned interval in 1-D; in 2-D every
/// square whose side is a power-of-two number of cells, at every position.
std::vector<CellBox> grid_cubes(const Grid& grid);

/// Same family restricted to cube side (in cells) == side_cells.
std::vector<CellBox> grid_cubes_of_side(const Grid& grid, int side_cells);

template <class T>
class BasicGridFunction {
 public:
  using value_type = T;

  BasicGridFunction() = default;
  explicit BasicGridFunction(const Grid& grid, T fill = T{})
      : grid_(grid), values_(grid.size(), fill) {}
  BasicGridFunction(const Grid& grid, std::vector<T> values);

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  T& operator[](std::size_t k) { return values_[k]; }
  const T& operator[](std::size_t k) const { return values_[k]; }
  T& at(int i, int j = 0) { return values_[grid_.flat(i, j)]; }
  const T& at(int i, int j = 0) const { return values_[grid_.flat(i, j)]; }
  const std::vector<T>& values() const { return values_; }
  std::vector<T>& values() { return values_; }

  bool compact_support() const { return compact_support_; }
  void set_compact_support(bool v) { compact_support_ = v; }

  /// Indices of cells with a nonzero sample.
  std::vector<std::size_t> support() const;

 private:
  Grid grid_{};
  std::vector<T> values_;
  bool compact_support_ = false;
};

using GridFunction = BasicGridFunction<double>;
using ComplexGridFunction = BasicGridFunction<std::complex<double>>;

using Sampler = std::function<double(const Point&)>;

/// Samples at cell centers; throws InputError on a non-finite sample.
GridFunction make_grid_function(const Grid& grid, const Sampler& sampler,
                                bool compact_support = false);

GridFunction abs(const GridFunction& f);
GridFunction abs(const ComplexGridFunction& f);
ComplexGridFunction to_complex(const GridFunction& f);
GridFunction real_part(const ComplexGridFunction& f);

void require_same_grid(const Grid& a, const Grid& b, const char* what);

void write_csv(std::ostream& out, const GridFunction& f);
void write_csv(std::ostream& out, const ComplexGridFunction& f);
/// Reads either layout; the imaginary column, when present, is returned too.
ComplexGridFunction read_csv(std::istream& in);
GridFunction read_csv_real(std::istream& in);
GridFunction load_csv(const std::string& path);
void save_csv(const std::string& path, const GridFunction& f);
void save_csv(const std::string& path, const ComplexGridFunction& f);

}  // namespace weightlab
