#include "weightlab/grid.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "weightlab/error.hpp"

namespace weightlab {

namespace {

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s) {
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw InputError("csv: cannot parse number '" + s + "'");
  }
  while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  if (pos != s.size()) throw InputError("csv: trailing characters in '" + s + "'");
  return v;
}

}  // namespace

void Box::validate() const {
  if (n != 1 && n != 2) throw ParameterError("box dimension must be 1 or 2");
  if (!(L > 0) || !std::isfinite(L)) throw ParameterError("box half-width L must be positive");
  if (!std::isfinite(center[0]) || !std::isfinite(center[1]))
    throw ParameterError("box center must be finite");
}

bool CellBox::contains(const CellBox& o) const {
  return o.lo[0] >= lo[0] && o.hi[0] <= hi[0] && o.lo[1] >= lo[1] && o.hi[1] <= hi[1];
}

bool CellBox::intersects(const CellBox& o) const {
  return o.lo[0] < hi[0] && lo[0] < o.hi[0] && o.lo[1] < hi[1] && lo[1] < o.hi[1];
}

Grid::Grid(Box box, int cells_per_axis) : box_(box), N_(cells_per_axis) {
  box_.validate();
  if (box_.n == 1) box_.center[1] = 0.0;
  if (N_ < 2 || !is_power_of_two(N_))
    throw ParameterError("cells per axis must be a power of two >= 2, got " + std::to_string(N_));
  h_ = 2.0 * box_.L / N_;
  if (h_ * N_ != 2.0 * box_.L)
    throw ParameterError("h*N != 2L in floating point; choose L with an exact binary expansion");
  levels_ = 0;
  while ((1 << levels_) < N_) ++levels_;
}

Point Grid::center_of(std::size_t k) const {
  auto [i, j] = unflat(k);
  return {coord(0, i), n() == 2 ? coord(1, j) : 0.0};
}

CellBox Grid::whole() const {
  return {{0, 0}, {N_, n() == 2 ? N_ : 1}};
}

int Grid::locate(int axis, double x) const {
  double t = std::floor((x - node(axis, 0)) / h_);
  if (t < 0) return 0;
  if (t >= N_) return N_ - 1;
  return static_cast<int>(t);
}

double Grid::volume(const CellBox& b) const {
  double v = b.extent(0) * h_;
  if (n() == 2) v *= b.extent(1) * h_;
  return v;
}

CellBox DyadicCube::cells(const Grid& grid) const {
  int w = grid.N() >> g;
  CellBox b;
  b.lo[0] = k[0] * w;
  b.hi[0] = b.lo[0] + w;
  if (grid.n() == 2) {
    b.lo[1] = k[1] * w;
    b.hi[1] = b.lo[1] + w;
  }
  return b;
}

double DyadicCube::side(const Grid& grid) const { return std::ldexp(2.0 * grid.L(), -g); }

double DyadicCube::volume(const Grid& grid) const {
  double s = side(grid);
  return grid.n() == 1 ? s : s * s;
}

bool DyadicCube::contains(const DyadicCube& o) const {
  if (o.g < g) return false;
  int d = o.g - g;
  return (o.k[0] >> d) == k[0] && (o.k[1] >> d) == k[1];
}

std::vector<DyadicCube> enumerate_dyadic_cubes(const Grid& grid, int g_min, int g_max) {
  if (g_min < 0 || g_min > g_max || g_max > grid.finest_generation())
    throw ParameterError("dyadic generation range [" + std::to_string(g_min) + ", " +
                         std::to_string(g_max) + "] outside [0, " +
                         std::to_string(grid.finest_generation()) + "]");
  std::vector<DyadicCube> out;
  for (int g = g_min; g <= g_max; ++g) {
    int m = 1 << g;
    int my = grid.n() == 2 ? m : 1;
    for (int ky = 0; ky < my; ++ky)
      for (int kx = 0; kx < m; ++kx) out.push_back({g, {kx, ky}});
  }
  return out;
}

DyadicCube dyadic_cube_of(const Grid& grid, int g, int i, int j) {
  int shift = grid.finest_generation() - g;
  return {g, {i >> shift, grid.n() == 2 ? (j >> shift) : 0}};
}

std::vector<CellBox> grid_cubes_of_side(const Grid& grid, int s) {
  std::vector<CellBox> out;
  int N = grid.N();
  if (s < 1 || s > N) return out;
  if (grid.n() == 1) {
    for (int a = 0; a + s <= N; ++a) out.push_back({{a, 0}, {a + s, 1}});
  } else {
    for (int y = 0; y + s <= N; ++y)
      for (int x = 0; x + s <= N; ++x) out.push_back({{x, y}, {x + s, y + s}});
  }
  return out;
}

std::vector<CellBox> grid_cubes(const Grid& grid) {
  std::vector<CellBox> out;
  int N = grid.N();
  if (grid.n() == 1) {
    for (int s = 1; s <= N; ++s) {
      auto part = grid_cubes_of_side(grid, s);
      out.insert(out.end(), part.begin(), part.end());
    }
  } else {
    for (int s = 1; s <= N; s *= 2) {
      auto part = grid_cubes_of_side(grid, s);
      out.insert(out.end(), part.begin(), part.end());
    }
  }
  return out;
}

template <class T>
BasicGridFunction<T>::BasicGridFunction(const Grid& grid, std::vector<T> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size())
    throw InputError("grid function has " + std::to_string(values_.size()) +
                     " samples, grid has " + std::to_string(grid_.size()) + " cells");
}

template <class T>
std::vector<std::size_t> BasicGridFunction<T>::support() const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < values_.size(); ++k)
    if (values_[k] != T{}) out.push_back(k);
  return out;
}

template class BasicGridFunction<double>;
template class BasicGridFunction<std::complex<double>>;

GridFunction make_grid_function(const Grid& grid, const Sampler& sampler, bool compact_support) {
  GridFunction f(grid);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    double v = sampler(grid.center_of(k));
    if (!std::isfinite(v)) {
      auto c = grid.center_of(k);
      throw InputError("non-finite sample at x=(" + fmt(c[0]) + ", " + fmt(c[1]) + ")");
    }
    f[k] = v;
  }
  f.set_compact_support(compact_support);
  return f;
}

GridFunction abs(const GridFunction& f) {
  GridFunction out(f.grid());
  for (std::size_t k = 0; k < f.size(); ++k) out[k] = std::fabs(f[k]);
  out.set_compact_support(f.compact_support());
  return out;
}

GridFunction abs(const ComplexGridFunction& f) {
  GridFunction out(f.grid());
  for (std::size_t k = 0; k < f.size(); ++k) out[k] = std::abs(f[k]);
  return out;
}

ComplexGridFunction to_complex(const GridFunction& f) {
  ComplexGridFunction out(f.grid());
  for (std::size_t k = 0; k < f.size(); ++k) out[k] = f[k];
  out.set_compact_support(f.compact_support());
  return out;
}

GridFunction real_part(const ComplexGridFunction& f) {
  GridFunction out(f.grid());
  for (std::size_t k = 0; k < f.size(); ++k) out[k] = f[k].real();
  return out;
}

void require_same_grid(const Grid& a, const Grid& b, const char* what) {
  if (!(a == b)) throw ParameterError(std::string(what) + ": operands live on different grids");
}

namespace {

void write_header(std::ostream& out, const Grid& g) {
  out << "# n,N,L,center\n# " << g.n() << ',' << g.N() << ',' << fmt(g.L()) << ','
      << fmt(g.box().center[0]);
  if (g.n() == 2) out << ',' << fmt(g.box().center[1]);
  out << '\n';
}

template <class Emit>
void write_rows(std::ostream& out, const Grid& g, Emit emit) {
  for (std::size_t k = 0; k < g.size(); ++k) {
    auto [i, j] = g.unflat(k);
    out << i;
    if (g.n() == 2) out << ',' << j;
    out << ',' << fmt(g.coord(0, i));
    if (g.n() == 2) out << ',' << fmt(g.coord(1, j));
    emit(k);
    out << '\n';
  }
}

}  // namespace

void write_csv(std::ostream& out, const GridFunction& f) {
  write_header(out, f.grid());
  write_rows(out, f.grid(), [&](std::size_t k) { out << ',' << fmt(f[k]); });
}

void write_csv(std::ostream& out, const ComplexGridFunction& f) {
  write_header(out, f.grid());
  write_rows(out, f.grid(), [&](std::size_t k) {
    out << ',' << fmt(f[k].real()) << ',' << fmt(f[k].imag());
  });
}

ComplexGridFunction read_csv(std::istream& in) {
  std::string line;
  std::vector<std::string> meta;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] != '#') throw InputError("csv: missing '# n,N,L,center' header");
    std::string body = line.substr(1);
    if (body.find('n') != std::string::npos) continue;  // the column-name line
    meta = split(body, ',');
    break;
  }
  if (meta.size() < 4) throw InputError("csv: header must list n,N,L,center");
  Box box;
  box.n = static_cast<int>(parse_double(meta[0]));
  int N = static_cast<int>(parse_double(meta[1]));
  box.L = parse_double(meta[2]);
  box.center[0] = parse_double(meta[3]);
  if (box.n == 2) {
    if (meta.size() < 5) throw InputError("csv: 2-D header needs two center coordinates");
    box.center[1] = parse_double(meta[4]);
  }
  Grid grid(box, N);
  ComplexGridFunction f(grid);
  std::vector<bool> seen(grid.size(), false);
  std::size_t idx_cols = grid.n() == 2 ? 2 : 1;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto cols = split(line, ',');
    if (cols.size() != 2 * idx_cols + 1 && cols.size() != 2 * idx_cols + 2)
      throw InputError("csv: row has " + std::to_string(cols.size()) + " columns: " + line);
    int i = static_cast<int>(parse_double(cols[0]));
    int j = grid.n() == 2 ? static_cast<int>(parse_double(cols[1])) : 0;
    if (i < 0 || i >= N || j < 0 || j >= (grid.n() == 2 ? N : 1))
      throw InputError("csv: cell index out of range: " + line);
    double re = parse_double(cols[2 * idx_cols]);
    double im = cols.size() == 2 * idx_cols + 2 ? parse_double(cols[2 * idx_cols + 1]) : 0.0;
    if (!std::isfinite(re) || !std::isfinite(im)) throw InputError("csv: non-finite value: " + line);
    std::size_t k = grid.flat(i, j);
    if (seen[k]) throw InputError("csv: duplicate cell: " + line);
    seen[k] = true;
    f[k] = {re, im};
  }
  for (bool s : seen)
    if (!s) throw InputError("csv: not every cell has a row");
  return f;
}

GridFunction read_csv_real(std::istream& in) {
  auto c = read_csv(in);
  for (std::size_t k = 0; k < c.size(); ++k)
    if (c[k].imag() != 0.0) throw InputError("csv: expected a real-valued function");
  return real_part(c);
}

GridFunction load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return read_csv_real(in);
}

void save_csv(const std::string& path, const GridFunction& f) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  write_csv(out, f);
}

void save_csv(const std::string& path, const ComplexGridFunction& f) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  write_csv(out, f);
}

}  // namespace weightlab
