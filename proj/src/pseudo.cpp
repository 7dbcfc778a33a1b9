#include <cmath>
#include <mutex>
#include <numbers>

#include <fftw3.h>

#include "weightlab/error.hpp"
#include "weightlab/numeric.hpp"
#include "weightlab/operators.hpp"

namespace weightlab {

using cplx = std::complex<double>;

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// In-place DFT of a row-major N or N x N array (index j*N + i, i fastest).
void dft(std::vector<cplx>& data, int N, int n, int sign) {
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = n == 1 ? fftw_plan_dft_1d(N, p, p, sign, FFTW_ESTIMATE)
                  : fftw_plan_dft_2d(N, N, p, p, sign, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(plan);
}

int wrap(int k, int N) { return k < N / 2 ? k : k - N; }

}  // namespace

double frequency(const Grid& grid, int k) { return wrap(k, grid.N()) / (2.0 * grid.L()); }

void SymbolSpec::validate(const Grid& grid) const {
  if (!a) throw ParameterError("symbol callable is not set");
  int N = grid.N();
  int stride = std::max(1, N / 16);
  for (std::size_t xk = 0; xk < grid.size(); xk += stride) {
    Point x = grid.center_of(xk);
    for (int kj = 0; kj < (grid.n() == 2 ? N : 1); kj += stride)
      for (int ki = 0; ki < N; ki += stride) {
        Point xi{frequency(grid, ki), grid.n() == 2 ? frequency(grid, kj) : 0.0};
        cplx v = a(x, xi);
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
          throw InvariantError(name + ": symbol is not finite on the lattice");
        if (std::abs(v) > C[0][0] * (1 + 1e-12))
          throw InvariantError(name + ": |a(x, xi)| exceeds the declared bound C_00");
      }
  }
}

SymbolSpec SymbolSpec::identity() {
  SymbolSpec s;
  s.name = "identity";
  s.a = [](const Point&, const Point&) { return cplx(1.0); };
  s.x_independent = true;
  return s;
}

SymbolSpec SymbolSpec::multiplier(std::function<double(const Point&)> g) {
  SymbolSpec s;
  s.name = "multiplier";
  s.a = [g = std::move(g)](const Point& x, const Point&) { return cplx(g(x)); };
  s.C[0][0] = kInfinity;
  return s;
}

SymbolSpec SymbolSpec::bump(double width) {
  if (!(width > 0)) throw ParameterError("bump symbol needs a positive width");
  SymbolSpec s;
  s.name = "bump";
  s.a = [width](const Point&, const Point& xi) {
    return cplx(std::exp(-(xi[0] * xi[0] + xi[1] * xi[1]) / (width * width)));
  };
  s.x_independent = true;
  return s;
}

SymbolSpec SymbolSpec::mixed() {
  SymbolSpec s;
  s.name = "mixed";
  s.a = [](const Point& x, const Point& xi) {
    return cplx((1 + 0.5 * std::sin(x[0])) * xi[0] / std::sqrt(1 + xi[0] * xi[0] + xi[1] * xi[1]));
  };
  s.C[0][0] = 1.5;
  return s;
}

ComplexGridFunction pseudo_differential(const ComplexGridFunction& f, const SymbolSpec& symbol) {
  const Grid& g = f.grid();
  if (!symbol.a) throw ParameterError("symbol callable is not set");
  int N = g.N(), n = g.n();
  double norm = n == 1 ? N : static_cast<double>(N) * N;
  std::vector<cplx> F(f.values());
  for (const auto& v : F)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw InputError("pseudo_differential: input must be finite");
  dft(F, N, n, FFTW_FORWARD);
  // With x_j = x_0 + j h and h xi_k = k/N the phases e^{-2 pi i x_0 xi} of the transform and
  // e^{2 pi i x_0 xi} of the synthesis cancel, leaving plain DFT pairs.
  auto xi_of = [&](std::size_t k) {
    auto [ki, kj] = g.unflat(k);
    return Point{frequency(g, ki), n == 2 ? frequency(g, kj) : 0.0};
  };
  if (symbol.x_independent) {
    Point x0 = g.center_of(0);
    for (std::size_t k = 0; k < F.size(); ++k) F[k] *= symbol.a(x0, xi_of(k)) / norm;
    dft(F, N, n, FFTW_BACKWARD);
    return ComplexGridFunction(g, std::move(F));
  }
  std::vector<cplx> twiddle(N);
  for (int m = 0; m < N; ++m) twiddle[m] = std::polar(1.0, 2 * std::numbers::pi * m / N);
  std::vector<Point> xis(F.size());
  for (std::size_t k = 0; k < F.size(); ++k) xis[k] = xi_of(k);
  std::vector<cplx> out(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) {
    Point x = g.center_of(j);
    auto [ji, jj] = g.unflat(j);
    cplx acc = 0.0;
    for (std::size_t k = 0; k < F.size(); ++k) {
      auto [ki, kj] = g.unflat(k);
      int m = static_cast<int>((static_cast<long>(ji) * ki + static_cast<long>(jj) * kj) % N);
      acc += symbol.a(x, xis[k]) * F[k] * twiddle[m];
    }
    out[j] = acc / norm;
  }
  return ComplexGridFunction(g, std::move(out));
}

ComplexGridFunction pseudo_differential(const GridFunction& f, const SymbolSpec& symbol) {
  return pseudo_differential(to_complex(f), symbol);
}

}  // namespace weightlab
