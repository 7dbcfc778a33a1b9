#include <algorithm>
#include <cmath>
#include <numbers>

#include "weightlab/error.hpp"
#include "weightlab/operators.hpp"

namespace weightlab {

namespace {

// Distance range from the origin to the closed cell [D - h/2, D + h/2]^n.
std::pair<double, double> cell_distance_range(const Point& D, double h, int n) {
  double lo2 = 0.0, hi2 = 0.0;
  for (int a = 0; a < n; ++a) {
    double c = std::fabs(D[a]);
    double near = std::max(0.0, c - 0.5 * h), far = c + 0.5 * h;
    lo2 += near * near;
    hi2 += far * far;
  }
  return {std::sqrt(lo2), std::sqrt(hi2)};
}

double norm_n(const Point& x, int n) { return n == 1 ? std::fabs(x[0]) : std::hypot(x[0], x[1]); }

// Contribution weight of a source cell displaced by D from the target point: the midpoint
// rule on cells clear of the eps-ball, one split into 2^n subcells on cells it cuts.
double cell_weight(const KernelSpec& kernel, const Point& D, double h, int n, double eps) {
  auto [lo, hi] = cell_distance_range(D, h, n);
  if (lo >= eps) return kernel.K(D) * std::pow(h, n);
  if (hi <= eps) return 0.0;
  double q = 0.25 * h, sub = std::pow(0.5 * h, n);
  double acc = 0.0;
  for (int sj = 0; sj < (n == 2 ? 2 : 1); ++sj)
    for (int si = 0; si < 2; ++si) {
      Point c{D[0] + (si ? q : -q), n == 2 ? D[1] + (sj ? q : -q) : 0.0};
      if (norm_n(c, n) >= eps) acc += kernel.K(c) * sub;
    }
  return acc;
}

void check_eps(const Grid& g, double eps) {
  if (!(eps >= g.h() * (1 - 1e-12)) || !std::isfinite(eps))
    throw ParameterError("truncation eps must satisfy eps >= h");
}

void check_kernel(const KernelSpec& kernel, const Grid& g) {
  if (!kernel.K) throw ParameterError("kernel function is not set");
  if (kernel.n != g.n()) throw ParameterError("kernel dimension does not match the grid");
}

}  // namespace

void KernelSpec::validate() const {
  if (n != 1 && n != 2) throw ParameterError("kernel dimension must be 1 or 2");
  if (!K || !mu) throw ParameterError("kernel and modulus must be set");
  if (!(A > 0) || !std::isfinite(A)) throw ParameterError("kernel size constant must be positive");
  for (int e = -12; e <= 12; ++e) {
    double r = std::ldexp(1.0, e);
    for (int t = 0; t < 16; ++t) {
      double th = 2 * std::numbers::pi * t / 16;
      Point x = n == 1 ? Point{t % 2 ? r : -r, 0.0} : Point{r * std::cos(th), r * std::sin(th)};
      double bound = A / std::pow(norm_n(x, n), n);
      if (!(std::fabs(K(x)) <= bound * (1 + 1e-12)))
        throw InvariantError(name + ": size bound |K(x)| <= A/|x|^n fails at |x| = " + std::to_string(r));
    }
  }
  double prev = -1.0;
  for (int e = -30; e <= 0; ++e) {
    double t = std::ldexp(1.0, e), m = mu(t), m2 = mu(2 * t);
    if (!(m >= 0) || m < prev) throw InvariantError(name + ": modulus must be nonnegative and nondecreasing");
    if (m > 0 && !std::isfinite(m2 / m)) throw InvariantError(name + ": modulus is not doubling");
    prev = m;
  }
  if (!(dini >= 0) || !std::isfinite(dini)) throw InvariantError(name + ": Dini integral must be finite");
}

KernelSpec KernelSpec::hilbert() {
  KernelSpec k;
  k.name = "hilbert";
  k.n = 1;
  k.K = [](const Point& x) { return 1.0 / (std::numbers::pi * x[0]); };
  k.A = 1.0 / std::numbers::pi;
  k.mu = [](double t) { return t; };
  k.dini = 1.0;
  return k;
}

KernelSpec KernelSpec::riesz(int j) {
  if (j != 0 && j != 1) throw ParameterError("riesz kernel index must be 0 or 1");
  KernelSpec k;
  k.name = "riesz" + std::to_string(j + 1);
  k.n = 2;
  k.K = [j](const Point& x) {
    double r = std::hypot(x[0], x[1]);
    return x[j] / (2 * std::numbers::pi * r * r * r);
  };
  k.A = 1.0 / (2 * std::numbers::pi);
  k.mu = [](double t) { return t; };
  k.dini = 1.0;
  return k;
}

GridFunction truncated_singular(const GridFunction& f, const KernelSpec& kernel, double eps) {
  const Grid& g = f.grid();
  check_kernel(kernel, g);
  check_eps(g, eps);
  int N = g.N(), n = g.n();
  double h = g.h();
  int span = 2 * N - 1;
  // Weights depend only on the integer offset between target and source cells.
  std::vector<double> W(n == 1 ? span : static_cast<std::size_t>(span) * span);
  for (int dj = (n == 2 ? -(N - 1) : 0); dj <= (n == 2 ? N - 1 : 0); ++dj)
    for (int di = -(N - 1); di <= N - 1; ++di) {
      std::size_t idx = static_cast<std::size_t>(dj + (n == 2 ? N - 1 : 0)) * span + (di + N - 1);
      W[idx] = (di == 0 && dj == 0) ? 0.0 : cell_weight(kernel, {di * h, dj * h}, h, n, eps);
    }
  GridFunction out(g, 0.0);
  auto support = f.support();
  for (std::size_t t = 0; t < g.size(); ++t) {
    auto [ti, tj] = g.unflat(t);
    double acc = 0.0;
    for (std::size_t s : support) {
      auto [si, sj] = g.unflat(s);
      std::size_t idx = static_cast<std::size_t>(tj - sj + (n == 2 ? N - 1 : 0)) * span + (ti - si + N - 1);
      acc += W[idx] * f[s];
    }
    out[t] = acc;
  }
  return out;
}

double truncated_singular_at(const GridFunction& f, const KernelSpec& kernel, double eps, const Point& x) {
  const Grid& g = f.grid();
  check_kernel(kernel, g);
  check_eps(g, eps);
  double acc = 0.0;
  for (std::size_t s : f.support()) {
    Point y = g.center_of(s);
    acc += cell_weight(kernel, {x[0] - y[0], x[1] - y[1]}, g.h(), g.n(), eps) * f[s];
  }
  return acc;
}

std::vector<double> dyadic_ladder(const Grid& grid) {
  std::vector<double> out;
  for (double e = grid.h(); e <= 2 * grid.L() * (1 + 1e-12); e *= 2) out.push_back(e);
  return out;
}

GridFunction maximal_singular(const GridFunction& f, const KernelSpec& kernel,
                              const std::vector<double>& ladder) {
  if (ladder.empty()) throw ParameterError("maximal singular integral needs a nonempty eps ladder");
  GridFunction out(f.grid(), 0.0);
  for (double eps : ladder) {
    auto t = truncated_singular(f, kernel, eps);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::max(out[k], std::fabs(t[k]));
  }
  return out;
}

double maximal_singular_at(const GridFunction& f, const KernelSpec& kernel,
                           const std::vector<double>& ladder, const Point& x) {
  if (ladder.empty()) throw ParameterError("maximal singular integral needs a nonempty eps ladder");
  double best = 0.0;
  for (double eps : ladder) best = std::max(best, std::fabs(truncated_singular_at(f, kernel, eps, x)));
  return best;
}

}  // namespace weightlab
