#include <algorithm>
#include <cmath>

#include "weightlab/balls.hpp"
#include "weightlab/error.hpp"
#include "weightlab/operators.hpp"
#include "weightlab/spaces.hpp"

namespace weightlab {

namespace {

constexpr double kNegInf = -kInfinity;

std::vector<double> magnitudes(const GridFunction& f) {
  std::vector<double> a(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (!std::isfinite(f[k])) throw InputError("maximal: input must be finite");
    a[k] = std::fabs(f[k]);
  }
  return a;
}

// Every interval [s, b) of cells. For a fixed left end the running sum gives all averages,
// and a suffix maximum over right ends hands each cell its best interval starting at s.
template <class Avg>
void interval_sup(const std::vector<double>& a, int N, Avg avg, std::vector<double>& out) {
  std::vector<double> av(N + 1), suf(N + 2);
  for (int s = 0; s < N; ++s) {
    double sum = 0.0;
    for (int b = s + 1; b <= N; ++b) {
      sum += a[b - 1];
      av[b] = avg(sum, b - s);
    }
    double m = kNegInf;
    for (int b = N; b > s; --b) {
      m = std::max(m, av[b]);
      suf[b] = m;
    }
    for (int i = s; i < N; ++i) out[i] = std::max(out[i], suf[i + 1]);
  }
}

// Every square of power-of-two side at every position, summed row-major.
template <class Avg>
void square_sup(const std::vector<double>& a, int N, Avg avg, std::vector<double>& out) {
  for (int s = 1; s <= N; s *= 2)
    for (int y = 0; y + s <= N; ++y)
      for (int x = 0; x + s <= N; ++x) {
        double sum = 0.0;
        for (int j = y; j < y + s; ++j)
          for (int i = x; i < x + s; ++i) sum += a[static_cast<std::size_t>(j) * N + i];
        double v = avg(sum, s);
        for (int j = y; j < y + s; ++j)
          for (int i = x; i < x + s; ++i) {
            double& o = out[static_cast<std::size_t>(j) * N + i];
            o = std::max(o, v);
          }
      }
}

template <class Avg>
std::vector<double> cube_sup(const Grid& g, const std::vector<double>& a, Avg avg) {
  std::vector<double> out(g.size(), 0.0);
  if (g.n() == 1)
    interval_sup(a, g.N(), avg, out);
  else
    square_sup(a, g.N(), avg, out);
  return out;
}

MaximalResult omega_maximal(const GridFunction& f, const Weight& w) {
  const Grid& g = f.grid();
  auto mt = mass_table(w, g);
  auto a = magnitudes(f);
  std::vector<double> integrand(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) integrand[k] = a[k] == 0.0 ? 0.0 : a[k] * mt->cell(k);
  const std::vector<double>* arrays[] = {&integrand};
  MaximalResult res{GridFunction(g, 0.0), false};
  auto& out = res.value.values();
  double h = g.h();
  visit_balls(g, arrays, &mt->cells(), 0.0, kInfinity, [&](const BallSums& b) {
    if (!b.dilated_inside) {
      res.window_limited = true;
      return;
    }
    double s = b.sums[0];
    double v = std::isinf(s) ? kInfinity : (std::isinf(b.dilated) || s == 0.0 ? 0.0 : s / b.dilated);
    const CellBox& bb = b.ball.bbox;
    if (g.n() == 1) {
      for (int i = bb.lo[0]; i < bb.hi[0]; ++i) out[i] = std::max(out[i], v);
      return;
    }
    double rho = b.ball.radius / h - 0.5;
    auto c = g.unflat(b.ball.center_cell);
    for (int j = bb.lo[1]; j < bb.hi[1]; ++j)
      for (int i = bb.lo[0]; i < bb.hi[0]; ++i) {
        double di = i - c[0], dj = j - c[1];
        if (di * di + dj * dj <= rho * rho + 1e-9) {
          double& o = out[g.flat(i, j)];
          o = std::max(o, v);
        }
      }
  });
  return res;
}

double dyadic_sum(const std::vector<double>& a, const Grid& g, const CellBox& box) {
  double sum = 0.0;
  for (int j = box.lo[1]; j < box.hi[1]; ++j)
    for (int i = box.lo[0]; i < box.hi[0]; ++i) sum += a[g.flat(i, j)];
  return sum;
}

double phi_average(double sum, double count, double volume, const PhiSpec& phi, double eta) {
  return sum / (std::pow(phi(volume), eta) * count);
}

}  // namespace

double dyadic_average(const GridFunction& f, const DyadicCube& q, const PhiSpec& phi, double eta) {
  const Grid& g = f.grid();
  auto box = q.cells(g);
  double sum = 0.0;
  for (int j = box.lo[1]; j < box.hi[1]; ++j)
    for (int i = box.lo[0]; i < box.hi[0]; ++i) sum += std::fabs(f.at(i, j));
  return phi_average(sum, static_cast<double>(box.count()), q.volume(g), phi, eta);
}

MaximalResult maximal_ex(const GridFunction& f, const MaximalVariant& variant) {
  const Grid& g = f.grid();
  double h = g.h();
  int n = g.n();
  return std::visit(
      [&](const auto& v) -> MaximalResult {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, maximal_variants::HL>) {
          auto a = magnitudes(f);
          auto out = cube_sup(g, a, [n](double sum, int m) {
            return sum / (n == 1 ? static_cast<double>(m) : static_cast<double>(m) * m);
          });
          return {GridFunction(g, std::move(out)), false};
        } else if constexpr (std::is_same_v<V, maximal_variants::Phi>) {
          v.phi.validate();
          auto a = magnitudes(f);
          auto out = cube_sup(g, a, [&](double sum, int m) {
            double count = n == 1 ? m : static_cast<double>(m) * m;
            double vol = std::pow(m * h, n);
            return phi_average(sum, count, vol, v.phi, 1.0);
          });
          return {GridFunction(g, std::move(out)), false};
        } else if constexpr (std::is_same_v<V, maximal_variants::Omega>) {
          return omega_maximal(f, v.w);
        } else {
          v.phi.validate();
          if (!(v.eta > 0)) throw ParameterError("dyadic maximal operator requires eta > 0");
          auto a = magnitudes(f);
          std::vector<double> out(g.size(), 0.0);
          for (const auto& q : enumerate_dyadic_cubes(g, 0, g.finest_generation())) {
            auto box = q.cells(g);
            double val = phi_average(dyadic_sum(a, g, box), static_cast<double>(box.count()),
                                     q.volume(g), v.phi, v.eta);
            for (int j = box.lo[1]; j < box.hi[1]; ++j)
              for (int i = box.lo[0]; i < box.hi[0]; ++i) {
                double& o = out[g.flat(i, j)];
                o = std::max(o, val);
              }
          }
          return {GridFunction(g, std::move(out)), false};
        }
      },
      variant);
}

GridFunction maximal(const GridFunction& f, const MaximalVariant& variant) {
  return maximal_ex(f, variant).value;
}

}  // namespace weightlab
