#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>

#include "weightlab/error.hpp"
#include "weightlab/numeric.hpp"
#include "weightlab/operators.hpp"

namespace weightlab {

using cplx = std::complex<double>;

namespace {

constexpr double kPanelPhase = std::numbers::pi / 8;
constexpr double kAsymptoticStart = 50.0;

struct GaussRule {
  std::array<double, 8> x{}, w{};
  GaussRule() {
    using G = boost::math::quadrature::gauss<double, 8>;
    const auto& ab = G::abscissa();
    const auto& wt = G::weights();
    for (int t = 0; t < 4; ++t) {
      x[2 * t] = -ab[t];
      x[2 * t + 1] = ab[t];
      w[2 * t] = w[2 * t + 1] = wt[t];
    }
  }
};

const GaussRule& gauss8() {
  static const GaussRule rule;
  return rule;
}

template <class F>
cplx gauss_panel(double a, double b, F&& f) {
  const auto& r = gauss8();
  double c = 0.5 * (a + b), hw = 0.5 * (b - a);
  cplx acc = 0.0;
  for (int t = 0; t < 8; ++t) acc += r.w[t] * f(c + hw * r.x[t]);
  return acc * hw;
}

// Integration by parts repeated: integral_U^inf e^{iu} g(u) du = e^{iU} sum_k i^{k+1} g^{(k)}(U)
// with g = u^{a-1}; the series is asymptotic and truncated at its smallest term.
cplx asymptotic_tail(double U, double a) {
  cplx sum = 0.0, ik = cplx(0, 1);
  double gk = std::pow(U, a - 1);
  double prev = kInfinity;
  for (int k = 0; k < 80; ++k) {
    cplx term = ik * gk;
    double mag = std::abs(term);
    if (mag > prev) break;
    sum += term;
    if (mag <= 1e-18 * std::abs(sum)) break;
    prev = mag;
    gk *= (a - 1 - k) / U;
    ik *= cplx(0, 1);
  }
  return std::polar(1.0, U) * sum;
}

// Phase-bounded panels for the Cho-Yang kernel on [t0, t1], sign = +-1 for the
// contribution of negative displacements with odd k.
struct ChoYangIntegrator {
  double zeta, s, lambda;
  int k;
  long budget;
  bool exhausted = false;

  cplx integrand(double t, double sign) const {
    double phase = sign * zeta * std::pow(t, k) + std::pow(t, -s);
    return std::polar(std::pow(t, -1 - lambda), phase);
  }

  cplx integrate(double t0, double t1, double sign) {
    cplx acc = 0.0;
    double a = t0;
    while (a < t1) {
      double rate = k * zeta * std::pow(t1, k - 1) + s * std::pow(a, -s - 1);
      double width = std::min(t1 - a, kPanelPhase / rate);
      if (budget <= 0) {
        width = t1 - a;
        exhausted = true;
      }
      --budget;
      double b = a + width;
      acc += gauss_panel(a, b, [&](double t) { return integrand(t, sign); });
      a = b;
    }
    return acc;
  }
};

}  // namespace

void StrongKernelParams::validate(int n) const {
  if (!(s > 0) || !std::isfinite(s)) throw ParameterError("strongly singular kernel requires s > 0");
  if (!(lambda >= 0) || !std::isfinite(lambda)) throw ParameterError("strongly singular kernel requires lambda >= 0");
  if (zeta.has_value() != k.has_value())
    throw ParameterError("the Cho-Yang kernel needs both zeta and k");
  if (cho_yang()) {
    if (n != 1) throw UnsupportedError("the Cho-Yang kernel is one-dimensional");
    if (!(*zeta > 0)) throw ParameterError("Cho-Yang kernel requires zeta > 0");
    if (*k < 2) throw ParameterError("Cho-Yang kernel requires an integer k >= 2");
    if (!(lambda < *k)) throw ParameterError("Cho-Yang kernel requires lambda < k for the local principal value");
  } else if (!(lambda < s)) {
    throw ParameterError("strongly singular kernel requires lambda < s for the principal value");
  }
}

cplx oscillatory_tail(double U, double a) {
  if (!(U > 0) || !(a < 1)) throw ParameterError("oscillatory tail requires U > 0 and a < 1");
  double start = std::max(U, kAsymptoticStart);
  cplx acc = 0.0;
  if (U < start) {
    int panels = static_cast<int>(std::ceil((start - U) / kPanelPhase));
    double w = (start - U) / panels;
    for (int p = 0; p < panels; ++p) {
      double a0 = U + p * w, a1 = p + 1 == panels ? start : a0 + w;
      acc += gauss_panel(a0, a1, [a](double u) { return std::polar(std::pow(u, a - 1), u); });
    }
  }
  return acc + asymptotic_tail(start, a);
}

cplx radial_strong_integral(double t0, double t1, double s, double lambda) {
  if (!(0 < t0 && t0 <= t1)) throw ParameterError("radial integral requires 0 < t0 <= t1");
  if (t0 == t1) return 0.0;
  // u = t^{-s} turns the integrand into e^{iu} u^{lambda/s - 1} / s.
  double a = lambda / s;
  return (oscillatory_tail(std::pow(t1, -s), a) - oscillatory_tail(std::pow(t0, -s), a)) / s;
}

namespace {

// Ray from the origin at angle theta through the square [cx +- h/2] x [cy +- h/2]:
// entry and exit radii by slab intersection.
std::pair<double, double> ray_square(double theta, double cx, double cy, double h) {
  double dx = std::cos(theta), dy = std::sin(theta);
  double tmin = 0.0, tmax = kInfinity;
  auto slab = [&](double d, double c) {
    double lo = c - 0.5 * h, hi = c + 0.5 * h;
    if (std::fabs(d) < 1e-300) {
      if (0.0 < lo || 0.0 > hi) tmax = -1.0;
      return;
    }
    double t0 = lo / d, t1 = hi / d;
    if (t0 > t1) std::swap(t0, t1);
    tmin = std::max(tmin, t0);
    tmax = std::min(tmax, t1);
  };
  slab(dx, cx);
  slab(dy, cy);
  return {tmin, tmax};
}

// Integral over a square cell (not containing the origin) of e^{i r^{-s}} r^{-2-lambda},
// restricted to r < 1: polar coordinates, Gauss panels in theta between corner angles.
cplx square_cell_integral(double cx, double cy, double h, double s, double lambda) {
  std::array<double, 4> ang;
  int t = 0;
  for (int sx = -1; sx <= 1; sx += 2)
    for (int sy = -1; sy <= 1; sy += 2) ang[t++] = std::atan2(cy + 0.5 * sy * h, cx + 0.5 * sx * h);
  // Unwrap around the cell's own direction so the angular span is contiguous.
  double mid = std::atan2(cy, cx);
  for (auto& a : ang) {
    while (a - mid > std::numbers::pi) a -= 2 * std::numbers::pi;
    while (a - mid < -std::numbers::pi) a += 2 * std::numbers::pi;
  }
  std::sort(ang.begin(), ang.end());
  auto radial = [&](double th) -> cplx {
    auto [r0, r1] = ray_square(th, cx, cy, h);
    r1 = std::min(r1, 1.0);
    if (!(r1 > r0) || r0 <= 0) return 0.0;
    return radial_strong_integral(r0, r1, s, lambda);
  };
  // Panels sized so the radial phase r^{-s} moves by at most pi/8 across each one.
  double rmin = std::hypot(std::max(0.0, std::fabs(cx) - 0.5 * h), std::max(0.0, std::fabs(cy) - 0.5 * h));
  double swing = s * std::pow(rmin, -s - 1) * std::sqrt(2.0) * h;
  cplx acc = 0.0;
  for (int p = 0; p + 1 < 4; ++p) {
    double a0 = ang[p], a1 = ang[p + 1];
    if (a1 - a0 < 1e-15) continue;
    int panels = std::max(2, static_cast<int>(std::ceil(swing / kPanelPhase)));
    double w = (a1 - a0) / panels;
    for (int q = 0; q < panels; ++q) acc += gauss_panel(a0 + q * w, a0 + (q + 1) * w, radial);
  }
  return acc;
}

// The cell containing the origin: principal value over the whole square.
cplx own_square_integral(double h, double s, double lambda) {
  double a = lambda / s;
  auto radial = [&](double th) -> cplx {
    double rout = 0.5 * h / std::cos(th);
    return oscillatory_tail(std::pow(rout, -s), a) / s;
  };
  double du = std::pow(0.5 * h, -s) * 0.5;
  int panels = std::max(4, static_cast<int>(std::ceil(du / kPanelPhase)));
  double w = (std::numbers::pi / 4) / panels;
  cplx acc = 0.0;
  for (int q = 0; q < panels; ++q) acc += gauss_panel(q * w, (q + 1) * w, radial);
  return 8.0 * acc;
}

// Sum over offsets ordered outermost first (innermost last), compensated per component.
struct ComplexCompensated {
  double sr = 0, cr = 0, si = 0, ci = 0;
  static void add1(double& s, double& c, double v) {
    double u = s + v;
    c += std::fabs(s) >= std::fabs(v) ? (s - u) + v : (v - u) + s;
    s = u;
  }
  void add(cplx v) {
    add1(sr, cr, v.real());
    add1(si, ci, v.imag());
  }
  cplx value() const { return {sr + cr, si + ci}; }
};

struct OffsetWeight {
  int di, dj;
  double dist2;
  cplx w;
};

ComplexGridFunction convolve(const GridFunction& f, std::vector<OffsetWeight> weights) {
  const Grid& g = f.grid();
  int N = g.N();
  std::stable_sort(weights.begin(), weights.end(),
                   [](const OffsetWeight& a, const OffsetWeight& b) { return a.dist2 > b.dist2; });
  ComplexGridFunction out(g, cplx(0.0));
  for (std::size_t t = 0; t < g.size(); ++t) {
    auto [ti, tj] = g.unflat(t);
    ComplexCompensated acc;
    for (const auto& ow : weights) {
      int si = ti - ow.di, sj = tj - ow.dj;
      if (si < 0 || si >= N || sj < 0 || sj >= N) continue;
      double v = f.at(si, sj);
      if (v != 0.0) acc.add(ow.w * v);
    }
    out[t] = acc.value();
  }
  return out;
}

std::vector<OffsetWeight> strong_weights(const Grid& g, double s, double lambda) {
  double h = g.h();
  int N = g.N();
  int reach = std::min(N - 1, static_cast<int>(std::ceil(1.0 / h + 0.5)));
  std::vector<OffsetWeight> out;
  if (g.n() == 1) {
    out.push_back({0, 0, 0.0, 2.0 * oscillatory_tail(std::pow(0.5 * h, -s), lambda / s) / s});
    for (int d = 1; d <= reach; ++d) {
      double t0 = (d - 0.5) * h, t1 = std::min((d + 0.5) * h, 1.0);
      if (t0 >= 1.0) break;
      cplx w = radial_strong_integral(t0, t1, s, lambda);
      out.push_back({d, 0, double(d) * d, w});
      out.push_back({-d, 0, double(d) * d, w});
    }
    return out;
  }
  out.push_back({0, 0, 0.0, own_square_integral(h, s, lambda)});
  // The kernel is radial, so one weight per offset class up to the dihedral symmetry.
  for (int dj = 0; dj <= reach; ++dj)
    for (int di = dj; di <= reach; ++di) {
      if (di == 0 && dj == 0) continue;
      double near = std::hypot(std::max(0.0, di - 0.5), std::max(0.0, dj - 0.5)) * h;
      if (near >= 1.0) continue;
      cplx w = square_cell_integral(di * h, dj * h, h, s, lambda);
      double d2 = double(di) * di + double(dj) * dj;
      std::array<std::pair<int, int>, 8> images{{{di, dj}, {-di, dj}, {di, -dj}, {-di, -dj},
                                                  {dj, di}, {-dj, di}, {dj, -di}, {-dj, -di}}};
      std::sort(images.begin(), images.end());
      auto last = std::unique(images.begin(), images.end());
      for (auto it = images.begin(); it != last; ++it) out.push_back({it->first, it->second, d2, w});
    }
  return out;
}

std::vector<OffsetWeight> cho_yang_weights(const Grid& g, const StrongKernelParams& p, long budget,
                                           bool& exhausted, double& remainder) {
  double h = g.h();
  int N = g.N();
  ChoYangIntegrator in{*p.zeta, p.s, p.lambda, *p.k, budget};
  std::vector<OffsetWeight> out;
  remainder = 0.0;
  if (*p.k % 2 == 1) {
    // Own cell: the odd part of e^{i zeta t^k} survives, 2i sin(zeta t^k) e^{i t^{-s}} t^{-1-lambda}.
    // In u = t^{-s} the amplitude is decreasing, so the piece below tmin is at most twice the
    // amplitude at tmin: 4 zeta / s * tmin^{s - lambda + k}.
    double kk = *p.k;
    double expo = p.s - p.lambda + kk;
    double tmin = std::min(0.25 * h, std::pow(1e-12 * p.s / (4 * *p.zeta), 1.0 / expo));
    remainder = 4 * *p.zeta / p.s * std::pow(tmin, expo);
    cplx w = in.integrate(tmin, 0.5 * h, 1.0) - in.integrate(tmin, 0.5 * h, -1.0);
    out.push_back({0, 0, 0.0, w});
  }
  for (int d = 1; d < N; ++d) {
    double t0 = (d - 0.5) * h, t1 = (d + 0.5) * h;
    double d2 = double(d) * d;
    out.push_back({d, 0, d2, in.integrate(t0, t1, 1.0)});
    double sign = *p.k % 2 == 0 ? 1.0 : -1.0;
    out.push_back({-d, 0, d2, -in.integrate(t0, t1, sign)});
  }
  exhausted = in.exhausted;
  return out;
}

}  // namespace

StrongResult strongly_singular_ex(const GridFunction& f, const StrongKernelParams& params, long panel_budget) {
  const Grid& g = f.grid();
  params.validate(g.n());
  for (std::size_t k = 0; k < f.size(); ++k)
    if (!std::isfinite(f[k])) throw InputError("strongly singular integral: input must be finite");
  StrongResult res;
  if (!params.cho_yang()) {
    res.value = convolve(f, strong_weights(g, params.s, params.lambda));
    res.achieved_tolerance = 1e-12;
    return res;
  }
  bool exhausted = false;
  double remainder = 0.0;
  auto w = cho_yang_weights(g, params, panel_budget, exhausted, remainder);
  res.value = convolve(f, w);
  res.low_confidence = exhausted;
  double fmax = 0.0, vmin = kInfinity;
  for (std::size_t k = 0; k < f.size(); ++k) {
    fmax = std::max(fmax, std::fabs(f[k]));
    if (std::abs(res.value[k]) > 0) vmin = std::min(vmin, std::abs(res.value[k]));
  }
  res.achieved_tolerance = exhausted ? 1.0 : std::max(1e-12, std::isinf(vmin) ? 0.0 : remainder * fmax / vmin);
  return res;
}

ComplexGridFunction strongly_singular(const GridFunction& f, const StrongKernelParams& params) {
  return strongly_singular_ex(f, params).value;
}

}  // namespace weightlab
