#include "weightlab/weight.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "weightlab/error.hpp"

namespace weightlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
using boost::math::quadrature::gauss;
using boost::math::quadrature::gauss_kronrod;

double factor_value(const WeightFactor& f, double dist) {
  if (f.kind == WeightFactor::Kind::Power) {
    if (dist == 0.0) return f.exponent < 0 ? kInf : (f.exponent == 0 ? 1.0 : 0.0);
    return std::pow(dist, f.exponent);
  }
  return std::pow(1.0 + dist, f.exponent);
}

// int_lo^hi t^e dt for 0 <= lo <= hi, written to survive hi - lo << lo.
double power_segment(double e, double lo, double hi) {
  if (hi <= lo) return 0.0;
  if (lo == 0.0) return e > -1 ? std::pow(hi, e + 1) / (e + 1) : kInf;
  double r = std::log1p((hi - lo) / lo);
  if (e == -1.0) return r;
  return std::pow(lo, e + 1) * std::expm1((e + 1) * r) / (e + 1);
}

// int_lo^hi (1+t)^e dt for 0 <= lo <= hi.
double shifted_segment(double e, double lo, double hi) {
  if (hi <= lo) return 0.0;
  double r = std::log1p((hi - lo) / (1.0 + lo));
  if (e == -1.0) return r;
  return std::pow(1.0 + lo, e + 1) * std::expm1((e + 1) * r) / (e + 1);
}

// int_a^b g(|x - c|) dx for a single radial factor g in 1-D.
double factor_integral_1d(const WeightFactor& f, double a, double b) {
  double ua = a - f.center[0], ub = b - f.center[0];
  auto seg = [&](double lo, double hi) {
    return f.kind == WeightFactor::Kind::Power ? power_segment(f.exponent, lo, hi)
                                               : shifted_segment(f.exponent, lo, hi);
  };
  if (ua >= 0) return seg(ua, ub);
  if (ub <= 0) return seg(-ub, -ua);
  if (f.kind == WeightFactor::Kind::Power && f.exponent <= -1) return kInf;
  return seg(0.0, -ua) + seg(0.0, ub);
}

bool closure_hits_power_singularity_1d(const Weight& w, double a, double b) {
  for (const auto& f : w.factors())
    if (f.kind == WeightFactor::Kind::Power && f.exponent <= -1 && f.center[0] >= a &&
        f.center[0] <= b)
      return true;
  return false;
}

double product_integral_1d(const Weight& w, double a, double b) {
  if (closure_hits_power_singularity_1d(w, a, b)) return kInf;
  std::vector<double> cuts{a, b};
  for (const auto& f : w.factors())
    if (f.center[0] > a && f.center[0] < b) cuts.push_back(f.center[0]);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  boost::math::quadrature::tanh_sinh<double> ts;
  double total = 0.0;
  auto g = [&](double x) {
    double v = w.scale();
    for (const auto& f : w.factors()) v *= factor_value(f, std::fabs(x - f.center[0]));
    return v;
  };
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) total += ts.integrate(g, cuts[i], cuts[i + 1], 1e-13);
  return total;
}

// Phi(R) = int_0^R g(rho) rho d rho for a radial factor in 2-D.
double radial_phi(const WeightFactor& f, double R) {
  if (R <= 0) return 0.0;
  double e = f.exponent;
  if (f.kind == WeightFactor::Kind::Power) {
    if (e <= -2) return kInf;
    return std::pow(R, e + 2) / (e + 2);
  }
  // int_1^{1+R} u^e (u - 1) du
  double lr = std::log1p(R);
  auto I = [&](double k) { return k == -1.0 ? lr : std::expm1((k + 1) * lr) / (k + 1); };
  return I(e + 1) - I(e);
}

// Mass of [0,a] x [0,b] with the singular point at the origin corner.
double corner_mass(const WeightFactor& f, double a, double b) {
  if (a <= 0 || b <= 0) return 0.0;
  double t0 = std::atan2(b, a);
  auto ga = [&](double t) { return radial_phi(f, a / std::cos(t)); };
  auto gb = [&](double t) { return radial_phi(f, b / std::cos(t)); };
  double s1 = gauss_kronrod<double, 31>::integrate(ga, 0.0, t0, 12, 1e-14);
  double s2 = gauss_kronrod<double, 31>::integrate(gb, 0.0, std::numbers::pi / 2 - t0, 12, 1e-14);
  return s1 + s2;
}

double signed_corner(const WeightFactor& f, double x, double y) {
  double s = (x < 0 ? -1.0 : 1.0) * (y < 0 ? -1.0 : 1.0);
  return s * corner_mass(f, std::fabs(x), std::fabs(y));
}

double gauss_rect(const Weight& w, double x0, double x1, double y0, double y1) {
  auto inner = [&](double x) {
    return gauss<double, 8>::integrate([&](double y) { return w({x, y}); }, y0, y1);
  };
  return gauss<double, 8>::integrate(inner, x0, x1);
}

double rect_distance(const Point& c, double x0, double x1, double y0, double y1) {
  double dx = std::max({x0 - c[0], 0.0, c[0] - x1});
  double dy = std::max({y0 - c[1], 0.0, c[1] - y1});
  return std::max(dx, dy);
}

bool rect_closure_hits_power_singularity_2d(const Weight& w, double x0, double x1, double y0,
                                            double y1) {
  for (const auto& f : w.factors())
    if (f.kind == WeightFactor::Kind::Power && f.exponent <= -2 &&
        rect_distance(f.center, x0, x1, y0, y1) == 0.0)
      return true;
  return false;
}

// 8x8 Gauss with dyadic subdivision (up to `depth` levels) near factor centers.
double subdivided_rect(const Weight& w, double x0, double x1, double y0, double y1, int depth) {
  double size = x1 - x0;
  bool near = false;
  for (const auto& f : w.factors())
    if (rect_distance(f.center, x0, x1, y0, y1) < size) near = true;
  if (!near || depth == 0) return gauss_rect(w, x0, x1, y0, y1);
  double xm = 0.5 * (x0 + x1), ym = 0.5 * (y0 + y1);
  return subdivided_rect(w, x0, xm, y0, ym, depth - 1) + subdivided_rect(w, xm, x1, y0, ym, depth - 1) +
         subdivided_rect(w, x0, xm, ym, y1, depth - 1) + subdivided_rect(w, xm, x1, ym, y1, depth - 1);
}

double cell_mass_2d(const Weight& w, double x0, double x1, double y0, double y1, double h) {
  if (rect_closure_hits_power_singularity_2d(w, x0, x1, y0, y1)) return kInf;
  if (w.factors().size() == 1) {
    const auto& f = w.factors()[0];
    bool exact_ok = !(f.kind == WeightFactor::Kind::Power && f.exponent <= -2);
    if (exact_ok && rect_distance(f.center, x0, x1, y0, y1) < 2 * h) {
      double a0 = x0 - f.center[0], a1 = x1 - f.center[0];
      double b0 = y0 - f.center[1], b1 = y1 - f.center[1];
      double m = signed_corner(f, a1, b1) - signed_corner(f, a0, b1) - signed_corner(f, a1, b0) +
                 signed_corner(f, a0, b0);
      return w.scale() * m;
    }
    return gauss_rect(w, x0, x1, y0, y1);
  }
  return subdivided_rect(w, x0, x1, y0, y1, 4);
}

double neumaier_sum(const double* begin, std::size_t n, const std::size_t* idx) {
  double s = 0.0, c = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    double v = idx ? begin[idx[t]] : begin[t];
    if (std::isinf(v)) return kInf;
    double u = s + v;
    if (std::fabs(s) >= std::fabs(v))
      c += (s - u) + v;
    else
      c += (v - u) + s;
    s = u;
  }
  return s + c;
}

}  // namespace

double PhiSpec::operator()(double t) const { return std::pow(1.0 + t, alpha0); }

void PhiSpec::validate() const {
  if (!(alpha0 > 0) || !std::isfinite(alpha0)) throw ParameterError("phi requires alpha0 > 0");
}

Weight Weight::one() { return Weight{}; }

Weight Weight::power(double beta, Point center) {
  if (!std::isfinite(beta)) throw ParameterError("power weight exponent must be finite");
  Weight w;
  if (beta != 0.0) w.factors_.push_back({WeightFactor::Kind::Power, center, beta});
  return w;
}

Weight Weight::shifted(double gamma, Point center) {
  if (!std::isfinite(gamma)) throw ParameterError("shifted weight exponent must be finite");
  Weight w;
  if (gamma != 0.0) w.factors_.push_back({WeightFactor::Kind::Shifted, center, gamma});
  return w;
}

Weight Weight::product(const Weight& a, const Weight& b) {
  if (a.table_ || b.table_) throw UnsupportedError("products with tabulated weights are not supported");
  Weight w;
  w.scale_ = a.scale_ * b.scale_;
  w.factors_ = a.factors_;
  w.factors_.insert(w.factors_.end(), b.factors_.begin(), b.factors_.end());
  return w;
}

Weight Weight::tabulated(const GridFunction& samples) {
  for (std::size_t k = 0; k < samples.size(); ++k)
    if (!(samples[k] > 0) || !std::isfinite(samples[k]))
      throw InvariantError("tabulated weight must be finite and strictly positive; cell " +
                           std::to_string(k) + " holds " + std::to_string(samples[k]));
  Weight w;
  w.table_ = std::make_shared<const GridFunction>(samples);
  return w;
}

double Weight::operator()(const Point& x) const {
  if (table_) {
    const Grid& g = table_->grid();
    int i = g.locate(0, x[0]);
    int j = g.n() == 2 ? g.locate(1, x[1]) : 0;
    return scale_ * table_->at(i, j);
  }
  double v = scale_;
  for (const auto& f : factors_) v *= factor_value(f, std::hypot(x[0] - f.center[0], x[1] - f.center[1]));
  return v;
}

Weight Weight::pow(double e) const {
  Weight w = *this;
  w.scale_ = std::pow(scale_, e);
  for (auto& f : w.factors_) f.exponent *= e;
  if (table_) {
    GridFunction t = *table_;
    for (auto& v : t.values()) v = std::pow(v, e);
    w.table_ = std::make_shared<const GridFunction>(std::move(t));
  }
  return w;
}

Weight Weight::scaled(double c) const {
  if (!(c > 0)) throw ParameterError("weight scale must be positive");
  Weight w = *this;
  w.scale_ *= c;
  return w;
}

std::string Weight::describe() const {
  std::ostringstream os;
  os.precision(17);
  if (table_) {
    os << "tabulated";
    if (scale_ != 1.0) os << "*" << scale_;
    return os.str();
  }
  if (factors_.empty()) {
    os << scale_;
    return os.str();
  }
  bool first = true;
  if (scale_ != 1.0) {
    os << scale_;
    first = false;
  }
  for (const auto& f : factors_) {
    if (!first) os << "*";
    first = false;
    if (f.kind == WeightFactor::Kind::Power)
      os << "|x-(" << f.center[0] << "," << f.center[1] << ")|^" << f.exponent;
    else
      os << "(1+|x-(" << f.center[0] << "," << f.center[1] << ")|)^" << f.exponent;
  }
  return os.str();
}

double integrate_1d(const Weight& w, double a, double b) {
  if (b < a) throw ParameterError("integrate_1d: b < a");
  if (b == a) return 0.0;
  if (w.is_tabulated()) {
    const Grid& g = w.table().grid();
    double total = 0.0;
    for (int i = 0; i < g.N(); ++i) {
      double lo = std::max(a, g.node(0, i)), hi = std::min(b, g.node(0, i + 1));
      if (hi > lo) total += w.scale() * w.table()[i] * (hi - lo);
    }
    return total;
  }
  if (w.factors().empty()) return w.scale() * (b - a);
  if (w.factors().size() == 1) return w.scale() * factor_integral_1d(w.factors()[0], a, b);
  return product_integral_1d(w, a, b);
}

std::vector<double> cell_masses(const Weight& w, const Grid& grid) {
  std::vector<double> out(grid.size());
  double h = grid.h();
  if (w.is_tabulated()) {
    require_same_grid(w.table().grid(), grid, "tabulated weight");
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = w.scale() * w.table()[k] * grid.cell_volume();
    return out;
  }
  if (w.factors().empty()) {
    std::fill(out.begin(), out.end(), w.scale() * grid.cell_volume());
    return out;
  }
  for (std::size_t k = 0; k < out.size(); ++k) {
    auto [i, j] = grid.unflat(k);
    if (grid.n() == 1) {
      out[k] = integrate_1d(w, grid.node(0, i), grid.node(0, i + 1));
    } else {
      out[k] = cell_mass_2d(w, grid.node(0, i), grid.node(0, i + 1), grid.node(1, j),
                            grid.node(1, j + 1), h);
    }
  }
  return out;
}

MassTable::MassTable(const Weight& w, const Grid& grid)
    : grid_(grid), weight_(w), cells_(cell_masses(w, grid)) {
  closed_form_ = grid.n() == 1 && !w.is_tabulated() && w.factors().size() <= 1;
  int N = grid.N();
  int ny = grid.n() == 2 ? N : 1;
  prefix_.assign(static_cast<std::size_t>(N + 1) * (ny + 1), 0.0L);
  inf_prefix_.assign(prefix_.size(), 0);
  auto at = [&](int i, int j) { return static_cast<std::size_t>(j) * (N + 1) + i; };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < N; ++i) {
      double m = cells_[grid.flat(i, j)];
      bool inf = std::isinf(m);
      prefix_[at(i + 1, j + 1)] = (inf ? 0.0L : static_cast<long double>(m)) + prefix_[at(i, j + 1)] +
                                  prefix_[at(i + 1, j)] - prefix_[at(i, j)];
      inf_prefix_[at(i + 1, j + 1)] =
          (inf ? 1 : 0) + inf_prefix_[at(i, j + 1)] + inf_prefix_[at(i + 1, j)] - inf_prefix_[at(i, j)];
    }
}

double MassTable::operator()(const CellBox& b) const {
  if (b.empty()) return 0.0;
  if (closed_form_) return integrate_1d(weight_, grid_.node(0, b.lo[0]), grid_.node(0, b.hi[0]));
  int N = grid_.N();
  auto at = [&](int i, int j) { return static_cast<std::size_t>(j) * (N + 1) + i; };
  int infs = inf_prefix_[at(b.hi[0], b.hi[1])] - inf_prefix_[at(b.lo[0], b.hi[1])] -
             inf_prefix_[at(b.hi[0], b.lo[1])] + inf_prefix_[at(b.lo[0], b.lo[1])];
  if (infs > 0) return kInf;
  long double s = prefix_[at(b.hi[0], b.hi[1])] - prefix_[at(b.lo[0], b.hi[1])] -
                  prefix_[at(b.hi[0], b.lo[1])] + prefix_[at(b.lo[0], b.lo[1])];
  return std::max(0.0, static_cast<double>(s));
}

double MassTable::sum(std::span<const std::size_t> idx) const {
  return neumaier_sum(cells_.data(), idx.size(), idx.data());
}

double weighted_measure(const Weight& w, const Grid& grid, const CellBox& region) {
  if (!grid.whole().contains(region)) throw ParameterError("region lies outside the grid box");
  if (region.empty()) return 0.0;
  if (grid.n() == 1 && !w.is_tabulated())
    return integrate_1d(w, grid.node(0, region.lo[0]), grid.node(0, region.hi[0]));
  auto m = cell_masses(w, grid);
  std::vector<std::size_t> idx;
  for (int j = region.lo[1]; j < region.hi[1]; ++j)
    for (int i = region.lo[0]; i < region.hi[0]; ++i) idx.push_back(grid.flat(i, j));
  return neumaier_sum(m.data(), idx.size(), idx.data());
}

double weighted_measure(const Weight& w, const Grid& grid, const DyadicCube& region) {
  if (region.g < 0 || region.g > grid.finest_generation())
    throw ParameterError("dyadic cube generation outside the grid's range");
  return weighted_measure(w, grid, region.cells(grid));
}

double weighted_measure(const Weight& w, const Grid& grid, std::span<const std::size_t> cells) {
  for (auto k : cells)
    if (k >= grid.size()) throw ParameterError("cell index outside the grid");
  auto m = cell_masses(w, grid);
  return neumaier_sum(m.data(), cells.size(), cells.data());
}

double weighted_measure(const Weight& w, const Ball& ball, int n) {
  if (!(ball.r > 0)) throw ParameterError("ball radius must be positive");
  if (n == 1) return integrate_1d(w, ball.center[0] - ball.r, ball.center[0] + ball.r);
  if (n != 2) throw ParameterError("dimension must be 1 or 2");
  const double pi = std::numbers::pi;
  if (w.is_constant()) return w.scale() * pi * ball.r * ball.r;
  for (const auto& f : w.factors())
    if (f.kind == WeightFactor::Kind::Power && f.exponent <= -2 &&
        std::hypot(f.center[0] - ball.center[0], f.center[1] - ball.center[1]) <= ball.r)
      return kInf;
  if (!w.is_tabulated() && w.factors().size() == 1) {
    const auto& f = w.factors()[0];
    double d = std::hypot(f.center[0] - ball.center[0], f.center[1] - ball.center[1]);
    double r = ball.r;
    if (d == 0.0) return w.scale() * 2 * pi * radial_phi(f, r);
    if (d < r) {
      // Rays from the singular point leave the disk at rho(t) = d cos t + sqrt(r^2 - d^2 sin^2 t).
      auto g = [&](double t) {
        double s = std::sin(t);
        return radial_phi(f, d * std::cos(t) + std::sqrt(r * r - d * d * s * s));
      };
      return w.scale() * 2 * gauss_kronrod<double, 61>::integrate(g, 0.0, pi, 15, 1e-13);
    }
    double alpha = std::asin(std::min(1.0, r / d));
    auto g = [&](double t) {
      double s = std::sin(t);
      double root = std::sqrt(std::max(0.0, r * r - d * d * s * s));
      double c = d * std::cos(t);
      return radial_phi(f, c + root) - radial_phi(f, c - root);
    };
    boost::math::quadrature::tanh_sinh<double> ts;
    return w.scale() * 2 * ts.integrate(g, 0.0, alpha, 1e-13);
  }
  auto radial = [&](double t) {
    double c = std::cos(t), s = std::sin(t);
    return gauss_kronrod<double, 31>::integrate(
        [&](double rho) { return w({ball.center[0] + rho * c, ball.center[1] + rho * s}) * rho; }, 0.0,
        ball.r, 10, 1e-10);
  };
  return gauss_kronrod<double, 31>::integrate(radial, 0.0, 2 * pi, 10, 1e-10);
}

}  // namespace weightlab
