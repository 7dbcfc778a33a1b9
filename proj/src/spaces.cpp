#include "weightlab/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>

#include "weightlab/balls.hpp"
#include "weightlab/error.hpp"
#include "weightlab/numeric.hpp"

namespace weightlab {

namespace {

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void require_kappa(double kappa) {
  if (!(kappa > 0 && kappa < 1)) throw ParameterError("kappa must satisfy 0 < kappa < 1, got " + num(kappa));
}

void require_q_ge_1(double q) {
  if (!(q >= 1) || !std::isfinite(q)) throw ParameterError("q must satisfy 1 <= q < inf, got " + num(q));
}

bool touches_boundary(const Grid& g, const CellBox& b) {
  if (b.lo[0] <= 0 || b.hi[0] >= g.N()) return true;
  return g.n() == 2 && (b.lo[1] <= 0 || b.hi[1] >= g.N());
}

// (integral / normalizer^kappa)^(1/q) with the conventions used throughout:
// a non-integrable piece is +inf, an infinite normalizer kills a finite integral.
double normalized(double integral, double normalizer, double kappa, double q) {
  if (std::isinf(integral)) return kInfinity;
  if (integral == 0.0) return 0.0;
  if (std::isinf(normalizer)) return 0.0;
  if (normalizer <= 0.0) return kInfinity;
  return std::pow(integral / std::pow(normalizer, kappa), 1.0 / q);
}

// |f|^q * mass per cell; zero where f vanishes even if the mass is infinite.
std::vector<double> weighted_powers(const GridFunction& f, double q, const std::vector<double>& mass) {
  std::vector<double> out(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) {
    double a = std::fabs(f[k]);
    out[k] = a == 0.0 ? 0.0 : std::pow(a, q) * mass[k];
  }
  return out;
}

struct Best {
  double value = -1.0;
  Region region{};
  bool limited = false;

  void offer(double v, const Region& r, bool lim) {
    if (v > value) {
      value = v;
      region = r;
      limited = lim;
    }
  }
  NormValue result(const char* what) const {
    if (value < 0) throw ParameterError(std::string(what) + ": empty region family on this grid");
    return {value, region, limited};
  }
};

Region cube_region(const Grid& g, const CellBox& b) {
  Region r;
  r.kind = Region::Kind::Cube;
  r.cells = b;
  r.center = {0.5 * (g.node(0, b.lo[0]) + g.node(0, b.hi[0])),
              g.n() == 2 ? 0.5 * (g.node(1, b.lo[1]) + g.node(1, b.hi[1])) : 0.0};
  r.radius = 0.5 * g.side(b);
  return r;
}

Region ball_region(const DiscreteBall& b) {
  Region r;
  r.kind = Region::Kind::Ball;
  r.cells = b.bbox;
  r.center = b.center;
  r.radius = b.radius;
  return r;
}

NormValue cube_morrey(const GridFunction& f, double q, double kappa, const Weight& w) {
  auto mt = mass_table(w, f.grid());
  auto integrand = weighted_powers(f, q, mt->cells());
  const std::vector<double>* arrays[] = {&integrand};
  Best best;
  visit_cubes(f.grid(), arrays, [&](const CellBox& box, const std::vector<double>& s) {
    double v = normalized(s[0], (*mt)(box), kappa, q);
    best.offer(v, cube_region(f.grid(), box), touches_boundary(f.grid(), box));
  });
  return best.result("weighted Morrey norm");
}

NormValue weak_morrey(const GridFunction& f, double p, double q, const Weight& w) {
  const Grid& g = f.grid();
  auto mt = mass_table(w, g);
  Best best;
  std::vector<std::pair<double, double>> vm;
  double expo = 1.0 / q - 1.0 / p;
  for (const auto& box : grid_cubes(g)) {
    vm.clear();
    for (int j = box.lo[1]; j < box.hi[1]; ++j)
      for (int i = box.lo[0]; i < box.hi[0]; ++i) {
        std::size_t k = g.flat(i, j);
        double a = std::fabs(f[k]);
        if (a > 0) vm.emplace_back(a, mt->cell(k));
      }
    std::stable_sort(vm.begin(), vm.end(), [](auto& x, auto& y) { return x.first > y.first; });
    double sup = 0.0;
    CompensatedSum mass;
    for (std::size_t t = 0; t < vm.size(); ++t) {
      mass.add(vm[t].second);
      if (t + 1 < vm.size() && vm[t + 1].first == vm[t].first) continue;
      double m = mass.value();
      sup = std::max(sup, std::isinf(m) ? kInfinity : vm[t].first * std::pow(m, 1.0 / q));
    }
    double wq = (*mt)(box);
    double v;
    if (std::isinf(sup)) {
      v = kInfinity;
    } else if (sup == 0.0) {
      v = 0.0;
    } else if (std::isinf(wq)) {
      v = expo > 0 ? 0.0 : (expo == 0 ? sup : kInfinity);
    } else {
      v = sup / std::pow(wq, expo);
    }
    best.offer(v, cube_region(g, box), touches_boundary(g, box));
  }
  return best.result("weak Morrey norm");
}

NormValue ball_morrey(const GridFunction& f, double q, double kappa, const Weight& w_norm,
                      const Weight& w_inner, double r_min, double r_max, const char* what) {
  const Grid& g = f.grid();
  auto mn = mass_table(w_norm, g);
  auto mi = mass_table(w_inner, g);
  auto integrand = weighted_powers(f, q, mi->cells());
  const std::vector<double>* arrays[] = {&integrand, &mn->cells()};
  Best best;
  visit_balls(g, arrays, nullptr, r_min, r_max, [&](const BallSums& b) {
    double v = normalized(b.sums[0], b.sums[1], kappa, q);
    best.offer(v, ball_region(b.ball), touches_boundary(g, b.ball.bbox));
  });
  return best.result(what);
}

NormValue central_morrey(const GridFunction& f, double q, double kappa, const Weight& w, double r_max,
                         const char* what) {
  const Grid& g = f.grid();
  auto mn = mass_table(w, g);
  auto ones = mass_table(Weight::one(), g);
  auto integrand = weighted_powers(f, q, ones->cells());
  const std::vector<double>* arrays[] = {&integrand, &mn->cells()};
  Best best;
  visit_central_balls(g, arrays, 0.0, r_max, [&](const BallSums& b) {
    double v = normalized(b.sums[0], b.sums[1], kappa, q);
    best.offer(v, ball_region(b.ball), touches_boundary(g, b.ball.bbox));
  });
  return best.result(what);
}

std::string weight_tag(const Weight& w) { return w.describe(); }

}  // namespace

NormSpec morrey_pq(double p, double q, const Weight& w) {
  if (!(q > 0 && q < p)) throw ParameterError("M^p_q requires 0 < q < p");
  return norms::WeightedMorrey{q, 1.0 - q / p, w};
}

void validate(const NormSpec& spec) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, norms::Lebesgue>) {
          if (!(s.p > 0)) throw ParameterError("Lebesgue exponent must satisfy p > 0");
        } else if constexpr (std::is_same_v<T, norms::Lorentz>) {
          if (!(s.p > 0) || !(s.q > 0)) throw ParameterError("Lorentz exponents must satisfy 0 < p, q <= inf");
          if (std::isinf(s.p) && !std::isinf(s.q))
            throw UnsupportedError("Lorentz space with p = inf and q < inf is not supported");
        } else if constexpr (std::is_same_v<T, norms::WeakMorrey>) {
          if (!(s.q > 0 && s.q <= s.p) || std::isinf(s.p))
            throw ParameterError("weak Morrey requires 0 < q <= p < inf");
        } else if constexpr (std::is_same_v<T, norms::BMO>) {
        } else if constexpr (std::is_same_v<T, norms::BMOp>) {
          if (!(s.p >= 1) || std::isinf(s.p)) throw ParameterError("BMO^p requires 1 <= p < inf");
        } else {
          require_q_ge_1(s.q);
          require_kappa(s.kappa);
        }
      },
      spec);
}

std::string describe(const NormSpec& spec) {
  return std::visit(
      [](const auto& s) -> std::string {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, norms::Lebesgue>)
          return "lebesgue(p=" + num(s.p) + ",w=" + weight_tag(s.w) + ")";
        else if constexpr (std::is_same_v<T, norms::Lorentz>)
          return "lorentz(p=" + num(s.p) + ",q=" + num(s.q) + ",w=" + weight_tag(s.w) + ")";
        else if constexpr (std::is_same_v<T, norms::WeightedMorrey>)
          return "morrey(q=" + num(s.q) + ",kappa=" + num(s.kappa) + ",w=" + weight_tag(s.w) + ")";
        else if constexpr (std::is_same_v<T, norms::TwoWeightMorrey>)
          return "twoweight(q=" + num(s.q) + ",kappa=" + num(s.kappa) + ",w1=" + weight_tag(s.w1) +
                 ",w2=" + weight_tag(s.w2) + ")";
        else if constexpr (std::is_same_v<T, norms::WeakMorrey>)
          return "weakmorrey(p=" + num(s.p) + ",q=" + num(s.q) + ",w=" + weight_tag(s.w) + ")";
        else if constexpr (std::is_same_v<T, norms::LocalMorrey>)
          return "localmorrey(q=" + num(s.q) + ",kappa=" + num(s.kappa) + ")";
        else if constexpr (std::is_same_v<T, norms::InhomMorrey>)
          return "inhommorrey(q=" + num(s.q) + ",kappa=" + num(s.kappa) + ",w=" + weight_tag(s.w) + ")";
        else if constexpr (std::is_same_v<T, norms::CentralMorrey>)
          return "central(q=" + num(s.q) + ",kappa=" + num(s.kappa) + ",w=" + weight_tag(s.w) + ")";
        else if constexpr (std::is_same_v<T, norms::CentralLocalMorrey>)
          return "centrallocal(q=" + num(s.q) + ",kappa=" + num(s.kappa) + ",w=" + weight_tag(s.w) + ")";
        else if constexpr (std::is_same_v<T, norms::BMO>)
          return "bmo";
        else
          return "bmop(p=" + num(s.p) + ")";
      },
      spec);
}

std::string Region::describe(const Grid& grid) const {
  std::ostringstream os;
  os.precision(17);
  switch (kind) {
    case Kind::None:
      return "none";
    case Kind::Cube:
      os << "cube[" << grid.node(0, cells.lo[0]) << "," << grid.node(0, cells.hi[0]) << ")";
      if (grid.n() == 2) os << "x[" << grid.node(1, cells.lo[1]) << "," << grid.node(1, cells.hi[1]) << ")";
      return os.str();
    case Kind::Ball:
      os << "ball(center=" << center[0];
      if (grid.n() == 2) os << "," << center[1];
      os << ",r=" << radius << ")";
      return os.str();
  }
  return "none";
}

const Grid& VectorFunction::grid() const {
  if (components.empty()) throw ParameterError("vector function has no components");
  return components.front().grid();
}

void VectorFunction::validate() const {
  if (components.empty()) throw ParameterError("vector function needs K >= 1 components");
  if (!(r >= 1) || std::isinf(r)) throw ParameterError("ell^r modulus requires 1 <= r < inf");
  for (const auto& c : components) require_same_grid(c.grid(), components.front().grid(), "vector function");
}

double RearrangementCurve::operator()(double s) const {
  if (s < 0) throw ParameterError("rearrangement evaluated at negative t");
  auto it = std::upper_bound(t.begin(), t.end(), s);
  if (it == t.end()) return 0.0;
  return v[static_cast<std::size_t>(it - t.begin())];
}

double RearrangementCurve::level_length(double alpha) const {
  double len = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i] > alpha) len = t[i];
  return len;
}

std::shared_ptr<const MassTable> mass_table(const Weight& w, const Grid& grid) {
  static std::mutex mu;
  static std::map<std::string, std::pair<Weight, std::shared_ptr<const MassTable>>> cache;
  std::ostringstream key;
  key.precision(17);
  key << w.describe() << '|' << w.table_id() << '|' << grid.n() << ',' << grid.N() << ',' << grid.L()
      << ',' << grid.box().center[0] << ',' << grid.box().center[1];
  {
    std::lock_guard lock(mu);
    auto it = cache.find(key.str());
    if (it != cache.end()) return it->second.second;
  }
  auto table = std::make_shared<const MassTable>(w, grid);
  std::lock_guard lock(mu);
  if (cache.size() > 256) cache.clear();
  cache.emplace(key.str(), std::make_pair(w, table));
  return table;
}

double cell_average(const GridFunction& b, const CellBox& box) {
  CompensatedSum s;
  for (int j = box.lo[1]; j < box.hi[1]; ++j)
    for (int i = box.lo[0]; i < box.hi[0]; ++i) s.add(b.at(i, j));
  return s.value() / static_cast<double>(box.count());
}

double distribution_function(const GridFunction& f, const Weight& w, double alpha) {
  if (!(alpha >= 0)) throw ParameterError("distribution function needs alpha >= 0");
  auto mt = mass_table(w, f.grid());
  CompensatedSum s;
  for (std::size_t k = 0; k < f.size(); ++k)
    if (std::fabs(f[k]) > alpha) s.add(mt->cell(k));
  return s.value();
}

RearrangementCurve rearrangement(const GridFunction& f, const Weight& w) {
  auto mt = mass_table(w, f.grid());
  std::vector<std::size_t> order;
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (!std::isfinite(f[k])) throw InputError("rearrangement of a non-finite function");
    if (f[k] != 0.0) order.push_back(k);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return std::fabs(f[a]) > std::fabs(f[b]); });
  RearrangementCurve c;
  CompensatedSum acc;
  for (std::size_t t = 0; t < order.size(); ++t) {
    acc.add(mt->cell(order[t]));
    double v = std::fabs(f[order[t]]);
    if (t + 1 < order.size() && std::fabs(f[order[t + 1]]) == v) continue;
    c.t.push_back(acc.value());
    c.v.push_back(v);
  }
  return c;
}

double lebesgue_norm(const GridFunction& f, double p, const Weight& w) {
  if (!(p > 0)) throw ParameterError("Lebesgue exponent must satisfy p > 0");
  if (std::isinf(p)) {
    double m = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) m = std::max(m, std::fabs(f[k]));
    return m;
  }
  auto mt = mass_table(w, f.grid());
  CompensatedSum s;
  for (std::size_t k = 0; k < f.size(); ++k) {
    double a = std::fabs(f[k]);
    if (a != 0.0) s.add(std::pow(a, p) * mt->cell(k));
  }
  return std::pow(s.value(), 1.0 / p);
}

double lorentz_norm(const RearrangementCurve& c, double p, double q) {
  if (!(p > 0) || !(q > 0)) throw ParameterError("Lorentz exponents must satisfy 0 < p, q <= inf");
  if (std::isinf(p)) {
    if (!std::isinf(q)) throw UnsupportedError("Lorentz space with p = inf and q < inf is not supported");
    return c.v.empty() ? 0.0 : c.v.front();
  }
  if (std::isinf(q)) {
    double sup = 0.0;
    for (std::size_t i = 0; i < c.v.size(); ++i) {
      if (std::isinf(c.t[i])) return kInfinity;
      sup = std::max(sup, c.v[i] * std::pow(c.t[i], 1.0 / p));
    }
    return sup;
  }
  double a = q / p;
  CompensatedSum s;
  double prev = 0.0;
  for (std::size_t i = 0; i < c.v.size(); ++i) {
    if (std::isinf(c.t[i])) return kInfinity;
    s.add(std::pow(c.v[i], q) * power_difference(c.t[i], prev, a));
    prev = c.t[i];
  }
  return std::pow(s.value(), 1.0 / q);
}

double lorentz_norm(const GridFunction& f, double p, double q, const Weight& w) {
  if (std::isinf(p) && !std::isinf(q))
    throw UnsupportedError("Lorentz space with p = inf and q < inf is not supported");
  return lorentz_norm(rearrangement(f, w), p, q);
}

NormValue bmo_norm(const GridFunction& b, double p) {
  if (!(p >= 1) || std::isinf(p)) throw ParameterError("BMO^p requires 1 <= p < inf");
  const Grid& g = b.grid();
  Best best;
  for (const auto& box : grid_cubes(g)) {
    double mean = cell_average(b, box);
    CompensatedSum dev;
    for (int j = box.lo[1]; j < box.hi[1]; ++j)
      for (int i = box.lo[0]; i < box.hi[0]; ++i) {
        double d = std::fabs(b.at(i, j) - mean);
        dev.add(p == 1.0 ? d : std::pow(d, p));
      }
    double avg = dev.value() / static_cast<double>(box.count());
    double v = p == 1.0 ? avg : std::pow(avg, 1.0 / p);
    best.offer(v, cube_region(g, box), touches_boundary(g, box));
  }
  return best.result("BMO norm");
}

NormValue morrey_norm(const GridFunction& f, const NormSpec& spec) {
  validate(spec);
  return std::visit(
      [&](const auto& s) -> NormValue {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, norms::WeightedMorrey>)
          return cube_morrey(f, s.q, s.kappa, s.w);
        else if constexpr (std::is_same_v<T, norms::WeakMorrey>)
          return weak_morrey(f, s.p, s.q, s.w);
        else if constexpr (std::is_same_v<T, norms::TwoWeightMorrey>)
          return ball_morrey(f, s.q, s.kappa, s.w1, s.w2, 0.0, kInfinity, "two-weight Morrey norm");
        else if constexpr (std::is_same_v<T, norms::LocalMorrey>)
          return ball_morrey(f, s.q, s.kappa, Weight::one(), Weight::one(), 0.0, 1.0, "local Morrey norm");
        else if constexpr (std::is_same_v<T, norms::InhomMorrey>)
          return ball_morrey(f, s.q, s.kappa, s.w, s.w, 1.0, kInfinity, "inhomogeneous Morrey norm");
        else if constexpr (std::is_same_v<T, norms::CentralMorrey>)
          return central_morrey(f, s.q, s.kappa, s.w, kInfinity, "central Morrey norm");
        else if constexpr (std::is_same_v<T, norms::CentralLocalMorrey>)
          return central_morrey(f, s.q, s.kappa, s.w, 1.0, "central local Morrey norm");
        else
          throw ParameterError("morrey_norm: spec " + describe(NormSpec{s}) + " is not a Morrey variant");
      },
      spec);
}

NormValue norm(const GridFunction& f, const NormSpec& spec) {
  validate(spec);
  return std::visit(
      [&](const auto& s) -> NormValue {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, norms::Lebesgue>)
          return {lebesgue_norm(f, s.p, s.w), {}, false};
        else if constexpr (std::is_same_v<T, norms::Lorentz>)
          return {lorentz_norm(f, s.p, s.q, s.w), {}, false};
        else if constexpr (std::is_same_v<T, norms::BMO>)
          return bmo_norm(f, 1.0);
        else if constexpr (std::is_same_v<T, norms::BMOp>)
          return bmo_norm(f, s.p);
        else
          return morrey_norm(f, spec);
      },
      spec);
}

GridFunction ell_r_modulus(const VectorFunction& v) {
  v.validate();
  if (v.components.size() == 1) return abs(v.components.front());
  GridFunction out(v.grid());
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (v.r == 1.0) {
      double s = 0.0;
      for (const auto& c : v.components) s += std::fabs(c[k]);
      out[k] = s;
    } else if (v.r == 2.0) {
      double s = 0.0;
      for (const auto& c : v.components) s += c[k] * c[k];
      out[k] = std::sqrt(s);
    } else {
      double s = 0.0;
      for (const auto& c : v.components) s += std::pow(std::fabs(c[k]), v.r);
      out[k] = std::pow(s, 1.0 / v.r);
    }
  }
  return out;
}

}  // namespace weightlab
