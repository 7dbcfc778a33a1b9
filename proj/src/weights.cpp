#include "weightlab/weights.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "weightlab/error.hpp"
#include "weightlab/operators.hpp"
#include "weightlab/spaces.hpp"

namespace weightlab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_p(double p, const char* what) {
  if (!(p > 1) || !std::isfinite(p)) throw ParameterError(std::string(what) + " requires 1 < p < inf");
}

// (a / |Q|) with the +inf convention for non-integrable masses.
double mean(double mass, double volume) { return std::isinf(mass) ? kInfinity : mass / volume; }

// x * y^e for the A_p-type products, where either factor may be +inf.
double ap_product(double a, double b, double e) {
  if (std::isinf(a) || std::isinf(b)) return kInfinity;
  return a * std::pow(b, e);
}

double ap_quantity(const MassTable& w, const MassTable& dual, const CellBox& q, double p, double inflate) {
  double vol = w.grid().volume(q) * inflate;
  return ap_product(mean(w(q), vol), mean(dual(q), vol), p - 1);
}

// Subsets E of Q for the subset-ratio test: Q itself, its sub-dyadic cubes and its half-cubes.
void for_each_subset(const CellBox& q, int n, const std::function<void(const CellBox&)>& visit) {
  visit(q);
  int m = q.extent(0);
  for (int parts = 2; m % parts == 0; parts *= 2) {
    int s = m / parts;
    for (int b = 0; b < (n == 2 ? parts : 1); ++b)
      for (int a = 0; a < parts; ++a) {
        CellBox e = q;
        e.lo[0] = q.lo[0] + a * s;
        e.hi[0] = e.lo[0] + s;
        if (n == 2) {
          e.lo[1] = q.lo[1] + b * s;
          e.hi[1] = e.lo[1] + s;
        }
        visit(e);
      }
  }
  if (n == 2 && m % 2 == 0) {
    int s = m / 2;
    for (int axis = 0; axis < 2; ++axis)
      for (int half = 0; half < 2; ++half) {
        CellBox e = q;
        e.lo[axis] = q.lo[axis] + half * s;
        e.hi[axis] = e.lo[axis] + s;
        visit(e);
      }
  }
}

double cube_min_value(const Weight& w, const Grid& g, const CellBox& q) {
  double lo = kInfinity;
  for (int j = q.lo[1]; j < q.hi[1]; ++j)
    for (int i = q.lo[0]; i < q.hi[0]; ++i) lo = std::min(lo, w(g.center_of(g.flat(i, j))));
  return lo;
}

std::string num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

void validate(const ClassSpec& spec) {
  std::visit(overloaded{
                 [](const classes::Ap& c) { require_p(c.p, "Ap"); },
                 [](const classes::A1&) {},
                 [](const classes::Ap1& c) { require_p(c.p, "A(p,1)"); },
                 [](const classes::ApPhi& c) {
                   require_p(c.p, "Ap(phi)");
                   c.phi.validate();
                 },
                 [](const classes::ApDyadicPhi& c) {
                   require_p(c.p, "dyadic Ap(phi)");
                   c.phi.validate();
                   if (!(c.eta > 0)) throw ParameterError("dyadic Ap(phi) requires eta > 0");
                 },
                 [](const classes::RH& c) {
                   if (!(c.r > 1) || !std::isfinite(c.r)) throw ParameterError("RH requires 1 < r < inf");
                 },
                 [](const classes::Doubling&) {},
             },
             spec);
}

std::string describe(const ClassSpec& spec) {
  return std::visit(overloaded{
                        [](const classes::Ap& c) { return "ap:p=" + num(c.p); },
                        [](const classes::A1&) { return std::string("a1"); },
                        [](const classes::Ap1& c) { return "ap1:p=" + num(c.p); },
                        [](const classes::ApPhi& c) { return "apphi:p=" + num(c.p) + ",a0=" + num(c.phi.alpha0); },
                        [](const classes::ApDyadicPhi& c) {
                          return "apdyadicphi:p=" + num(c.p) + ",a0=" + num(c.phi.alpha0) + ",eta=" + num(c.eta);
                        },
                        [](const classes::RH& c) { return "rh:r=" + num(c.r); },
                        [](const classes::Doubling&) { return std::string("doubling"); },
                    },
                    spec);
}

std::vector<CellBox> CubeFamily::cubes() const {
  if (kind == Kind::All) return grid_cubes(grid);
  int g = g_max < 0 ? grid.finest_generation() : g_max;
  std::vector<CellBox> out;
  for (const auto& q : enumerate_dyadic_cubes(grid, 0, g)) out.push_back(q.cells(grid));
  return out;
}

std::string CubeFamily::describe() const {
  std::ostringstream os;
  os << (kind == Kind::All ? "all" : "dyadic") << ":n=" << grid.n() << ",N=" << grid.N() << ",L=" << grid.L();
  if (kind == Kind::Dyadic) os << ",g<=" << (g_max < 0 ? grid.finest_generation() : g_max);
  return os.str();
}

FamilyLadder dyadic_family_ladder(const Grid& grid, int g_max) {
  if (g_max < 0) g_max = grid.finest_generation();
  if (g_max > grid.finest_generation()) throw ParameterError("dyadic ladder deeper than the grid");
  FamilyLadder out;
  for (int g = 0; g <= g_max; ++g) out.push_back({grid, CubeFamily::Kind::Dyadic, g});
  return out;
}

FamilyLadder window_family_ladder(int n, double h, const std::vector<double>& Ls) {
  FamilyLadder out;
  for (double L : Ls) {
    double cells = 2 * L / h;
    int N = static_cast<int>(std::lround(cells));
    if (std::fabs(cells - N) > 1e-9) throw ParameterError("window ladder: 2L/h must be an integer");
    out.push_back({Grid(Box{n, {0.0, 0.0}, L}, N), CubeFamily::Kind::All, -1});
  }
  return out;
}

double class_constant(const Weight& w_in, const ClassSpec& spec, const CubeFamily& family) {
  validate(spec);
  const Weight w = w_in.unscaled();
  const Grid& g = family.grid;
  auto cubes = family.cubes();
  if (cubes.empty()) throw ParameterError("class constant over an empty cube family");
  auto mw = mass_table(w, g);
  double best = 0.0;
  bool any = false;
  auto offer = [&](double v) {
    any = true;
    best = std::max(best, v);
  };
  std::visit(overloaded{
                 [&](const classes::Ap& c) {
                   auto md = mass_table(w.pow(-1.0 / (c.p - 1)), g);
                   for (const auto& q : cubes) offer(ap_quantity(*mw, *md, q, c.p, 1.0));
                 },
                 [&](const classes::A1&) {
                   for (const auto& q : cubes) {
                     double lo = cube_min_value(w, g, q);
                     double avg = mean((*mw)(q), g.volume(q));
                     offer(std::isinf(avg) || lo <= 0 ? kInfinity : avg / lo);
                   }
                 },
                 [&](const classes::Ap1& c) {
                   for (const auto& q : cubes) {
                     double wq = (*mw)(q), vq = g.volume(q);
                     for_each_subset(q, g.n(), [&](const CellBox& e) {
                       double we = (*mw)(e);
                       if (std::isinf(we)) return;
                       double ratio = std::isinf(wq) ? kInfinity : wq / we;
                       offer(ap_product(g.volume(e) / vq, ratio, 1.0 / c.p));
                     });
                   }
                 },
                 [&](const classes::ApPhi& c) {
                   auto md = mass_table(w.pow(-1.0 / (c.p - 1)), g);
                   for (const auto& q : cubes) offer(ap_quantity(*mw, *md, q, c.p, c.phi(g.volume(q))));
                 },
                 [&](const classes::ApDyadicPhi& c) {
                   if (family.kind != CubeFamily::Kind::Dyadic)
                     throw ParameterError("dyadic Ap(phi) is defined over dyadic cubes only");
                   auto md = mass_table(w.pow(-1.0 / (c.p - 1)), g);
                   for (const auto& q : cubes)
                     offer(ap_quantity(*mw, *md, q, c.p, std::pow(c.phi(g.volume(q)), c.eta)));
                 },
                 [&](const classes::RH& c) {
                   auto mr = mass_table(w.pow(c.r), g);
                   for (const auto& q : cubes) {
                     double vol = g.volume(q);
                     double top = mean((*mr)(q), vol), bottom = mean((*mw)(q), vol);
                     if (std::isinf(top)) {
                       offer(kInfinity);
                     } else if (!std::isinf(bottom)) {
                       offer(std::pow(top, 1.0 / c.r) / bottom);
                     }
                   }
                 },
                 [&](const classes::Doubling&) {
                   int N = g.N();
                   for (const auto& q : cubes) {
                     int m = q.extent(0);
                     if (m % 2) continue;
                     CellBox big = q;
                     bool inside = true;
                     for (int a = 0; a < g.n(); ++a) {
                       big.lo[a] -= m / 2;
                       big.hi[a] += m / 2;
                       inside = inside && big.lo[a] >= 0 && big.hi[a] <= N;
                     }
                     if (!inside) continue;
                     double small = (*mw)(q), large = (*mw)(big);
                     if (std::isinf(small)) continue;
                     offer(std::isinf(large) ? kInfinity : large / small);
                   }
                 },
             },
             spec);
  if (!any) throw ParameterError("no cube of the family is admissible for " + describe(spec));
  return best;
}

std::string to_string(Trend t) {
  switch (t) {
    case Trend::Bounded: return "bounded";
    case Trend::Diverging: return "diverging";
    default: return "inconclusive";
  }
}

Trend classify_trend(const std::vector<double>& v, double two_step_factor) {
  if (v.empty()) return Trend::Inconclusive;
  if (std::isinf(v.back())) return Trend::Diverging;
  if (v.size() < 3) return Trend::Inconclusive;
  double base = v[v.size() - 3];
  if (base <= 0) return v.back() <= 0 ? Trend::Bounded : Trend::Inconclusive;
  double growth = v.back() / base;
  if (growth >= two_step_factor * (1 - 1e-9)) return Trend::Diverging;
  if (growth <= 1.25) return Trend::Bounded;
  return Trend::Inconclusive;
}

WeightReport classify(const Weight& w, const ClassSpec& spec, const FamilyLadder& ladder) {
  if (ladder.empty()) throw ParameterError("classification needs a nonempty family ladder");
  WeightReport r;
  r.weight = w.describe();
  r.spec = describe(spec);
  for (const auto& fam : ladder) {
    r.families.push_back(fam.describe());
    r.constants.push_back(class_constant(w, spec, fam));
  }
  r.trend = classify_trend(r.constants);
  return r;
}

double a1_check(const Weight& w_in, const Grid& grid, const std::optional<PhiSpec>& phi) {
  const Weight w = w_in.unscaled();
  auto mt = mass_table(w, grid);
  GridFunction avg(grid, 0.0);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    double m = mt->cell(k);
    if (std::isinf(m)) return kInfinity;
    avg[k] = m / grid.cell_volume();
  }
  MaximalVariant v = phi ? MaximalVariant{maximal_variants::Phi{*phi}} : MaximalVariant{maximal_variants::HL{}};
  auto M = maximal(avg, v);
  double best = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    double wx = w(grid.center_of(k));
    best = std::max(best, wx > 0 ? M[k] / wx : kInfinity);
  }
  return best;
}

WeightReport a1_report(const Weight& w, const std::vector<Grid>& grids, const std::optional<PhiSpec>& phi) {
  if (grids.empty()) throw ParameterError("A1 report needs at least one grid");
  WeightReport r;
  r.weight = w.describe();
  r.spec = phi ? "a1phi:a0=" + num(phi->alpha0) : "a1";
  for (const auto& g : grids) {
    r.families.push_back("all:n=" + std::to_string(g.n()) + ",N=" + std::to_string(g.N()) + ",L=" + num(g.L()));
    r.constants.push_back(a1_check(w, g, phi));
  }
  r.trend = classify_trend(r.constants);
  return r;
}

CriticalIndex critical_index(const Weight& w, const Grid& grid, int g_max) {
  auto ladder = dyadic_family_ladder(grid, g_max);
  auto bounded = [&](double r) { return classify(w, classes::RH{r}, ladder).trend == Trend::Bounded; };
  CriticalIndex ci;
  double lo = 1.0 + 1e-3, hi = CriticalIndex::kCriticalCap;
  if (!bounded(lo)) {
    ci.status = CriticalIndex::Status::NotAInfinity;
    ci.r_lo = 1.0;
    ci.r_hi = lo;
    return ci;
  }
  if (bounded(hi)) {
    ci.status = CriticalIndex::Status::Capped;
    ci.r_lo = hi;
    ci.r_hi = kInfinity;
    return ci;
  }
  while (hi - lo > 0.05) {
    double mid = 0.5 * (lo + hi);
    (bounded(mid) ? lo : hi) = mid;
    ++ci.bisections;
  }
  ci.r_lo = lo;
  ci.r_hi = hi;
  return ci;
}

ComparabilityReport comparability_check(const Weight& w, double p, double r,
                                        const std::vector<ComparabilitySample>& samples,
                                        const std::vector<GridFunction>& fs) {
  require_p(p, "comparability");
  if (!(r > 1)) throw ParameterError("comparability requires r > 1");
  if (samples.empty()) throw ParameterError("comparability needs at least one sample pair");
  ComparabilityReport rep;
  double upper_exp = (r - 1) / r;
  for (std::size_t t = 0; t < samples.size(); ++t) {
    const auto& s = samples[t];
    double b0 = s.ball.center[0] - s.ball.r, b1 = s.ball.center[0] + s.ball.r;
    if (!(s.ball.r > 0) || !(s.e_lo < s.e_hi) || s.e_lo < b0 - 1e-12 || s.e_hi > b1 + 1e-12)
      throw ParameterError("comparability sample: E must be a nonempty interval inside the ball");
    double ratio = integrate_1d(w, s.e_lo, s.e_hi) / integrate_1d(w, b0, b1);
    double frac = (s.e_hi - s.e_lo) / (b1 - b0);
    double lower = ratio / std::pow(frac, p), upper = ratio / std::pow(frac, upper_exp);
    if (lower < rep.C1) {
      rep.C1 = lower;
      rep.witness_C1 = t;
    }
    if (upper > rep.C2) {
      rep.C2 = upper;
      rep.witness_C2 = t;
    }
  }
  rep.collapsed = rep.C1 > rep.C2;
  for (const auto& f : fs) {
    const Grid& g = f.grid();
    if (g.n() != 1) throw UnsupportedError("comparability averaging bound is one-dimensional");
    auto mt = mass_table(w, g);
    for (const auto& s : samples) {
      double lhs = 0.0, num_p = 0.0, wb = 0.0, len = 0.0;
      for (int i = 0; i < g.N(); ++i) {
        double x = g.coord(0, i);
        if (std::fabs(x - s.ball.center[0]) >= s.ball.r) continue;
        double a = std::fabs(f[i]);
        lhs += a * g.h();
        len += g.h();
        wb += mt->cell(i);
        if (a > 0) num_p += std::pow(a, p) * mt->cell(i);
      }
      if (len == 0.0 || lhs == 0.0 || std::isinf(wb)) continue;
      double ratio = (lhs / len) / std::pow(num_p / wb, 1.0 / p);
      rep.averaging_constant = std::max(rep.averaging_constant.value_or(0.0), ratio);
    }
  }
  return rep;
}

}  // namespace weightlab
