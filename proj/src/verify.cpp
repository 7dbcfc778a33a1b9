#include "weightlab/verify.hpp"

#include <algorithm>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"
#include "weightlab/error.hpp"
#include "weightlab/parallel.hpp"

namespace weightlab {

namespace {

using json = nlohmann::ordered_json;

std::string full_precision(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

double parse_number(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ParameterError("'" + key + "' expects a number, got '" + text + "'");
  }
}

// ------------------------------------------------------------ family

bool in_window(const Point& x, int n, double r) {
  for (int a = 0; a < n; ++a)
    if (!(x[a] >= -r && x[a] < r)) return false;
  return true;
}

}  // namespace

std::vector<TestFunction> function_family(const FamilySpec& spec, int n) {
  if (n != 1 && n != 2) throw ParameterError("function_family: n must be 1 or 2");
  if (!(spec.radius > 0) || !std::isfinite(spec.radius)) throw ParameterError("function_family: radius must be > 0");
  if (spec.random_steps < 0) throw ParameterError("function_family: random_steps must be >= 0");
  const double r = spec.radius;
  std::vector<TestFunction> out;

  if (spec.indicators) {
    const double ends[4][2] = {{0.0, 0.5}, {-0.5, 0.0}, {0.25, 0.75}, {-1.0, 1.0}};
    for (const auto& e : ends) {
      double a = e[0] * r, b = e[1] * r;
      std::ostringstream name;
      name << "indicator[" << e[0] << "," << e[1] << ")";
      out.push_back({name.str(), [a, b, n](const Point& x) {
                       for (int k = 0; k < n; ++k)
                         if (!(x[k] >= a && x[k] < b)) return 0.0;
                       return 1.0;
                     }});
    }
  }
  if (spec.gaussians) {
    for (double frac : {0.25, 0.5}) {
      double sigma = frac * r;
      std::ostringstream name;
      name << "gaussian:sigma=" << frac;
      out.push_back({name.str(), [sigma, r, n](const Point& x) {
                       if (!in_window(x, n, r)) return 0.0;
                       double s = x[0] * x[0] + (n == 2 ? x[1] * x[1] : 0.0);
                       return std::exp(-s / (2 * sigma * sigma));
                     }});
    }
  }
  // mt19937_64 output is fixed by the standard; the value map below avoids the
  // implementation-defined distributions.
  const int cells = 16;
  const std::size_t count = n == 1 ? cells : cells * cells;
  for (int j = 0; j < spec.random_steps; ++j) {
    std::mt19937_64 rng(spec.seed + static_cast<std::uint64_t>(j));
    auto values = std::make_shared<std::vector<double>>(count);
    bool nonzero = false;
    for (auto& v : *values) {
      v = (static_cast<int>(rng() % 17) - 8) / 8.0;
      nonzero = nonzero || v != 0.0;
    }
    if (!nonzero) (*values)[0] = 1.0;
    const double spacing = 2 * r / cells;
    out.push_back({"step:" + std::to_string(j), [values, spacing, r, n](const Point& x) {
                     if (!in_window(x, n, r)) return 0.0;
                     int i = std::min(cells - 1, static_cast<int>(std::floor((x[0] + r) / spacing)));
                     int k = n == 2 ? std::min(cells - 1, static_cast<int>(std::floor((x[1] + r) / spacing))) : 0;
                     return (*values)[static_cast<std::size_t>(k) * cells + i];
                   }});
  }
  return out;
}

OperatorHandle identity_operator() {
  return {"identity", true, [](const GridFunction& f) { return to_complex(f); }};
}

double norm_ratio(const GridFunction& tf, const GridFunction& f, const NormSpec& source, const NormSpec& target) {
  double den = norm(f, source).value;
  if (!(den > 0)) throw ParameterError("norm_ratio: the source norm of f is zero");
  double num = norm(tf, target).value;
  if (std::isinf(num)) return kInfinity;
  return num / den;
}

double norm_ratio(const OperatorHandle& op, const GridFunction& f, const NormSpec& source, const NormSpec& target) {
  return norm_ratio(abs(op.apply(f)), f, source, target);
}

// ------------------------------------------------------------ probe specs

namespace {

struct TagInfo {
  std::string title;
  std::map<std::string, double> defaults;
  std::vector<int> ladder{64, 128, 256};
};

const std::map<std::string, TagInfo>& tag_table() {
  static const std::map<std::string, TagInfo> table = {
      {"identity", {"identity operator on L^p_w (sanity anchor)", {{"p", 2}, {"beta", 0.5}}}},
      {"t31",
       {"vector Hardy-Littlewood maximal operator, L^p_w into weak Morrey",
        {{"p", 2}, {"q", 1.5}, {"beta", 0.5}, {"K", 3}, {"r", 2}}}},
      {"t32", {"A(p,1) product and witness f = w^-1 chi_Q", {{"p", 2}, {"q", 1.5}, {"beta", 0.5}}}},
      {"t34",
       {"pseudo-differential operator of order 0 on weighted Lorentz and weak Morrey",
        {{"p", 2}, {"q", 2}, {"qm", 1.5}, {"beta", 0.5}}}},
      {"t36",
       {"A_p(phi) witness f_eps = (w + eps)^(1-p') chi_Q on shrinking Q",
        {{"p", 2}, {"kappa", 0.25}, {"beta", 1.5}, {"a0", 1}, {"eps", 1e-6}, {"eps_exponent", 0}, {"steps", 8}}}},
      {"t38",
       {"dyadic maximal operator M_{phi,2eta}, vector weak type",
        {{"p", 2}, {"r", 3}, {"beta", 0.5}, {"a0", 1}, {"eta", 1}, {"K", 3}}}},
      {"t41",
       {"maximal truncated Hilbert transform on vector two-weight Morrey",
        {{"p", 2}, {"r", 2}, {"beta1", 0.5}, {"beta2", -0.5}, {"kappa", 0}, {"K", 2}},
        {256, 512, 1024, 2048}}},
      {"t46",
       {"strongly singular T^{s,lambda} on L^2 and central Morrey",
        {{"p", 2}, {"s", 1}, {"lambda", 0.25}, {"kappa", 0.75}, {"beta", 0.5}}}},
      {"t48",
       {"strongly singular T^{s,lambda} from two-weight Morrey into inhomogeneous Morrey",
        {{"p", 4}, {"pstar", 1}, {"zeta", 1}, {"kappa", 0.5}, {"beta", -0.5}, {"s", 1}, {"lambda", 0.1}}}},
  };
  return table;
}

const TagInfo& tag_info(const std::string& tag) {
  auto it = tag_table().find(tag);
  if (it == tag_table().end()) throw ParameterError("unknown probe theorem tag '" + tag + "'");
  return it->second;
}

std::vector<int> parse_ladder(const std::string& text) {
  std::vector<int> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item.empty()) continue;
    double v = parse_number("ladder", item);
    if (v != std::floor(v) || v < 2 || v > (1 << 20)) throw ParameterError("ladder entries must be integers N >= 2");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

std::string ladder_text(const std::vector<int>& ladder) {
  std::string s;
  for (std::size_t i = 0; i < ladder.size(); ++i) s += (i ? "," : "") + std::to_string(ladder[i]);
  return s;
}

}  // namespace

std::vector<std::string> probe_tags() {
  std::vector<std::string> out;
  for (const auto& [k, v] : tag_table()) out.push_back(k);
  return out;
}

ExperimentSpec ExperimentSpec::make(const std::string& theorem, const std::map<std::string, std::string>& overrides) {
  ExperimentSpec s;
  s.theorem = theorem;
  s.params = tag_info(theorem).defaults;
  s.ladder = tag_info(theorem).ladder;
  for (const auto& [key, text] : overrides) {
    if (key == "ladder") {
      s.ladder = parse_ladder(text);
    } else if (key == "L") {
      s.L = parse_number(key, text);
    } else if (key == "seed") {
      double v = parse_number(key, text);
      if (v < 0 || v != std::floor(v)) throw ParameterError("seed must be a nonnegative integer");
      s.family.seed = static_cast<std::uint64_t>(v);
    } else if (key == "random_steps") {
      s.family.random_steps = static_cast<int>(parse_number(key, text));
    } else if (key == "radius") {
      s.family.radius = parse_number(key, text);
    } else if (s.params.count(key)) {
      s.params[key] = parse_number(key, text);
    } else {
      throw ParameterError("unknown parameter '" + key + "' for probe " + theorem);
    }
  }
  s.validate();
  return s;
}

double ExperimentSpec::param(const std::string& key) const {
  auto it = params.find(key);
  if (it == params.end()) throw ParameterError("probe " + theorem + " has no parameter '" + key + "'");
  return it->second;
}

void ExperimentSpec::validate() const {
  const auto& info = tag_info(theorem);
  for (const auto& [k, v] : params)
    if (!info.defaults.count(k)) throw ParameterError("unknown parameter '" + k + "' for probe " + theorem);
  for (const auto& [k, v] : params)
    if (!std::isfinite(v)) throw ParameterError("parameter '" + k + "' must be finite");
  if (ladder.empty()) throw ParameterError("the refinement ladder is empty");
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    if (ladder[i] < 2 || (ladder[i] & (ladder[i] - 1)) != 0)
      throw ParameterError("ladder entries must be powers of two, got " + std::to_string(ladder[i]));
    if (i > 0 && ladder[i] <= ladder[i - 1]) throw ParameterError("the refinement ladder must be strictly increasing");
  }
  if (!(L > 0) || !std::isfinite(L)) throw ParameterError("window half-width L must be > 0");
  if (family.random_steps < 0) throw ParameterError("random_steps must be >= 0");
  if (!(family.radius > 0) || family.radius > L / 2)
    throw ParameterError("family radius must lie in (0, L/2] so supports stay in the central half-window");

  auto need = [&](bool ok, const std::string& bound, const std::string& detail) {
    if (!ok) throw HypothesisError(bound, detail);
  };
  auto has = [&](const char* k) { return params.count(k) != 0; };
  if (has("kappa") && !(theorem == "t41" && param("kappa") == 0.0)) {
    double k = param("kappa");
    need(k > 0 && k < 1, "0 < kappa < 1", "kappa = " + full_precision(k));
  }
  if (has("p")) need(param("p") > 1, "1 < p", "p = " + full_precision(param("p")));
  if (has("K")) {
    double K = param("K");
    if (K < 1 || K > 16 || K != std::floor(K)) throw ParameterError("K must be an integer in [1, 16]");
  }
  if (has("r")) need(param("r") >= 1, "1 <= r", "r = " + full_precision(param("r")));
  if (has("a0")) need(param("a0") > 0, "0 < alpha0", "alpha0 = " + full_precision(param("a0")));
  if (has("eta")) need(param("eta") > 0, "0 < eta", "eta = " + full_precision(param("eta")));

  const double p = has("p") ? param("p") : 2.0;
  if (theorem == "t31" || theorem == "t32") {
    need(param("q") > 1 && param("q") < p, "1 < q < p", "q = " + full_precision(param("q")));
  } else if (theorem == "t34") {
    need(param("q") >= 1, "1 <= q", "q = " + full_precision(param("q")));
    need(param("qm") > 1 && param("qm") < p, "1 < q < p", "qm = " + full_precision(param("qm")));
  } else if (theorem == "t36") {
    need(param("eps") > 0, "0 < eps", "eps = " + full_precision(param("eps")));
    double st = param("steps");
    if (st < 3 || st > 40 || st != std::floor(st)) throw ParameterError("steps must be an integer in [3, 40]");
  } else if (theorem == "t38") {
    need(p < param("r"), "1 < p < r", "p = " + full_precision(p) + ", r = " + full_precision(param("r")));
  } else if (theorem == "t41") {
    need(param("r") > 1, "1 < r", "r = " + full_precision(param("r")));
  } else if (theorem == "t46") {
    exponent_calculator("strong", {{"n", 1}, {"s", param("s")}, {"lambda", param("lambda")}, {"p", p}});
    exponent_calculator("sublinear",
                        {{"n", 1}, {"p", p}, {"lambda", param("lambda")}, {"kappa", param("kappa")}, {"beta", param("beta")}});
  } else if (theorem == "t48") {
    exponent_calculator("strong", {{"n", 1}, {"s", param("s")}, {"lambda", param("lambda")}, {"p", p}});
    need(param("pstar") > 0 && param("pstar") < p, "0 < p* < p", "p* = " + full_precision(param("pstar")));
    need(param("zeta") >= 1, "1 <= zeta", "zeta = " + full_precision(param("zeta")));
    exponent_calculator("kappa_star", {{"p", p}, {"pstar", param("pstar")}, {"zeta", param("zeta")}, {"kappa", param("kappa")}});
  }
}

// ------------------------------------------------------------ exponent arithmetic

namespace {

double input(const std::map<std::string, double>& in, const std::string& key) {
  auto it = in.find(key);
  if (it == in.end()) throw ParameterError("exponent_calculator: missing input '" + key + "'");
  if (!std::isfinite(it->second)) throw ParameterError("exponent_calculator: input '" + key + "' is not finite");
  return it->second;
}

std::optional<double> optional_input(const std::map<std::string, double>& in, const std::string& key) {
  auto it = in.find(key);
  if (it == in.end()) return std::nullopt;
  return it->second;
}

std::string show(double x) { return full_precision(x); }

}  // namespace

DerivedParameters exponent_calculator(const std::string& theorem, const std::map<std::string, double>& inputs) {
  DerivedParameters d;
  d.theorem = theorem;
  d.inputs = inputs;
  auto need = [](bool ok, const std::string& bound, const std::string& detail) {
    if (!ok) throw HypothesisError(bound, detail);
  };

  if (theorem == "sublinear") {
    double n = input(inputs, "n"), p = input(inputs, "p"), lambda = input(inputs, "lambda"), kappa = input(inputs, "kappa");
    need(n >= 1, "1 <= n", "n = " + show(n));
    need(p > 1, "1 < p", "p = " + show(p));
    need(kappa > 0 && kappa < 1, "0 < kappa < 1", "kappa = " + show(kappa));
    need(lambda > 0, "0 < lambda", "lambda = " + show(lambda));
    Interval beta{-n + lambda * p / kappa, (lambda * p + (1 - kappa) * n) / kappa, true, true};
    need(beta.lo < beta.hi, "-n + lambda p/kappa < (lambda p + (1-kappa) n)/kappa",
         "empty beta range [" + show(beta.lo) + ", " + show(beta.hi) + "]");
    d.ranges["beta"] = beta;
    if (auto b = optional_input(inputs, "beta")) {
      need(beta.contains(*b), "-n + lambda p/kappa < beta < (lambda p + (1-kappa) n)/kappa",
           "beta = " + show(*b) + " outside (" + show(beta.lo) + ", " + show(beta.hi) + ")");
      double top = kappa - lambda * p / (n + *b);
      need(top > 0, "0 < kappa - lambda p/(n + beta)", "upper end " + show(top));
      d.ranges["kappa1"] = Interval{0.0, top, true, false};
      d.values["kappa1_max"] = top;
    }
  } else if (theorem == "kappa_star") {
    double p = input(inputs, "p"), ps = input(inputs, "pstar"), zeta = input(inputs, "zeta"), kappa = input(inputs, "kappa");
    need(kappa > 0 && kappa < 1, "0 < kappa < 1", "kappa = " + show(kappa));
    need(ps > 0 && ps < p, "0 < p* < p", "p* = " + show(ps) + ", p = " + show(p));
    need(zeta >= 1, "1 <= zeta", "zeta = " + show(zeta));
    if (auto rw = optional_input(inputs, "r_omega")) {
      need(*rw > 1, "1 < r_omega", "r_omega = " + show(*rw));
      double rprime = *rw / (*rw - 1);
      d.values["r_omega_prime"] = rprime;
      need(p > ps * zeta * rprime, "p > p* zeta r'_omega",
           "p = " + show(p) + ", p* zeta r'_omega = " + show(ps * zeta * rprime));
    }
    d.values["kappa_star"] = ps * (kappa - 1) / p + 1;
  } else if (theorem == "strong") {
    double n = input(inputs, "n"), s = input(inputs, "s"), lambda = input(inputs, "lambda");
    need(s > 0, "0 < s", "s = " + show(s));
    need(lambda > 0 && lambda < n * s / 2, "0 < lambda < n*s/2",
         "lambda = " + show(lambda) + ", n*s/2 = " + show(n * s / 2));
    double w = 0.5 - lambda / (n * s);
    // |1/p - 1/2| < 1/2 - lambda/(ns)  <=>  1/p in (lambda/(ns), 1 - lambda/(ns))
    Interval pwin{1.0 / (1.0 - lambda / (n * s)), n * s / lambda, true, true};
    d.ranges["p"] = pwin;
    d.values["half_width"] = w;
    if (auto p = optional_input(inputs, "p"))
      need(std::fabs(1.0 / *p - 0.5) < w, "|1/p - 1/2| < 1/2 - lambda/(n*s)",
           "p = " + show(*p) + " outside (" + show(pwin.lo) + ", " + show(pwin.hi) + ")");
  } else if (theorem == "tstar") {
    double p = input(inputs, "p"), delta = input(inputs, "delta");
    need(p > 1, "1 < p", "p = " + show(p));
    need(delta > 1, "1 < delta", "delta = " + show(delta));
    double top = (delta - 1) / (delta * p);
    d.ranges["kappa"] = Interval{0.0, top, true, true};
    d.values["kappa_max"] = top;
    if (auto k = optional_input(inputs, "kappa"))
      need(*k > 0 && *k < top, "0 < kappa < (delta-1)/(delta p)",
           "kappa = " + show(*k) + ", bound = " + show(top));
  } else {
    throw ParameterError("exponent_calculator: unknown theorem tag '" + theorem + "'");
  }
  return d;
}

// ------------------------------------------------------------ probes

namespace {

Grid probe_grid(double L, int N) { return Grid(Box{1, {0.0, 0.0}, L}, N); }

Series make_series(std::string name, std::string source, std::string target) {
  Series s;
  s.name = std::move(name);
  s.source = std::move(source);
  s.target = std::move(target);
  return s;
}

struct Cell {
  std::vector<double> ratios;
};

// One family x ladder sweep; eval(grid, function index) returns one ratio per series.
void sweep(ExperimentReport& rep, const ExperimentSpec& spec, const std::vector<std::string>& names,
           const std::function<std::vector<double>(const Grid&, std::size_t)>& eval) {
  const std::size_t F = names.size(), S = rep.series.size();
  std::vector<Grid> grids;
  for (int N : spec.ladder) grids.push_back(probe_grid(spec.L, N));
  std::vector<Cell> cells(grids.size() * F);
  parallel_for(cells.size(), [&](std::size_t idx) { cells[idx].ratios = eval(grids[idx / F], idx % F); });
  for (std::size_t step = 0; step < grids.size(); ++step) {
    rep.ladder.push_back(spec.ladder[step]);
    for (std::size_t s = 0; s < S; ++s) {
      rep.series[s].suprema.push_back(0.0);
      rep.series[s].witnesses.emplace_back();
    }
    for (std::size_t f = 0; f < F; ++f) {
      const auto& r = cells[step * F + f].ratios;
      rep.rows.push_back({static_cast<int>(step), static_cast<double>(spec.ladder[step]), names[f], r});
      for (std::size_t s = 0; s < S; ++s)
        if (r[s] > rep.series[s].suprema.back() || rep.series[s].witnesses.back().empty()) {
          rep.series[s].suprema.back() = std::max(rep.series[s].suprema.back(), r[s]);
          rep.series[s].witnesses.back() = names[f];
        }
    }
  }
}

void finish(ExperimentReport& rep) {
  bool any_div = false, any_inc = false;
  for (auto& s : rep.series) {
    s.growth.clear();
    for (std::size_t i = 1; i < s.suprema.size(); ++i)
      s.growth.push_back(s.suprema[i - 1] > 0 ? s.suprema[i] / s.suprema[i - 1] : kInfinity);
    s.trend = classify_trend(s.suprema, kProbeStepFactor * kProbeStepFactor);
    any_div = any_div || s.trend == Trend::Diverging;
    any_inc = any_inc || s.trend == Trend::Inconclusive;
  }
  rep.trend = rep.series.empty() ? Trend::Inconclusive
              : any_div          ? Trend::Diverging
              : any_inc          ? Trend::Inconclusive
                                 : Trend::Bounded;
}

VectorFunction vector_of(const std::vector<TestFunction>& fam, const Grid& g, std::size_t j, int K, double r) {
  VectorFunction v;
  v.r = r;
  for (int k = 0; k < K; ++k) v.components.push_back(make_grid_function(g, fam[(j + k) % fam.size()].sampler, true));
  return v;
}

VectorFunction apply_each(const OperatorHandle& op, const VectorFunction& v) {
  VectorFunction out;
  out.r = v.r;
  for (const auto& c : v.components) out.components.push_back(abs(op.apply(c)));
  return out;
}

std::vector<std::string> names_of(const std::vector<TestFunction>& fam) {
  std::vector<std::string> out;
  for (const auto& f : fam) out.push_back(f.name);
  return out;
}

// Trend of a weight class on the dyadic ladder of the finest probe grid.
std::string weight_direction(ExperimentReport& rep, const Weight& w, const ClassSpec& cls, const ExperimentSpec& spec) {
  Grid g = probe_grid(spec.L, spec.ladder.back());
  auto wr = classify(w, cls, dyadic_family_ladder(g, std::min(8, g.finest_generation())));
  rep.notes.push_back("weight " + wr.weight + " in " + wr.spec + ": trend " + to_string(wr.trend) +
                      " on dyadic generations <= " + std::to_string(std::min(8, g.finest_generation())));
  if (wr.trend == Trend::Bounded) return "positive";
  if (wr.trend == Trend::Diverging) return "contrapositive";
  return "undetermined";
}

// delta as the midpoint of the critical-index bracket of w on the finest probe grid.
CriticalIndex critical_of(const Weight& w, const ExperimentSpec& spec) {
  Grid g = probe_grid(spec.L, spec.ladder.back());
  return critical_index(w, g, std::min(8, g.finest_generation()));
}

void probe_identity(ExperimentReport& rep, const ExperimentSpec& spec) {
  const double p = spec.param("p");
  const Weight w = Weight::power(spec.param("beta"));
  auto fam = function_family(spec.family, 1);
  NormSpec src = norms::Lebesgue{p, w};
  rep.direction = "positive";
  rep.series.push_back(make_series("lebesgue", describe(src), describe(src)));
  auto op = identity_operator();
  sweep(rep, spec, names_of(fam), [&](const Grid& g, std::size_t j) {
    auto f = make_grid_function(g, fam[j].sampler, true);
    return std::vector<double>{norm_ratio(op, f, src, src)};
  });
}

void probe_t31(ExperimentReport& rep, const ExperimentSpec& spec) {
  const double p = spec.param("p"), q = spec.param("q"), r = spec.param("r");
  const int K = static_cast<int>(spec.param("K"));
  const Weight w = Weight::power(spec.param("beta"));
  rep.direction = weight_direction(rep, w, classes::Ap{p}, spec);
  auto fam = function_family(spec.family, 1);
  NormSpec src = norms::Lebesgue{p, w}, tgt = norms::WeakMorrey{p, q, w};
  rep.series.push_back(make_series("weak_morrey", describe(src) + " of |f|_r", describe(tgt) + " of |Mf|_r"));
  auto op = OperatorHandle::maximal(maximal_variants::HL{});
  sweep(rep, spec, names_of(fam), [&](const Grid& g, std::size_t j) {
    auto v = vector_of(fam, g, j, K, r);
    return std::vector<double>{norm_ratio(ell_r_modulus(apply_each(op, v)), ell_r_modulus(v), src, tgt)};
  });
}

void probe_t32(ExperimentReport& rep, const ExperimentSpec& spec) {
  const double p = spec.param("p"), q = spec.param("q");
  const double pp = p / (p - 1);
  const Weight w = Weight::power(spec.param("beta"));
  const Weight winv = w.pow(-1.0);
  rep.direction = weight_direction(rep, w, classes::Ap1{p}, spec);
  NormSpec src = norms::Lorentz{p, 1.0, w}, tgt = norms::WeakMorrey{p, q, w};
  rep.series.push_back(make_series("ap1_product", "dyadic cubes Q", "||chi_Q||_{L^{p,1}_w} ||chi_Q/w||_{L^{p',inf}_w} / |Q|"));
  rep.series.push_back(make_series("witness", describe(src), describe(tgt) + " of M(chi_Q / w)"));
  if (spec.ladder.front() < 64) throw ParameterError("probe t32 needs ladder entries >= 64");
  const int gens = 6;
  std::vector<std::string> names;
  for (int g = 1; g <= gens; ++g) names.push_back("Q_g" + std::to_string(g));

  auto product = [&](const Grid& grid, const DyadicCube& c) {
    auto box = c.cells(grid);
    GridFunction chi(grid, 0.0), inv(grid, 0.0);
    for (int i = box.lo[0]; i < box.hi[0]; ++i) {
      chi[i] = 1.0;
      inv[i] = winv(grid.center_of(i));
    }
    return lorentz_norm(chi, p, 1.0, w) * lorentz_norm(inv, pp, kInfinity, w) / c.volume(grid);
  };
  auto op = OperatorHandle::maximal(maximal_variants::HL{});
  sweep(rep, spec, names, [&](const Grid& grid, std::size_t j) {
    int g = static_cast<int>(j) + 1;
    DyadicCube c{g, {1 << (g - 1), 0}};  // [0, 2L/2^g)
    auto box = c.cells(grid);
    GridFunction f(grid, 0.0);
    for (int i = box.lo[0]; i < box.hi[0]; ++i) f[i] = winv(grid.center_of(i));
    f.set_compact_support(true);
    return std::vector<double>{product(grid, c), norm_ratio(op, f, src, tgt)};
  });
  // The product series is a supremum over every dyadic cube, not only the rows' Q_g.
  for (std::size_t step = 0; step < spec.ladder.size(); ++step) {
    Grid grid = probe_grid(spec.L, spec.ladder[step]);
    auto cubes = enumerate_dyadic_cubes(grid, 0, grid.finest_generation());
    std::vector<double> vals(cubes.size());
    parallel_for(cubes.size(), [&](std::size_t i) { vals[i] = product(grid, cubes[i]); });
    auto best = std::max_element(vals.begin(), vals.end()) - vals.begin();
    auto& s = rep.series[0];
    if (vals[best] > s.suprema[step]) {
      s.suprema[step] = vals[best];
      s.witnesses[step] = "Q(g=" + std::to_string(cubes[best].g) + ",k=" + std::to_string(cubes[best].k[0]) + ")";
    }
  }
}

void probe_t34(ExperimentReport& rep, const ExperimentSpec& spec) {
  const double p = spec.param("p"), q = spec.param("q"), qm = spec.param("qm");
  const Weight w = Weight::power(spec.param("beta"));
  rep.direction = weight_direction(rep, w, classes::Ap{p}, spec);
  auto fam = function_family(spec.family, 1);
  NormSpec lor = norms::Lorentz{p, q, w}, wm = norms::WeakMorrey{p, qm, w};
  rep.series.push_back(make_series("lorentz", describe(lor), describe(lor) + " of T_a f"));
  rep.series.push_back(make_series("weak_morrey", describe(lor), describe(wm) + " of T_a f"));
  auto op = OperatorHandle::pseudo(SymbolSpec::mixed());
  sweep(rep, spec, names_of(fam), [&](const Grid& g, std::size_t j) {
    auto f = make_grid_function(g, fam[j].sampler, true);
    auto tf = abs(op.apply(f));
    return std::vector<double>{norm_ratio(tf, f, lor, lor), norm_ratio(tf, f, lor, wm)};
  });
  rep.notes.push_back("symbol: (1 + 0.5 sin x) xi / sqrt(1 + xi^2), evaluated on the periodic window");
}

// Exact 1-D integrals of the witness on Q = [0, l], w = x^beta.
struct WitnessIntegrals {
  double f_mass, f_norm_p, w_mass;
};

WitnessIntegrals witness_integrals(double l, double beta, double eps, double p) {
  const double pp = p / (p - 1);
  boost::math::quadrature::tanh_sinh<double> ts;
  auto integrate = [&](auto fn) {
    // Split at the crossover x^beta = eps where the integrand changes regime.
    double x0 = std::pow(eps, 1.0 / beta);
    if (x0 > 0 && x0 < l) return ts.integrate(fn, 0.0, x0) + ts.integrate(fn, x0, l);
    return ts.integrate(fn, 0.0, l);
  };
  WitnessIntegrals out;
  out.f_mass = integrate([&](double x) { return std::pow(std::pow(x, beta) + eps, 1 - pp); });
  out.f_norm_p = integrate([&](double x) {
    double wx = std::pow(x, beta);
    return std::pow(wx + eps, -pp) * wx;
  });
  out.w_mass = std::pow(l, beta + 1) / (beta + 1);
  return out;
}

double witness_ratio(double l, double beta, double eps, double p, const PhiSpec& phi, double eta) {
  auto I = witness_integrals(l, beta, eps, p);
  double lambda = I.f_mass / (2 * std::pow(phi(l), eta) * l);
  return lambda * std::pow(I.w_mass, 1 / p) / std::pow(I.f_norm_p, 1 / p);
}

void probe_t36(ExperimentReport& rep, const ExperimentSpec& spec) {
  const double p = spec.param("p"), beta = spec.param("beta"), eps0 = spec.param("eps");
  const double a = spec.param("eps_exponent");
  const int steps = static_cast<int>(spec.param("steps"));
  const PhiSpec phi{spec.param("a0")};
  const double eta = 1.0;
  const double q = p * (1 - spec.param("kappa"));
  rep.direction = weight_direction(rep, Weight::power(beta), classes::ApPhi{p, phi}, spec);
  rep.ladder_kind = "Q-halving";
  rep.series.push_back(make_series("witness", "L^p_w norm of f_eps", "lambda w(Q)^(1/p), a lower bound of the WM^p_q norm of M_phi f_eps"));
  for (int m = 0; m < steps; ++m) {
    double l = std::ldexp(1.0, -m);
    double eps = eps0 * std::pow(l, a);
    double r = witness_ratio(l, beta, eps, p, phi, eta);
    rep.ladder.push_back(l);
    rep.rows.push_back({m, l, "f_eps", {r}});
    rep.series[0].suprema.push_back(r);
    rep.series[0].witnesses.push_back("Q=[0," + full_precision(l) + "], eps=" + full_precision(eps));
  }
  // Dependence on eps alone, at Q = [0, 1].
  double r1 = witness_ratio(1.0, beta, eps0, p, phi, eta), r2 = witness_ratio(1.0, beta, eps0 / 2, p, phi, eta);
  rep.notes.push_back("weak Morrey exponents p = " + full_precision(p) + ", q = " + full_precision(q));
  rep.notes.push_back("eps-halving growth at Q = [0,1]: " + full_precision(r2 / r1));
  const double pp = p / (p - 1);
  const double c = (pp - 1 - 1 / beta) / pp;
  if (c > 0)
    rep.notes.push_back("small-eps regime: ratio ~ (|Q|^beta / eps)^" + full_precision(c) +
                        ", so Q-halving with eps ~ |Q|^a scales it by 2^((a - beta) * " + full_precision(c) +
                        ") = " + full_precision(std::exp2((a - beta) * c)));
}

void probe_t38(ExperimentReport& rep, const ExperimentSpec& spec) {
  const double p = spec.param("p"), r = spec.param("r"), eta = spec.param("eta");
  const int K = static_cast<int>(spec.param("K"));
  const PhiSpec phi{spec.param("a0")};
  const Weight w = Weight::power(spec.param("beta"));
  rep.direction = weight_direction(rep, w, classes::ApDyadicPhi{p, phi, eta}, spec);
  auto fam = function_family(spec.family, 1);
  NormSpec src = norms::Lebesgue{p, w}, tgt = norms::Lorentz{p, kInfinity, w};
  rep.series.push_back(make_series("weak_lorentz", describe(src) + " of |f|_r", describe(tgt) + " of |M f|_r"));
  auto op = OperatorHandle::maximal(maximal_variants::DyadicPhi{phi, 2 * eta});
  sweep(rep, spec, names_of(fam), [&](const Grid& g, std::size_t j) {
    auto v = vector_of(fam, g, j, K, r);
    return std::vector<double>{norm_ratio(ell_r_modulus(apply_each(op, v)), ell_r_modulus(v), src, tgt)};
  });
}

void probe_t41(ExperimentReport& rep, const ExperimentSpec& spec) {
  const double p = spec.param("p"), r = spec.param("r");
  const int K = static_cast<int>(spec.param("K"));
  const Weight w1 = Weight::power(spec.param("beta1")), w2 = Weight::power(spec.param("beta2"));
  std::string d1 = weight_direction(rep, w1, classes::Ap1{p}, spec);
  std::string d2 = weight_direction(rep, w2, classes::Ap{p}, spec);
  rep.direction = d1 == "positive" && d2 == "positive" ? "positive" : d1 == "contrapositive" || d2 == "contrapositive" ? "contrapositive" : "undetermined";
  auto ci = critical_of(w2, spec);
  if (ci.status == CriticalIndex::Status::NotAInfinity)
    throw HypothesisError("w2 in A_infinity", "no reverse Holder exponent found for " + w2.describe());
  double delta = 0.5 * (ci.r_lo + ci.r_hi);
  double kappa = spec.param("kappa");
  auto dp = exponent_calculator("tstar", {{"p", p}, {"delta", delta}});
  if (kappa == 0.0) kappa = 0.5 * dp.values.at("kappa_max");
  exponent_calculator("tstar", {{"p", p}, {"delta", delta}, {"kappa", kappa}});
  rep.parameters["delta"] = full_precision(delta);
  rep.parameters["kappa_used"] = full_precision(kappa);
  rep.notes.push_back("critical index bracket [" + full_precision(ci.r_lo) + ", " + full_precision(ci.r_hi) + "]");

  auto fam = function_family(spec.family, 1);
  NormSpec nm = norms::TwoWeightMorrey{p, kappa, w1, w2};
  rep.series.push_back(make_series("two_weight_morrey", describe(nm) + " of |f|_r", describe(nm) + " of |T* f|_r"));
  auto op = OperatorHandle::maximal_singular(KernelSpec::hilbert());
  sweep(rep, spec, names_of(fam), [&](const Grid& g, std::size_t j) {
    auto v = vector_of(fam, g, j, K, r);
    return std::vector<double>{norm_ratio(ell_r_modulus(apply_each(op, v)), ell_r_modulus(v), nm, nm)};
  });
}

void probe_t46(ExperimentReport& rep, const ExperimentSpec& spec) {
  const double p = spec.param("p"), s = spec.param("s"), lambda = spec.param("lambda");
  const double kappa = spec.param("kappa"), beta = spec.param("beta");
  auto d = exponent_calculator("sublinear", {{"n", 1}, {"p", p}, {"lambda", lambda}, {"kappa", kappa}, {"beta", beta}});
  const double kappa1 = d.values.at("kappa1_max");
  rep.parameters["kappa1"] = full_precision(kappa1);
  rep.direction = "positive";
  const Weight w = Weight::power(beta);
  auto fam = function_family(spec.family, 1);
  NormSpec l2 = norms::Lebesgue{2.0, Weight::one()};
  NormSpec src = norms::CentralMorrey{p, kappa, w}, tgt = norms::CentralLocalMorrey{p, kappa1, w};
  rep.series.push_back(make_series("lebesgue", describe(l2), describe(l2) + " of T f"));
  rep.series.push_back(make_series("central_morrey", describe(src), describe(tgt) + " of T f"));
  auto op = OperatorHandle::strong(StrongKernelParams{s, lambda, std::nullopt, std::nullopt});
  sweep(rep, spec, names_of(fam), [&](const Grid& g, std::size_t j) {
    auto f = make_grid_function(g, fam[j].sampler, true);
    auto tf = abs(op.apply(f));
    return std::vector<double>{norm_ratio(tf, f, l2, l2), norm_ratio(tf, f, src, tgt)};
  });
}

void probe_t48(ExperimentReport& rep, const ExperimentSpec& spec) {
  const double p = spec.param("p"), ps = spec.param("pstar"), zeta = spec.param("zeta");
  const double kappa = spec.param("kappa"), s = spec.param("s"), lambda = spec.param("lambda");
  const Weight w = Weight::power(spec.param("beta"));
  rep.direction = zeta == 1.0 ? weight_direction(rep, w, classes::A1{}, spec)
                              : weight_direction(rep, w, classes::Ap{zeta}, spec);
  auto ci = critical_of(w, spec);
  if (ci.status == CriticalIndex::Status::NotAInfinity)
    throw HypothesisError("w in A_infinity", "no reverse Holder exponent found for " + w.describe());
  // The worst end of the bracket: the smallest r_omega has the largest conjugate.
  auto d = exponent_calculator("kappa_star", {{"p", p}, {"pstar", ps}, {"zeta", zeta}, {"kappa", kappa}, {"r_omega", ci.r_lo}});
  const double kstar = d.values.at("kappa_star");
  rep.parameters["kappa_star"] = full_precision(kstar);
  rep.parameters["r_omega"] = full_precision(ci.r_lo);
  auto fam = function_family(spec.family, 1);
  NormSpec src = norms::TwoWeightMorrey{p, kappa, w, w}, tgt = norms::InhomMorrey{ps, kstar, w};
  rep.series.push_back(make_series("inhom_morrey", describe(src), describe(tgt) + " of T f"));
  auto op = OperatorHandle::strong(StrongKernelParams{s, lambda, std::nullopt, std::nullopt});
  sweep(rep, spec, names_of(fam), [&](const Grid& g, std::size_t j) {
    auto f = make_grid_function(g, fam[j].sampler, true);
    return std::vector<double>{norm_ratio(op, f, src, tgt)};
  });
}

}  // namespace

ExperimentReport boundedness_probe(const ExperimentSpec& spec) {
  spec.validate();
  ExperimentReport rep;
  rep.theorem = spec.theorem;
  rep.title = tag_info(spec.theorem).title;
  rep.seed = spec.family.seed;
  rep.ladder_kind = "N";
  for (const auto& [k, v] : spec.params) rep.parameters[k] = full_precision(v);
  rep.parameters["L"] = full_precision(spec.L);
  rep.parameters["ladder"] = ladder_text(spec.ladder);
  rep.parameters["family_version"] = std::to_string(FamilySpec::kVersion);
  rep.parameters["random_steps"] = std::to_string(spec.family.random_steps);
  rep.parameters["radius"] = full_precision(spec.family.radius);

  const auto& t = spec.theorem;
  if (t == "identity") probe_identity(rep, spec);
  else if (t == "t31") probe_t31(rep, spec);
  else if (t == "t32") probe_t32(rep, spec);
  else if (t == "t34") probe_t34(rep, spec);
  else if (t == "t36") probe_t36(rep, spec);
  else if (t == "t38") probe_t38(rep, spec);
  else if (t == "t41") probe_t41(rep, spec);
  else if (t == "t46") probe_t46(rep, spec);
  else if (t == "t48") probe_t48(rep, spec);
  finish(rep);
  return rep;
}

// ------------------------------------------------------------ serialization

namespace {

json number(double x) {
  if (std::isfinite(x)) return x;
  return full_precision(x);
}

double from_number(const json& j) {
  if (j.is_number()) return j.get<double>();
  auto s = j.get<std::string>();
  if (s == "inf") return kInfinity;
  if (s == "-inf") return -kInfinity;
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  throw InputError("report: expected a number, got '" + s + "'");
}

json numbers(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

std::vector<double> from_numbers(const json& a) {
  std::vector<double> out;
  for (const auto& x : a) out.push_back(from_number(x));
  return out;
}

Trend trend_from(const std::string& s) {
  for (Trend t : {Trend::Bounded, Trend::Diverging, Trend::Inconclusive})
    if (to_string(t) == s) return t;
  throw InputError("report: unknown trend '" + s + "'");
}

}  // namespace

std::string to_json_text(const ExperimentReport& r) {
  json j;
  j["schema_version"] = ExperimentReport::kSchemaVersion;
  j["theorem"] = r.theorem;
  j["title"] = r.title;
  j["direction"] = r.direction;
  j["seed"] = r.seed;
  j["parameters"] = json::object();
  for (const auto& [k, v] : r.parameters) j["parameters"][k] = v;
  j["ladder_kind"] = r.ladder_kind;
  j["ladder"] = numbers(r.ladder);
  j["trend"] = to_string(r.trend);
  j["series"] = json::array();
  for (const auto& s : r.series)
    j["series"].push_back({{"name", s.name},
                           {"source", s.source},
                           {"target", s.target},
                           {"suprema", numbers(s.suprema)},
                           {"witnesses", s.witnesses},
                           {"growth", numbers(s.growth)},
                           {"trend", to_string(s.trend)}});
  j["rows"] = json::array();
  for (const auto& row : r.rows)
    j["rows"].push_back(
        {{"step", row.step}, {"scale", number(row.scale)}, {"function", row.function}, {"ratios", numbers(row.ratios)}});
  j["notes"] = r.notes;
  return j.dump(2) + "\n";
}

ExperimentReport report_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("report: malformed JSON: ") + e.what());
  }
  try {
    if (j.at("schema_version").get<int>() != ExperimentReport::kSchemaVersion)
      throw InputError("report: unsupported schema version");
    ExperimentReport r;
    r.theorem = j.at("theorem").get<std::string>();
    r.title = j.at("title").get<std::string>();
    r.direction = j.at("direction").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& [k, v] : j.at("parameters").items()) r.parameters[k] = v.get<std::string>();
    r.ladder_kind = j.at("ladder_kind").get<std::string>();
    r.ladder = from_numbers(j.at("ladder"));
    r.trend = trend_from(j.at("trend").get<std::string>());
    for (const auto& s : j.at("series")) {
      Series x;
      x.name = s.at("name").get<std::string>();
      x.source = s.at("source").get<std::string>();
      x.target = s.at("target").get<std::string>();
      x.suprema = from_numbers(s.at("suprema"));
      x.witnesses = s.at("witnesses").get<std::vector<std::string>>();
      x.growth = from_numbers(s.at("growth"));
      x.trend = trend_from(s.at("trend").get<std::string>());
      r.series.push_back(std::move(x));
    }
    for (const auto& row : j.at("rows"))
      r.rows.push_back({row.at("step").get<int>(), from_number(row.at("scale")), row.at("function").get<std::string>(),
                        from_numbers(row.at("ratios"))});
    r.notes = j.at("notes").get<std::vector<std::string>>();
    return r;
  } catch (const json::exception& e) {
    throw InputError(std::string("report: missing or mistyped field: ") + e.what());
  }
}

void write_report_csv(std::ostream& out, const ExperimentReport& r) {
  out << "step," << (r.ladder_kind.empty() ? "N" : r.ladder_kind) << ",function";
  for (const auto& s : r.series) out << ",ratio_" << s.name;
  out << "\n";
  for (const auto& row : r.rows) {
    out << row.step << "," << full_precision(row.scale) << "," << row.function;
    for (double x : row.ratios) out << "," << full_precision(x);
    out << "\n";
  }
}

// ------------------------------------------------------------ norm chain

ChainReport chain_check(const std::vector<GridFunction>& fs, double p, double q, double r, const Weight& w, double q1,
                        double q2) {
  if (!(0 < r && r < q && q < p && std::isfinite(p))) throw ParameterError("chain_check needs 0 < r < q < p < inf");
  if (!(0 < q1 && q1 <= q2)) throw ParameterError("chain_check needs 0 < q1 <= q2");
  ChainReport rep;
  rep.p = p, rep.q = q, rep.r = r, rep.q1 = q1, rep.q2 = q2;
  rep.functions = fs.size();
  rep.strong_weakp_constant = std::pow(p / (p - q), 1.0 / q);
  const double exact = 1 + 8 * std::numeric_limits<double>::epsilon();

  struct Values {
    double mr, wq, mq, wp, linf, lq2, lq1;
  };
  std::vector<Values> vals(fs.size());
  parallel_for(fs.size(), [&](std::size_t i) {
    const auto& f = fs[i];
    vals[i] = {norm(f, morrey_pq(p, r, w)).value,
               norm(f, norms::WeakMorrey{p, q, w}).value,
               norm(f, morrey_pq(p, q, w)).value,
               norm(f, norms::WeakMorrey{p, p, w}).value,
               lorentz_norm(f, p, kInfinity, w),
               lorentz_norm(f, p, q2, w),
               lorentz_norm(f, p, q1, w)};
  });
  for (const auto& v : vals) {
    if (v.mr > 0) rep.observed_C = std::min(rep.observed_C, v.wq / v.mr);
    if (v.mq > 0) rep.max_weak_over_strong = std::max(rep.max_weak_over_strong, v.wq / v.mq);
    if (v.wq > v.mq * exact) ++rep.weak_le_strong_violations;
    if (v.wp > 0) rep.max_strong_over_weakp = std::max(rep.max_strong_over_weakp, v.mq / v.wp);
    if (v.mq > v.wp * exact) ++rep.strong_le_weakp_literal_violations;
    if (v.mq > rep.strong_weakp_constant * v.wp * exact) ++rep.strong_le_weakp_violations;
    double scale = std::max(v.wp, v.linf);
    if (scale > 0) rep.max_weakp_lorentz_rel_diff = std::max(rep.max_weakp_lorentz_rel_diff, std::fabs(v.wp - v.linf) / scale);
    if (v.linf > v.lq2 * exact) ++rep.lorentz_inf_le_q2_violations;
    if (v.lq2 > v.lq1 * exact) ++rep.lorentz_q2_le_q1_violations;
  }
  return rep;
}

}  // namespace weightlab
