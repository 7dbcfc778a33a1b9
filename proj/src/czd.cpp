#include "weightlab/czd.hpp"

#include <cmath>
#include <sstream>

#include "weightlab/error.hpp"
#include "weightlab/numeric.hpp"
#include "weightlab/operators.hpp"

namespace weightlab {

namespace {

constexpr double kSlack = 1e-12;

std::vector<DyadicCube> children(const DyadicCube& c, int n) {
  std::vector<DyadicCube> out;
  for (int b = 0; b < (n == 2 ? 2 : 1); ++b)
    for (int a = 0; a < 2; ++a) out.push_back({c.g + 1, {2 * c.k[0] + a, n == 2 ? 2 * c.k[1] + b : 0}});
  return out;
}

double phi_eta(const PhiSpec& phi, double eta, double volume) { return std::pow(phi(volume), eta); }

// Generation offset d >= 1 at which the tiles of a cell with constant modulus a first exceed
// alpha; a > alpha guarantees termination since phi(t) -> 1 as t -> 0.
int virtual_depth(double a, double alpha, double cell_volume, int n, const PhiSpec& phi, double eta) {
  for (int d = 1; d < 1000; ++d)
    if (a / phi_eta(phi, eta, std::ldexp(cell_volume, -n * d)) > alpha) return d;
  throw InvariantError("cz_decompose: sub-cell descent did not terminate");
}

std::string cube_text(const SelectedCube& s) {
  std::ostringstream os;
  os << "Q(g=" << s.cube.g << ", k=" << s.cube.k[0] << "," << s.cube.k[1] << ", tiles g=" << s.tiling_generation
     << ")";
  return os.str();
}

}  // namespace

std::size_t CZDecomposition::omega_cells() const {
  std::size_t c = 0;
  for (char m : omega) c += m != 0;
  return c;
}

CZDecomposition cz_decompose(const VectorFunction& v, double alpha, const PhiSpec& phi, double eta) {
  v.validate();
  phi.validate();
  if (!(alpha > 0) || !std::isfinite(alpha)) throw ParameterError("cz_decompose needs a finite alpha > 0");
  if (!(eta > 0) || !std::isfinite(eta)) throw ParameterError("cz_decompose needs eta > 0");
  for (const auto& c : v.components)
    for (double x : c.values())
      if (!std::isfinite(x)) throw InputError("cz_decompose: non-finite component sample");

  const Grid& g = v.grid();
  const int n = g.n();
  const int G = g.finest_generation();
  GridFunction mod = ell_r_modulus(v);

  CZDecomposition d;
  d.alpha = alpha;
  d.phi = phi;
  d.eta = eta;
  d.source = v;
  d.omega.assign(g.size(), 0);

  std::vector<DyadicCube> stack{{0, {0, 0}}};
  while (!stack.empty()) {
    DyadicCube c = stack.back();
    stack.pop_back();
    double avg = dyadic_average(mod, c, phi, eta);
    if (avg > alpha) {
      d.cubes.push_back({c, c.g, c.g == G, c.volume(g), avg});
      if (c.g == 0) d.root_selected = true;
      continue;
    }
    if (c.g < G) {
      auto kids = children(c, n);
      for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(*it);
      continue;
    }
    double a = std::fabs(mod.at(c.k[0], c.k[1]));
    if (a > alpha) {
      int depth = virtual_depth(a, alpha, c.volume(g), n, phi, eta);
      double tile = std::ldexp(c.volume(g), -n * depth);
      d.cubes.push_back({c, G + depth, true, tile, a / phi_eta(phi, eta, tile)});
    }
  }

  for (const auto& s : d.cubes) {
    auto box = s.cube.cells(g);
    for (int j = box.lo[1]; j < box.hi[1]; ++j)
      for (int i = box.lo[0]; i < box.hi[0]; ++i) d.omega[g.flat(i, j)] = 1;
  }

  for (const auto& f : v.components) {
    GridFunction good(g, 0.0), bad(g, 0.0), bar(g, 0.0);
    for (std::size_t k = 0; k < f.size(); ++k) (d.omega[k] ? bad : good)[k] = f[k];
    for (const auto& s : d.cubes) {
      auto box = s.cube.cells(g);
      double norm = phi_eta(phi, eta, s.tile_volume);
      if (s.tiling_generation > s.cube.g) {
        std::size_t k = g.flat(s.cube.k[0], s.cube.k[1]);
        bar[k] = std::fabs(f[k]) / norm;
        continue;
      }
      CompensatedSum sum;
      for (int j = box.lo[1]; j < box.hi[1]; ++j)
        for (int i = box.lo[0]; i < box.hi[0]; ++i) sum.add(std::fabs(f.at(i, j)));
      double value = sum.value() / static_cast<double>(box.count()) / norm;
      for (int j = box.lo[1]; j < box.hi[1]; ++j)
        for (int i = box.lo[0]; i < box.hi[0]; ++i) bar.at(i, j) = value;
    }
    d.good.push_back(std::move(good));
    d.bad.push_back(std::move(bad));
    d.fbar.push_back(std::move(bar));
  }
  return d;
}

CZCertificate certify(const CZDecomposition& d) {
  CZCertificate cert;
  const Grid& g = d.grid();
  const int n = g.n();
  const double alpha = d.alpha;
  const double two_n = n == 1 ? 2.0 : 4.0;
  const double stated = two_n * d.phi(4.0 * n);
  GridFunction mod = ell_r_modulus(d.source);

  std::vector<int> cover(g.size(), 0);
  for (const auto& s : d.cubes) {
    auto box = s.cube.cells(g);
    for (int j = box.lo[1]; j < box.hi[1]; ++j)
      for (int i = box.lo[0]; i < box.hi[0]; ++i)
        if (++cover[g.flat(i, j)] == 2) {
          cert.disjoint_and_maximal = false;
          cert.witnesses.push_back("overlap at cell " + std::to_string(g.flat(i, j)) + " in " + cube_text(s));
        }

    // Every ancestor, on the grid and below it, sits at or under the threshold.
    for (DyadicCube a = s.cube; a.g > 0;) {
      a = a.parent();
      if (dyadic_average(mod, a, d.phi, d.eta) > alpha) {
        cert.disjoint_and_maximal = false;
        cert.witnesses.push_back("ancestor above alpha for " + cube_text(s));
        break;
      }
    }
    double own = 0.0, parent_volume = 0.0;
    if (s.tiling_generation > s.cube.g) {
      double a = std::fabs(mod.at(s.cube.k[0], s.cube.k[1]));
      for (int t = s.cube.g; t < s.tiling_generation; ++t) {
        double tile = std::ldexp(s.cube.volume(g), -n * (t - s.cube.g));
        if (a / phi_eta(d.phi, d.eta, tile) > alpha) {
          cert.disjoint_and_maximal = false;
          cert.witnesses.push_back("sub-cell ancestor above alpha for " + cube_text(s));
          break;
        }
      }
      own = a / phi_eta(d.phi, d.eta, s.tile_volume);
      parent_volume = s.tile_volume * two_n;
    } else {
      own = dyadic_average(mod, s.cube, d.phi, d.eta);
      parent_volume = s.cube.g > 0 ? s.cube.parent().volume(g) : 0.0;
    }

    if (!(own > alpha)) {
      cert.lower_bound = false;
      cert.witnesses.push_back("average not above alpha in " + cube_text(s));
    }
    if (parent_volume > 0) {
      double c = two_n * std::pow(d.phi(parent_volume) / d.phi(s.tile_volume), d.eta);
      double ratio = own / (c * alpha);
      cert.max_upper_parent_ratio = std::max(cert.max_upper_parent_ratio, ratio);
      if (ratio > 1 + kSlack) {
        cert.upper_bound_parent = false;
        cert.witnesses.push_back("parent-constant upper bound fails in " + cube_text(s));
      }
    }
    double rs = own / (stated * alpha);
    cert.max_upper_stated_ratio = std::max(cert.max_upper_stated_ratio, rs);
    if (rs > 1 + kSlack) cert.upper_bound_stated = false;
  }
  if (d.root_selected) cert.witnesses.push_back("root cube selected: Omega is the whole window");

  for (std::size_t k = 0; k < g.size(); ++k) {
    if ((cover[k] > 0) != (d.omega[k] != 0)) {
      cert.disjoint_and_maximal = false;
      cert.witnesses.push_back("Omega mask disagrees with the cubes at cell " + std::to_string(k));
    }
    if (d.omega[k]) continue;
    double a = mod[k];
    cert.max_off_omega = std::max(cert.max_off_omega, a / alpha);
    if (a > alpha) {
      cert.off_omega_bound = false;
      cert.witnesses.push_back("|v|_r above alpha off Omega at cell " + std::to_string(k));
    }
  }

  VectorFunction bar{d.fbar, d.source.r};
  GridFunction bar_mod = ell_r_modulus(bar);
  for (std::size_t k = 0; k < g.size(); ++k)
    if (d.omega[k] && bar_mod[k] > stated * alpha * (1 + kSlack)) cert.fbar_bound = false;

  const maximal_variants::DyadicPhi wide{d.phi, 2.0 * d.eta}, narrow{d.phi, d.eta};
  for (std::size_t c = 0; c < d.bad.size(); ++c) {
    GridFunction lhs = maximal(d.bad[c], wide);
    GridFunction rhs = maximal(d.fbar[c], narrow);
    for (std::size_t k = 0; k < g.size(); ++k) {
      if (d.omega[k]) continue;
      ++cert.checked_cells;
      if (lhs[k] == 0.0) continue;
      double ratio = rhs[k] > 0 ? lhs[k] / rhs[k] : kInfinity;
      cert.max_domination_ratio = std::max(cert.max_domination_ratio, ratio);
      if (ratio > 1 + kSlack) {
        cert.domination = false;
        cert.witnesses.push_back("domination fails for component " + std::to_string(c) + " at cell " +
                                 std::to_string(k));
      }
    }
  }
  return cert;
}

MassIdentityReport fbar_mass_identity(const CZDecomposition& d, std::size_t k) {
  if (k >= d.fbar.size()) throw ParameterError("fbar_mass_identity: component index out of range");
  const Grid& g = d.grid();
  const GridFunction& f = d.source.components[k];
  const GridFunction& bar = d.fbar[k];
  const double cell = g.cell_volume();
  MassIdentityReport rep;
  for (const auto& s : d.cubes) {
    auto box = s.cube.cells(g);
    CompensatedSum lhs, rhs;
    for (int j = box.lo[1]; j < box.hi[1]; ++j)
      for (int i = box.lo[0]; i < box.hi[0]; ++i) {
        lhs.add(bar.at(i, j) * cell);
        rhs.add(std::fabs(f.at(i, j)) * cell);
      }
    double r = rhs.value() / phi_eta(d.phi, d.eta, s.tile_volume);
    double err = r == 0.0 ? std::fabs(lhs.value()) : std::fabs(lhs.value() - r) / r;
    rep.max_relative_error = std::max(rep.max_relative_error, err);
    ++rep.cubes;
  }
  rep.passed = rep.max_relative_error <= kSlack;
  return rep;
}

}  // namespace weightlab
