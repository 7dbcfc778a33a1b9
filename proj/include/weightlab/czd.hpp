#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "weightlab/grid.hpp"
#include "weightlab/spaces.hpp"
#include "weightlab/weight.hpp"

namespace weightlab {

/// A maximal cube of the stopping rule. When a single grid cell exceeds the threshold only
/// after being cut below grid resolution, the cell is tiled by its 2^(n*d) dyadic descendants
/// of generation tiling_generation = cube.g + d; every tile is then a selected cube.
struct SelectedCube {
  DyadicCube cube;
  int tiling_generation = 0;
  bool resolution_limited = false;
  /// Volume of one tile and the phi^eta-normalized average of |v|_r over it.
  double tile_volume = 0.0;
  double average = 0.0;
};

struct CZDecomposition {
  double alpha = 0.0;
  PhiSpec phi{};
  double eta = 1.0;
  VectorFunction source;
  std::vector<SelectedCube> cubes;
  /// Per-cell membership of Omega.
  std::vector<char> omega;
  bool root_selected = false;
  std::vector<GridFunction> good;  // f' = f outside Omega
  std::vector<GridFunction> bad;   // f'' = f on Omega
  std::vector<GridFunction> fbar;

  const Grid& grid() const { return source.grid(); }
  std::size_t omega_cells() const;
};

CZDecomposition cz_decompose(const VectorFunction& v, double alpha, const PhiSpec& phi, double eta);

struct CZCertificate {
  bool disjoint_and_maximal = true;
  bool off_omega_bound = true;
  bool lower_bound = true;
  /// Upper bound average <= 2^n (phi(|parent|)/phi(|Q|))^eta alpha, the finite-tree constant.
  bool upper_bound_parent = true;
  /// Upper bound with the constant 2^n phi(4n) as written for the selection step.
  bool upper_bound_stated = true;
  bool fbar_bound = true;
  bool domination = true;

  double max_off_omega = 0.0;           // max |v|_r off Omega, in units of alpha
  double max_upper_parent_ratio = 0.0;  // max average / (parent constant * alpha)
  double max_upper_stated_ratio = 0.0;  // max average / (2^n phi(4n) alpha)
  double max_domination_ratio = 0.0;    // max M_{2eta}(f''_k) / M_eta(fbar_k) off Omega
  std::size_t checked_cells = 0;
  std::vector<std::string> witnesses;

  /// The four certified checks: (a) disjoint and maximal, (b) off-Omega bound, (c) the
  /// two-sided selection bound with the parent constant, (d) domination.
  bool passed() const {
    return disjoint_and_maximal && off_omega_bound && lower_bound && upper_bound_parent && domination;
  }
};

CZCertificate certify(const CZDecomposition& d);

struct MassIdentityReport {
  std::size_t cubes = 0;
  double max_relative_error = 0.0;
  bool passed = true;
};

/// Integral of fbar_k over each Q_j against phi(|Q_j|)^(-eta) times the integral of |f_k|.
MassIdentityReport fbar_mass_identity(const CZDecomposition& d, std::size_t k);

}  // namespace weightlab
