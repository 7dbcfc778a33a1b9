#include "weightlab/balls.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "weightlab/error.hpp"

namespace weightlab {

namespace {

struct Offset {
  int di, dj, d2;
};

std::vector<Offset> sorted_offsets(int reach) {
  std::vector<Offset> out;
  for (int dj = -reach; dj <= reach; ++dj)
    for (int di = -reach; di <= reach; ++di) {
      int d2 = di * di + dj * dj;
      if (d2 <= reach * reach) out.push_back({di, dj, d2});
    }
  std::sort(out.begin(), out.end(), [](const Offset& a, const Offset& b) {
    if (a.d2 != b.d2) return a.d2 < b.d2;
    if (a.dj != b.dj) return a.dj < b.dj;
    return a.di < b.di;
  });
  return out;
}

void visit_intervals(const Grid& grid, std::span<const std::vector<double>* const> arrays,
                     const std::vector<double>* dilated, double r_min, double r_max,
                     const BallVisitor& visit) {
  int N = grid.N();
  double h = grid.h();
  std::vector<long double> pre;
  if (dilated) {
    pre.assign(N + 1, 0.0L);
    for (int i = 0; i < N; ++i) pre[i + 1] = pre[i] + (*dilated)[i];
  }
  BallSums out;
  out.sums.resize(arrays.size());
  for (int a = 0; a < N; ++a) {
    std::fill(out.sums.begin(), out.sums.end(), 0.0);
    for (int b = a + 1; b <= N; ++b) {
      for (std::size_t t = 0; t < arrays.size(); ++t) out.sums[t] += (*arrays[t])[b - 1];
      int m = b - a;
      double R = 0.5 * m * h;
      if (R < r_min) continue;
      if (R >= r_max) break;
      out.ball.radius = R;
      out.ball.center = {grid.node(0, a) + R, 0.0};
      out.ball.bbox = {{a, 0}, {b, 1}};
      out.ball.center_cell = static_cast<std::size_t>(a);
      int lo = a - 2 * m, hi = b + 2 * m;
      out.dilated_inside = dilated && lo >= 0 && hi <= N;
      out.dilated = out.dilated_inside ? static_cast<double>(pre[hi] - pre[lo]) : 0.0;
      visit(out);
    }
  }
}

}  // namespace

void visit_balls(const Grid& grid, std::span<const std::vector<double>* const> arrays,
                 const std::vector<double>* dilated, double r_min, double r_max,
                 const BallVisitor& visit) {
  for (auto* a : arrays)
    if (a->size() != grid.size()) throw ParameterError("visit_balls: array size mismatch");
  if (grid.n() == 1) {
    visit_intervals(grid, arrays, dilated, r_min, r_max, visit);
    return;
  }
  int N = grid.N();
  double h = grid.h();
  const auto offsets = sorted_offsets(N / 2);
  BallSums out;
  out.sums.resize(arrays.size());
  for (int cj = 0; cj < N; ++cj)
    for (int ci = 0; ci < N; ++ci) {
      int margin = std::min({ci, N - 1 - ci, cj, N - 1 - cj});
      std::fill(out.sums.begin(), out.sums.end(), 0.0);
      double dil = 0.0;
      std::size_t t5 = 0;
      bool dil_ok = dilated != nullptr;
      std::size_t t = 0;
      while (t < offsets.size()) {
        int d2 = offsets[t].d2;
        double rho = std::sqrt(static_cast<double>(d2));
        int reach = static_cast<int>(std::floor(rho + 1e-12));
        if (reach > margin) break;
        for (; t < offsets.size() && offsets[t].d2 == d2; ++t) {
          std::size_t k = grid.flat(ci + offsets[t].di, cj + offsets[t].dj);
          for (std::size_t a = 0; a < arrays.size(); ++a) out.sums[a] += (*arrays[a])[k];
        }
        double R = (rho + 0.5) * h;
        if (R >= r_max) break;
        if (dil_ok) {
          double lim = 5.0 * rho + 2.0;
          if (static_cast<int>(std::floor(lim + 1e-12)) > margin) {
            dil_ok = false;
          } else {
            double lim2 = lim * lim + 1e-9;
            for (; t5 < offsets.size() && offsets[t5].d2 <= lim2; ++t5)
              dil += (*dilated)[grid.flat(ci + offsets[t5].di, cj + offsets[t5].dj)];
          }
        }
        if (R < r_min) continue;
        out.ball.radius = R;
        out.ball.center = {grid.coord(0, ci), grid.coord(1, cj)};
        out.ball.center_cell = grid.flat(ci, cj);
        out.ball.bbox = {{ci - reach, cj - reach}, {ci + reach + 1, cj + reach + 1}};
        out.dilated_inside = dil_ok;
        out.dilated = dil_ok ? dil : 0.0;
        visit(out);
      }
    }
}

void visit_central_balls(const Grid& grid, std::span<const std::vector<double>* const> arrays,
                         double r_min, double r_max, const BallVisitor& visit) {
  for (auto* a : arrays)
    if (a->size() != grid.size()) throw ParameterError("visit_central_balls: array size mismatch");
  const Box& box = grid.box();
  double room = box.L - std::fabs(box.center[0]);
  if (grid.n() == 2) room = std::min(room, box.L - std::fabs(box.center[1]));
  if (room <= 0) return;
  std::vector<double> dist2(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    auto c = grid.center_of(k);
    dist2[k] = c[0] * c[0] + c[1] * c[1];
  }
  std::vector<std::size_t> order(grid.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dist2[a] < dist2[b]; });
  double h = grid.h();
  BallSums out;
  out.sums.assign(arrays.size(), 0.0);
  std::size_t t = 0;
  while (t < order.size()) {
    double d2 = dist2[order[t]];
    for (; t < order.size() && dist2[order[t]] == d2; ++t)
      for (std::size_t a = 0; a < arrays.size(); ++a) out.sums[a] += (*arrays[a])[order[t]];
    double R = std::sqrt(d2) + 0.5 * h;
    if (R > room * (1 + 1e-12) || R >= r_max) break;
    if (R < r_min) continue;
    out.ball.radius = R;
    out.ball.center = {0.0, 0.0};
    out.ball.center_cell = order[0];
    int lo0 = grid.locate(0, -R + 0.5 * h), hi0 = grid.locate(0, R - 0.5 * h) + 1;
    out.ball.bbox = {{lo0, 0}, {hi0, 1}};
    if (grid.n() == 2) {
      out.ball.bbox.lo[1] = grid.locate(1, -R + 0.5 * h);
      out.ball.bbox.hi[1] = grid.locate(1, R - 0.5 * h) + 1;
    }
    out.dilated_inside = false;
    visit(out);
  }
}

void visit_cubes(const Grid& grid, std::span<const std::vector<double>* const> arrays,
                 const CubeVisitor& visit) {
  for (auto* a : arrays)
    if (a->size() != grid.size()) throw ParameterError("visit_cubes: array size mismatch");
  int N = grid.N();
  std::vector<double> sums(arrays.size());
  if (grid.n() == 1) {
    for (int s = 1; s <= N; ++s)
      for (int a = 0; a + s <= N; ++a) {
        std::fill(sums.begin(), sums.end(), 0.0);
        for (int i = a; i < a + s; ++i)
          for (std::size_t t = 0; t < arrays.size(); ++t) sums[t] += (*arrays[t])[i];
        visit({{a, 0}, {a + s, 1}}, sums);
      }
    return;
  }
  for (int s = 1; s <= N; s *= 2)
    for (int y = 0; y + s <= N; ++y)
      for (int x = 0; x + s <= N; ++x) {
        std::fill(sums.begin(), sums.end(), 0.0);
        for (int j = y; j < y + s; ++j)
          for (int i = x; i < x + s; ++i) {
            std::size_t k = grid.flat(i, j);
            for (std::size_t t = 0; t < arrays.size(); ++t) sums[t] += (*arrays[t])[k];
          }
        visit({{x, y}, {x + s, y + s}}, sums);
      }
}

std::vector<std::size_t> ball_cells(const Grid& grid, const DiscreteBall& ball) {
  std::vector<std::size_t> out;
  double h = grid.h();
  double rho = ball.radius - 0.5 * h;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    auto c = grid.center_of(k);
    double d = std::hypot(c[0] - ball.center[0], c[1] - ball.center[1]);
    if (d <= rho + 1e-9 * h) out.push_back(k);
  }
  return out;
}

}  // namespace weightlab
