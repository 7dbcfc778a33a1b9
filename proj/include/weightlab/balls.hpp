#pragma once

#include <functional>
#include <span>
#include <vector>

#include "weightlab/grid.hpp"

namespace weightlab {

/// A discrete ball: the cells whose centers lie within radius - h/2 of `center`.
/// In 1-D every node-aligned interval is a ball; in 2-D balls are centered at cell centers.
struct DiscreteBall {
  Point center{0.0, 0.0};
  double radius = 0.0;
  CellBox bbox{};              // bounding block of the member cells
  std::size_t center_cell = 0; // 2-D and central families only
};

/// Per-ball sums handed to the visitor: sums[a] is the sum of arrays[a] over the ball,
/// dilated the sum of the dilated array over 5B (valid only when dilated_inside).
struct BallSums {
  DiscreteBall ball;
  std::vector<double> sums;
  double dilated = 0.0;
  bool dilated_inside = false;
};

using BallVisitor = std::function<void(const BallSums&)>;

/// Visits every ball inside the window with r_min <= radius < r_max.
void visit_balls(const Grid& grid, std::span<const std::vector<double>* const> arrays,
                 const std::vector<double>* dilated, double r_min, double r_max,
                 const BallVisitor& visit);

/// Visits the balls B_R(0) about the coordinate origin, r_min <= R < r_max.
void visit_central_balls(const Grid& grid, std::span<const std::vector<double>* const> arrays,
                         double r_min, double r_max, const BallVisitor& visit);

using CubeVisitor = std::function<void(const CellBox&, const std::vector<double>& sums)>;

/// Visits every cube of grid_cubes(grid) with the sums of each array over it. 1-D sums
/// run left to right from the cube's left end; 2-D sums are row-major within the cube.
void visit_cubes(const Grid& grid, std::span<const std::vector<double>* const> arrays,
                 const CubeVisitor& visit);

/// Member cells of a discrete ball, in flat-index order.
std::vector<std::size_t> ball_cells(const Grid& grid, const DiscreteBall& ball);

}  // namespace weightlab
