#pragma once

#include <functional>
#include <span>
#include <vector>

namespace polycarl {

// Closed axis-aligned box [lo, hi] in R^m.
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  int dim() const { return static_cast<int>(lo.size()); }
  double side(int axis) const { return hi[axis] - lo[axis]; }
  double max_side() const;
  std::vector<double> center() const;
};

struct MaxResult {
  double value = 0.0;
  std::vector<double> argmax;
};

using ScalarField = std::function<double(std::span<const double>)>;

// Max of fn over a closed uniform grid with points_per_axis samples per axis.
MaxResult grid_max(const ScalarField& fn, const Box& box, int points_per_axis);

// Coordinate-wise ternary search in the grid cells adjacent to `start`.
// Only accepts improvements, so the result never falls below start.value.
MaxResult refine_max(const ScalarField& fn, const Box& box, int points_per_axis,
                     MaxResult start, int sweeps = 3, int iterations = 60);

}  // namespace polycarl
