#pragma once

#include <optional>
#include <span>
#include <vector>

#include "polycarl/box.hpp"
#include "polycarl/dyadic.hpp"
#include "polycarl/polynomial.hpp"
#include "polycarl/tile.hpp"

namespace polycarl {

inline constexpr int kSupGridPoints = 33;

// Numerical carrier for || |F| ||_{L^inf(box)}; always a lower bound.
struct SupEstimate {
  double value = 0.0;
  int grid_points_per_axis = 0;
  bool refined = false;
};

// Fields of degree <= 1 have convex |F|, so the vertex maximum is exact and
// is returned with grid_points_per_axis == 2.  Higher degrees use the closed
// grid followed by coordinate-wise ternary refinement.
SupEstimate sup_grad_norm(const GradientField& field, const Box& box,
                          int points_per_axis = kSupGridPoints, bool refine = true);
SupEstimate sup_grad_norm(const GradientField& field, const DyadicCube& cube,
                          int points_per_axis = kSupGridPoints, bool refine = true);

// Delta_F(I) = l(I) * sup_I |F|.  For a general box l is the longest side.
double geom_factor(const GradientField& field, const DyadicCube& cube);
double geom_factor(const GradientField& field, const Box& box);

// ceil(x) = 1 / (1 + |x|)
inline double bracket(double x) { return 1.0 / (1.0 + (x < 0 ? -x : x)); }

// Center-difference surrogate for inf over grad Q1 in P of Delta_{grad Q - grad Q1}(I_P).
double tile_relative_factor(const Polynomial& q, const Tile& tile);
double tile_relative_factor(const GradientField& field, const Tile& tile);

inline constexpr double kDefaultTildeFactor = 3.0;

// Delta(P1, P2) evaluated on the intersection box of the dilated cubes.
// nullopt when the dilated cubes do not meet on the torus.
std::optional<double> pair_factor(const Tile& p1, const Tile& p2,
                                  double tilde_factor = kDefaultTildeFactor);

// Delta(a1 P1, a2 P2): the pair factor reduced by both ball radii, each
// transported to the intersection box by the ratio of side lengths.
std::optional<double> dilated_pair_factor(const Tile& p1, double a1, const Tile& p2, double a2,
                                          double tilde_factor = kDefaultTildeFactor);

// Caches a fixed sample set of a box so that Delta distances between many
// fields reduce to vector maxima.  Exact for fields of degree <= 1.
class CubeSampler {
 public:
  CubeSampler(const Box& box, int field_degree, int points_per_axis = kSupGridPoints);
  explicit CubeSampler(const DyadicCube& cube, int field_degree,
                       int points_per_axis = kSupGridPoints)
      : CubeSampler(cube.box(), field_degree, points_per_axis) {}

  int dim() const { return dim_; }
  std::size_t point_count() const { return points_.size() / dim_; }
  bool exact() const { return exact_; }
  double length() const { return length_; }

  // Field values at the sample points, point-major (point_count * dim).
  std::vector<double> sample(const GradientField& field) const;
  // length * max_x |a(x) - b(x)|
  double distance(std::span<const double> a, std::span<const double> b) const;

 private:
  int dim_ = 0;
  bool exact_ = false;
  double length_ = 0.0;
  std::vector<double> points_;
};

}  // namespace polycarl
