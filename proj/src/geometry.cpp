#include "polycarl/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "polycarl/errors.hpp"

namespace polycarl {

namespace {

double vertex_max(const GradientField& field, const Box& box) {
  const int m = box.dim();
  std::vector<double> x(m);
  double best = 0.0;
  for (int mask = 0; mask < (1 << m); ++mask) {
    for (int a = 0; a < m; ++a) x[a] = (mask >> a) & 1 ? box.hi[a] : box.lo[a];
    best = std::max(best, field.norm_at(x));
  }
  return best;
}

void check_dims(const GradientField& field, int dim) {
  if (field.dim() != dim) throw InvalidInput("gradient field and cube dimensions differ");
}

}  // namespace

SupEstimate sup_grad_norm(const GradientField& field, const Box& box, int points_per_axis,
                          bool refine) {
  check_dims(field, box.dim());
  if (field.is_zero()) return {0.0, 2, true};
  if (field.max_degree() <= 1) return {vertex_max(field, box), 2, true};
  ScalarField fn = [&](std::span<const double> x) { return field.norm_at(x); };
  MaxResult r = grid_max(fn, box, points_per_axis);
  if (refine) r = refine_max(fn, box, points_per_axis, std::move(r));
  return {r.value, points_per_axis, refine};
}

SupEstimate sup_grad_norm(const GradientField& field, const DyadicCube& cube, int points_per_axis,
                          bool refine) {
  return sup_grad_norm(field, cube.box(), points_per_axis, refine);
}

double geom_factor(const GradientField& field, const DyadicCube& cube) {
  return cube.side() * sup_grad_norm(field, cube).value;
}

double geom_factor(const GradientField& field, const Box& box) {
  return box.max_side() * sup_grad_norm(field, box).value;
}

double tile_relative_factor(const GradientField& field, const Tile& tile) {
  return geom_factor(field - tile.center, tile.cube);
}

double tile_relative_factor(const Polynomial& q, const Tile& tile) {
  return tile_relative_factor(grad(q), tile);
}

std::optional<double> pair_factor(const Tile& p1, const Tile& p2, double tilde_factor) {
  if (p1 == p2) return 0.0;
  auto box = torus_intersection(DilatedCube{p1.cube, tilde_factor},
                                DilatedCube{p2.cube, tilde_factor});
  if (!box) return std::nullopt;
  return geom_factor(p1.center - p2.center, *box);
}

std::optional<double> dilated_pair_factor(const Tile& p1, double a1, const Tile& p2, double a2,
                                          double tilde_factor) {
  auto box = torus_intersection(DilatedCube{p1.cube, tilde_factor},
                                DilatedCube{p2.cube, tilde_factor});
  if (!box) return std::nullopt;
  const double len = box->max_side();
  const double base = p1 == p2 ? 0.0 : geom_factor(p1.center - p2.center, *box);
  const double shrink = 0.5 * a1 * len / p1.cube.side() + 0.5 * a2 * len / p2.cube.side();
  return std::max(0.0, base - shrink);
}

CubeSampler::CubeSampler(const Box& box, int field_degree, int points_per_axis)
    : dim_(box.dim()), exact_(field_degree <= 1), length_(box.max_side()) {
  const int m = dim_;
  const int n = exact_ ? 2 : std::max(points_per_axis, 2);
  std::vector<int> idx(m, 0);
  while (true) {
    for (int a = 0; a < m; ++a) {
      double t = idx[a] == n - 1 ? box.hi[a]
                                 : box.lo[a] + box.side(a) * static_cast<double>(idx[a]) / (n - 1);
      points_.push_back(t);
    }
    int a = 0;
    while (a < m && ++idx[a] == n) idx[a++] = 0;
    if (a == m) break;
  }
}

std::vector<double> CubeSampler::sample(const GradientField& field) const {
  check_dims(field, dim_);
  std::vector<double> out(points_.size());
  const std::size_t count = point_count();
  for (std::size_t i = 0; i < count; ++i) {
    std::span<const double> x(points_.data() + i * dim_, dim_);
    field.eval(x, std::span<double>(out.data() + i * dim_, dim_));
  }
  return out;
}

double CubeSampler::distance(std::span<const double> a, std::span<const double> b) const {
  double best = 0.0;
  const std::size_t count = point_count();
  for (std::size_t i = 0; i < count; ++i) {
    double s = 0.0;
    for (int k = 0; k < dim_; ++k) {
      double d = a[i * dim_ + k] - b[i * dim_ + k];
      s += d * d;
    }
    best = std::max(best, s);
  }
  return length_ * std::sqrt(best);
}

}  // namespace polycarl
