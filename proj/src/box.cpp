#include "polycarl/box.hpp"

#include <algorithm>
#include <cmath>

namespace polycarl {

double Box::max_side() const {
  double s = 0.0;
  for (int i = 0; i < dim(); ++i) s = std::max(s, side(i));
  return s;
}

std::vector<double> Box::center() const {
  std::vector<double> c(lo.size());
  for (std::size_t i = 0; i < lo.size(); ++i) c[i] = 0.5 * (lo[i] + hi[i]);
  return c;
}

namespace {

double grid_coord(const Box& box, int axis, int i, int n) {
  if (n == 1) return 0.5 * (box.lo[axis] + box.hi[axis]);
  if (i == n - 1) return box.hi[axis];
  return box.lo[axis] + box.side(axis) * static_cast<double>(i) / (n - 1);
}

}  // namespace

MaxResult grid_max(const ScalarField& fn, const Box& box, int points_per_axis) {
  const int m = box.dim();
  const int n = std::max(points_per_axis, 1);
  std::vector<int> idx(m, 0);
  std::vector<double> x(m);
  MaxResult best;
  best.value = -INFINITY;
  while (true) {
    for (int a = 0; a < m; ++a) x[a] = grid_coord(box, a, idx[a], n);
    double v = fn(x);
    if (v > best.value) {
      best.value = v;
      best.argmax = x;
    }
    int a = 0;
    while (a < m && ++idx[a] == n) idx[a++] = 0;
    if (a == m) break;
  }
  return best;
}

MaxResult refine_max(const ScalarField& fn, const Box& box, int points_per_axis,
                     MaxResult start, int sweeps, int iterations) {
  const int m = box.dim();
  const int n = std::max(points_per_axis, 2);
  MaxResult best = std::move(start);
  std::vector<double> x = best.argmax;
  constexpr double kInvPhi = 0.6180339887498949;
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    for (int a = 0; a < m; ++a) {
      double h = box.side(a) / (n - 1);
      double lo = std::max(box.lo[a], best.argmax[a] - h);
      double hi = std::min(box.hi[a], best.argmax[a] + h);
      if (!(hi > lo)) continue;
      x = best.argmax;
      auto at = [&](double t) {
        x[a] = t;
        return fn(x);
      };
      double c = hi - kInvPhi * (hi - lo);
      double d = lo + kInvPhi * (hi - lo);
      double fc = at(c), fd = at(d);
      for (int it = 0; it < iterations; ++it) {
        if (fc > fd) {
          hi = d;
          d = c;
          fd = fc;
          c = hi - kInvPhi * (hi - lo);
          fc = at(c);
        } else {
          lo = c;
          c = d;
          fc = fd;
          d = lo + kInvPhi * (hi - lo);
          fd = at(d);
        }
      }
      double t = fc > fd ? c : d;
      double v = std::max(fc, fd);
      if (v > best.value) {
        best.value = v;
        best.argmax[a] = t;
      }
    }
  }
  return best;
}

}  // namespace polycarl
