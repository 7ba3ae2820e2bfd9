#include "polycarl/dyadic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "polycarl/errors.hpp"
#include "polycarl/polynomial.hpp"

namespace polycarl {

namespace {

constexpr int kScaleLimit = 40;

double wrap01(double t) {
  double w = t - std::floor(t);
  return w >= 1.0 ? 0.0 : w;
}

struct Interval {
  double lo, hi;
};

// Arc [start, start + length) on the unit circle as intervals in [0, 1].
std::vector<Interval> arc_pieces(double start, double length) {
  if (length >= 1.0) return {{0.0, 1.0}};
  double s = wrap01(start);
  if (s + length <= 1.0) return {{s, s + length}};
  return {{s, 1.0}, {0.0, s + length - 1.0}};
}

}  // namespace

DyadicCube::DyadicCube(int scale, std::vector<std::int64_t> corner)
    : scale_(scale), corner_(std::move(corner)) {
  if (scale < 0 || scale > kScaleLimit)
    throw InvalidInput("cube scale out of range: " + std::to_string(scale));
  if (corner_.empty() || static_cast<int>(corner_.size()) > kMaxDim)
    throw InvalidInput("cube dimension out of range");
  const std::int64_t n = std::int64_t{1} << scale;
  for (auto c : corner_)
    if (c < 0 || c >= n)
      throw InvalidInput("cube corner index " + std::to_string(c) + " outside [0, " +
                         std::to_string(n) + ")");
}

DyadicCube DyadicCube::containing(std::span<const double> x, int scale) {
  const double n = std::ldexp(1.0, scale);
  std::vector<std::int64_t> corner(x.size());
  for (std::size_t a = 0; a < x.size(); ++a) {
    auto i = static_cast<std::int64_t>(std::floor(wrap01(x[a]) * n));
    corner[a] = std::min<std::int64_t>(i, static_cast<std::int64_t>(n) - 1);
  }
  return DyadicCube(scale, std::move(corner));
}

double DyadicCube::side() const { return std::ldexp(1.0, -scale_); }

double DyadicCube::volume() const { return std::ldexp(1.0, -scale_ * dim()); }

std::vector<double> DyadicCube::lower() const {
  std::vector<double> lo(corner_.size());
  for (std::size_t a = 0; a < corner_.size(); ++a)
    lo[a] = std::ldexp(static_cast<double>(corner_[a]), -scale_);
  return lo;
}

std::vector<double> DyadicCube::center() const {
  auto c = lower();
  const double h = 0.5 * side();
  for (auto& v : c) v += h;
  return c;
}

Box DyadicCube::box() const {
  Box b{lower(), lower()};
  for (auto& v : b.hi) v += side();
  return b;
}

bool DyadicCube::contains_point(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim()) throw InvalidInput("point dimension mismatch");
  return DyadicCube::containing(x, scale_) == *this;
}

DyadicCube DyadicCube::parent() const {
  if (scale_ == 0) throw InvalidInput("the unit cube has no parent");
  return ancestor(scale_ - 1);
}

DyadicCube DyadicCube::ancestor(int scale) const {
  if (scale < 0 || scale > scale_) throw InvalidInput("ancestor scale out of range");
  std::vector<std::int64_t> c(corner_);
  for (auto& v : c) v >>= (scale_ - scale);
  return DyadicCube(scale, std::move(c));
}

std::vector<DyadicCube> DyadicCube::children() const {
  const int m = dim();
  std::vector<DyadicCube> out;
  out.reserve(std::size_t{1} << m);
  for (int mask = 0; mask < (1 << m); ++mask) {
    std::vector<std::int64_t> c(corner_);
    // Lexicographic order with the first axis most significant.
    for (int a = 0; a < m; ++a) c[a] = 2 * c[a] + ((mask >> (m - 1 - a)) & 1);
    out.emplace_back(scale_ + 1, std::move(c));
  }
  return out;
}

std::strong_ordering operator<=>(const DyadicCube& a, const DyadicCube& b) {
  if (auto c = a.scale_ <=> b.scale_; c != 0) return c;
  if (auto c = a.corner_.size() <=> b.corner_.size(); c != 0) return c;
  for (std::size_t i = 0; i < a.corner_.size(); ++i)
    if (auto c = a.corner_[i] <=> b.corner_[i]; c != 0) return c;
  return std::strong_ordering::equal;
}

bool DilatedCube::contains_point(std::span<const double> x) const {
  const double len = factor * base.side();
  if (len >= 1.0) return true;
  auto c = base.center();
  for (int a = 0; a < base.dim(); ++a) {
    double start = c[a] - 0.5 * len;
    if (wrap01(x[a] - start) >= len) return false;
  }
  return true;
}

std::vector<DyadicCube> cubes_at_scale(int scale, int dim, int k_max) {
  if (scale < 0) throw InvalidInput("negative scale");
  if (scale > k_max)
    throw ResourceLimit("scale " + std::to_string(scale) + " exceeds k_max " + std::to_string(k_max),
                        std::ldexp(1.0, scale * dim));
  if (dim < 1 || dim > kMaxDim) throw InvalidInput("dimension out of range");
  const std::int64_t n = std::int64_t{1} << scale;
  std::vector<DyadicCube> out;
  std::vector<std::int64_t> idx(dim, 0);
  while (true) {
    out.emplace_back(scale, idx);
    int a = dim - 1;
    while (a >= 0 && ++idx[a] == n) idx[a--] = 0;
    if (a < 0) break;
  }
  return out;
}

bool contains(const DyadicCube& outer, const DyadicCube& inner) {
  if (outer.dim() != inner.dim()) throw InvalidInput("cube dimension mismatch");
  if (inner.scale() < outer.scale()) return false;
  return inner.ancestor(outer.scale()) == outer;
}

bool disjoint(const DyadicCube& a, const DyadicCube& b) {
  return !contains(a, b) && !contains(b, a);
}

Nesting nesting(const DyadicCube& a, const DyadicCube& b) {
  if (a == b) return Nesting::kEqual;
  if (contains(b, a)) return Nesting::kFirstInsideSecond;
  if (contains(a, b)) return Nesting::kSecondInsideFirst;
  return Nesting::kDisjoint;
}

std::optional<Box> torus_intersection(const DilatedCube& a, const DilatedCube& b) {
  const int m = a.base.dim();
  if (b.base.dim() != m) throw InvalidInput("cube dimension mismatch");
  Box out{std::vector<double>(m), std::vector<double>(m)};
  auto ca = a.base.center();
  auto cb = b.base.center();
  const double la = a.factor * a.base.side();
  const double lb = b.factor * b.base.side();
  for (int axis = 0; axis < m; ++axis) {
    auto pa = arc_pieces(ca[axis] - 0.5 * la, la);
    auto pb = arc_pieces(cb[axis] - 0.5 * lb, lb);
    Interval best{0.0, 0.0};
    bool found = false;
    for (const auto& u : pa) {
      for (const auto& v : pb) {
        double lo = std::max(u.lo, v.lo), hi = std::min(u.hi, v.hi);
        if (hi > lo && (!found || hi - lo > best.hi - best.lo)) {
          best = {lo, hi};
          found = true;
        }
      }
    }
    if (!found) return std::nullopt;
    out.lo[axis] = best.lo;
    out.hi[axis] = best.hi;
  }
  return out;
}

double torus_distance(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t a = 0; a < x.size(); ++a) {
    double d = std::abs(wrap01(x[a] - y[a]));
    d = std::min(d, 1.0 - d);
    s += d * d;
  }
  return std::sqrt(s);
}

int default_k_max(int dim) {
  if (dim <= 1) return 10;
  if (dim == 2) return 6;
  return 4;
}

std::string format_cube(const DyadicCube& cube) {
  std::string s = std::to_string(cube.scale()) + ":(";
  for (int a = 0; a < cube.dim(); ++a) {
    if (a) s += ',';
    s += std::to_string(cube.corner()[a]);
  }
  return s + ")";
}

DyadicCube parse_cube(std::string_view text) {
  auto colon = text.find(':');
  auto open = text.find('(');
  auto close = text.find(')');
  if (colon == std::string_view::npos || open != colon + 1 || close == std::string_view::npos ||
      close != text.size() - 1)
    throw InvalidInput("bad cube literal '" + std::string(text) + "', expected k:(i1,...,im)");
  int k = 0;
  try {
    std::size_t used = 0;
    k = std::stoi(std::string(text.substr(0, colon)), &used);
    if (used != colon) throw InvalidInput("bad scale");
  } catch (const std::exception&) {
    throw InvalidInput("bad cube scale in '" + std::string(text) + "'");
  }
  std::vector<std::int64_t> corner;
  std::string body(text.substr(open + 1, close - open - 1));
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      corner.push_back(std::stoll(item, &used));
      if (used != item.size()) throw InvalidInput("bad index");
    } catch (const std::exception&) {
      throw InvalidInput("bad cube index '" + item + "'");
    }
  }
  return DyadicCube(k, std::move(corner));
}

}  // namespace polycarl
