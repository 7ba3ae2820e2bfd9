#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "polycarl/box.hpp"

namespace polycarl {

// I = prod_l [2^-k k_l, 2^-k (k_l + 1)) on the m-torus.
class DyadicCube {
 public:
  DyadicCube() = default;
  DyadicCube(int scale, std::vector<std::int64_t> corner);

  static DyadicCube unit(int dim) { return DyadicCube(0, std::vector<std::int64_t>(dim, 0)); }
  // The scale-k cube containing the torus point x (coordinates taken mod 1).
  static DyadicCube containing(std::span<const double> x, int scale);

  int scale() const { return scale_; }
  int dim() const { return static_cast<int>(corner_.size()); }
  std::span<const std::int64_t> corner() const { return corner_; }

  double side() const;    // l(I)
  double volume() const;  // |I|
  std::vector<double> lower() const;
  std::vector<double> center() const;  // c(I)
  Box box() const;                     // closure of I

  bool contains_point(std::span<const double> x) const;

  DyadicCube parent() const;
  DyadicCube ancestor(int scale) const;
  std::vector<DyadicCube> children() const;

  friend bool operator==(const DyadicCube&, const DyadicCube&) = default;
  friend std::strong_ordering operator<=>(const DyadicCube& a, const DyadicCube& b);

 private:
  int scale_ = 0;
  std::vector<std::int64_t> corner_;
};

// aI: same center, side a * l(I), wrapped on the torus.
struct DilatedCube {
  DyadicCube base;
  double factor = 1.0;

  bool contains_point(std::span<const double> x) const;
};

std::vector<DyadicCube> cubes_at_scale(int scale, int dim, int k_max);

bool contains(const DyadicCube& outer, const DyadicCube& inner);
bool disjoint(const DyadicCube& a, const DyadicCube& b);

enum class Nesting { kEqual, kFirstInsideSecond, kSecondInsideFirst, kDisjoint };
Nesting nesting(const DyadicCube& a, const DyadicCube& b);

// Largest box contained in aI ∩ bJ after wraparound, clipped to the
// fundamental domain [0,1]^m.  nullopt when the intersection is empty.
std::optional<Box> torus_intersection(const DilatedCube& a, const DilatedCube& b);

// Torus distance between points (per-axis wrapped, Euclidean).
double torus_distance(std::span<const double> x, std::span<const double> y);

int default_k_max(int dim);
// Scale-separation parameter D.
inline int default_separation(int degree, int dim) { return 4 * degree * dim; }

// Groups items by scale mod D.  Class j holds the items with scale % D == j.
template <class T, class ScaleOf>
std::vector<std::vector<T>> separation_classes(std::span<const T> items, int separation,
                                               ScaleOf scale_of) {
  std::vector<std::vector<T>> classes(separation > 0 ? separation : 1);
  for (const auto& item : items) {
    int s = scale_of(item);
    classes[s % static_cast<int>(classes.size())].push_back(item);
  }
  return classes;
}

// "k:(i1,...,im)"
std::string format_cube(const DyadicCube& cube);
DyadicCube parse_cube(std::string_view text);

}  // namespace polycarl
