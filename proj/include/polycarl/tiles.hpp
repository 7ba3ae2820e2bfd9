#pragma once

#include <cstddef>
#include <map>
#include <ostream>
#include <span>
#include <vector>

#include "polycarl/dyadic.hpp"
#include "polycarl/geometry.hpp"
#include "polycarl/polynomial.hpp"
#include "polycarl/tile.hpp"

namespace polycarl {

inline constexpr std::size_t kDefaultLatticeBudget = 4'000'000;

// Finite box of potentials Q = sum c_beta x^beta (1 <= |beta| <= d) with a
// coefficient lattice.  Monomials are in grlex order.
struct FrequencyWindow {
  int dim = 1;
  int degree = 1;
  std::vector<double> center;  // per monomial
  std::vector<double> bound;   // half-width per monomial
  std::vector<double> step;    // lattice step per monomial

  // bound = bound_factor * 2^k, step = step_factor * 2^k for every monomial.
  static FrequencyWindow scaled(int dim, int degree, int scale, double bound_factor = 4.0,
                                double step_factor = 0.5);
  static FrequencyWindow uniform(int dim, int degree, double bound, double step);

  std::vector<MultiIndex> monomials() const;
  std::size_t axis_count(std::size_t monomial) const;
  std::size_t lattice_size() const;
  double lattice_value(std::size_t monomial, std::size_t j) const;
  // Potential at lattice position `flat` (first monomial varies slowest).
  Polynomial potential(std::size_t flat) const;
  bool contains(const Polynomial& q) const;
};

Tile make_tile(const DyadicCube& cube, const Polynomial& potential, int net_index);

// A maximal 1-separated net on one cube together with the cached samples
// used for Voronoi ownership.  Distances use the CubeSampler metric, which
// is exact for degree <= 2 potentials and a grid lower bound above that.
class CubeNet {
 public:
  CubeNet(DyadicCube cube, int degree);

  const DyadicCube& cube() const { return cube_; }
  std::span<const Tile> tiles() const { return tiles_; }
  const CubeSampler& sampler() const { return sampler_; }

  // Distance of the field to the center of tile `index`.
  double distance(const GradientField& field, std::size_t index) const;
  // Owner: minimal distance, ties to the smallest net_index.
  std::size_t owner(const GradientField& field) const;
  std::size_t owner_of_samples(std::span<const double> samples) const;

  void add(Tile tile);

 private:
  DyadicCube cube_;
  CubeSampler sampler_;
  std::vector<Tile> tiles_;
  std::vector<std::vector<double>> center_samples_;
};

// Greedy scan of the window lattice: a candidate joins iff its distance to
// every accepted center is >= 1.  Throws ResourceLimit past the budget.
CubeNet build_net(const DyadicCube& cube, const FrequencyWindow& window,
                  std::size_t lattice_budget = kDefaultLatticeBudget);

const Tile& voronoi_owner(const GradientField& field, std::span<const Tile> tiles_on_cube);

// grad Q in aP iff Delta_{grad Q - grad Q_P}(I) <= a/2.
bool member(const GradientField& field, const DilatedTile& tile);

// Lagrange interpolant through (nodes[j], values[j]); m = 1.
Polynomial central_polynomial_1d(std::span<const double> nodes, std::span<const double> values);

std::vector<std::vector<Tile>> separation_classes(std::span<const Tile> tiles, int separation);

enum class WindowMode { kScaled, kUniform };

struct FamilyConfig {
  int dim = 1;
  int degree = 1;
  int k_max = 3;
  WindowMode mode = WindowMode::kScaled;
  double bound_factor = 4.0;  // scaled: bound = factor * 2^k; uniform: factor * 2^k_max
  double step_factor = 0.5;   // lattice step = factor * 2^k
  std::size_t lattice_budget = kDefaultLatticeBudget;
  // Absolute half-widths per monomial at every scale; empty keeps the factor rule.
  std::vector<double> bound_override;

  FrequencyWindow window(int scale) const;
};

// Nets over every cube of every scale 0..k_max.  Tile ids are positions in
// tiles(), ordered by (scale, cube, net_index).
class TileFamily {
 public:
  static TileFamily build(const FamilyConfig& config);

  const FamilyConfig& config() const { return config_; }
  std::span<const Tile> tiles() const { return tiles_; }
  std::span<const CubeNet> nets() const { return nets_; }
  const CubeNet& net_of(const DyadicCube& cube) const;
  std::size_t net_position(const DyadicCube& cube) const;
  std::size_t id_of(const Tile& tile) const;
  // Global id of the tile with position `net_index` on `cube`.
  std::size_t id_of(const DyadicCube& cube, std::size_t net_index) const;

 private:
  FamilyConfig config_;
  std::vector<CubeNet> nets_;
  std::vector<Tile> tiles_;
  std::vector<std::size_t> first_id_;
  std::map<DyadicCube, std::size_t> index_;
};

// Universe lattice for OrderOracle: the uniform window of the family widened
// by (a/2) 2^{k_max |beta|} per monomial so the a-balls of edge tiles are not
// clipped.  Step is the scale-0 lattice step.
FrequencyWindow order_universe(const FamilyConfig& config, double dilation = 2.0);

// Evaluates the tile orderings on a shared lattice universe: each tile's
// cell is the set of universe points it owns.
class OrderOracle {
 public:
  OrderOracle(const TileFamily& family, const FrequencyWindow& universe);

  std::size_t universe_size() const { return universe_size_; }
  std::span<const std::size_t> cell(std::size_t tile) const { return cells_[tile]; }

  // P1 <= P2: I1 in I2 and the cells meet.
  bool leq(std::size_t p1, std::size_t p2) const;
  // P1 ⊴ P2: I1 in I2 and cell(P2) ⊆ cell(P1).
  bool sq(std::size_t p1, std::size_t p2) const;
  // a1 P1 ⊴ a2 P2 over the sampled balls.
  bool dilated_sq(std::size_t p1, double a1, std::size_t p2, double a2) const;
  std::vector<std::size_t> ball(std::size_t tile, double a) const;

 private:
  const TileFamily* family_;
  std::size_t universe_size_ = 0;
  std::vector<std::vector<std::size_t>> cells_;
  // universe samples per cube net position
  std::vector<std::vector<std::vector<double>>> samples_;
};

// Sufficient condition for a1 P1 ⊴ a2 P2 from the triangle inequality:
// (l1/l2)(a2/2) + Delta_{I1}(c2 - c1) <= a1/2 with I1 ⊆ I2.
bool dilated_sq_ball_sufficient(const Tile& p1, double a1, const Tile& p2, double a2);

void write_tiles_csv(std::ostream& os, std::span<const Tile> tiles);

}  // namespace polycarl
