#include "polycarl/massforest.hpp"

#include <algorithm>
#include <cmath>

#include "polycarl/errors.hpp"
#include "polycarl/geometry.hpp"

namespace polycarl {

MassEngine::MassEngine(const TileOperator& op, int exponent) : op_(&op), exponent_(exponent) {
  if (exponent < 0) throw InvalidInput("mass exponent must be nonnegative");
  const auto tiles = op.family().tiles();
  density_.resize(tiles.size());
  for (std::size_t id = 0; id < tiles.size(); ++id)
    density_[id] = op.e_measure(id) / tiles[id].cube.volume();
}

double MassEngine::weight(std::size_t p, std::size_t q) const {
  if (p == q) return 1.0;
  const auto key = std::make_pair(p, q);
  if (auto it = weights_.find(key); it != weights_.end()) return it->second;
  const auto tiles = family().tiles();
  // Pairs whose dilated cubes miss each other never qualify as mass candidates.
  const double delta = dilated_pair_factor(tiles[p], kMassDilation, tiles[q], kMassDilation).value_or(INFINITY);
  const double w = std::isinf(delta) ? 0.0 : std::pow(bracket(delta), exponent_);
  weights_.emplace(key, w);
  return w;
}

std::optional<DyadicCube> ambient_component(const DyadicCube& cube, std::span<const DyadicCube> ambient) {
  std::optional<DyadicCube> best;
  for (const auto& a : ambient)
    if (contains(a, cube) && (!best || a.scale() < best->scale())) best = a;
  return best;
}

MassRecord MassEngine::mass(std::size_t tile, std::span<const DyadicCube> ambient,
                            std::span<const std::size_t> family) const {
  const auto tiles = this->family().tiles();
  const Tile& p = tiles[tile];
  auto component = ambient_component(p.cube, ambient);
  if (!component) throw InvalidInput("tile cube " + format_cube(p.cube) + " is outside the ambient set");
  MassRecord r;
  r.tile = tile;
  r.ambient = *component;
  r.exponent = exponent_;
  r.witness = tile;
  r.value = -1.0;
  auto consider = [&](std::size_t q) {
    const DyadicCube& c = tiles[q].cube;
    if (!contains(c, p.cube) || !contains(*component, c)) return;
    const double v = density_[q] * weight(tile, q);
    if (v > r.value) {
      r.value = v;
      r.witness = q;
    }
  };
  if (family.empty()) {
    for (std::size_t q = 0; q < tiles.size(); ++q) consider(q);
  } else {
    for (auto q : family) consider(q);
  }
  if (r.value < 0) r.value = 0.0;
  return r;
}

std::vector<double> lambda_grid(int per_octave, int count) {
  if (per_octave <= 0 || count <= 0) throw InvalidInput("lambda grid needs positive sizes");
  std::vector<double> out(count);
  for (int j = 0; j < count; ++j) out[j] = std::exp2(static_cast<double>(j) / per_octave);
  return out;
}

namespace {

std::vector<std::size_t> points_in(const Grid& grid, const DyadicCube& cube) {
  std::vector<std::size_t> out;
  for (std::size_t x = 0; x < grid.size(); ++x)
    if (cube.contains_point(grid.point(x))) out.push_back(x);
  return out;
}

// Smallest lambda with grad Q_c in lambda P, per symbol cell.
std::vector<double> entry_dilations(const TileOperator& op, std::size_t tile) {
  const Tile& p = op.family().tiles()[tile];
  std::vector<double> out;
  for (const auto& q : op.symbol().cells()) out.push_back(2.0 * tile_relative_factor(q, p));
  return out;
}

}  // namespace

double dilated_e_measure(const TileOperator& op, std::size_t tile, double lambda) {
  const Tile& p = op.family().tiles()[tile];
  const auto entry = entry_dilations(op, tile);
  std::size_t hits = 0;
  for (auto x : points_in(op.grid(), p.cube))
    if (entry[op.cell_of_point(x)] <= lambda) ++hits;
  return static_cast<double>(hits) * op.grid().weight();
}

double zk_mass(const TileOperator& op, std::size_t tile, int exponent, std::span<const double> lambdas) {
  const Tile& p = op.family().tiles()[tile];
  const auto entry = entry_dilations(op, tile);
  std::vector<double> sorted;
  for (auto x : points_in(op.grid(), p.cube)) sorted.push_back(entry[op.cell_of_point(x)]);
  std::sort(sorted.begin(), sorted.end());
  double best = 0.0;
  for (double lambda : lambdas) {
    if (lambda < 1.0) throw InvalidInput("lambda grid must start at 1");
    const auto hits = std::upper_bound(sorted.begin(), sorted.end(), lambda) - sorted.begin();
    const double e = static_cast<double>(hits) * op.grid().weight();
    best = std::max(best, e / p.cube.volume() * std::pow(lambda, -exponent));
  }
  return best;
}

std::vector<LinearizingSymbol> coarse_concentrated_symbols(const TileFamily& family) {
  std::vector<LinearizingSymbol> out;
  for (const auto& t : family.tiles())
    if (t.scale() == 0) out.push_back(LinearizingSymbol::constant(t.center_potential));
  return out;
}

MonotonicitySearch monotonicity_violation_search(const TileFamily& family, const OrderOracle& order,
                                                 std::span<const LinearizingSymbol> symbols,
                                                 const KernelDecomposition& kd, int grid_bits, int exponent,
                                                 std::span<const double> lambdas) {
  const auto tiles = family.tiles();
  if (tiles.size() > 200) throw ResourceLimit("monotonicity search is limited to 200 tiles",
                                              static_cast<double>(tiles.size()));
  std::vector<double> grid_storage;
  if (lambdas.empty()) {
    grid_storage = lambda_grid();
    lambdas = grid_storage;
  }
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t a = 0; a < tiles.size(); ++a)
    for (std::size_t b = 0; b < tiles.size(); ++b)
      if (tiles[a].scale() > tiles[b].scale() && order.leq(a, b)) pairs.emplace_back(a, b);

  MonotonicitySearch out;
  const DyadicCube torus = DyadicCube::unit(family.config().dim);
  for (std::size_t s = 0; s < symbols.size(); ++s) {
    TileOperator op(family, symbols[s], kd, grid_bits);
    MassEngine engine(op, exponent);
    std::vector<double> zk(tiles.size());
    for (std::size_t id = 0; id < tiles.size(); ++id) zk[id] = zk_mass(op, id, exponent, lambdas);
    ++out.symbols_scanned;
    std::optional<MonotonicityWitness> found;
    for (auto [a, b] : pairs) {
      ++out.pairs_scanned;
      const double ma = engine.mass(a, std::span(&torus, 1)).value;
      const double mb = engine.mass(b, std::span(&torus, 1)).value;
      if (ma < mb - 1e-9) ++out.mass_exceptions;
      if (!found && zk[a] < zk[b] - 1e-9) found = MonotonicityWitness{a, b, s, zk[a], zk[b], ma, mb};
    }
    if (found) {
      out.witness = found;
      break;
    }
  }
  return out;
}

}  // namespace polycarl
