#include <algorithm>
#include <cmath>
#include <random>

#include "polycarl/errors.hpp"
#include "polycarl/geometry.hpp"
#include "polycarl/massforest.hpp"
#include "polycarl/oscillatory.hpp"

namespace polycarl {

Tree build_tree(const TileFamily& family, std::size_t top, std::span<const std::size_t> candidates,
                double dilation) {
  const auto tiles = family.tiles();
  Tree t;
  t.top = top;
  t.members.push_back(top);
  for (auto id : candidates) {
    if (id == top) continue;
    if (dilated_sq_ball_sufficient(tiles[id], dilation, tiles[top], dilation)) t.members.push_back(id);
  }
  std::sort(t.members.begin(), t.members.end());
  return t;
}

bool is_normal(const TileFamily& family, const Tree& tree, double dilation) {
  const auto tiles = family.tiles();
  const DyadicCube& top = tiles[tree.top].cube;
  if (top.scale() == 0) return true;
  const auto lo = top.lower();
  const double side = top.side();
  for (auto id : tree.members) {
    const DyadicCube& c = tiles[id].cube;
    if (!contains(top, c)) return false;
    const auto center = c.center();
    const double half = 0.5 * dilation * c.side();
    for (int a = 0; a < c.dim(); ++a)
      if (center[a] - half < lo[a] || center[a] + half > lo[a] + side) return false;
  }
  return true;
}

bool is_row(const TileFamily& family, const Row& row, double normal_dilation) {
  const auto tiles = family.tiles();
  for (std::size_t i = 0; i < row.trees.size(); ++i) {
    if (!is_normal(family, row.trees[i], normal_dilation)) return false;
    for (std::size_t j = 0; j < i; ++j)
      if (!disjoint(tiles[row.trees[i].top].cube, tiles[row.trees[j].top].cube)) return false;
  }
  return true;
}

namespace {

bool one_side_separated(std::span<const Tile> tiles, const Tree& from, std::size_t other_top, double delta,
                        double tilde) {
  const Tile& top = tiles[other_top];
  for (auto id : from.members) {
    if (!contains(top.cube, tiles[id].cube)) continue;
    auto pf = pair_factor(tiles[id], top, tilde);
    if (pf && bracket(*pf) >= delta) return false;
  }
  return true;
}

double degree_of(const TileOperator& op) { return std::max(1, op.family().config().degree); }

}  // namespace

bool separated(const TileFamily& family, const Tree& t1, const Tree& t2, double delta, double tilde_factor) {
  const auto tiles = family.tiles();
  if (disjoint(tiles[t1.top].cube, tiles[t2.top].cube)) return true;
  return one_side_separated(tiles, t1, t2.top, delta, tilde_factor) &&
         one_side_separated(tiles, t2, t1.top, delta, tilde_factor);
}

std::vector<std::size_t> row_tiles(const Row& row) {
  std::vector<std::size_t> out;
  for (const auto& t : row.trees) out.insert(out.end(), t.members.begin(), t.members.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

GridFunction apply_tiles(const TileOperator& op, std::span<const std::size_t> tiles, const GridFunction& f) {
  GridFunction out = GridFunction::zeros(f.dim, f.bits, f.k_max);
  for (auto id : tiles) {
    if (op.e_set(id).empty()) continue;
    auto part = op.apply_T_P(id, f);
    for (auto x : op.e_set(id)) out.values[x] += part.values[x];
  }
  return out;
}

GridFunction apply_tiles_adjoint(const TileOperator& op, std::span<const std::size_t> tiles,
                                 const GridFunction& g) {
  GridFunction out = GridFunction::zeros(g.dim, g.bits, g.k_max);
  for (auto id : tiles) {
    if (op.e_set(id).empty()) continue;
    auto part = op.apply_T_P_adjoint(id, g);
    for (std::size_t y = 0; y < out.values.size(); ++y) out.values[y] += part.values[y];
  }
  return out;
}

InnerProductCheck tree_inner_product_check(const TileOperator& op, const Tree& t1, const Tree& t2,
                                           double delta, const GridFunction& f, const GridFunction& g) {
  if (!(delta > 0 && delta <= 1)) throw InvalidInput("delta must lie in (0, 1]");
  if (!separated(op.family(), t1, t2, delta)) throw InvalidInput("trees are not separated at this delta");
  InnerProductCheck r;
  r.inner = inner(apply_tiles_adjoint(op, t1.members, f), apply_tiles_adjoint(op, t2.members, g));
  const double scale = std::pow(delta, 1.0 / (2.0 * degree_of(op))) * f.l2_norm() * g.l2_norm();
  r.ratio = scale > 0 ? std::abs(r.inner) / scale : 0.0;
  return r;
}

InnerProductCheck row_tree_check(const TileOperator& op, const Row& row, const Tree& tree, double delta,
                                 const GridFunction& f, const GridFunction& g, double normal_dilation) {
  if (!(delta > 0 && delta <= 1)) throw InvalidInput("delta must lie in (0, 1]");
  const auto& family = op.family();
  const auto tiles = family.tiles();
  if (!is_row(family, row, normal_dilation)) throw InvalidInput("row trees must be normal with disjoint tops");
  for (const auto& t : row.trees) {
    if (!contains(tiles[tree.top].cube, tiles[t.top].cube))
      throw InvalidInput("row tops must sit inside the tree top");
    if (!separated(family, t, tree, delta)) throw InvalidInput("row tree is not separated from the tree");
  }
  InnerProductCheck r;
  r.inner = inner(apply_tiles_adjoint(op, tree.members, f), apply_tiles_adjoint(op, row_tiles(row), g));
  const double scale = std::pow(delta, 1.0 / (2.0 * degree_of(op))) * f.l2_norm() * g.l2_norm();
  r.ratio = scale > 0 ? std::abs(r.inner) / scale : 0.0;
  return r;
}

double power_norm(const GridMap& a, const GridMap& a_adjoint, int dim, int bits, int steps, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  GridFunction v = GridFunction::zeros(dim, bits);
  for (auto& x : v.values) x = Complex(u(rng), u(rng));
  auto normalize = [](GridFunction& w) {
    const double n = w.l2_norm();
    if (n > 0)
      for (auto& x : w.values) x /= n;
    return n;
  };
  normalize(v);
  for (int i = 0; i < steps; ++i) {
    GridFunction w = a_adjoint(a(v));
    if (normalize(w) == 0.0) return 0.0;
    v = std::move(w);
  }
  return a(v).l2_norm();
}

OrthogonalityReport forest_rows_orthogonality_check(const TileOperator& op, std::span<const Row> rows, int steps) {
  const int m = op.grid().dim(), bits = op.grid().bits();
  std::vector<std::vector<std::size_t>> tiles;
  for (const auto& r : rows) tiles.push_back(row_tiles(r));
  OrthogonalityReport out;
  for (std::size_t j = 0; j < rows.size(); ++j)
    for (std::size_t k = 0; k < rows.size(); ++k) {
      if (j == k) continue;
      const auto& tj = tiles[j];
      const auto& tk = tiles[k];
      RowPairNorms n;
      n.j = j;
      n.k = k;
      n.star_first = power_norm([&](const GridFunction& f) { return apply_tiles_adjoint(op, tk, apply_tiles(op, tj, f)); },
                                [&](const GridFunction& f) { return apply_tiles_adjoint(op, tj, apply_tiles(op, tk, f)); },
                                m, bits, steps);
      n.star_last = power_norm([&](const GridFunction& f) { return apply_tiles(op, tk, apply_tiles_adjoint(op, tj, f)); },
                               [&](const GridFunction& f) { return apply_tiles(op, tj, apply_tiles_adjoint(op, tk, f)); },
                               m, bits, steps);
      out.max_star_first = std::max(out.max_star_first, n.star_first);
      out.max_star_last = std::max(out.max_star_last, n.star_last);
      out.pairs.push_back(n);
    }
  out.pass = out.max_star_first <= 1e-10;
  return out;
}

MassDecay main_proposition_decay(const TileOperator& op, const StoppingPartition& partition,
                                 const GridFunction& f, int n0) {
  MassDecay out;
  const double norm = f.l2_norm();
  if (norm == 0) throw InvalidInput("decay check needs a nonzero function");
  std::vector<double> xs, ys;
  for (const auto& level : partition.levels) {
    std::vector<std::size_t> tiles;
    for (const auto& t : level.tiles) tiles.insert(tiles.end(), t.begin(), t.end());
    const double r = apply_tiles(op, tiles, f).l2_norm() / norm;
    out.n.push_back(level.n);
    out.ratio.push_back(r);
    if (r > 0) {
      xs.push_back(level.n);
      ys.push_back(std::log2(r));
    }
  }
  for (std::size_t i = 1; i < out.n.size(); ++i)
    if (out.n[i - 1] >= n0 && out.ratio[i] > out.ratio[i - 1] * (1 + 1e-12)) out.monotone_beyond_n0 = false;
  if (xs.size() >= 2) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      mx += xs[i];
      my += ys[i];
    }
    mx /= xs.size();
    my /= ys.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxy += (xs[i] - mx) * (ys[i] - my);
      sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    out.eta = sxx > 0 ? -sxy / sxx : 0.0;
  }
  return out;
}

namespace {

std::size_t nearest_top(const TileFamily& family, double c) {
  const auto tiles = family.tiles();
  std::size_t best = tiles.size();
  double best_d = INFINITY;
  for (std::size_t id = 0; id < tiles.size(); ++id) {
    if (tiles[id].scale() != 0) continue;
    const Polynomial& q = tiles[id].center_potential;
    double d = std::abs(q.coeff(MultiIndex{1}) - c);
    for (int j = 2; j <= family.config().degree; ++j) d += std::abs(q.coeff(MultiIndex{j}));
    if (d < best_d) {
      best_d = d;
      best = id;
    }
  }
  return best;
}

}  // namespace

SeparationSweep separated_tree_sweep(std::span<const double> deltas, const SeparationSweepConfig& config) {
  if (deltas.empty()) throw InvalidInput("delta sweep needs at least one delta");
  for (double d : deltas)
    if (!(d > 0 && d <= 1)) throw InvalidInput("delta must lie in (0, 1]");
  if (config.degree < 1 || config.trials < 1) throw InvalidInput("sweep needs degree >= 1 and trials >= 1");
  const double unit = std::ldexp(1.0, config.k_max);
  const double dmin = *std::min_element(deltas.begin(), deltas.end());
  // Members at the finest scale need 3 l (2s) of order 1 / delta.
  const double reach = std::ceil((unit / (3.0 * dmin) + 4.0 * unit) / unit) * unit;

  FamilyConfig fc;
  fc.dim = 1;
  fc.degree = config.degree;
  fc.k_max = config.k_max;
  fc.bound_override.assign(config.degree, 1.0);
  fc.bound_override[0] = reach + 2.0 * unit;
  const TileFamily family = TileFamily::build(fc);
  const auto kd = build_psi(1, config.k_max);
  std::vector<std::size_t> all(family.tiles().size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> jitter(-0.25, 0.25);
  SeparationSweep out;
  std::vector<double> xs, ys;
  for (double delta : deltas) {
    Tree t1, t2;
    double s = unit;
    for (;; s += unit) {
      if (s > reach) throw ResourceLimit("no separating shift inside the window", s);
      t1 = build_tree(family, nearest_top(family, -s), all);
      t2 = build_tree(family, nearest_top(family, s), all);
      if (separated(family, t1, t2, delta)) break;
    }
    SeparationSweepRow row;
    row.delta = delta;
    row.shift = 2 * s;
    for (int trial = 0; trial < config.trials; ++trial) {
      std::vector<Polynomial> cells;
      for (std::size_t c = 0; c < (std::size_t{1} << config.cell_bits); ++c) {
        const double a = ((rng() & 1) ? s : -s) + jitter(rng);
        std::vector<Term> terms{Term{MultiIndex{1}, a}};
        if (config.degree >= 2) terms.push_back(Term{MultiIndex{2}, jitter(rng)});
        cells.push_back(Polynomial::from_terms(1, config.degree, std::move(terms)));
      }
      LinearizingSymbol symbol(1, config.degree, config.cell_bits, std::move(cells));
      TileOperator op(family, symbol, kd, config.grid_bits);
      auto f = random_grid_function(rng, 1, config.grid_bits, config.grid_bits);
      auto g = random_grid_function(rng, 1, config.grid_bits, config.grid_bits);
      auto r = tree_inner_product_check(op, t1, t2, delta, f, g);
      row.mean_inner += std::abs(r.inner) / (f.l2_norm() * g.l2_norm());
      row.max_ratio = std::max(row.max_ratio, r.ratio);
    }
    row.mean_inner /= config.trials;
    out.max_ratio = std::max(out.max_ratio, row.max_ratio);
    if (row.mean_inner > 0) {
      xs.push_back(delta);
      ys.push_back(row.mean_inner);
    }
    out.rows.push_back(row);
  }
  out.exponent = xs.size() >= 2 ? loglog_slope(xs, ys) : 0.0;
  return out;
}

}  // namespace polycarl
