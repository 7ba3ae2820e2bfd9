#include <Eigen/Dense>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "polycarl/errors.hpp"
#include "polycarl/massforest.hpp"

using namespace polycarl;

namespace {

FamilyConfig line(int k_max, double bound = 0) {
  FamilyConfig c;
  c.dim = 1;
  c.degree = 1;
  c.k_max = k_max;
  if (bound > 0) c.bound_override = {bound};
  return c;
}

std::vector<std::size_t> all_ids(const TileFamily& f) {
  std::vector<std::size_t> ids(f.tiles().size());
  std::iota(ids.begin(), ids.end(), 0);
  return ids;
}

double slope_of(const Tile& t) { return t.center_potential.coeff(MultiIndex{1}); }

// Tile on `cube` whose slope is nearest to c.
std::size_t find_tile(const TileFamily& f, const DyadicCube& cube, double c) {
  const Tile* best = nullptr;
  for (const auto& t : f.net_of(cube).tiles())
    if (!best || std::abs(slope_of(t) - c) < std::abs(slope_of(*best) - c)) best = &t;
  REQUIRE(best != nullptr);
  return f.id_of(*best);
}

// Delta(10P, 10P') on the line for I ⊆ I' with 3I shorter than the torus.
double chain_weight(const Tile& p, const Tile& q, int n) {
  const double l = p.cube.side(), lq = q.cube.side();
  const double delta = std::max(0.0, 3 * l * std::abs(slope_of(p) - slope_of(q)) - 15 - 15 * l / lq);
  return std::pow(1.0 / (1.0 + delta), n);
}

}  // namespace

TEST_CASE("mass of a single tile and the unit bound") {
  auto fam = TileFamily::build(line(2));
  std::mt19937_64 rng(5);
  TileOperator op(fam, LinearizingSymbol::random(rng, fam.config().window(0), 3), build_psi(1, 2), 5);
  MassEngine engine(op);
  const DyadicCube torus = DyadicCube::unit(1);
  for (std::size_t id = 0; id < fam.tiles().size(); ++id) {
    const std::size_t only[] = {id};
    auto self = engine.mass(id, std::span(&torus, 1), only);
    CHECK(self.value == engine.density(id));
    CHECK(self.witness == id);
    auto full = engine.mass(id, std::span(&torus, 1));
    CHECK(full.value <= 1.0);
    CHECK(full.value >= self.value);
    CHECK(contains(fam.tiles()[full.witness].cube, fam.tiles()[id].cube));
  }
  const DyadicCube half(1, {0});
  CHECK_THROWS_AS(engine.mass(find_tile(fam, DyadicCube(1, {1}), 0.0), std::span(&half, 1)), InvalidInput);
}

TEST_CASE("three-tile chain against enumeration") {
  // A wide window so the bracket weights are not all 1.
  auto fam = TileFamily::build(line(2, 64));
  const auto tiles = fam.tiles();
  const std::size_t p = find_tile(fam, DyadicCube(2, {1}), 0.0);
  const std::size_t q = find_tile(fam, DyadicCube(1, {0}), 40.0);
  const std::size_t r = find_tile(fam, DyadicCube(0, {0}), -30.0);
  for (int n : {1, 4, 10}) {
    for (auto [cp, cq, cr] : {std::tuple{0.0, 40.0, -30.0}, std::tuple{1.0, 40.0, -30.0}, std::tuple{40.0, 0.0, -30.0}}) {
      // Symbol cells (quarters of the torus) pick slopes so densities differ.
      std::vector<Polynomial> cells;
      for (double c : {cq, cp, cr, cr}) cells.push_back(Polynomial::monomial(1, 1, MultiIndex{1}, c));
      TileOperator op(fam, LinearizingSymbol(1, 1, 2, cells), build_psi(1, 2), 5);
      MassEngine engine(op, n);
      const std::size_t chain[] = {p, q, r};
      const DyadicCube torus = DyadicCube::unit(1);
      double expect = 0;
      std::size_t witness = p;
      for (auto id : chain) {
        const double v = engine.density(id) * (id == p ? 1.0 : chain_weight(tiles[p], tiles[id], n));
        if (v > expect) {
          expect = v;
          witness = id;
        }
      }
      auto got = engine.mass(p, std::span(&torus, 1), chain);
      CHECK(got.value == doctest::Approx(expect).epsilon(1e-12));
      CHECK(got.witness == witness);
      // The ambient cube [0, 1/2) drops the scale-0 candidate.
      const DyadicCube half(1, {0});
      double local = std::max(engine.density(p), engine.density(q) * chain_weight(tiles[p], tiles[q], n));
      CHECK(engine.mass(p, std::span(&half, 1), chain).value == doctest::Approx(local).epsilon(1e-12));
    }
  }
}

TEST_CASE("zk mass") {
  auto fam = TileFamily::build(line(1));
  const auto tiles = fam.tiles();
  const std::size_t p = find_tile(fam, DyadicCube(1, {0}), 2.0);
  TileOperator op(fam, LinearizingSymbol::constant(tiles[p].center_potential), build_psi(1, 1), 5);
  auto grid = lambda_grid();
  CHECK(grid.size() == 41);
  CHECK(grid.front() == 1.0);
  CHECK(grid.back() == 1024.0);
  CHECK(dilated_e_measure(op, p, 1.0) == tiles[p].cube.volume());
  CHECK(zk_mass(op, p, 10, grid) == 1.0);
  double prev = 0;
  for (double lam : grid) {
    const std::size_t far = find_tile(fam, DyadicCube(0, {0}), -4.0);
    double e = dilated_e_measure(op, far, lam);
    CHECK(e >= prev);
    prev = e;
  }
  const double below[] = {0.5};
  CHECK_THROWS_AS(zk_mass(op, p, 10, below), InvalidInput);

  // Frequency farther than the largest ball: nothing for any lambda.
  auto wide = TileFamily::build(line(0, 1100));
  const std::size_t origin = find_tile(wide, DyadicCube::unit(1), 0.0);
  const std::size_t edge = find_tile(wide, DyadicCube::unit(1), 1100.0);
  TileOperator wop(wide, LinearizingSymbol::constant(wide.tiles()[origin].center_potential), build_psi(1, 0), 4);
  CHECK(zk_mass(wop, edge, 10, grid) == 0.0);
  CHECK(zk_mass(wop, origin, 10, grid) == 1.0);
}

TEST_CASE("monotonicity counterexample") {
  auto fam = TileFamily::build(line(2));
  OrderOracle order(fam, order_universe(fam.config()));
  auto symbols = coarse_concentrated_symbols(fam);
  CHECK(symbols.size() == fam.net_of(DyadicCube::unit(1)).tiles().size());
  auto kd = build_psi(1, 2);
  auto found = monotonicity_violation_search(fam, order, symbols, kd, 5);
  REQUIRE(found.witness.has_value());
  const auto& w = *found.witness;
  const auto tiles = fam.tiles();
  CHECK(order.leq(w.fine, w.coarse));
  CHECK(tiles[w.fine].scale() > tiles[w.coarse].scale());
  CHECK(w.zk_fine < w.zk_coarse - 1e-9);
  CHECK(w.mass_fine >= w.mass_coarse);
  MESSAGE("fine " << format_cube(tiles[w.fine].cube) << " slope " << slope_of(tiles[w.fine]) << " coarse "
                  << format_cube(tiles[w.coarse].cube) << " slope " << slope_of(tiles[w.coarse]) << " zk "
                  << w.zk_fine << " < " << w.zk_coarse);

  // Same instance, doubled lambda density.
  TileOperator op(fam, symbols[w.symbol], kd, 5);
  auto coarse = lambda_grid(4, 41), fine = lambda_grid(8, 81);
  for (auto id : {w.fine, w.coarse}) {
    const double a = zk_mass(op, id, 10, coarse), b = zk_mass(op, id, 10, fine);
    CHECK(std::abs(b - a) <= 0.05 * std::max(a, b));
  }

  // A symbol inside the fine tile's own ball: no violation for that pair.
  TileOperator own(fam, LinearizingSymbol::constant(tiles[w.fine].center_potential), kd, 5);
  auto g = lambda_grid();
  CHECK(zk_mass(own, w.fine, 10, g) >= zk_mass(own, w.coarse, 10, g));

  auto big = TileFamily::build(line(3, 64));
  REQUIRE(big.tiles().size() > 200);
  OrderOracle big_order(big, order_universe(big.config()));
  CHECK_THROWS_AS(monotonicity_violation_search(big, big_order, symbols, build_psi(1, 3), 6), ResourceLimit);
}

TEST_CASE("cube collection relations") {
  const DyadicCube unit = DyadicCube::unit(1);
  const DyadicCube l(1, {0}), r(1, {1}), ll(2, {0}), lr(2, {1});
  std::vector<DyadicCube> a{ll}, b{l, r}, top{unit};
  CHECK(strongly_nested(a, b));
  CHECK(dominated(a, b));
  CHECK(strongly_nested(b, top));
  CHECK(domination_constant(a, top) == doctest::Approx(std::log(4.0)));
  CHECK(domination_constant(std::vector<DyadicCube>{ll, lr}, b) == doctest::Approx(0.0));
  CHECK(domination_constant(std::vector<DyadicCube>{ll, lr}, std::vector<DyadicCube>{r}) == -1.0);
  CHECK(std::isinf(domination_constant(std::vector<DyadicCube>{}, b)));
  // [0, 1/2) meets [0, 1/4) but is not inside it.
  CHECK_FALSE(strongly_nested(std::vector<DyadicCube>{l}, std::vector<DyadicCube>{ll, r}));
  CHECK(maximal_cubes({ll, l, lr, r, ll}) == std::vector<DyadicCube>{l, r});
}

namespace {

struct StoppingFixture {
  TileFamily family = TileFamily::build(line(3));
  OrderOracle order{family, order_universe(family.config())};
  KernelDecomposition kd = build_psi(1, 3);
  std::vector<std::size_t> ids = all_ids(family);

  TileOperator op(std::uint64_t seed) const {
    std::mt19937_64 rng(seed);
    return TileOperator(family, LinearizingSymbol::random(rng, family.config().window(0), 3), kd, 6);
  }
};

}  // namespace

TEST_CASE("stopping on small inputs") {
  StoppingFixture fx;
  auto op = fx.op(1);
  MassEngine engine(op);
  auto empty = run_stopping(engine, fx.order, std::span<const std::size_t>{});
  CHECK(empty.partition.levels.empty());
  CHECK(empty.report.pass());

  std::size_t id = 0;
  while (engine.density(id) == 0) ++id;
  const std::size_t one[] = {id};
  auto single = stopping_partition(engine, fx.order, one, 4.0);
  REQUIRE(single.levels.size() == 1);
  const int n = single.levels[0].n;
  CHECK(engine.density(id) > std::ldexp(1.0, -n));
  CHECK(engine.density(id) <= std::ldexp(1.0, 1 - n));
  CHECK(single.levels[0].tiles[0] == std::vector<std::size_t>{id});
  CHECK(check_contract(single, engine, fx.order, one).pass());

  std::size_t zero = 0;
  while (zero < fx.ids.size() && engine.density(zero) > 0) ++zero;
  if (zero < fx.ids.size()) {
    const std::size_t bad[] = {zero};
    CHECK_THROWS_AS(stopping_partition(engine, fx.order, bad, 4.0), InvalidInput);
  }
  CHECK_THROWS_AS(stopping_partition(engine, fx.order, one, 4.0, 3), InvalidInput);
}

TEST_CASE("counting function") {
  auto fam = TileFamily::build(line(2));
  const std::size_t a = find_tile(fam, DyadicCube::unit(1), 0.0);
  const std::size_t b = find_tile(fam, DyadicCube(1, {0}), 0.0);
  const std::size_t c = find_tile(fam, DyadicCube(2, {3}), 0.0);
  const std::size_t ids[] = {a, b, c};
  CHECK(counting_sup(fam, ids) == 2.0);
  const std::size_t two[] = {b, c};
  CHECK(counting_sup(fam, two) == 1.0);
}

TEST_CASE("stopping contract on random symbols") {
  StoppingFixture fx;
  int decay_failures = 0;
  for (std::uint64_t seed = 100; seed < 110; ++seed) {
    auto op = fx.op(seed);
    MassEngine engine(op);
    auto res = run_stopping(engine, fx.order, fx.ids);
    CAPTURE(seed);
    CHECK(res.report.pass());
    CHECK_FALSE(res.flagged);
    CHECK(res.report.bullet("counting_bound").fitted_constant <= 8.0);
    CHECK(res.report.bullets.size() == 6);

    // Independent checks: every tile once, mass inside its bracket.
    std::vector<int> seen(fx.ids.size(), 0);
    for (const auto& level : res.partition.levels)
      for (std::size_t k = 0; k < level.tiles.size(); ++k)
        for (auto id : level.tiles[k]) {
          ++seen[id];
          const double v = engine.mass(id, level.cubes[k], fx.ids).value;
          CHECK(v > std::ldexp(1.0, -level.n));
          CHECK(v <= std::ldexp(1.0, 1 - level.n));
        }
    CHECK(std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; }));

    auto loose = stopping_partition(engine, fx.order, fx.ids, 1.0);
    if (!check_contract(loose, engine, fx.order, fx.ids).bullet("level_decay").pass) ++decay_failures;
    StoppingConfig cfg;
    cfg.c0 = 1.0;
    auto retried = run_stopping(engine, fx.order, fx.ids, cfg);
    CHECK(retried.report.pass());
    CHECK(retried.partition.c0 >= 1.0);
  }
  // A threshold this low lets children cover their parents.
  CHECK(decay_failures > 0);
}

TEST_CASE("trees and rows") {
  auto fam = TileFamily::build(line(2));
  const auto tiles = fam.tiles();
  const auto ids = all_ids(fam);
  const std::size_t top = find_tile(fam, DyadicCube::unit(1), 0.0);
  Tree t = build_tree(fam, top, ids);
  CHECK(std::count(t.members.begin(), t.members.end(), top) == 1);
  CHECK(t.members.size() > 1);
  for (auto id : ids) {
    const bool in = std::binary_search(t.members.begin(), t.members.end(), id);
    CHECK(in == (id == top || dilated_sq_ball_sufficient(tiles[id], 2.0, tiles[top], 2.0)));
  }
  CHECK(is_normal(fam, t));

  // Top on [0, 1/2): a member on [1/4, 1/2) touches the edge.
  const std::size_t half = find_tile(fam, DyadicCube(1, {0}), 0.0);
  const std::size_t edge = find_tile(fam, DyadicCube(2, {1}), 0.0);
  Tree small{half, {half, edge}};
  CHECK_FALSE(is_normal(fam, small));
  CHECK(is_normal(fam, small, 1.0));
  CHECK(is_normal(fam, Tree{half, {half}}, 1.0));
  CHECK_FALSE(is_normal(fam, Tree{half, {half}}, 3.0));

  const std::size_t other = find_tile(fam, DyadicCube(1, {1}), 0.0);
  CHECK(is_row(fam, Row{{Tree{half, {half}}, Tree{other, {other}}}}, 1.0));
  CHECK_FALSE(is_row(fam, Row{{Tree{half, {half}}, Tree{half, {half}}}}, 1.0));
  CHECK(row_tiles(Row{{Tree{half, {half, edge}}, Tree{other, {other, half}}}}) ==
        std::vector<std::size_t>{std::min(half, other), std::max(half, other), edge});
}

TEST_CASE("separation against the pair formula") {
  auto fam = TileFamily::build(line(2, 64));
  const auto tiles = fam.tiles();
  const auto ids = all_ids(fam);
  const DyadicCube unit = DyadicCube::unit(1);
  const std::size_t a = find_tile(fam, unit, 0.0);
  Tree ta = build_tree(fam, a, ids);
  CHECK_FALSE(separated(fam, ta, ta, 0.5));
  Tree left{find_tile(fam, DyadicCube(1, {0}), 0.0), {}};
  Tree right{find_tile(fam, DyadicCube(1, {1}), 0.0), {}};
  left.members = {left.top};
  right.members = {right.top};
  CHECK(separated(fam, left, right, 1e-6));

  auto one_side = [&](const Tree& from, std::size_t to, double delta) {
    for (auto id : from.members) {
      const double d = tiles[id].cube.side() * std::abs(slope_of(tiles[id]) - slope_of(tiles[to]));
      if (1.0 / (1.0 + d) >= delta) return false;
    }
    return true;
  };
  int agree = 0, yes = 0;
  for (double shift : {2.0, 8.0, 16.0, 32.0, 60.0}) {
    const std::size_t b = find_tile(fam, unit, shift);
    Tree tb = build_tree(fam, b, ids);
    for (double delta : {0.5, 0.25, 0.1, 0.02}) {
      const bool expect = one_side(ta, b, delta) && one_side(tb, a, delta);
      const bool got = separated(fam, ta, tb, delta, 1.0);
      CHECK(got == expect);
      agree += got == expect;
      yes += got;
    }
  }
  CHECK(agree == 20);
  CHECK(yes > 0);
  CHECK(yes < 20);
}

namespace {

// Two trees on the unit cube with tops near -s and +s, separated at delta.
std::pair<Tree, Tree> separated_pair(const TileFamily& fam, double delta) {
  const auto ids = all_ids(fam);
  const DyadicCube unit = DyadicCube::unit(1);
  for (double s = 1; s <= 60; s += 1) {
    Tree a = build_tree(fam, find_tile(fam, unit, -s), ids);
    Tree b = build_tree(fam, find_tile(fam, unit, s), ids);
    if (separated(fam, a, b, delta)) return {a, b};
  }
  FAIL("no separated pair at delta " << delta);
  return {};
}

}  // namespace

TEST_CASE("tree inner products") {
  auto fam = TileFamily::build(line(2, 64));
  const DyadicCube unit = DyadicCube::unit(1);
  std::mt19937_64 rng(17);
  // The symbol sits near both tops on alternate cells.
  auto [t1, t2] = separated_pair(fam, 0.25);
  const auto tiles = fam.tiles();
  std::vector<Polynomial> cells;
  for (int c = 0; c < 8; ++c)
    cells.push_back(tiles[c % 2 ? t2.top : t1.top].center_potential);
  TileOperator op(fam, LinearizingSymbol(1, 1, 3, cells), build_psi(1, 2), 7);
  auto f = random_grid_function(rng, 1, 7, 4);
  auto g = random_grid_function(rng, 1, 7, 4);

  auto r = tree_inner_product_check(op, t1, t2, 0.25, f, g);
  CHECK(std::isfinite(r.ratio));
  const Complex direct = inner(apply_tiles_adjoint(op, t1.members, f), apply_tiles_adjoint(op, t2.members, g));
  CHECK(std::abs(r.inner - direct) <= 1e-12 * f.l2_norm() * g.l2_norm());
  CHECK(std::abs(tree_inner_product_check(op, t1, Tree{t2.top, {}}, 0.25, f, g).inner) == 0.0);
  CHECK(tree_inner_product_check(op, t1, t2, 0.25, GridFunction::zeros(1, 7), g).ratio == 0.0);
  CHECK_THROWS_AS(tree_inner_product_check(op, t1, t1, 0.25, f, g), InvalidInput);
  CHECK_THROWS_AS(tree_inner_product_check(op, t1, t2, 0.0, f, g), InvalidInput);

  // A one-tree row gives the same pairing.
  auto rt = row_tree_check(op, Row{{t2}}, t1, 0.25, f, g);
  CHECK(std::abs(rt.inner - r.inner) <= 1e-12 * f.l2_norm() * g.l2_norm());
  const std::size_t half = find_tile(fam, DyadicCube(1, {0}), 0.0);
  Tree low{half, {half}};
  CHECK_THROWS_AS(row_tree_check(op, Row{{t2}}, low, 0.25, f, g), InvalidInput);
  CHECK_THROWS_AS(row_tree_check(op, Row{{t1}}, t1, 0.25, f, g), InvalidInput);
  (void)unit;
}

TEST_CASE("separated tree sweep") {
  std::vector<double> deltas;
  for (int j = 2; j <= 8; ++j) deltas.push_back(std::ldexp(1.0, -j));
  for (int d : {1, 2}) {
    SeparationSweepConfig cfg;
    cfg.degree = d;
    auto sweep = separated_tree_sweep(deltas, cfg);
    CAPTURE(d);
    REQUIRE(sweep.rows.size() == deltas.size());
    CHECK(sweep.exponent >= 1.0 / (2 * d) - 0.2);
    CHECK(sweep.max_ratio <= 1.0);
    for (const auto& row : sweep.rows) CHECK(row.max_ratio <= sweep.max_ratio);
    MESSAGE("d=" << d << " exponent " << sweep.exponent << " max ratio " << sweep.max_ratio);
  }
  const double bad[] = {1.5};
  CHECK_THROWS_AS(separated_tree_sweep(bad), InvalidInput);
}

namespace {

// Dense matrix of a grid map on the basis of point masses.
Eigen::MatrixXcd dense(const GridMap& a, int bits) {
  const std::size_t n = std::size_t{1} << bits;
  Eigen::MatrixXcd out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    auto e = GridFunction::zeros(1, bits);
    e.values[i] = 1.0;
    auto col = a(e);
    for (std::size_t r = 0; r < n; ++r) out(r, i) = col.values[r];
  }
  return out;
}

}  // namespace

TEST_CASE("row orthogonality and power norms") {
  auto fam = TileFamily::build(line(2));
  std::mt19937_64 rng(23);
  TileOperator op(fam, LinearizingSymbol::random(rng, fam.config().window(0), 3), build_psi(1, 2), 6);
  const auto ids = all_ids(fam);
  const std::size_t l = find_tile(fam, DyadicCube(1, {0}), 0.0);
  const std::size_t r = find_tile(fam, DyadicCube(1, {1}), 0.0);
  auto inside = [&](std::size_t top) {
    std::vector<std::size_t> c;
    for (auto id : ids)
      if (contains(fam.tiles()[top].cube, fam.tiles()[id].cube)) c.push_back(id);
    return build_tree(fam, top, c);
  };
  const Row rows[] = {Row{{inside(l)}}, Row{{inside(r)}}};
  auto rep = forest_rows_orthogonality_check(op, rows);
  CHECK(rep.pairs.size() == 2);
  CHECK(rep.pass);
  CHECK(rep.max_star_first <= 1e-10);

  const auto tl = row_tiles(rows[0]);
  GridMap a = [&](const GridFunction& f) { return apply_tiles(op, tl, f); };
  GridMap at = [&](const GridFunction& f) { return apply_tiles_adjoint(op, tl, f); };
  const double sigma = Eigen::JacobiSVD<Eigen::MatrixXcd>(dense(a, 6)).singularValues()(0);
  REQUIRE(sigma > 0);
  CHECK(power_norm(a, at, 1, 6) == doctest::Approx(sigma).epsilon(1e-4));
  GridMap ata = [&](const GridFunction& f) { return at(a(f)); };
  CHECK(power_norm(ata, ata, 1, 6) == doctest::Approx(sigma * sigma).epsilon(1e-4));

  GridMap zero = [](const GridFunction& f) { return GridFunction::zeros(f.dim, f.bits); };
  CHECK(power_norm(zero, zero, 1, 4) == 0.0);
}

TEST_CASE("mass decay report") {
  StoppingFixture fx;
  auto op = fx.op(104);
  MassEngine engine(op);
  auto res = run_stopping(engine, fx.order, fx.ids);
  std::mt19937_64 rng(29);
  auto f = random_grid_function(rng, 1, 6, 3);
  auto decay = main_proposition_decay(op, res.partition, f);
  REQUIRE(decay.n.size() == res.partition.levels.size());
  CHECK(decay.ratio.size() == decay.n.size());
  CHECK(std::is_sorted(decay.n.begin(), decay.n.end()));
  for (double x : decay.ratio) CHECK(x >= 0);
  MESSAGE("eta " << decay.eta);
  CHECK_THROWS_AS(main_proposition_decay(op, res.partition, GridFunction::zeros(1, 6)), InvalidInput);
}
