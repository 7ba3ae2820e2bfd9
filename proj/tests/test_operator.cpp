#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "polycarl/errors.hpp"
#include "polycarl/operator.hpp"

using namespace polycarl;

namespace {

Polynomial p(const char* text) { return parse_polynomial(text); }

// Planar quadratic windows are shrunk to keep the lattice small.
FamilyConfig config(int m, int d, int k_max) {
  FamilyConfig c;
  c.dim = m;
  c.degree = d;
  c.k_max = k_max;
  if (m * d > 2) c.bound_factor = 1.0;
  return c;
}

// Independent psi~ with the closed-form lobe ratios 1/2 (m=1) and 1/4 (m=2).
double oracle_psi_tilde(int m, double r) {
  auto b = [](double t) { return std::abs(t) < 1 ? (1 - t * t) * (1 - t * t) : 0.0; };
  const double alpha = m == 1 ? 0.5 : 0.25;
  return b(r - 3) - alpha * b((r - 6) / 2);
}

double max_abs_diff(const GridFunction& a, const GridFunction& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.values.size(); ++i) s = std::max(s, std::abs(a.values[i] - b.values[i]));
  return s;
}

}  // namespace

TEST_CASE("kernel decomposition") {
  for (int m = 1; m <= 3; ++m) {
    auto kd = build_psi(m, 4);
    CHECK(std::abs(kd.psi_tilde_integral()) < 1e-10);
    for (int k = 0; k <= 4; ++k) {
      const double l = std::ldexp(1.0, -k);
      CHECK(kd.psi(k, 2 * l) == 0.0);
      CHECK(kd.psi(k, 8 * l) == 0.0);
      CHECK(kd.psi(k, 1.5 * l) == 0.0);
      CHECK(kd.psi(k, 3 * l) > 0.0);
      CHECK(kd.psi(k, 6 * l) < 0.0);
    }
  }
  CHECK(build_psi(1, 0).mean_zero_coefficient() == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(build_psi(2, 0).mean_zero_coefficient() == doctest::Approx(0.25).epsilon(1e-14));
  for (int m = 1; m <= 2; ++m) {
    auto kd = build_psi(m, 6);
    double direct = 0;
    for (int k = 0; k <= 6; ++k) direct += std::pow(2.0, m * k) * oracle_psi_tilde(m, std::pow(2.0, k) * 0.3);
    CHECK(std::abs(kd.kernel(0.3) - direct) <= 1e-12 * std::max(1.0, std::abs(direct)));
  }
}

TEST_CASE("periodized kernel tables are mean zero") {
  auto kd = build_psi(2, 3);
  Grid g(2, 6);
  for (int k = 0; k <= 3; ++k) {
    auto t = kernel_table(kd, g, k);
    double s = 0, a = 0;
    for (double v : t.values) {
      s += v;
      a += std::abs(v);
    }
    CHECK(std::abs(s) <= 1e-12 * a);
    CHECK(std::abs(t.grid_alpha / kd.mean_zero_coefficient() - 1) < 0.05);
  }
}

TEST_CASE("grid too coarse and missing pieces are rejected") {
  auto fam = TileFamily::build(config(1, 1, 3));
  auto kd = build_psi(1, 3);
  auto sym = LinearizingSymbol::constant(p("m=1 d=1; 1*x1"));
  CHECK_THROWS_AS(TileOperator(fam, sym, kd, 5), InvalidInput);
  CHECK_THROWS_AS(TileOperator(fam, sym, build_psi(1, 2), 6), InvalidInput);
  CHECK_NOTHROW(TileOperator(fam, sym, kd, 6));
  CHECK_THROWS_AS(LinearizingSymbol(1, 1, 1, {p("m=1 d=1; 1*x1")}), InvalidInput);
  CHECK_THROWS_AS(LinearizingSymbol::constant(p("m=1 d=1; 1*x1; 2")), InvalidInput);
}

TEST_CASE("E(P) for a constant symbol and for a step symbol") {
  auto fam = TileFamily::build(config(1, 1, 3));
  auto kd = build_psi(1, 3);
  TileOperator op(fam, LinearizingSymbol::constant(p("m=1 d=1; 3*x1")), kd, 6);
  const auto tiles = fam.tiles();
  for (int k = 0; k <= 3; ++k) {
    double total = 0;
    for (std::size_t id = 0; id < tiles.size(); ++id) {
      if (tiles[id].scale() != k) continue;
      total += op.e_measure(id);
      auto e = op.e_set(id);
      if (e.empty()) continue;
      // The whole cube, and nothing else.
      CHECK(op.e_measure(id) == tiles[id].cube.volume());
      for (auto x : e) CHECK(tiles[id].cube.contains_point(op.grid().point(x)));
    }
    CHECK(total == 1.0);
  }

  // N(x) = 0 on [0, 1/2), 3 on [1/2, 1).
  LinearizingSymbol step(1, 1, 2, {Polynomial(1, 1), Polynomial(1, 1), p("m=1 d=1; 3*x1"), p("m=1 d=1; 3*x1")});
  TileOperator op2(fam, step, kd, 6);
  auto find = [&](int k, std::int64_t i, double c) {
    for (const auto& t : fam.net_of(DyadicCube(k, {i})).tiles())
      if (t.center_potential.coeff(MultiIndex{1}) == c) return fam.id_of(t);
    FAIL("missing tile");
    return std::size_t{0};
  };
  auto e0 = op2.e_set(find(0, 0, 0.0));
  auto e3 = op2.e_set(find(0, 0, 3.0));
  REQUIRE(e0.size() == 32);
  REQUIRE(e3.size() == 32);
  CHECK(e0.front() == 0);
  CHECK(e3.front() == 32);
  // At scale 1 the net on [1/2, 1) has spacing 2; 3 ties between 2 and 4.
  CHECK(op2.e_set(find(1, 1, 2.0)).size() == 32);
  CHECK(op2.e_set(find(1, 1, 4.0)).empty());
}

TEST_CASE("mean zero, support and linearity") {
  auto fam = TileFamily::build(config(1, 2, 2));
  auto kd = build_psi(1, 2);
  TileOperator zero_op(fam, LinearizingSymbol::constant(Polynomial(1, 2)), kd, 6);
  GridFunction one = GridFunction::zeros(1, 6);
  for (auto& v : one.values) v = 1.0;
  for (std::size_t id = 0; id < fam.tiles().size(); ++id)
    if (!zero_op.e_set(id).empty()) CHECK(zero_op.apply_T_P(id, one).sup_norm() <= 1e-8);

  std::mt19937_64 rng(71);
  auto sym = LinearizingSymbol::random(rng, fam.config().window(0), 3);
  TileOperator op(fam, sym, kd, 6);
  auto f = random_grid_function(rng, 1, 6, 4);
  auto g = random_grid_function(rng, 1, 6, 4);
  for (std::size_t id = 0; id < fam.tiles().size(); ++id) {
    auto e = op.e_set(id);
    if (e.empty()) continue;
    auto tf = op.apply_T_P(id, f);
    std::vector<char> in(tf.values.size(), 0);
    for (auto x : e) in[x] = 1;
    for (std::size_t x = 0; x < tf.values.size(); ++x)
      if (!in[x]) CHECK(tf.values[x] == 0.0);
    // Linearity.
    GridFunction h = f;
    for (std::size_t x = 0; x < h.values.size(); ++x) h.values[x] = 2.0 * f.values[x] - Complex(0, 3) * g.values[x];
    auto th = op.apply_T_P(id, h);
    auto tg = op.apply_T_P(id, g);
    double err = 0;
    for (std::size_t x = 0; x < h.values.size(); ++x)
      err = std::max(err, std::abs(th.values[x] - (2.0 * tf.values[x] - Complex(0, 3) * tg.values[x])));
    CHECK(err < 1e-12);
  }
  auto zero = GridFunction::zeros(1, 6);
  for (int k = 0; k <= 2; ++k) CHECK(op.apply_T_k(k, zero).sup_norm() == 0.0);
}

TEST_CASE("adjoint consistency") {
  for (int m = 1; m <= 2; ++m) {
    auto fam = TileFamily::build(config(m, 2, m == 1 ? 2 : 1));
    auto kd = build_psi(m, 2);
    std::mt19937_64 rng(73 + m);
    auto sym = LinearizingSymbol::random(rng, fam.config().window(0), 2);
    const int bits = m == 1 ? 6 : 4;
    TileOperator op(fam, sym, kd, bits);
    auto f = random_grid_function(rng, m, bits, bits);
    auto g = random_grid_function(rng, m, bits, bits);
    int checked = 0;
    for (std::size_t id = 0; id < fam.tiles().size(); ++id) {
      if (op.e_set(id).empty()) continue;
      Complex lhs = inner(op.apply_T_P(id, f), g);
      Complex rhs = inner(f, op.apply_T_P_adjoint(id, g));
      CHECK(std::abs(lhs - rhs) <= 1e-10 * f.l2_norm() * g.l2_norm());
      ++checked;
    }
    CHECK(checked > 0);
  }
}

TEST_CASE("adjoint support stays in the 17-fold dilate") {
  auto fam = TileFamily::build(config(1, 1, 5));
  auto kd = build_psi(1, 5);
  std::mt19937_64 rng(79);
  auto sym = LinearizingSymbol::random(rng, fam.config().window(0), 3);
  TileOperator op(fam, sym, kd, 8);
  auto g = random_grid_function(rng, 1, 8, 8);
  const auto tiles = fam.tiles();
  int checked = 0;
  for (std::size_t id = 0; id < tiles.size(); ++id) {
    if (tiles[id].scale() != 5 || op.e_set(id).empty()) continue;
    auto h = op.apply_T_P_adjoint(id, g);
    DilatedCube big{tiles[id].cube, 17.0};
    for (std::size_t y = 0; y < h.values.size(); ++y)
      if (!big.contains_point(op.grid().point(y))) CHECK(h.values[y] == 0.0);
    ++checked;
  }
  CHECK(checked > 10);
}

TEST_CASE("exact decomposition") {
  struct Case {
    int m, d, k, bits;
  };
  for (auto c : {Case{1, 1, 3, 6}, Case{1, 2, 3, 6}, Case{2, 2, 2, 5}}) {
    auto fam = TileFamily::build(config(c.m, c.d, c.k));
    auto kd = build_psi(c.m, c.k);
    std::mt19937_64 rng(83 + c.m * 10 + c.d);
    for (int trial = 0; trial < 3; ++trial) {
      auto sym = LinearizingSymbol::random(rng, fam.config().window(0), 2);
      TileOperator op(fam, sym, kd, c.bits);
      auto f = random_grid_function(rng, c.m, c.bits, c.bits);
      for (const auto& r : op.decomposition_check(f)) CHECK(r.residual <= 1e-12 * f.sup_norm());
      // Every grid point has exactly one owner per scale.
      for (int k = 0; k <= c.k; ++k) {
        std::size_t count = 0;
        for (std::size_t id = 0; id < fam.tiles().size(); ++id)
          if (fam.tiles()[id].scale() == k) count += op.e_set(id).size();
        CHECK(count == op.grid().size());
      }
    }
  }
}

TEST_CASE("modulation covariance") {
  auto fam = TileFamily::build(config(1, 1, 2));
  auto kd = build_psi(1, 2);
  std::mt19937_64 rng(89);
  auto window = FrequencyWindow::uniform(1, 1, 1.0, 1.0);
  auto sym = LinearizingSymbol::random(rng, window, 2);
  auto q0 = p("m=1 d=1; 2*x1");
  TileOperator a(fam, sym, kd, 6);
  TileOperator b(fam, sym.shifted(q0), kd, 6);
  auto f = random_grid_function(rng, 1, 6, 6);
  GridFunction fm = f;
  for (std::size_t x = 0; x < f.values.size(); ++x)
    fm.values[x] *= std::polar(1.0, q0.eval(a.grid().point(x)));
  for (int k = 0; k <= 2; ++k) {
    auto tk = a.apply_T_k(k, f);
    auto tkm = b.apply_T_k(k, fm);
    for (std::size_t x = 0; x < f.values.size(); ++x)
      CHECK(std::abs(tkm.values[x] - std::polar(1.0, q0.eval(a.grid().point(x))) * tk.values[x]) < 1e-10);
  }
  int checked = 0;
  for (std::size_t id = 0; id < fam.tiles().size(); ++id) {
    auto e = a.e_set(id);
    if (e.empty()) continue;
    const int k = fam.tiles()[id].scale();
    std::size_t shifted = b.owner(k, e.front());
    auto eb = b.e_set(shifted);
    if (!std::equal(e.begin(), e.end(), eb.begin(), eb.end())) continue;
    auto t = a.apply_T_P(id, f);
    auto tm = b.apply_T_P(shifted, fm);
    for (std::size_t x = 0; x < f.values.size(); ++x)
      CHECK(std::abs(tm.values[x] - std::polar(1.0, q0.eval(a.grid().point(x))) * t.values[x]) < 1e-10);
    ++checked;
  }
  CHECK(checked > 0);
}

TEST_CASE("interaction") {
  auto fam = TileFamily::build(config(1, 1, 6));
  auto kd = build_psi(1, 6);
  std::mt19937_64 rng(97);
  auto sym = LinearizingSymbol::random(rng, fam.config().window(0), 5);
  TileOperator op(fam, sym, kd, 9);
  auto f = random_grid_function(rng, 1, 9, 9);
  const auto tiles = fam.tiles();
  std::vector<std::size_t> fine;
  for (std::size_t id = 0; id < tiles.size(); ++id)
    if (tiles[id].scale() == 6 && !op.e_set(id).empty()) fine.push_back(id);
  REQUIRE(fine.size() > 4);
  // Same tile: bracket 1, finite ratio.
  auto self = op.interaction(fine[0], fine[0], f);
  CHECK(self.cubes_meet);
  CHECK(std::isfinite(self.ratio));
  CHECK(self.lhs > 0);
  // Cubes farther apart than 16 side lengths cannot interact.
  int far = 0;
  for (auto a : fine) {
    for (auto b : fine) {
      auto ca = tiles[a].cube.center(), cb = tiles[b].cube.center();
      if (torus_distance(ca, cb) <= 17.0 / 64.0) continue;
      auto r = op.interaction(a, b, f);
      CHECK(r.lhs == 0.0);
      CHECK_FALSE(r.cubes_meet);
      if (++far > 20) break;
    }
    if (far > 20) break;
  }
  CHECK(far > 0);
  // Kernel form agrees with the composed operators.
  auto x = op.e_set(fine[1]).front();
  Complex direct = 0;
  for (auto s : op.e_set(fine[1])) direct += op.interaction_kernel(fine[1], fine[1], x, s) * f.values[s];
  direct *= op.grid().weight();
  auto composed = op.apply_T_P(fine[1], op.apply_T_P_adjoint(fine[1], f));
  CHECK(std::abs(direct - composed.values[x]) < 1e-10);
}

TEST_CASE("grid function fixture format") {
  std::mt19937_64 rng(101);
  auto f = random_grid_function(rng, 2, 3, 2, 1);
  std::stringstream ss;
  write_grid_function(ss, f);
  const std::string bytes = ss.str();
  REQUIRE(bytes.size() == 12 + 64 * 16);
  CHECK(bytes[0] == 2);
  CHECK(bytes[4] == 3);
  CHECK(bytes[8] == 1);
  std::stringstream back(bytes);
  auto g = read_grid_function(back);
  CHECK(g.dim == 2);
  CHECK(g.bits == 3);
  CHECK(g.k_max == 1);
  CHECK(max_abs_diff(f, g) == 0.0);
  std::stringstream cut(bytes.substr(0, 100));
  CHECK_THROWS_AS(read_grid_function(cut), InvalidInput);
}
