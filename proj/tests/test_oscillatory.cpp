#include <cmath>
#include <cstring>
#include <numbers>
#include <random>

#include "doctest.h"
#include "polycarl/errors.hpp"
#include "polycarl/geometry.hpp"
#include "polycarl/oscillatory.hpp"
#include "test_support.hpp"

using namespace polycarl;

namespace {

Polynomial p(const char* text) { return parse_polynomial(text); }

Domain unit_box(int m, double lo = -1.0, double hi = 1.0) {
  return Domain::make_box(Box{std::vector<double>(m, lo), std::vector<double>(m, hi)});
}

}  // namespace

TEST_CASE("zero phase integrates the bump") {
  for (int m = 1; m <= 3; ++m) {
    auto phi = BumpFunction::product(std::vector<double>(m, 0.1), 0.7);
    auto r = osc_integral(Polynomial(m, 1), phi, unit_box(m));
    CHECK(std::abs(r.value.real() - phi.integral()) < 1e-8);
    CHECK(std::abs(r.value.imag()) < 1e-15);
  }
  // Radial: 16/15 r on the line, pi r^2 / 3 in the plane.
  auto r1 = BumpFunction::radial({0.0}, 0.5);
  CHECK(r1.integral() == doctest::Approx(16.0 / 15.0 * 0.5).epsilon(1e-14));
  CHECK(std::abs(osc_integral(Polynomial(1, 1), r1, unit_box(1)).value.real() - r1.integral()) < 1e-8);
  auto r2 = BumpFunction::radial({0.0, 0.0}, 0.9);
  CHECK(r2.integral() == doctest::Approx(std::numbers::pi * 0.81 / 3.0).epsilon(1e-14));
  auto polar = osc_integral(Polynomial(2, 1), r2, Domain::make_ball({0.0, 0.0}, 0.9));
  CHECK(std::abs(polar.value.real() - r2.integral()) < 1e-8);
}

TEST_CASE("bump norms") {
  auto r = BumpFunction::radial({0.0, 0.0}, 0.5);
  // Brute-force gradient magnitude along a ray.
  double best = 0;
  for (int i = 1; i < 20000; ++i) {
    double t = 0.5 * i / 20000.0, h = 1e-7;
    double g = (r(std::vector<double>{t + h, 0.0}) - r(std::vector<double>{t - h, 0.0})) / (2 * h);
    best = std::max(best, std::abs(g));
  }
  CHECK(r.sup_grad() == doctest::Approx(best).epsilon(1e-6));
  CHECK(r.c1_norm() >= std::max(r.sup(), r.sup_grad()));
  auto pr = BumpFunction::product({0.0, 0.0}, 0.5);
  CHECK(pr.sup_grad() >= best);
  CHECK_THROWS_AS(BumpFunction::radial({0.0}, 0.0), InvalidInput);
}

TEST_CASE("linear phase matches a 16x finer reference") {
  auto phi = BumpFunction::product({0.0}, 1.0);
  auto q = p("m=1 d=1; 100*x1");
  auto omega = unit_box(1, -0.5, 0.25);
  auto r = osc_integral(q, phi, omega);
  QuadratureSpec fine;
  fine.radians_per_panel /= 16;
  fine.min_panels *= 16;
  auto ref = osc_integral(q, phi, omega, fine);
  CHECK(std::abs(r.value - ref.value) <= 1e-6 * std::abs(ref.value));
  CHECK_FALSE(r.flagged);
  // Closed form over the whole support: 16 ((3 - l^2) sin l - 3 l cos l) / l^5.
  const double l = 100.0;
  double exact = 16.0 * ((3 - l * l) * std::sin(l) - 3 * l * std::cos(l)) / std::pow(l, 5);
  auto whole = osc_integral(q, phi, unit_box(1));
  CHECK(std::abs(whole.value.real() - exact) <= 1e-10 * std::abs(exact));
  CHECK(std::abs(whole.value.imag()) < 1e-14);
}

TEST_CASE("conjugation symmetry") {
  std::mt19937_64 rng(53);
  for (int i = 0; i < 20; ++i) {
    int m = 1 + i % 2;
    auto q = polycarl::testing::random_polynomial(rng, m, 1 + i % 3, 20.0);
    auto phi = BumpFunction::radial(std::vector<double>(m, 0.0), 0.8);
    auto a = osc_integral(q, phi, unit_box(m));
    auto b = osc_integral(-q, phi, unit_box(m));
    CHECK(std::abs(a.value - std::conj(b.value)) < 1e-14);
  }
}

TEST_CASE("separable and tensor paths agree") {
  auto phi = BumpFunction::product({0.0, 0.0}, 1.0 / std::sqrt(2.0));
  auto omega = unit_box(2, -0.5, 0.25);
  for (const char* text : {"m=2 d=2; 50*x1^2; 50*x2^2", "m=2 d=3; 30*x1^3; -7*x2; 2*x1"}) {
    auto q = p(text);
    auto fast = osc_integral(q, phi, omega);
    QuadratureSpec slow;
    slow.allow_separable = false;
    auto full = osc_integral(q, phi, omega, slow);
    CHECK(fast.separable);
    CHECK_FALSE(full.separable);
    CHECK(std::abs(fast.value - full.value) < 1e-10);
  }
  CHECK_FALSE(is_separable(p("m=2 d=2; 1*x1*x2")));
}

TEST_CASE("quadrature error shrinks under refinement") {
  std::mt19937_64 rng(59);
  for (int i = 0; i < 10; ++i) {
    auto q = polycarl::testing::random_polynomial(rng, 1, 3, 10.0);
    auto phi = BumpFunction::product({0.0}, 1.0);
    double prev = INFINITY;
    for (int panels : {1, 2, 4, 8, 16}) {
      QuadratureSpec s;
      s.min_panels = panels;
      s.radians_per_panel = 1e9;
      s.refinement_levels = 0;
      auto r = osc_integral(q, phi, unit_box(1, -0.5, 0.25), s);
      CHECK((r.error <= prev || r.error < 1e-13));
      prev = r.error;
    }
  }
}

TEST_CASE("flagging and budgets") {
  QuadratureSpec tight;
  tight.tolerance = 0.0;
  tight.refinement_levels = 0;
  auto r = osc_integral(p("m=1 d=2; 5*x1^2"), BumpFunction::product({0.0}, 1.0), unit_box(1), tight);
  CHECK(r.flagged);
  QuadratureSpec small;
  small.point_budget = 1000;
  small.allow_separable = false;
  CHECK_THROWS_AS(osc_integral(p("m=2 d=2; 5*x1^2"), BumpFunction::product({0.0, 0.0}, 1.0), unit_box(2), small),
                  ResourceLimit);
  CHECK_THROWS_AS(osc_integral(p("m=2 d=2; 5*x1^2"), BumpFunction::product({0.0}, 1.0), unit_box(2)),
                  InvalidInput);
}

TEST_CASE("van der Corput decay") {
  for (int m = 1; m <= 2; ++m) {
    for (int d = 1; d <= 3; ++d) {
      auto rep = vdc_monomial_family(m, d);
      MESSAGE("m=" << m << " d=" << d << " slope=" << rep.slope << " max_ratio=" << rep.max_ratio);
      CHECK(rep.slope <= -1.0 / d + 0.1);
      CHECK(rep.flagged == 0);
      CHECK(rep.rows.front().s == doctest::Approx(10.0));
      CHECK(rep.rows.back().s == doctest::Approx(1e4));
    }
  }
  auto a = vdc_monomial_family(2, 2, 49, 10, 1e4);
  auto b = vdc_monomial_family(2, 2, 49, 20, 2e4);
  CHECK(std::isfinite(a.max_ratio));
  CHECK(std::abs(b.max_ratio / a.max_ratio - 1.0) <= 0.2);
}

TEST_CASE("level set measures") {
  auto lin = level_set_measure(p("m=1 d=1; 1*x1"), 0.1);
  CHECK(std::abs(lin.measure - 0.2) <= lin.half_width);
  for (double eps : {0.1, 0.01}) {
    auto sq = level_set_measure(p("m=1 d=2; 1*x1^2"), eps);
    CHECK(std::abs(sq.measure - 2 * std::sqrt(eps)) <= sq.half_width);
  }
  for (int d = 1; d <= 3; ++d) {
    MultiIndex b{d};
    auto fit = level_set_exponent(Polynomial::monomial(1, d, b, 1.0));
    MESSAGE("d=" << d << " exponent=" << fit.exponent);
    CHECK(std::abs(fit.exponent - 1.0 / d) <= 0.05);
  }
  auto q = p("m=2 d=2; 1*x1^2; -0.5*x1*x2");
  auto a = level_set_measure(q, 0.05, 20000, 7);
  auto b = level_set_measure(q, 0.05, 20000, 7);
  CHECK(a.hits == b.hits);
  CHECK(std::memcmp(&a.measure, &b.measure, sizeof(double)) == 0);
  CHECK(level_set_measure(q, 0.05, 20000, 8).hits != a.hits);
}

TEST_CASE("adapted bumps") {
  DyadicCube cube(2, {1});
  auto phi = adapted_bump(cube);
  double zero = adapted_bound_ratio(Polynomial(1, 1), cube, phi);
  CHECK(zero == doctest::Approx(phi.integral() / cube.volume()).epsilon(1e-9));
  CHECK(zero <= phi.sup() * 10.0);

  auto family = vdc_monomial_family(1, 1);
  auto lin = Polynomial::monomial(1, 1, MultiIndex{1}, 1e3 / cube.side());
  CHECK(adapted_bound_ratio(lin, cube, phi) <= 2.0 * family.max_ratio);

  CHECK_THROWS_AS(adapted_bound_ratio(lin, cube, BumpFunction::product(cube.center(), 6 * cube.side())),
                  InvalidInput);
  CHECK_THROWS_AS(adapted_bound_ratio(lin, cube, BumpFunction::product(cube.center(), 0.1 * cube.side())),
                  InvalidInput);
}

TEST_CASE("adapted ratio is translation invariant") {
  std::mt19937_64 rng(61);
  for (int i = 0; i < 20; ++i) {
    int m = 1 + i % 2;
    auto q = polycarl::testing::random_polynomial(rng, m, 1 + i % 3, 10.0);
    auto a = polycarl::testing::random_cube(rng, m, 2).children().back();
    auto b = polycarl::testing::random_cube(rng, m, 2).children().front();
    if (a.scale() != b.scale()) b = b.ancestor(std::min(a.scale(), b.scale()));
    if (a.scale() != b.scale()) a = a.ancestor(b.scale());
    auto ca = a.center(), cb = b.center();
    std::vector<double> shift(m);
    for (int k = 0; k < m; ++k) shift[k] = ca[k] - cb[k];
    // Q_b(x) = Q(x + c(a) - c(b)) moves the phase with the cube.
    auto qb = affine_substitute(q, 1.0, shift);
    double ra = adapted_bound_ratio(q, a, adapted_bump(a));
    double rb = adapted_bound_ratio(qb, b, adapted_bump(b));
    CHECK(std::abs(ra - rb) <= 1e-6 * std::max(1.0, ra));
  }
}
