#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "polycarl/box.hpp"
#include "polycarl/dyadic.hpp"
#include "polycarl/polynomial.hpp"

namespace polycarl {

// (1 - t^2)^2 profiles: radial in |x - c| / r, or a product over axes.
class BumpFunction {
 public:
  enum class Kind { kRadial, kProduct };

  static BumpFunction radial(std::vector<double> center, double radius);
  static BumpFunction product(std::vector<double> center, double radius);

  Kind kind() const { return kind_; }
  int dim() const { return static_cast<int>(center_.size()); }
  std::span<const double> center() const { return center_; }
  double radius() const { return radius_; }

  double operator()(std::span<const double> x) const;
  // One-dimensional factor of a product bump along `axis`.
  double factor(int axis, double t) const;

  Box support_box() const;
  double integral() const;  // closed form over R^m
  double sup() const { return 1.0; }
  // Exact for radial, the sqrt(m) upper bound for product bumps.
  double sup_grad() const;
  double c1_norm() const { return sup() + sup_grad(); }

 private:
  BumpFunction(Kind kind, std::vector<double> center, double radius);
  Kind kind_;
  std::vector<double> center_;
  double radius_;
};

struct Domain {
  enum class Kind { kBox, kBall };
  Kind kind = Kind::kBox;
  Box box;                     // kBox
  std::vector<double> center;  // kBall
  double radius = 1.0;

  static Domain make_box(Box b) { return {Kind::kBox, std::move(b), {}, 0.0}; }
  static Domain make_ball(std::vector<double> c, double r) { return {Kind::kBall, {}, std::move(c), r}; }
  int dim() const { return kind == Kind::kBox ? box.dim() : static_cast<int>(center.size()); }
  bool contains(std::span<const double> x) const;
  Box bounding_box() const;
};

// Composite 12-point Gauss-Legendre panels, sized so one panel spans at most
// `radians_per_panel` of phase.  Each level is compared with its doubling.
struct QuadratureSpec {
  int min_panels = 8;
  double radians_per_panel = 2.0;
  int refinement_levels = 3;
  double tolerance = 1e-10;
  double point_budget = 6e7;
  bool allow_separable = true;
};

struct OscResult {
  std::complex<double> value;
  double error = 0.0;  // |I_N - I_2N| at the last level
  bool flagged = false;
  bool separable = false;
  int panels = 0;  // per axis, finest level
};

// int_Omega e^{iQ(x)} phi(x) dx.
OscResult osc_integral(const Polynomial& q, const BumpFunction& phi, const Domain& omega,
                       const QuadratureSpec& spec = {});

// Sum of univariate pieces (no mixed monomials).
bool is_separable(const Polynomial& q);

struct DecayRow {
  std::string family;
  double param = 0;
  double s = 0;
  double integral_abs = 0;
  double bound = 0;
  double ratio = 0;
  double error = 0;
  bool flagged = false;
};

struct DecayReport {
  std::vector<DecayRow> rows;
  double slope = 0;
  double max_ratio = 0;
  int n_trials = 0;
  int flagged = 0;
};

// Ratio |int| / (s(Q)^{-1/d} ||phi||_C1) per member and the log-log slope of
// |int| against s(Q).
DecayReport vdc_check(std::span<const Polynomial> family, std::span<const double> params,
                      const BumpFunction& phi, const Domain& omega, const std::string& name,
                      const QuadratureSpec& spec = {});

// Q = lambda (x_1^d + ... + x_m^d), s(Q) log-spaced over [s_lo, s_hi], product
// bump of radius 1/sqrt(m), Omega = [-1/2, 1/4]^m.
DecayReport vdc_monomial_family(int dim, int degree, int count = 49, double s_lo = 10.0,
                                double s_hi = 1e4, const QuadratureSpec& spec = {});

inline constexpr std::uint64_t kMonteCarloSeed = 0x5eed'2024'0bad'cafeULL;

struct LevelSetEstimate {
  double measure = 0;
  double half_width = 0;  // binomial 95%
  std::size_t hits = 0;
  std::size_t samples = 0;
};

// |{x in B_m(0,1) : |Q(x)| <= eps}| by uniform rejection sampling.
LevelSetEstimate level_set_measure(const Polynomial& q, double eps, std::size_t samples = 100000,
                                   std::uint64_t seed = kMonteCarloSeed);
// Same sample set for every eps.
std::vector<LevelSetEstimate> level_set_sweep(const Polynomial& q, std::span<const double> eps,
                                              std::size_t samples = 100000,
                                              std::uint64_t seed = kMonteCarloSeed);

struct ExponentFit {
  double exponent = 0;
  std::vector<double> eps;
  std::vector<LevelSetEstimate> estimates;
};

// Weighted log-log fit of measure against eps over 10^-1 .. 10^-4 in
// half-decade steps.
ExponentFit level_set_exponent(const Polynomial& q, std::size_t samples = 100000,
                               std::uint64_t seed = kMonteCarloSeed);

// Product bump centered at c(I) with radius 2 l(I).
BumpFunction adapted_bump(const DyadicCube& cube);

// |int e^{iQ} phi_I| / (bracket(Delta_{grad Q}(I))^{1/d} |I|), phi_I checked
// against the adaptation bounds first.
double adapted_bound_ratio(const Polynomial& q, const DyadicCube& cube, const BumpFunction& phi,
                           const QuadratureSpec& spec = {});

// Weighted least-squares slope of log y against log x.
double loglog_slope(std::span<const double> x, std::span<const double> y,
                    std::span<const double> weights = {});

}  // namespace polycarl
