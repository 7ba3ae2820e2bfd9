#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace polycarl {

class DyadicCube;

inline constexpr int kMaxDim = 6;
inline constexpr int kMaxDegree = 12;

// Exponent vector beta = (beta_1, ..., beta_m).
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(int dim);
  MultiIndex(std::initializer_list<int> exponents);
  explicit MultiIndex(std::span<const int> exponents);

  int dim() const { return dim_; }
  int operator[](int axis) const { return exp_[axis]; }
  void set(int axis, int value);
  int total() const;
  bool is_zero() const { return total() == 0; }

  friend bool operator==(const MultiIndex& a, const MultiIndex& b) {
    return a.dim_ == b.dim_ && a.exp_ == b.exp_;
  }

 private:
  std::array<std::uint8_t, kMaxDim> exp_{};
  std::uint8_t dim_ = 0;
};

// Graded lexicographic order: total degree first, then larger leading
// exponents first (1, x1, x2, x1^2, x1x2, x2^2, ...).
bool grlex_less(const MultiIndex& a, const MultiIndex& b);

// All multi-indices of dimension m with min_total <= |beta| <= max_total, grlex.
std::vector<MultiIndex> monomials(int dim, int min_total, int max_total);

struct Term {
  MultiIndex index;
  double coeff = 0.0;
};

// Sparse real polynomial in m variables with |beta| <= degree_bound.
// Terms are kept in grlex order with zeros purged.
class Polynomial {
 public:
  Polynomial() = default;
  Polynomial(int dim, int degree_bound);

  static Polynomial from_terms(int dim, int degree_bound, std::vector<Term> terms);
  static Polynomial monomial(int dim, int degree_bound, const MultiIndex& index,
                             double coeff);
  static Polynomial constant(int dim, int degree_bound, double value);

  int dim() const { return dim_; }
  int degree_bound() const { return degree_bound_; }
  // Actual degree; -1 for the zero polynomial.
  int degree() const;
  bool is_zero() const { return terms_.empty(); }
  std::span<const Term> terms() const { return terms_; }

  double coeff(const MultiIndex& index) const;
  bool has_constant_term() const;
  // Membership in the class of polynomials without constant term.
  bool in_q_class() const { return !has_constant_term(); }
  Polynomial without_constant() const;

  double eval(std::span<const double> x) const;
  double eval(std::initializer_list<double> x) const {
    return eval(std::span<const double>(x.begin(), x.size()));
  }

  Polynomial operator-() const;
  Polynomial& operator+=(const Polynomial& other);
  Polynomial& operator-=(const Polynomial& other);
  Polynomial& operator*=(double scalar);
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
  friend Polynomial operator*(double s, Polynomial a) { return a *= s; }

  // Full product; degree bound is the sum of the two bounds.
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);

  friend bool operator==(const Polynomial& a, const Polynomial& b);

 private:
  void normalize();

  int dim_ = 0;
  int degree_bound_ = 0;
  std::vector<Term> terms_;
};

// Gradient m-tuple of a polynomial.
class GradientField {
 public:
  GradientField() = default;
  explicit GradientField(std::vector<Polynomial> components);

  int dim() const { return static_cast<int>(components_.size()); }
  const Polynomial& operator[](int axis) const { return components_[axis]; }
  std::span<const Polynomial> components() const { return components_; }
  int max_degree() const;
  bool is_zero() const;

  void eval(std::span<const double> x, std::span<double> out) const;
  double norm_at(std::span<const double> x) const;

  // Mixed-partial symmetry d_j F_i == d_i F_j (exact on coefficients).
  bool is_integrable() const;

  GradientField& operator+=(const GradientField& other);
  GradientField& operator-=(const GradientField& other);
  GradientField& operator*=(double scalar);
  friend GradientField operator+(GradientField a, const GradientField& b) { return a += b; }
  friend GradientField operator-(GradientField a, const GradientField& b) { return a -= b; }
  friend GradientField operator*(GradientField a, double s) { return a *= s; }
  friend GradientField operator*(double s, GradientField a) { return a *= s; }
  friend bool operator==(const GradientField& a, const GradientField& b) {
    return a.components_ == b.components_;
  }

 private:
  std::vector<Polynomial> components_;
};

Polynomial partial(const Polynomial& q, int axis);
GradientField grad(const Polynomial& q);

// s(Q): sum of absolute coefficient values.
double size(const Polynomial& q);

// y -> q(scale * y + shift), expanded by binomial convolution per variable.
Polynomial affine_substitute(const Polynomial& q, double scale,
                             std::span<const double> shift);

// P(y) := Q(l(I) y + c(I)).  May carry a constant term.
Polynomial rescale_to_unit(const Polynomial& q, const DyadicCube& cube);

// ||Q||_I = sup_{x,x' in I} |Q(x) - Q(x')|, as grid max minus grid min.
double osc_norm(const Polynomial& q, const DyadicCube& cube,
                int points_per_axis = 33);

// Text format: "m=<int> d=<int>; <coeff>*x1^a1*...*xm^am; ..."
Polynomial parse_polynomial(std::string_view text);
std::string format_polynomial(const Polynomial& q);

}  // namespace polycarl
