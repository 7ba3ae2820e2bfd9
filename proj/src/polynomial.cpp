#include "polycarl/polynomial.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "polycarl/box.hpp"
#include "polycarl/dyadic.hpp"
#include "polycarl/errors.hpp"

namespace polycarl {

namespace {

void check_dim(int dim) {
  if (dim < 1 || dim > kMaxDim)
    throw InvalidInput("dimension must be in [1, " + std::to_string(kMaxDim) + "], got " +
                       std::to_string(dim));
}

void check_exponent(int e) {
  if (e < 0 || e > kMaxDegree)
    throw InvalidInput("exponent out of range: " + std::to_string(e));
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

MultiIndex::MultiIndex(int dim) {
  check_dim(dim);
  dim_ = static_cast<std::uint8_t>(dim);
}

MultiIndex::MultiIndex(std::initializer_list<int> exponents)
    : MultiIndex(std::span<const int>(exponents.begin(), exponents.size())) {}

MultiIndex::MultiIndex(std::span<const int> exponents) {
  check_dim(static_cast<int>(exponents.size()));
  dim_ = static_cast<std::uint8_t>(exponents.size());
  for (std::size_t i = 0; i < exponents.size(); ++i) {
    check_exponent(exponents[i]);
    exp_[i] = static_cast<std::uint8_t>(exponents[i]);
  }
}

void MultiIndex::set(int axis, int value) {
  check_exponent(value);
  exp_[axis] = static_cast<std::uint8_t>(value);
}

int MultiIndex::total() const {
  int t = 0;
  for (int i = 0; i < dim_; ++i) t += exp_[i];
  return t;
}

bool grlex_less(const MultiIndex& a, const MultiIndex& b) {
  int ta = a.total(), tb = b.total();
  if (ta != tb) return ta < tb;
  for (int i = 0; i < a.dim(); ++i)
    if (a[i] != b[i]) return a[i] > b[i];
  return false;
}

std::vector<MultiIndex> monomials(int dim, int min_total, int max_total) {
  std::vector<MultiIndex> out;
  MultiIndex cur(dim);
  // Enumerate the box [0, max_total]^dim and filter; desk-scale sizes only.
  std::vector<int> e(dim, 0);
  while (true) {
    int t = 0;
    for (int v : e) t += v;
    if (t >= min_total && t <= max_total) out.emplace_back(std::span<const int>(e));
    int a = 0;
    while (a < dim && ++e[a] > max_total) e[a++] = 0;
    if (a == dim) break;
  }
  std::sort(out.begin(), out.end(), grlex_less);
  return out;
}

Polynomial::Polynomial(int dim, int degree_bound) : dim_(dim), degree_bound_(degree_bound) {
  check_dim(dim);
  if (degree_bound < 0 || degree_bound > kMaxDegree)
    throw InvalidInput("degree bound out of range: " + std::to_string(degree_bound));
}

Polynomial Polynomial::from_terms(int dim, int degree_bound, std::vector<Term> terms) {
  Polynomial p(dim, degree_bound);
  for (const auto& t : terms) {
    if (t.index.dim() != dim) throw InvalidInput("multi-index dimension mismatch");
    if (t.index.total() > degree_bound)
      throw InvalidInput("monomial degree " + std::to_string(t.index.total()) +
                         " exceeds bound " + std::to_string(degree_bound));
  }
  p.terms_ = std::move(terms);
  p.normalize();
  return p;
}

Polynomial Polynomial::monomial(int dim, int degree_bound, const MultiIndex& index,
                                double coeff) {
  return from_terms(dim, degree_bound, {Term{index, coeff}});
}

Polynomial Polynomial::constant(int dim, int degree_bound, double value) {
  return from_terms(dim, degree_bound, {Term{MultiIndex(dim), value}});
}

void Polynomial::normalize() {
  std::stable_sort(terms_.begin(), terms_.end(),
                   [](const Term& a, const Term& b) { return grlex_less(a.index, b.index); });
  std::vector<Term> merged;
  merged.reserve(terms_.size());
  for (const auto& t : terms_) {
    if (!merged.empty() && merged.back().index == t.index)
      merged.back().coeff += t.coeff;
    else
      merged.push_back(t);
  }
  std::erase_if(merged, [](const Term& t) { return t.coeff == 0.0; });
  terms_ = std::move(merged);
}

int Polynomial::degree() const {
  int d = -1;
  for (const auto& t : terms_) d = std::max(d, t.index.total());
  return d;
}

double Polynomial::coeff(const MultiIndex& index) const {
  for (const auto& t : terms_)
    if (t.index == index) return t.coeff;
  return 0.0;
}

bool Polynomial::has_constant_term() const {
  return !terms_.empty() && terms_.front().index.is_zero();
}

Polynomial Polynomial::without_constant() const {
  Polynomial p = *this;
  if (p.has_constant_term()) p.terms_.erase(p.terms_.begin());
  return p;
}

double Polynomial::eval(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim_)
    throw InvalidInput("point dimension " + std::to_string(x.size()) +
                       " does not match polynomial dimension " + std::to_string(dim_));
  std::array<std::array<double, kMaxDegree + 1>, kMaxDim> pw;
  const int top = std::max(degree(), 0);
  for (int a = 0; a < dim_; ++a) {
    pw[a][0] = 1.0;
    for (int e = 1; e <= top; ++e) pw[a][e] = pw[a][e - 1] * x[a];
  }
  double sum = 0.0;
  for (const auto& t : terms_) {
    double v = t.coeff;
    for (int a = 0; a < dim_; ++a) v *= pw[a][t.index[a]];
    sum += v;
  }
  return sum;
}

Polynomial Polynomial::operator-() const {
  Polynomial p = *this;
  for (auto& t : p.terms_) t.coeff = -t.coeff;
  return p;
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
  if (other.dim_ != dim_) throw InvalidInput("polynomial dimension mismatch");
  degree_bound_ = std::max(degree_bound_, other.degree_bound_);
  terms_.insert(terms_.end(), other.terms_.begin(), other.terms_.end());
  normalize();
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& other) { return *this += -other; }

Polynomial& Polynomial::operator*=(double scalar) {
  for (auto& t : terms_) t.coeff *= scalar;
  normalize();
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  if (a.dim_ != b.dim_) throw InvalidInput("polynomial dimension mismatch");
  Polynomial p(a.dim_, std::min(a.degree_bound_ + b.degree_bound_, kMaxDegree));
  for (const auto& s : a.terms_) {
    for (const auto& t : b.terms_) {
      MultiIndex idx(a.dim_);
      for (int i = 0; i < a.dim_; ++i) idx.set(i, s.index[i] + t.index[i]);
      p.terms_.push_back({idx, s.coeff * t.coeff});
    }
  }
  p.normalize();
  return p;
}

bool operator==(const Polynomial& a, const Polynomial& b) {
  if (a.dim_ != b.dim_ || a.terms_.size() != b.terms_.size()) return false;
  for (std::size_t i = 0; i < a.terms_.size(); ++i)
    if (!(a.terms_[i].index == b.terms_[i].index) || a.terms_[i].coeff != b.terms_[i].coeff)
      return false;
  return true;
}

GradientField::GradientField(std::vector<Polynomial> components)
    : components_(std::move(components)) {
  for (const auto& c : components_)
    if (c.dim() != dim()) throw InvalidInput("gradient component dimension mismatch");
}

int GradientField::max_degree() const {
  int d = -1;
  for (const auto& c : components_) d = std::max(d, c.degree());
  return d;
}

bool GradientField::is_zero() const {
  return std::all_of(components_.begin(), components_.end(),
                     [](const Polynomial& p) { return p.is_zero(); });
}

void GradientField::eval(std::span<const double> x, std::span<double> out) const {
  for (int i = 0; i < dim(); ++i) out[i] = components_[i].eval(x);
}

double GradientField::norm_at(std::span<const double> x) const {
  double s = 0.0;
  for (const auto& c : components_) {
    double v = c.eval(x);
    s += v * v;
  }
  return std::sqrt(s);
}

bool GradientField::is_integrable() const {
  for (int i = 0; i < dim(); ++i) {
    for (int j = i + 1; j < dim(); ++j) {
      Polynomial diff = partial(components_[i], j) - partial(components_[j], i);
      double scale = size(partial(components_[i], j)) + 1.0;
      if (size(diff) > 1e-14 * scale) return false;
    }
  }
  return true;
}

GradientField& GradientField::operator+=(const GradientField& other) {
  if (other.dim() != dim()) throw InvalidInput("gradient dimension mismatch");
  for (int i = 0; i < dim(); ++i) components_[i] += other.components_[i];
  return *this;
}

GradientField& GradientField::operator-=(const GradientField& other) {
  if (other.dim() != dim()) throw InvalidInput("gradient dimension mismatch");
  for (int i = 0; i < dim(); ++i) components_[i] -= other.components_[i];
  return *this;
}

GradientField& GradientField::operator*=(double scalar) {
  for (auto& c : components_) c *= scalar;
  return *this;
}

Polynomial partial(const Polynomial& q, int axis) {
  std::vector<Term> terms;
  for (const auto& t : q.terms()) {
    int e = t.index[axis];
    if (e == 0) continue;
    MultiIndex idx = t.index;
    idx.set(axis, e - 1);
    terms.push_back({idx, t.coeff * e});
  }
  return Polynomial::from_terms(q.dim(), std::max(q.degree_bound() - 1, 0), std::move(terms));
}

GradientField grad(const Polynomial& q) {
  std::vector<Polynomial> comps;
  comps.reserve(q.dim());
  for (int a = 0; a < q.dim(); ++a) comps.push_back(partial(q, a));
  return GradientField(std::move(comps));
}

double size(const Polynomial& q) {
  double s = 0.0;
  for (const auto& t : q.terms()) s += std::abs(t.coeff);
  return s;
}

Polynomial affine_substitute(const Polynomial& q, double scale, std::span<const double> shift) {
  const int m = q.dim();
  if (static_cast<int>(shift.size()) != m) throw InvalidInput("shift dimension mismatch");
  std::vector<Term> out;
  for (const auto& t : q.terms()) {
    // Product over variables of (scale*y + shift)^e, expanded term by term.
    std::vector<Term> partial_terms{{MultiIndex(m), t.coeff}};
    for (int a = 0; a < m; ++a) {
      int e = t.index[a];
      if (e == 0) continue;
      std::vector<Term> next;
      next.reserve(partial_terms.size() * (e + 1));
      for (const auto& pt : partial_terms) {
        for (int j = 0; j <= e; ++j) {
          double c = binomial(e, j) * std::pow(scale, j) * std::pow(shift[a], e - j);
          if (c == 0.0) continue;
          MultiIndex idx = pt.index;
          idx.set(a, j);
          next.push_back({idx, pt.coeff * c});
        }
      }
      partial_terms = std::move(next);
    }
    out.insert(out.end(), partial_terms.begin(), partial_terms.end());
  }
  return Polynomial::from_terms(m, q.degree_bound(), std::move(out));
}

Polynomial rescale_to_unit(const Polynomial& q, const DyadicCube& cube) {
  if (cube.dim() != q.dim()) throw InvalidInput("cube dimension mismatch");
  auto c = cube.center();
  return affine_substitute(q, cube.side(), c);
}

double osc_norm(const Polynomial& q, const DyadicCube& cube, int points_per_axis) {
  if (cube.dim() != q.dim()) throw InvalidInput("cube dimension mismatch");
  if (q.degree() <= 0) return 0.0;
  Box box = cube.box();
  ScalarField up = [&](std::span<const double> x) { return q.eval(x); };
  ScalarField down = [&](std::span<const double> x) { return -q.eval(x); };
  MaxResult hi = refine_max(up, box, points_per_axis, grid_max(up, box, points_per_axis));
  MaxResult lo = refine_max(down, box, points_per_axis, grid_max(down, box, points_per_axis));
  return hi.value + lo.value;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

int parse_int(std::string_view s, const char* what) {
  s = trim(s);
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw InvalidInput(std::string("bad integer for ") + what + ": '" + std::string(s) + "'");
  return v;
}

double parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw InvalidInput("bad coefficient: '" + std::string(s) + "'");
  return v;
}

Term parse_term(std::string_view text, int m) {
  text = trim(text);
  Term term{MultiIndex(m), 1.0};
  std::size_t pos = text.find('x');
  std::string_view coeff = trim(text.substr(0, pos));
  if (!coeff.empty()) {
    if (coeff.back() == '*') coeff = trim(coeff.substr(0, coeff.size() - 1));
    if (coeff == "-")
      term.coeff = -1.0;
    else if (!coeff.empty() && coeff != "+")
      term.coeff = parse_double(coeff);
  }
  while (pos != std::string_view::npos && pos < text.size()) {
    // factor: x<var>[^<exp>]
    std::size_t next = text.find('x', pos + 1);
    std::string_view factor = text.substr(pos + 1, next == std::string_view::npos
                                                        ? std::string_view::npos
                                                        : next - pos - 1);
    factor = trim(factor);
    if (!factor.empty() && factor.back() == '*') factor = trim(factor.substr(0, factor.size() - 1));
    std::size_t caret = factor.find('^');
    int var = parse_int(factor.substr(0, caret), "variable index");
    int e = caret == std::string_view::npos ? 1 : parse_int(factor.substr(caret + 1), "exponent");
    if (var < 1 || var > m)
      throw InvalidInput("variable x" + std::to_string(var) + " outside dimension " +
                         std::to_string(m));
    term.index.set(var - 1, term.index[var - 1] + e);
    pos = next;
  }
  return term;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

Polynomial parse_polynomial(std::string_view text) {
  std::size_t semi = text.find(';');
  std::string_view header = trim(text.substr(0, semi));
  int m = -1, d = -1;
  std::istringstream hs{std::string(header)};
  std::string tok;
  while (hs >> tok) {
    auto eq = tok.find('=');
    if (eq == std::string::npos) throw InvalidInput("bad polynomial header token '" + tok + "'");
    std::string key = tok.substr(0, eq);
    int value = parse_int(std::string_view(tok).substr(eq + 1), key.c_str());
    if (key == "m")
      m = value;
    else if (key == "d")
      d = value;
    else
      throw InvalidInput("unknown polynomial header key '" + key + "'");
  }
  if (m < 0 || d < 0) throw InvalidInput("polynomial header must give m= and d=");
  std::vector<Term> terms;
  if (semi != std::string_view::npos) {
    std::string_view rest = text.substr(semi + 1);
    while (true) {
      std::size_t s = rest.find(';');
      std::string_view item = trim(rest.substr(0, s));
      if (!item.empty()) {
        Term t = parse_term(item, m);
        if (t.index.total() > d)
          throw InvalidInput("monomial '" + std::string(item) + "' has degree " +
                             std::to_string(t.index.total()) + " > d=" + std::to_string(d));
        terms.push_back(t);
      }
      if (s == std::string_view::npos) break;
      rest = rest.substr(s + 1);
    }
  }
  return Polynomial::from_terms(m, d, std::move(terms));
}

std::string format_polynomial(const Polynomial& q) {
  std::string out = "m=" + std::to_string(q.dim()) + " d=" + std::to_string(q.degree_bound()) + ";";
  for (const auto& t : q.terms()) {
    out += ' ';
    out += format_double(t.coeff);
    for (int a = 0; a < q.dim(); ++a) {
      if (t.index[a] == 0) continue;
      out += "*x" + std::to_string(a + 1) + "^" + std::to_string(t.index[a]);
    }
    out += ';';
  }
  return out;
}

}  // namespace polycarl
