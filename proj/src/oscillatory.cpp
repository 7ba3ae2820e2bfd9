#include "polycarl/oscillatory.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "polycarl/errors.hpp"
#include "polycarl/geometry.hpp"

namespace polycarl {

namespace {

constexpr int kGaussPoints = 12;

struct GaussRule {
  std::array<double, kGaussPoints> x{}, w{};
  GaussRule() {
    using G = boost::math::quadrature::gauss<double, kGaussPoints>;
    const auto& a = G::abscissa();
    const auto& wt = G::weights();
    for (int i = 0; i < kGaussPoints / 2; ++i) {
      x[i] = -a[kGaussPoints / 2 - 1 - i];
      w[i] = wt[kGaussPoints / 2 - 1 - i];
      x[kGaussPoints - 1 - i] = a[kGaussPoints / 2 - 1 - i];
      w[kGaussPoints - 1 - i] = wt[kGaussPoints / 2 - 1 - i];
    }
  }
};

const GaussRule& rule() {
  static const GaussRule r;
  return r;
}

// Composite nodes and weights on [a, b].
void composite(double a, double b, int panels, std::vector<double>& nodes,
               std::vector<double>& weights) {
  nodes.clear();
  weights.clear();
  const double h = (b - a) / panels;
  const auto& g = rule();
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    for (int i = 0; i < kGaussPoints; ++i) {
      nodes.push_back(mid + 0.5 * h * g.x[i]);
      weights.push_back(0.5 * h * g.w[i]);
    }
  }
}

double profile(double t) {
  if (t >= 1.0) return 0.0;
  const double u = 1.0 - t;
  return u * u;
}

// Bound on |d_axis Q| over the box from coefficient magnitudes.
double partial_bound(const Polynomial& q, const Box& box, int axis) {
  double total = 0.0;
  for (const auto& term : q.terms()) {
    int e = term.index[axis];
    if (e == 0) continue;
    double v = std::abs(term.coeff) * e;
    for (int j = 0; j < q.dim(); ++j) {
      int p = term.index[j] - (j == axis ? 1 : 0);
      double mx = std::max(std::abs(box.lo[j]), std::abs(box.hi[j]));
      v *= std::pow(mx, p);
    }
    total += v;
  }
  return total;
}

int panels_for(double variation, const QuadratureSpec& spec) {
  double p = std::ceil(variation / spec.radians_per_panel);
  return static_cast<int>(std::clamp(p, static_cast<double>(spec.min_panels), 1e7));
}

}  // namespace

BumpFunction::BumpFunction(Kind kind, std::vector<double> center, double radius)
    : kind_(kind), center_(std::move(center)), radius_(radius) {
  if (center_.empty() || static_cast<int>(center_.size()) > kMaxDim)
    throw InvalidInput("bump dimension out of range");
  if (!(radius > 0.0) || !std::isfinite(radius)) throw InvalidInput("bump radius must be positive");
}

BumpFunction BumpFunction::radial(std::vector<double> center, double radius) {
  return BumpFunction(Kind::kRadial, std::move(center), radius);
}

BumpFunction BumpFunction::product(std::vector<double> center, double radius) {
  return BumpFunction(Kind::kProduct, std::move(center), radius);
}

double BumpFunction::factor(int axis, double t) const {
  const double u = (t - center_[axis]) / radius_;
  return profile(u * u);
}

double BumpFunction::operator()(std::span<const double> x) const {
  if (kind_ == Kind::kProduct) {
    double v = 1.0;
    for (int a = 0; a < dim() && v != 0.0; ++a) v *= factor(a, x[a]);
    return v;
  }
  double r2 = 0.0;
  for (int a = 0; a < dim(); ++a) {
    const double u = (x[a] - center_[a]) / radius_;
    r2 += u * u;
  }
  return profile(r2);
}

Box BumpFunction::support_box() const {
  Box b{center_, center_};
  for (int a = 0; a < dim(); ++a) {
    b.lo[a] -= radius_;
    b.hi[a] += radius_;
  }
  return b;
}

double BumpFunction::integral() const {
  const double m = dim();
  if (kind_ == Kind::kProduct) return std::pow(16.0 / 15.0 * radius_, m);
  return std::pow(std::numbers::pi, 0.5 * m) / boost::math::tgamma(0.5 * m) *
         boost::math::beta(0.5 * m, 3.0) * std::pow(radius_, m);
}

double BumpFunction::sup_grad() const {
  const double one_axis = 8.0 / (3.0 * std::sqrt(3.0)) / radius_;
  return kind_ == Kind::kRadial ? one_axis : std::sqrt(static_cast<double>(dim())) * one_axis;
}

bool Domain::contains(std::span<const double> x) const {
  if (kind == Kind::kBox) {
    for (int a = 0; a < box.dim(); ++a)
      if (x[a] < box.lo[a] || x[a] > box.hi[a]) return false;
    return true;
  }
  double s = 0.0;
  for (std::size_t a = 0; a < center.size(); ++a) s += (x[a] - center[a]) * (x[a] - center[a]);
  return s <= radius * radius;
}

Box Domain::bounding_box() const {
  if (kind == Kind::kBox) return box;
  Box b{center, center};
  for (auto& v : b.lo) v -= radius;
  for (auto& v : b.hi) v += radius;
  return b;
}

bool is_separable(const Polynomial& q) {
  for (const auto& t : q.terms()) {
    int nonzero = 0;
    for (int a = 0; a < q.dim(); ++a) nonzero += t.index[a] != 0;
    if (nonzero > 1) return false;
  }
  return true;
}

namespace {

using cplx = std::complex<double>;

cplx expi(double t) { return {std::cos(t), std::sin(t)}; }

template <class Level>
OscResult refine_levels(Level&& at, const QuadratureSpec& spec) {
  int mult = 1;
  cplx coarse = at(mult);
  cplx fine = at(2 * mult);
  double err = std::abs(fine - coarse);
  for (int level = 0; err > spec.tolerance && level < spec.refinement_levels; ++level) {
    mult *= 2;
    coarse = fine;
    fine = at(2 * mult);
    err = std::abs(fine - coarse);
  }
  OscResult r;
  r.value = fine;
  r.error = err;
  r.flagged = err > spec.tolerance;
  r.panels = 2 * mult;
  return r;
}

double horner(const std::vector<double>& c, double t) {
  double v = 0.0;
  for (std::size_t k = c.size(); k-- > 0;) v = v * t + c[k];
  return v;
}

OscResult separable_integral(const Polynomial& q, const BumpFunction& phi, const Box& region,
                             const QuadratureSpec& spec) {
  const int m = q.dim();
  std::vector<std::vector<double>> uni(m, std::vector<double>(q.degree_bound() + 1, 0.0));
  double c0 = 0.0;
  for (const auto& t : q.terms()) {
    if (t.index.is_zero()) {
      c0 += t.coeff;
      continue;
    }
    for (int a = 0; a < m; ++a)
      if (t.index[a]) uni[a][t.index[a]] += t.coeff;
  }
  std::vector<int> base(m);
  for (int a = 0; a < m; ++a) {
    double bound = 0.0;
    const double mx = std::max(std::abs(region.lo[a]), std::abs(region.hi[a]));
    for (std::size_t k = 1; k < uni[a].size(); ++k)
      bound += k * std::abs(uni[a][k]) * std::pow(mx, static_cast<double>(k) - 1.0);
    base[a] = panels_for(region.side(a) * bound, spec);
  }
  std::vector<double> nodes, weights;
  auto at = [&](int mult) {
    cplx total = expi(c0);
    for (int a = 0; a < m; ++a) {
      composite(region.lo[a], region.hi[a], base[a] * mult, nodes, weights);
      cplx s = 0.0;
      for (std::size_t i = 0; i < nodes.size(); ++i)
        s += weights[i] * phi.factor(a, nodes[i]) * expi(horner(uni[a], nodes[i]));
      total *= s;
    }
    return total;
  };
  auto r = refine_levels(at, spec);
  r.separable = true;
  r.panels *= *std::max_element(base.begin(), base.end());
  return r;
}

OscResult tensor_integral(const Polynomial& q, const BumpFunction& phi, const Domain& omega,
                          const Box& region, const QuadratureSpec& spec) {
  const int m = q.dim();
  const bool indicator = omega.kind == Domain::Kind::kBall && m > 1;
  std::vector<int> base(m);
  double points = 1.0;
  for (int a = 0; a < m; ++a) {
    base[a] = panels_for(region.side(a) * partial_bound(q, region, a), spec);
    points *= kGaussPoints * base[a];
  }
  if (points * std::pow(2.0, m) > spec.point_budget)
    throw ResourceLimit("oscillatory quadrature needs too many points", points * std::pow(2.0, m));
  std::vector<std::vector<double>> nodes(m), weights(m);
  std::vector<double> x(m);
  auto at = [&](int mult) {
    double count = 1.0;
    for (int a = 0; a < m; ++a) count *= kGaussPoints * base[a] * mult;
    if (count > spec.point_budget)
      throw ResourceLimit("oscillatory quadrature refinement exceeds the point budget", count);
    for (int a = 0; a < m; ++a) composite(region.lo[a], region.hi[a], base[a] * mult, nodes[a], weights[a]);
    std::vector<std::size_t> idx(m, 0);
    cplx total = 0.0;
    while (true) {
      double w = 1.0;
      for (int a = 0; a < m; ++a) {
        x[a] = nodes[a][idx[a]];
        w *= weights[a][idx[a]];
      }
      if (!indicator || omega.contains(x)) {
        const double f = phi(x);
        if (f != 0.0) total += w * f * expi(q.eval(x));
      }
      int a = m - 1;
      while (a >= 0 && ++idx[a] == nodes[a].size()) idx[a--] = 0;
      if (a < 0) break;
    }
    return total;
  };
  auto r = refine_levels(at, spec);
  r.panels *= *std::max_element(base.begin(), base.end());
  return r;
}

OscResult polar_integral(const Polynomial& q, const BumpFunction& phi, const Domain& omega,
                         const QuadratureSpec& spec) {
  const Box bb = omega.bounding_box();
  double grad_bound = std::hypot(partial_bound(q, bb, 0), partial_bound(q, bb, 1));
  const double R = omega.radius;
  const int base_r = panels_for(R * grad_bound, spec);
  const int base_t = panels_for(2.0 * std::numbers::pi * R * grad_bound, spec);
  std::vector<double> rn, rw, tn, tw;
  std::vector<double> x(2);
  auto at = [&](int mult) {
    double count = static_cast<double>(kGaussPoints) * kGaussPoints * base_r * base_t * mult * mult;
    if (count > spec.point_budget)
      throw ResourceLimit("oscillatory quadrature refinement exceeds the point budget", count);
    composite(0.0, R, base_r * mult, rn, rw);
    composite(0.0, 2.0 * std::numbers::pi, base_t * mult, tn, tw);
    cplx total = 0.0;
    for (std::size_t i = 0; i < rn.size(); ++i) {
      for (std::size_t j = 0; j < tn.size(); ++j) {
        x[0] = omega.center[0] + rn[i] * std::cos(tn[j]);
        x[1] = omega.center[1] + rn[i] * std::sin(tn[j]);
        const double f = phi(x);
        if (f != 0.0) total += rw[i] * tw[j] * rn[i] * f * expi(q.eval(x));
      }
    }
    return total;
  };
  auto r = refine_levels(at, spec);
  r.panels *= std::max(base_r, base_t);
  return r;
}

}  // namespace

OscResult osc_integral(const Polynomial& q, const BumpFunction& phi, const Domain& omega,
                       const QuadratureSpec& spec) {
  const int m = q.dim();
  if (phi.dim() != m || omega.dim() != m) throw InvalidInput("phase, bump and domain dimensions differ");
  if (spec.min_panels < 1 || !(spec.radians_per_panel > 0) || spec.refinement_levels < 0)
    throw InvalidInput("invalid quadrature spec");
  if (omega.kind == Domain::Kind::kBall && m == 2) return polar_integral(q, phi, omega, spec);
  Box region = omega.bounding_box();
  const Box supp = phi.support_box();
  for (int a = 0; a < m; ++a) {
    region.lo[a] = std::max(region.lo[a], supp.lo[a]);
    region.hi[a] = std::min(region.hi[a], supp.hi[a]);
    if (region.hi[a] <= region.lo[a]) return OscResult{};
  }
  const bool boxlike = omega.kind == Domain::Kind::kBox || m == 1;
  if (spec.allow_separable && boxlike && phi.kind() == BumpFunction::Kind::kProduct && is_separable(q))
    return separable_integral(q, phi, region, spec);
  return tensor_integral(q, phi, omega, region, spec);
}

double loglog_slope(std::span<const double> x, std::span<const double> y,
                    std::span<const double> weights) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidInput("slope fit needs >= 2 matching points");
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0) || !(y[i] > 0)) throw InvalidInput("log-log fit needs positive data");
    const double w = weights.empty() ? 1.0 : weights[i];
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sw += w;
    sx += w * lx;
    sy += w * ly;
    sxx += w * lx * lx;
    sxy += w * lx * ly;
  }
  const double den = sw * sxx - sx * sx;
  if (!(std::abs(den) > 0)) throw InvalidInput("degenerate slope fit");
  return (sw * sxy - sx * sy) / den;
}

DecayReport vdc_check(std::span<const Polynomial> family, std::span<const double> params,
                      const BumpFunction& phi, const Domain& omega, const std::string& name,
                      const QuadratureSpec& spec) {
  if (family.size() != params.size() || family.size() < 2)
    throw InvalidInput("decay family needs >= 2 members with matching parameters");
  const int d = std::max(1, family.front().degree());
  DecayReport rep;
  std::vector<double> s, v;
  for (std::size_t i = 0; i < family.size(); ++i) {
    const auto& q = family[i];
    if (q.dim() != family.front().dim() || std::max(1, q.degree()) != d)
      throw InvalidInput("decay family members must share m and d");
    auto r = osc_integral(q, phi, omega, spec);
    DecayRow row;
    row.family = name;
    row.param = params[i];
    row.s = size(q);
    row.integral_abs = std::abs(r.value);
    row.bound = std::pow(row.s, -1.0 / d) * phi.c1_norm();
    row.ratio = row.integral_abs / row.bound;
    row.error = r.error;
    row.flagged = r.flagged;
    rep.max_ratio = std::max(rep.max_ratio, row.ratio);
    rep.flagged += r.flagged;
    s.push_back(row.s);
    v.push_back(std::max(row.integral_abs, 1e-300));
    rep.rows.push_back(row);
  }
  rep.n_trials = static_cast<int>(rep.rows.size());
  rep.slope = loglog_slope(s, v);
  return rep;
}

DecayReport vdc_monomial_family(int dim, int degree, int count, double s_lo, double s_hi,
                                const QuadratureSpec& spec) {
  if (degree < 1 || degree > kMaxDegree || dim < 1 || dim > kMaxDim)
    throw InvalidInput("family (m, d) out of range");
  if (count < 2 || !(s_lo > 0) || !(s_hi > s_lo)) throw InvalidInput("bad s range");
  std::vector<Polynomial> family;
  std::vector<double> params;
  for (int i = 0; i < count; ++i) {
    const double s = s_lo * std::pow(s_hi / s_lo, static_cast<double>(i) / (count - 1));
    const double lambda = s / dim;
    std::vector<Term> terms;
    for (int a = 0; a < dim; ++a) {
      MultiIndex b(dim);
      b.set(a, degree);
      terms.push_back({b, lambda});
    }
    family.push_back(Polynomial::from_terms(dim, degree, std::move(terms)));
    params.push_back(lambda);
  }
  auto phi = BumpFunction::product(std::vector<double>(dim, 0.0), 1.0 / std::sqrt(static_cast<double>(dim)));
  auto omega = Domain::make_box(Box{std::vector<double>(dim, -0.5), std::vector<double>(dim, 0.25)});
  return vdc_check(family, params, phi, omega,
                   "monomial_m" + std::to_string(dim) + "_d" + std::to_string(degree), spec);
}

std::vector<LevelSetEstimate> level_set_sweep(const Polynomial& q, std::span<const double> eps,
                                              std::size_t samples, std::uint64_t seed) {
  const int m = q.dim();
  if (m < 1) throw InvalidInput("level set of a zero-dimensional polynomial");
  if (samples < 1) throw InvalidInput("level set needs samples");
  for (double e : eps)
    if (!(e > 0)) throw InvalidInput("level set epsilon must be positive");
  const double vol = std::pow(std::numbers::pi, 0.5 * m) / boost::math::tgamma(0.5 * m + 1.0);
  // Raw 53-bit draws keep the stream identical across standard libraries.
  std::mt19937_64 rng(seed);
  auto uniform = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0; };
  std::vector<std::size_t> hits(eps.size(), 0);
  std::vector<double> x(m);
  for (std::size_t n = 0; n < samples;) {
    double r2 = 0.0;
    for (auto& v : x) {
      v = uniform();
      r2 += v * v;
    }
    if (r2 > 1.0) continue;
    ++n;
    const double a = std::abs(q.eval(x));
    for (std::size_t i = 0; i < eps.size(); ++i) hits[i] += a <= eps[i];
  }
  std::vector<LevelSetEstimate> out;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    const double p = static_cast<double>(hits[i]) / samples;
    out.push_back({p * vol, 1.96 * std::sqrt(p * (1 - p) / samples) * vol, hits[i], samples});
  }
  return out;
}

LevelSetEstimate level_set_measure(const Polynomial& q, double eps, std::size_t samples,
                                   std::uint64_t seed) {
  return level_set_sweep(q, std::span<const double>(&eps, 1), samples, seed).front();
}

ExponentFit level_set_exponent(const Polynomial& q, std::size_t samples, std::uint64_t seed) {
  ExponentFit fit;
  for (int j = 0; j <= 6; ++j) fit.eps.push_back(std::pow(10.0, -1.0 - 0.5 * j));
  fit.estimates = level_set_sweep(q, fit.eps, samples, seed);
  std::vector<double> e, mu, w;
  for (std::size_t i = 0; i < fit.eps.size(); ++i) {
    if (fit.estimates[i].hits == 0) continue;
    e.push_back(fit.eps[i]);
    mu.push_back(fit.estimates[i].measure);
    w.push_back(static_cast<double>(fit.estimates[i].hits));
  }
  if (e.size() < 2) throw InvalidInput("too few sublevel hits for an exponent fit");
  fit.exponent = loglog_slope(e, mu, w);
  return fit;
}

BumpFunction adapted_bump(const DyadicCube& cube) {
  return BumpFunction::product(cube.center(), 2.0 * cube.side());
}

double adapted_bound_ratio(const Polynomial& q, const DyadicCube& cube, const BumpFunction& phi,
                           const QuadratureSpec& spec) {
  const int m = cube.dim();
  if (q.dim() != m || phi.dim() != m) throw InvalidInput("phase, cube and bump dimensions differ");
  const double l = cube.side();
  const auto c = cube.center();
  double offset = 0.0;
  for (int a = 0; a < m; ++a) offset = std::max(offset, std::abs(phi.center()[a] - c[a]));
  if (offset + phi.radius() > 5.0 * l) throw InvalidInput("bump is not supported in 10I");
  if (phi.sup() > 1.0) throw InvalidInput("bump amplitude exceeds 1");
  if (l * phi.sup_grad() > 4.0) throw InvalidInput("bump gradient exceeds 4 / l(I)");
  const int d = std::max(1, q.degree());
  auto r = osc_integral(q, phi, Domain::make_box(phi.support_box()), spec);
  const double delta = geom_factor(grad(q.without_constant()), cube);
  return std::abs(r.value) / (std::pow(bracket(delta), 1.0 / d) * cube.volume());
}

}  // namespace polycarl
