#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "polycarl/geometry.hpp"
#include "polycarl/operator.hpp"
#include "polycarl/oscillatory.hpp"
#include "study_common.hpp"

namespace polycarl {
namespace detail {

StudyResult run_vdc(const ExperimentConfig& c) {
  const int m = *c.dim, d = *c.degree;
  auto rep = vdc_monomial_family(m, d, *c.trials);
  StudyResult r;
  r.study = "vdc";
  Table t{"decay", {"s", "integral_abs", "bound", "ratio", "error", "flagged"}, {}};
  Plot p{"decay", "|int e^{iQ} phi| against s(Q)", "s(Q)", "|integral|", {}};
  for (const auto& row : rep.rows) {
    t.add({num(row.s), num(row.integral_abs), num(row.bound), num(row.ratio), num(row.error),
           row.flagged ? "1" : "0"});
    p.points.emplace_back(row.s, row.integral_abs);
  }
  r.tables.push_back(std::move(t));
  r.plots.push_back(std::move(p));
  const double limit = -1.0 / d + 0.1;
  r.summary["slope"] = rep.slope;
  r.summary["slope_limit"] = limit;
  r.summary["max_ratio"] = rep.max_ratio;
  r.summary["flagged"] = rep.flagged;
  r.require(rep.slope <= limit, "decay slope " + num(rep.slope) + " above " + num(limit));
  return r;
}

StudyResult run_levelset(const ExperimentConfig& c) {
  const int d = *c.degree;
  auto fit = level_set_exponent(Polynomial::monomial(1, d, MultiIndex{d}, 1.0),
                                *c.samples, *c.seed);
  StudyResult r;
  r.study = "levelset";
  Table t{"sublevel", {"eps", "measure", "half_width", "hits", "samples"}, {}};
  Plot p{"sublevel", "|{|x^d| <= eps}|", "eps", "measure", {}};
  for (std::size_t i = 0; i < fit.eps.size(); ++i) {
    const auto& e = fit.estimates[i];
    t.add({num(fit.eps[i]), num(e.measure), num(e.half_width), num(e.hits), num(e.samples)});
    p.points.emplace_back(fit.eps[i], e.measure);
  }
  r.tables.push_back(std::move(t));
  r.plots.push_back(std::move(p));
  r.summary["exponent"] = fit.exponent;
  r.summary["expected"] = 1.0 / d;
  r.require(std::abs(fit.exponent - 1.0 / d) <= 0.05, "level-set exponent " + num(fit.exponent) + " is not 1/d");
  return r;
}

StudyResult run_nets(const ExperimentConfig& c) {
  const auto fc = family_config(c);
  auto fam = TileFamily::build(fc);
  std::mt19937_64 rng(*c.seed);
  StudyResult r;
  r.study = "nets";
  Table t{"nets", {"cube", "scale", "tiles", "min_separation", "max_cover", "samples", "lattice_exact"}, {}};
  double min_sep = std::numeric_limits<double>::infinity(), max_cover = 0;
  bool exact_all = true;
  const bool line = fc.dim == 1 && fc.degree == 1;
  constexpr std::size_t kCoverSamples = 400;
  for (const auto& net : fam.nets()) {
    const auto tiles = net.tiles();
    double sep = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < tiles.size(); ++i)
      for (std::size_t j = i + 1; j < tiles.size(); ++j)
        sep = std::min(sep, geom_factor(tiles[i].center - tiles[j].center, net.cube()));
    const auto window = fc.window(net.cube().scale());
    const std::size_t lattice = window.lattice_size();
    const std::size_t stride = std::max<std::size_t>(1, lattice / kCoverSamples);
    std::uniform_int_distribution<std::size_t> jitter(0, stride - 1);
    double cover = 0;
    std::size_t sampled = 0;
    for (std::size_t f = jitter(rng); f < lattice; f += stride) {
      auto g = grad(window.potential(f));
      cover = std::max(cover, net.distance(g, net.owner(g)));
      ++sampled;
    }
    bool exact = true;
    if (line) {
      // Expected: every multiple of 2^k inside the window.
      const double unit = net.cube().side() > 0 ? 1.0 / net.cube().side() : 1.0;
      const double bound = window.bound[0];
      const auto count = static_cast<std::size_t>(std::floor(bound / unit)) * 2 + 1;
      exact = tiles.size() == count;
      for (std::size_t i = 0; exact && i < tiles.size(); ++i) {
        const double a = tiles[i].center_potential.coeff(MultiIndex{1});
        exact = std::abs(a / unit - std::round(a / unit)) < 1e-12 && std::abs(a) <= bound + 1e-12;
      }
      exact_all = exact_all && exact;
    }
    if (tiles.size() > 1) min_sep = std::min(min_sep, sep);
    max_cover = std::max(max_cover, cover);
    t.add({format_cube(net.cube()), num(net.cube().scale()), num(tiles.size()), num(sep), num(cover), num(sampled),
           line ? (exact ? "1" : "0") : ""});
  }
  r.tables.push_back(std::move(t));
  r.summary["tiles"] = fam.tiles().size();
  r.summary["min_separation"] = min_sep;
  r.summary["max_cover"] = max_cover;
  if (line) r.summary["lattice_exact"] = exact_all;
  r.require(min_sep >= 1.0 - 1e-6, "net separation " + num(min_sep) + " below 1");
  r.require(max_cover <= 1.0, "sampled covering radius " + num(max_cover) + " above 1");
  if (line) r.require(exact_all, "m=1, d=1 nets differ from the 2^k lattice");
  return r;
}

StudyResult run_decompose(const ExperimentConfig& c) {
  const auto fc = family_config(c);
  auto fam = TileFamily::build(fc);
  auto kd = build_psi(fc.dim, fc.k_max);
  StudyResult r;
  r.study = "decompose";
  Table t{"residuals", {"trial", "scale", "residual", "relative"}, {}};
  double worst = 0;
  for (int trial = 0; trial < *c.trials; ++trial) {
    std::mt19937_64 rng(trial_seed(*c.seed, trial));
    auto symbol = LinearizingSymbol::random(rng, fc.window(0), *c.cell_bits);
    auto f = random_grid_function(rng, fc.dim, *c.grid_bits, *c.cell_bits, fc.k_max);
    TileOperator op(fam, symbol, kd, *c.grid_bits);
    const double sup = f.sup_norm();
    for (const auto& s : op.decomposition_check(f)) {
      const double rel = sup > 0 ? s.residual / sup : s.residual;
      worst = std::max(worst, rel);
      t.add({num(trial), num(s.scale), num(s.residual), num(rel)});
    }
  }
  r.tables.push_back(std::move(t));
  r.summary["tiles"] = fam.tiles().size();
  r.summary["residual_max"] = worst;
  r.require(worst <= 1e-12, "decomposition residual " + num(worst) + " above 1e-12 ||f||_inf");
  return r;
}

StudyResult run_interact(const ExperimentConfig& c) {
  const auto fc = family_config(c);
  auto fam = TileFamily::build(fc);
  auto kd = build_psi(fc.dim, fc.k_max);
  std::mt19937_64 rng(*c.seed);
  auto symbol = LinearizingSymbol::random(rng, fc.window(0), *c.cell_bits);
  TileOperator coarse(fam, symbol, kd, *c.grid_bits);
  TileOperator fine(fam, symbol, kd, *c.grid_bits + 1);

  // Pairs with a nonempty E(P2) on both grids; others have ratio 0 by definition.
  std::vector<std::size_t> live;
  for (std::size_t id = 0; id < fam.tiles().size(); ++id)
    if (!coarse.e_set(id).empty() && !fine.e_set(id).empty()) live.push_back(id);
  StudyResult r;
  r.study = "interact";
  Table t{"pairs", {"pair", "p1", "p2", "scale1", "scale2", "delta", "lhs", "rhs", "ratio", "ratio_doubled"}, {}};
  double max_c = 0, max_f = 0;
  if (!live.empty()) {
    std::uniform_int_distribution<std::size_t> any(0, fam.tiles().size() - 1), pick(0, live.size() - 1);
    for (int i = 0; i < *c.trials; ++i) {
      const std::size_t p1 = any(rng), p2 = live[pick(rng)];
      auto fc_ = random_grid_function(rng, fc.dim, *c.grid_bits, *c.cell_bits, fc.k_max);
      // Same piecewise-constant function on the doubled grid.
      auto ff = GridFunction::zeros(fc.dim, *c.grid_bits + 1, fc.k_max);
      const Grid gf = ff.grid(), gc = fc_.grid();
      std::vector<std::size_t> xy(fc.dim);
      for (std::size_t x = 0; x < ff.values.size(); ++x) {
        gf.coords(x, xy);
        for (auto& v : xy) v /= 2;
        ff.values[x] = fc_.values[gc.index(xy)];
      }
      auto a = coarse.interaction(p1, p2, fc_);
      auto b = fine.interaction(p1, p2, ff);
      max_c = std::max(max_c, a.ratio);
      max_f = std::max(max_f, b.ratio);
      const auto tiles = fam.tiles();
      t.add({num(i), num(p1), num(p2), num(tiles[p1].scale()), num(tiles[p2].scale()), num(a.delta), num(a.lhs),
             num(a.rhs), num(a.ratio), num(b.ratio)});
    }
  }
  r.tables.push_back(std::move(t));
  const double stability = max_c > 0 ? max_f / max_c : 0.0;
  r.summary["pairs"] = *c.trials;
  r.summary["live_tiles"] = live.size();
  r.summary["max_ratio"] = max_c;
  r.summary["max_ratio_doubled"] = max_f;
  r.summary["stability"] = stability;
  r.require(std::isfinite(max_c) && std::isfinite(max_f), "interaction ratio is unbounded");
  r.require(max_c > 0, "no interacting pair among the samples");
  r.require(std::abs(stability - 1.0) <= 0.25, "max ratio moved by " + num(stability) + "x under grid doubling");
  return r;
}

}  // namespace detail

StudyResult run_study(const ExperimentConfig& config) {
  const ExperimentConfig c = resolve(config);
  const std::string& s = c.study;
  if (s == "vdc") return detail::run_vdc(c);
  if (s == "levelset") return detail::run_levelset(c);
  if (s == "nets") return detail::run_nets(c);
  if (s == "decompose") return detail::run_decompose(c);
  if (s == "interact") return detail::run_interact(c);
  if (s == "mass") return detail::run_mass(c);
  if (s == "stopping") return detail::run_stopping(c);
  if (s == "trees") return detail::run_trees(c);
  return detail::run_rows(c);
}

}  // namespace polycarl
