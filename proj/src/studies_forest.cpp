#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "polycarl/massforest.hpp"
#include "polycarl/oscillatory.hpp"
#include "study_common.hpp"

namespace polycarl::detail {

namespace {

std::string describe(const Tile& t) {
  return format_cube(t.cube) + "#" + std::to_string(t.net_index);
}

std::vector<std::size_t> all_ids(const TileFamily& f) {
  std::vector<std::size_t> ids(f.tiles().size());
  std::iota(ids.begin(), ids.end(), 0);
  return ids;
}

}  // namespace

StudyResult run_mass(const ExperimentConfig& c) {
  const auto fc = family_config(c);
  auto fam = TileFamily::build(fc);
  OrderOracle order(fam, order_universe(fc));
  auto kd = build_psi(fc.dim, fc.k_max);
  auto symbols = coarse_concentrated_symbols(fam);
  std::mt19937_64 rng(*c.seed);
  for (int i = 0; i < *c.trials; ++i) symbols.push_back(LinearizingSymbol::random(rng, fc.window(0), 3));
  auto found = monotonicity_violation_search(fam, order, symbols, kd, *c.grid_bits, c.exponent);

  StudyResult r;
  r.study = "mass";
  r.summary["tiles"] = fam.tiles().size();
  r.summary["symbols_scanned"] = found.symbols_scanned;
  r.summary["pairs_scanned"] = found.pairs_scanned;
  r.summary["mass_exceptions"] = found.mass_exceptions;
  r.summary["witness"] = found.witness.has_value();
  Table t{"witness", {"role", "tile", "scale", "slope", "zk_mass", "zk_mass_refined", "mass"}, {}};
  if (found.witness) {
    const auto& w = *found.witness;
    const auto tiles = fam.tiles();
    TileOperator op(fam, symbols[w.symbol], kd, *c.grid_bits);
    const auto fine_grid = lambda_grid(8, 81);
    double change = 0;
    auto row = [&](const char* role, std::size_t id, double zk, double mass) {
      const double refined = zk_mass(op, id, c.exponent, fine_grid);
      change = std::max(change, std::abs(refined - zk) / std::max({zk, refined, 1e-300}));
      t.add({role, describe(tiles[id]), num(tiles[id].scale()),
             num(tiles[id].center_potential.coeff(MultiIndex{1})), num(zk), num(refined), num(mass)});
    };
    row("fine", w.fine, w.zk_fine, w.mass_fine);
    row("coarse", w.coarse, w.zk_coarse, w.mass_coarse);
    r.summary["symbol"] = w.symbol;
    r.summary["zk_fine"] = w.zk_fine;
    r.summary["zk_coarse"] = w.zk_coarse;
    r.summary["mass_fine"] = w.mass_fine;
    r.summary["mass_coarse"] = w.mass_coarse;
    r.summary["lambda_refinement_change"] = change;
    r.require(w.mass_fine >= w.mass_coarse, "original mass is not monotone on the witness");
    r.require(change <= 0.05, "lambda refinement moved zk mass by " + num(change));
  }
  r.tables.push_back(std::move(t));
  r.require(found.witness.has_value(), "no zk-mass monotonicity witness found");
  return r;
}

StudyResult run_stopping(const ExperimentConfig& c) {
  const auto fc = family_config(c);
  auto fam = TileFamily::build(fc);
  OrderOracle order(fam, order_universe(fc));
  auto kd = build_psi(fc.dim, fc.k_max);
  const auto ids = c.empty_window ? std::vector<std::size_t>{} : all_ids(fam);
  StoppingConfig sc;
  sc.exponent = c.exponent;
  sc.c0 = c.c0;
  sc.counting_bound = c.counting_bound;

  StudyResult r;
  r.study = "stopping";
  Table contract{"contract", {"symbol", "bullet", "pass", "fitted_constant", "detail"}, {}};
  Table levels{"levels", {"symbol", "n", "k", "cubes", "maximal", "tiles"}, {}};
  Table decay{"decay", {"symbol", "n", "ratio"}, {}};
  nlohmann::ordered_json dumps = nlohmann::ordered_json::array();
  double counting = 0;
  int flagged = 0, max_attempts = 0;
  std::vector<double> etas;
  for (int s = 0; s < *c.trials; ++s) {
    std::mt19937_64 rng(trial_seed(*c.seed, s));
    TileOperator op(fam, LinearizingSymbol::random(rng, fc.window(0), *c.cell_bits), kd, *c.grid_bits);
    MassEngine engine(op, c.exponent);
    auto res = polycarl::run_stopping(engine, order, ids, sc);
    flagged += res.flagged;
    max_attempts = std::max(max_attempts, res.attempts);
    for (const auto& b : res.report.bullets) {
      contract.add({num(s), b.id, b.pass ? "1" : "0", num(b.fitted_constant), b.detail});
      r.require(b.pass, "symbol " + std::to_string(s) + ": bullet " + b.id + " fails " + b.detail);
    }
    counting = std::max(counting, res.report.bullet("counting_bound").fitted_constant);
    nlohmann::ordered_json dump;
    dump["symbol"] = s;
    dump["c0"] = res.partition.c0;
    dump["levels"] = nlohmann::ordered_json::array();
    for (const auto& lv : res.partition.levels) {
      for (std::size_t k = 0; k < lv.cubes.size(); ++k) {
        levels.add({num(s), num(lv.n), num(k + 1), num(lv.cubes[k].size()), num(lv.maximal[k].size()),
                    num(lv.tiles[k].size())});
        nlohmann::ordered_json e;
        e["n"] = lv.n;
        e["k"] = k + 1;
        std::vector<std::string> cubes;
        for (const auto& q : lv.cubes[k]) cubes.push_back(format_cube(q));
        e["cubes"] = cubes;
        e["tiles"] = lv.tiles[k];
        dump["levels"].push_back(e);
      }
    }
    dumps.push_back(dump);
    if (!ids.empty()) {
      auto f = random_grid_function(rng, fc.dim, *c.grid_bits, *c.cell_bits, fc.k_max);
      auto md = main_proposition_decay(op, res.partition, f);
      for (std::size_t i = 0; i < md.n.size(); ++i) decay.add({num(s), num(md.n[i]), num(md.ratio[i])});
      if (md.n.size() >= 2) etas.push_back(md.eta);
    }
  }
  r.tables.push_back(std::move(contract));
  r.tables.push_back(std::move(levels));
  r.tables.push_back(std::move(decay));
  r.summary["tiles"] = ids.size();
  r.summary["symbols"] = *c.trials;
  r.summary["counting_constant"] = counting;
  r.summary["max_attempts"] = max_attempts;
  r.summary["flagged"] = flagged;
  r.summary["eta_min"] = etas.empty() ? nlohmann::ordered_json() : nlohmann::ordered_json(*std::min_element(etas.begin(), etas.end()));
  r.summary["partitions"] = dumps;
  r.require(counting <= c.counting_bound, "counting constant " + num(counting) + " above D");
  return r;
}

StudyResult run_trees(const ExperimentConfig& c) {
  SeparationSweepConfig sc;
  sc.degree = *c.degree;
  sc.k_max = *c.k_max;
  sc.grid_bits = *c.grid_bits;
  sc.cell_bits = *c.cell_bits;
  sc.trials = *c.trials;
  sc.seed = *c.seed;
  std::vector<double> deltas;
  for (int j = 2; j <= 8; ++j) deltas.push_back(std::ldexp(1.0, -j));
  auto sweep = separated_tree_sweep(deltas, sc);

  StudyResult r;
  r.study = "trees";
  Table t{"sweep", {"delta", "shift", "mean_inner", "max_ratio"}, {}};
  Plot p{"sweep", "separated-tree inner products", "delta", "mean |<T1* f, T2* g>|", {}};
  for (const auto& row : sweep.rows) {
    t.add({num(row.delta), num(row.shift), num(row.mean_inner), num(row.max_ratio)});
    p.points.emplace_back(row.delta, row.mean_inner);
  }
  r.tables.push_back(std::move(t));
  r.plots.push_back(std::move(p));
  const double limit = 1.0 / (2.0 * *c.degree) - 0.2;
  r.summary["exponent"] = sweep.exponent;
  r.summary["exponent_limit"] = limit;
  r.summary["max_ratio"] = sweep.max_ratio;
  r.require(sweep.exponent >= limit, "decay exponent " + num(sweep.exponent) + " below " + num(limit));
  r.require(std::isfinite(sweep.max_ratio), "separated-tree ratios are unbounded");
  return r;
}

StudyResult run_rows(const ExperimentConfig& c) {
  const auto fc = family_config(c);
  auto fam = TileFamily::build(fc);
  auto kd = build_psi(fc.dim, fc.k_max);
  const auto tiles = fam.tiles();
  const auto ids = all_ids(fam);

  StudyResult r;
  r.study = "rows";
  Table t{"pairs", {"symbol", "row_j", "row_k", "star_first", "star_last"}, {}};
  double worst_first = 0, worst_last = 0;
  for (int s = 0; s < *c.trials; ++s) {
    std::mt19937_64 rng(trial_seed(*c.seed, s));
    TileOperator op(fam, LinearizingSymbol::random(rng, fc.window(0), *c.cell_bits), kd, *c.grid_bits);
    // One row per scale-1 cube: a tree whose top is a random tile there,
    // members drawn from inside the top cube.
    std::vector<Row> rows;
    for (const auto& net : fam.nets()) {
      if (net.cube().scale() != std::min(1, fc.k_max)) continue;
      std::uniform_int_distribution<std::size_t> pick(0, net.tiles().size() - 1);
      const std::size_t top = fam.id_of(net.cube(), pick(rng));
      std::vector<std::size_t> inside;
      for (auto id : ids)
        if (contains(net.cube(), tiles[id].cube)) inside.push_back(id);
      rows.push_back(Row{{build_tree(fam, top, inside)}});
    }
    auto rep = forest_rows_orthogonality_check(op, rows);
    for (const auto& p : rep.pairs) t.add({num(s), num(p.j), num(p.k), num(p.star_first), num(p.star_last)});
    worst_first = std::max(worst_first, rep.max_star_first);
    worst_last = std::max(worst_last, rep.max_star_last);
  }
  r.tables.push_back(std::move(t));
  r.summary["max_star_first"] = worst_first;
  r.summary["max_star_last"] = worst_last;
  r.require(worst_first <= 1e-10, "starred-first row composition has norm " + num(worst_first));
  return r;
}

}  // namespace polycarl::detail
