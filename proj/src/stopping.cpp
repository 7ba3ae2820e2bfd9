#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "polycarl/errors.hpp"
#include "polycarl/massforest.hpp"

namespace polycarl {

std::vector<DyadicCube> maximal_cubes(std::vector<DyadicCube> cubes) {
  std::sort(cubes.begin(), cubes.end());
  cubes.erase(std::unique(cubes.begin(), cubes.end()), cubes.end());
  std::stable_sort(cubes.begin(), cubes.end(),
                   [](const DyadicCube& a, const DyadicCube& b) { return a.scale() < b.scale(); });
  std::vector<DyadicCube> out;
  for (const auto& c : cubes)
    if (std::none_of(out.begin(), out.end(), [&](const DyadicCube& o) { return contains(o, c); }))
      out.push_back(c);
  std::sort(out.begin(), out.end());
  return out;
}

bool dominated(std::span<const DyadicCube> a, std::span<const DyadicCube> b) {
  return std::all_of(a.begin(), a.end(), [&](const DyadicCube& x) {
    return std::any_of(b.begin(), b.end(), [&](const DyadicCube& y) { return contains(y, x); });
  });
}

bool strongly_nested(std::span<const DyadicCube> a, std::span<const DyadicCube> b) {
  if (!dominated(a, b)) return false;
  for (const auto& x : a)
    for (const auto& y : b)
      if (!disjoint(x, y) && !contains(y, x)) return false;
  return true;
}

double domination_constant(std::span<const DyadicCube> a, std::span<const DyadicCube> b) {
  if (!dominated(a, b)) return -1.0;
  double c = std::numeric_limits<double>::infinity();
  for (const auto& y : b) {
    std::vector<DyadicCube> inside;
    for (const auto& x : a)
      if (contains(y, x)) inside.push_back(x);
    double covered = 0.0;
    for (const auto& x : maximal_cubes(std::move(inside))) covered += x.volume();
    if (covered > 0) c = std::min(c, -std::log(covered / y.volume()));
  }
  return c;
}

double counting_sup(const TileFamily& family, std::span<const std::size_t> tiles) {
  const auto all = family.tiles();
  const int m = family.config().dim;
  const int fine = family.config().k_max;
  double best = 0.0;
  for (const auto& f : cubes_at_scale(fine, m, fine)) {
    std::size_t count = 0;
    for (auto id : tiles)
      if (contains(all[id].cube, f)) ++count;
    best = std::max(best, static_cast<double>(count));
  }
  return best;
}

namespace {

// n with value in (2^{-n}, 2^{-n+1}]; 0 for a zero value.
int mass_bucket(double value) {
  if (!(value > 0)) return 0;
  int e = 0;
  const double f = std::frexp(value, &e);
  return f == 0.5 ? 2 - e : 1 - e;
}

bool inside_any(const DyadicCube& c, std::span<const DyadicCube> cubes) {
  return std::any_of(cubes.begin(), cubes.end(), [&](const DyadicCube& s) { return contains(s, c); });
}

std::vector<DyadicCube> all_cubes(const TileFamily& family) {
  std::vector<DyadicCube> out;
  for (const auto& net : family.nets()) out.push_back(net.cube());
  return out;
}

}  // namespace

StoppingPartition stopping_partition(const MassEngine& engine, const OrderOracle& order,
                                     std::span<const std::size_t> tiles, double c0, int exponent) {
  if (exponent != engine.exponent()) throw InvalidInput("mass exponent differs from the engine");
  StoppingPartition out;
  out.c0 = c0;
  if (tiles.empty()) return out;
  const TileFamily& family = engine.family();
  const auto all = family.tiles();
  const int m = family.config().dim;
  const int fine = family.config().k_max;
  const auto finest = cubes_at_scale(fine, m, fine);
  const auto cubes = all_cubes(family);

  std::vector<DyadicCube> top;
  for (auto id : tiles) top.push_back(all[id].cube);
  top = maximal_cubes(std::move(top));

  std::map<int, std::vector<std::size_t>> by_n;
  for (auto id : tiles) by_n[mass_bucket(engine.mass(id, top, tiles).value)].push_back(id);
  if (by_n.count(0)) throw InvalidInput("zero-mass tile: every cube needs a tile of positive density");

  for (const auto& [n, members] : by_n) {
    StoppingLevel level;
    level.n = n;
    level.cubes.push_back(top);
    const double threshold = std::ldexp(1.0, -n);
    while (true) {
      const auto& s = level.cubes.back();
      std::vector<std::size_t> eligible;
      for (auto id : tiles)
        if (engine.density(id) > threshold && inside_any(all[id].cube, s)) eligible.push_back(id);
      std::vector<std::size_t> maximal;
      for (auto p : eligible) {
        bool dominated_by_other = std::any_of(eligible.begin(), eligible.end(), [&](std::size_t q) {
          return all[q].cube.volume() > all[p].cube.volume() && order.leq(p, q);
        });
        if (!dominated_by_other) maximal.push_back(p);
      }
      level.maximal.push_back(maximal);

      // Counting function on the finest cubes.
      std::map<DyadicCube, std::size_t> count;
      for (const auto& f : finest) {
        std::size_t c = 0;
        for (auto p : maximal)
          if (contains(all[p].cube, f)) ++c;
        count[f] = c;
      }
      std::vector<DyadicCube> next;
      for (const auto& j : cubes) {
        bool strict = std::any_of(s.begin(), s.end(), [&](const DyadicCube& c) { return contains(c, j) && !(c == j); });
        if (!strict) continue;
        bool heavy = true;
        for (const auto& f : finest)
          if (contains(j, f) && static_cast<double>(count[f]) < c0 * n) {
            heavy = false;
            break;
          }
        if (heavy) next.push_back(j);
      }
      if (next.empty()) break;
      level.cubes.push_back(maximal_cubes(std::move(next)));
    }
    level.tiles.assign(level.cubes.size(), {});
    for (auto id : members) {
      std::size_t k = 0;
      while (k + 1 < level.cubes.size() && inside_any(all[id].cube, level.cubes[k + 1])) ++k;
      level.tiles[k].push_back(id);
      out.masses.push_back(engine.mass(id, level.cubes[k], tiles));
    }
    out.levels.push_back(std::move(level));
  }
  return out;
}

bool ContractReport::pass() const {
  return std::all_of(bullets.begin(), bullets.end(), [](const ContractBullet& b) { return b.pass; });
}

const ContractBullet& ContractReport::bullet(const std::string& id) const {
  for (const auto& b : bullets)
    if (b.id == id) return b;
  throw InvalidInput("no contract bullet " + id);
}

ContractReport check_contract(const StoppingPartition& partition, const MassEngine& engine,
                              const OrderOracle& order, std::span<const std::size_t> tiles,
                              const StoppingConfig& config) {
  (void)order;
  const auto all = engine.family().tiles();
  const double inf = std::numeric_limits<double>::infinity();
  ContractReport r;

  ContractBullet nested{"nested_levels", true, 0, ""};
  for (const auto& level : partition.levels)
    for (std::size_t k = 0; k + 1 < level.cubes.size(); ++k)
      if (!strongly_nested(level.cubes[k + 1], level.cubes[k])) {
        nested.pass = false;
        nested.detail = "n=" + std::to_string(level.n) + " k=" + std::to_string(k + 1);
      }
  r.bullets.push_back(nested);

  ContractBullet decay{"level_decay", true, inf, ""};
  for (const auto& level : partition.levels)
    for (std::size_t k = 1; k < level.cubes.size(); ++k)
      for (std::size_t kp = 0; kp < k; ++kp) {
        const double c = domination_constant(level.cubes[k], level.cubes[kp]) / static_cast<double>(k - kp);
        if (c < decay.fitted_constant) {
          decay.fitted_constant = c;
          decay.detail = "n=" + std::to_string(level.n) + " k=" + std::to_string(k + 1) +
                         " k'=" + std::to_string(kp + 1);
        }
      }
  decay.pass = decay.fitted_constant > 0;
  r.bullets.push_back(decay);

  ContractBullet generations{"generation_order", true, 0, ""};
  for (std::size_t i = 0; i < partition.levels.size(); ++i)
    for (std::size_t j = 0; j < i; ++j) {
      std::vector<DyadicCube> hi, lo;
      for (const auto& s : partition.levels[i].cubes) hi.insert(hi.end(), s.begin(), s.end());
      for (const auto& s : partition.levels[j].cubes) lo.insert(lo.end(), s.begin(), s.end());
      if (!dominated(hi, lo)) {
        generations.pass = false;
        generations.detail = "n=" + std::to_string(partition.levels[i].n);
      }
    }
  r.bullets.push_back(generations);

  ContractBullet unique{"unique_assignment", true, 0, ""};
  ContractBullet bracket{"mass_bracket", true, 0, ""};
  std::map<std::size_t, int> seen;
  for (const auto& level : partition.levels)
    for (std::size_t k = 0; k < level.tiles.size(); ++k)
      for (auto id : level.tiles[k]) {
        ++seen[id];
        const DyadicCube& c = all[id].cube;
        if (!inside_any(c, level.cubes[k]) || (k + 1 < level.cubes.size() && inside_any(c, level.cubes[k + 1]))) {
          unique.pass = false;
          unique.detail = "tile " + std::to_string(id) + " sits at the wrong level";
        }
        const double v = engine.mass(id, level.cubes[k], tiles).value;
        const double lo = std::ldexp(1.0, -level.n);
        if (!(v > lo && v <= 2 * lo)) {
          bracket.pass = false;
          bracket.fitted_constant += 1;
          bracket.detail = "tile " + std::to_string(id) + " mass " + std::to_string(v) + " at n=" +
                           std::to_string(level.n);
        }
      }
  for (auto id : tiles)
    if (seen[id] != 1) {
      unique.pass = false;
      unique.detail = "tile " + std::to_string(id) + " assigned " + std::to_string(seen[id]) + " times";
    }
  if (seen.size() != tiles.size()) unique.pass = false;
  r.bullets.push_back(unique);
  r.bullets.push_back(bracket);

  ContractBullet counting{"counting_bound", true, 0, ""};
  for (const auto& level : partition.levels)
    for (const auto& maximal : level.maximal) {
      const double c = counting_sup(engine.family(), maximal) / (level.n * std::ldexp(1.0, level.n));
      counting.fitted_constant = std::max(counting.fitted_constant, c);
    }
  counting.pass = counting.fitted_constant <= config.counting_bound;
  r.bullets.push_back(counting);
  return r;
}

StoppingResult run_stopping(const MassEngine& engine, const OrderOracle& order,
                            std::span<const std::size_t> tiles, const StoppingConfig& config) {
  StoppingResult out;
  double c0 = config.c0;
  for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
    out.partition = stopping_partition(engine, order, tiles, c0, config.exponent);
    out.report = check_contract(out.partition, engine, order, tiles, config);
    out.attempts = attempt + 1;
    if (out.report.pass()) return out;
    c0 *= 2;
  }
  out.flagged = true;
  return out;
}

}  // namespace polycarl
