#include "polycarl/tiles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "polycarl/errors.hpp"

namespace polycarl {

FrequencyWindow FrequencyWindow::scaled(int dim, int degree, int scale, double bound_factor,
                                        double step_factor) {
  FrequencyWindow w;
  w.dim = dim;
  w.degree = degree;
  const std::size_t n = polycarl::monomials(dim, 1, degree).size();
  const double s = std::ldexp(1.0, scale);
  w.center.assign(n, 0.0);
  w.bound.assign(n, bound_factor * s);
  w.step.assign(n, step_factor * s);
  return w;
}

FrequencyWindow FrequencyWindow::uniform(int dim, int degree, double bound, double step) {
  FrequencyWindow w;
  w.dim = dim;
  w.degree = degree;
  const std::size_t n = polycarl::monomials(dim, 1, degree).size();
  w.center.assign(n, 0.0);
  w.bound.assign(n, bound);
  w.step.assign(n, step);
  return w;
}

std::vector<MultiIndex> FrequencyWindow::monomials() const {
  return polycarl::monomials(dim, 1, degree);
}

std::size_t FrequencyWindow::axis_count(std::size_t k) const {
  if (!(step[k] > 0.0)) throw InvalidInput("window lattice step must be positive");
  if (bound[k] < 0.0) throw InvalidInput("window bound must be nonnegative");
  return static_cast<std::size_t>(std::floor(2.0 * bound[k] / step[k] + 1e-9)) + 1;
}

std::size_t FrequencyWindow::lattice_size() const {
  double total = 1.0;
  for (std::size_t k = 0; k < bound.size(); ++k) total *= static_cast<double>(axis_count(k));
  if (total > 1e15) return static_cast<std::size_t>(1e15);
  return static_cast<std::size_t>(total);
}

double FrequencyWindow::lattice_value(std::size_t k, std::size_t j) const {
  return center[k] - bound[k] + static_cast<double>(j) * step[k];
}

Polynomial FrequencyWindow::potential(std::size_t flat) const {
  auto mons = monomials();
  std::vector<Term> terms(mons.size());
  for (std::size_t k = mons.size(); k-- > 0;) {
    std::size_t n = axis_count(k);
    terms[k] = {mons[k], lattice_value(k, flat % n)};
    flat /= n;
  }
  return Polynomial::from_terms(dim, degree, std::move(terms));
}

bool FrequencyWindow::contains(const Polynomial& q) const {
  auto mons = monomials();
  if (q.dim() != dim || q.degree() > degree || q.has_constant_term()) return false;
  for (std::size_t k = 0; k < mons.size(); ++k)
    if (std::abs(q.coeff(mons[k]) - center[k]) > bound[k] * (1 + 1e-12)) return false;
  return true;
}

Tile make_tile(const DyadicCube& cube, const Polynomial& potential, int net_index) {
  Polynomial q = potential.without_constant();
  return Tile{cube, grad(q), q, net_index};
}

CubeNet::CubeNet(DyadicCube cube, int degree)
    : cube_(std::move(cube)), sampler_(cube_, degree - 1) {}

void CubeNet::add(Tile tile) {
  center_samples_.push_back(sampler_.sample(tile.center));
  tiles_.push_back(std::move(tile));
}

double CubeNet::distance(const GradientField& field, std::size_t index) const {
  auto s = sampler_.sample(field);
  return sampler_.distance(s, center_samples_[index]);
}

std::size_t CubeNet::owner_of_samples(std::span<const double> samples) const {
  if (tiles_.empty()) throw InvalidInput("no tiles on cube " + format_cube(cube_));
  std::size_t best = 0;
  double best_d = INFINITY;
  for (std::size_t i = 0; i < tiles_.size(); ++i) {
    double d = sampler_.distance(samples, center_samples_[i]);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

std::size_t CubeNet::owner(const GradientField& field) const {
  return owner_of_samples(sampler_.sample(field));
}

CubeNet build_net(const DyadicCube& cube, const FrequencyWindow& window,
                  std::size_t lattice_budget) {
  if (window.dim != cube.dim()) throw InvalidInput("window and cube dimensions differ");
  const std::size_t total = window.lattice_size();
  if (total > lattice_budget)
    throw ResourceLimit("frequency window lattice has " + std::to_string(total) +
                            " points, budget is " + std::to_string(lattice_budget),
                        static_cast<double>(total));
  CubeNet net(cube, window.degree);
  std::vector<std::vector<double>> accepted;
  for (std::size_t flat = 0; flat < total; ++flat) {
    Polynomial q = window.potential(flat);
    GradientField g = grad(q);
    auto s = net.sampler().sample(g);
    bool separated = true;
    for (const auto& a : accepted) {
      if (net.sampler().distance(s, a) < 1.0) {
        separated = false;
        break;
      }
    }
    if (!separated) continue;
    accepted.push_back(s);
    net.add(Tile{cube, std::move(g), std::move(q), static_cast<int>(net.tiles().size())});
  }
  return net;
}

const Tile& voronoi_owner(const GradientField& field, std::span<const Tile> tiles_on_cube) {
  if (tiles_on_cube.empty()) throw InvalidInput("voronoi_owner needs at least one tile");
  const DyadicCube& cube = tiles_on_cube.front().cube;
  int degree = std::max(field.max_degree(), 0);
  for (const auto& t : tiles_on_cube) {
    if (!(t.cube == cube)) throw InvalidInput("voronoi_owner tiles must share one cube");
    degree = std::max(degree, t.center.max_degree());
  }
  CubeSampler sampler(cube, degree);
  auto s = sampler.sample(field);
  const Tile* best = nullptr;
  double best_d = INFINITY;
  for (const auto& t : tiles_on_cube) {
    double d = sampler.distance(s, sampler.sample(t.center));
    if (d < best_d || (d == best_d && t.net_index < best->net_index)) {
      best_d = d;
      best = &t;
    }
  }
  return *best;
}

bool member(const GradientField& field, const DilatedTile& tile) {
  return tile_relative_factor(field, tile.base) <= 0.5 * tile.factor;
}

Polynomial central_polynomial_1d(std::span<const double> nodes, std::span<const double> values) {
  if (nodes.size() != values.size() || nodes.empty())
    throw InvalidInput("central polynomial needs matching, nonempty nodes and values");
  const int d = static_cast<int>(nodes.size());
  for (int j = 0; j < d; ++j)
    for (int k = j + 1; k < d; ++k)
      if (nodes[j] == nodes[k]) throw InvalidInput("coincident interpolation nodes");
  Polynomial result(1, d - 1);
  for (int j = 0; j < d; ++j) {
    Polynomial basis = Polynomial::constant(1, 0, values[j]);
    for (int k = 0; k < d; ++k) {
      if (k == j) continue;
      const double denom = nodes[j] - nodes[k];
      Polynomial factor = Polynomial::from_terms(
          1, 1, {Term{MultiIndex{1}, 1.0 / denom}, Term{MultiIndex{0}, -nodes[k] / denom}});
      basis = basis * factor;
    }
    result += basis;
  }
  return Polynomial::from_terms(1, d - 1, {result.terms().begin(), result.terms().end()});
}

std::vector<std::vector<Tile>> separation_classes(std::span<const Tile> tiles, int separation) {
  if (separation < 1) throw InvalidInput("separation parameter D must be >= 1");
  return separation_classes<Tile>(tiles, separation, [](const Tile& t) { return t.scale(); });
}

FrequencyWindow FamilyConfig::window(int scale) const {
  FrequencyWindow w = mode == WindowMode::kScaled
                          ? FrequencyWindow::scaled(dim, degree, scale, bound_factor, step_factor)
                          : FrequencyWindow::uniform(dim, degree, bound_factor * std::ldexp(1.0, k_max),
                                                     step_factor * std::ldexp(1.0, scale));
  if (!bound_override.empty()) {
    if (bound_override.size() != w.bound.size())
      throw InvalidInput("bound override needs one entry per monomial");
    w.bound = bound_override;
  }
  return w;
}

FrequencyWindow order_universe(const FamilyConfig& config, double dilation) {
  const double base = config.bound_factor * std::ldexp(1.0, config.k_max);
  FrequencyWindow w = FrequencyWindow::uniform(config.dim, config.degree, base, config.step_factor);
  auto mons = w.monomials();
  for (std::size_t k = 0; k < mons.size(); ++k) {
    double margin = 0.5 * dilation * std::ldexp(1.0, config.k_max * mons[k].total());
    // Keep the lattice aligned with the family window.
    const double b = config.bound_override.empty() ? base : config.bound_override[k];
    w.bound[k] = b + std::ceil(margin / w.step[k]) * w.step[k];
  }
  return w;
}

TileFamily TileFamily::build(const FamilyConfig& config) {
  TileFamily fam;
  fam.config_ = config;
  for (int k = 0; k <= config.k_max; ++k) {
    FrequencyWindow w = config.window(k);
    for (const auto& cube : cubes_at_scale(k, config.dim, config.k_max)) {
      fam.index_.emplace(cube, fam.nets_.size());
      fam.first_id_.push_back(fam.tiles_.size());
      fam.nets_.push_back(build_net(cube, w, config.lattice_budget));
      for (const auto& t : fam.nets_.back().tiles()) fam.tiles_.push_back(t);
    }
  }
  return fam;
}

std::size_t TileFamily::net_position(const DyadicCube& cube) const {
  auto it = index_.find(cube);
  if (it == index_.end()) throw InvalidInput("no net on cube " + format_cube(cube));
  return it->second;
}

const CubeNet& TileFamily::net_of(const DyadicCube& cube) const {
  return nets_[net_position(cube)];
}

std::size_t TileFamily::id_of(const DyadicCube& cube, std::size_t net_index) const {
  return first_id_[net_position(cube)] + net_index;
}

std::size_t TileFamily::id_of(const Tile& tile) const {
  return id_of(tile.cube, static_cast<std::size_t>(tile.net_index));
}

OrderOracle::OrderOracle(const TileFamily& family, const FrequencyWindow& universe)
    : family_(&family), universe_size_(universe.lattice_size()) {
  if (universe_size_ > family.config().lattice_budget)
    throw ResourceLimit("order universe too large", static_cast<double>(universe_size_));
  auto nets = family.nets();
  cells_.assign(family.tiles().size(), {});
  samples_.resize(nets.size());
  std::vector<GradientField> fields;
  fields.reserve(universe_size_);
  for (std::size_t u = 0; u < universe_size_; ++u) fields.push_back(grad(universe.potential(u)));
  for (std::size_t c = 0; c < nets.size(); ++c) {
    const CubeNet& net = nets[c];
    samples_[c].reserve(universe_size_);
    const std::size_t first = family.id_of(net.cube(), 0);
    for (std::size_t u = 0; u < universe_size_; ++u) {
      samples_[c].push_back(net.sampler().sample(fields[u]));
      cells_[first + net.owner_of_samples(samples_[c].back())].push_back(u);
    }
  }
}

bool OrderOracle::leq(std::size_t p1, std::size_t p2) const {
  auto tiles = family_->tiles();
  if (!contains(tiles[p2].cube, tiles[p1].cube)) return false;
  const auto& a = cells_[p1];
  const auto& b = cells_[p2];
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) return true;
    if (a[i] < b[j])
      ++i;
    else
      ++j;
  }
  return false;
}

bool OrderOracle::sq(std::size_t p1, std::size_t p2) const {
  auto tiles = family_->tiles();
  if (!contains(tiles[p2].cube, tiles[p1].cube)) return false;
  return std::includes(cells_[p1].begin(), cells_[p1].end(), cells_[p2].begin(), cells_[p2].end());
}

std::vector<std::size_t> OrderOracle::ball(std::size_t tile, double a) const {
  const Tile& t = family_->tiles()[tile];
  const std::size_t c = family_->net_position(t.cube);
  const CubeNet& net = family_->nets()[c];
  auto center = net.sampler().sample(t.center);
  std::vector<std::size_t> out;
  for (std::size_t u = 0; u < universe_size_; ++u)
    if (net.sampler().distance(samples_[c][u], center) <= 0.5 * a) out.push_back(u);
  return out;
}

bool OrderOracle::dilated_sq(std::size_t p1, double a1, std::size_t p2, double a2) const {
  auto tiles = family_->tiles();
  if (!contains(tiles[p2].cube, tiles[p1].cube)) return false;
  auto b1 = ball(p1, a1);
  auto b2 = ball(p2, a2);
  return std::includes(b1.begin(), b1.end(), b2.begin(), b2.end());
}

bool dilated_sq_ball_sufficient(const Tile& p1, double a1, const Tile& p2, double a2) {
  if (!contains(p2.cube, p1.cube)) return false;
  const double ratio = p1.cube.side() / p2.cube.side();
  const double gap = p1 == p2 ? 0.0 : geom_factor(p2.center - p1.center, p1.cube);
  return ratio * 0.5 * a2 + gap <= 0.5 * a1;
}

void write_tiles_csv(std::ostream& os, std::span<const Tile> tiles) {
  if (tiles.empty()) {
    os << "scale,corner,net_index\n";
    return;
  }
  const auto mons = monomials(tiles.front().dim(), 1, tiles.front().center_potential.degree_bound());
  os << "scale,corner,net_index";
  for (const auto& b : mons) {
    os << ",c";
    for (int a = 0; a < b.dim(); ++a) os << '_' << b[a];
  }
  os << '\n';
  char buf[32];
  for (const auto& t : tiles) {
    os << t.scale() << ",\"" << format_cube(t.cube) << "\"," << t.net_index;
    for (const auto& b : mons) {
      std::snprintf(buf, sizeof(buf), "%.12g", t.center_potential.coeff(b));
      os << ',' << buf;
    }
    os << '\n';
  }
}

}  // namespace polycarl
