#include "polycarl/operator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "polycarl/errors.hpp"

namespace polycarl {

namespace {

constexpr int kMaxGridBits = 14;

double lobe(double t) {
  if (t <= -1.0 || t >= 1.0) return 0.0;
  const double u = 1.0 - t * t;
  return u * u;
}

void put_u32(std::ostream& os, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b, 4);
}

void put_f64(std::ostream& os, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
  os.write(b, 8);
}

std::uint64_t get_bytes(std::istream& is, int n) {
  unsigned char b[8] = {};
  if (!is.read(reinterpret_cast<char*>(b), n)) throw InvalidInput("truncated grid function file");
  std::uint64_t v = 0;
  for (int i = n; i-- > 0;) v = (v << 8) | b[i];
  return v;
}

}  // namespace

Grid::Grid(int dim, int bits) : dim_(dim), bits_(bits) {
  if (dim < 1 || dim > kMaxDim) throw InvalidInput("grid dimension out of range");
  if (bits < 0 || bits * dim > 2 * kMaxGridBits)
    throw ResourceLimit("grid of 2^" + std::to_string(bits) + " points per axis is too large",
                        std::ldexp(1.0, bits * dim));
  size_ = std::size_t{1} << (bits * dim);
  weight_ = std::ldexp(1.0, -bits * dim);
}

std::vector<double> Grid::point(std::size_t index) const {
  std::vector<double> x(dim_);
  const std::size_t mask = per_axis() - 1;
  for (int a = dim_; a-- > 0;) {
    x[a] = std::ldexp(static_cast<double>(index & mask), -bits_);
    index >>= bits_;
  }
  return x;
}

void Grid::coords(std::size_t index, std::span<std::size_t> out) const {
  const std::size_t mask = per_axis() - 1;
  for (int a = dim_; a-- > 0;) {
    out[a] = index & mask;
    index >>= bits_;
  }
}

std::size_t Grid::index(std::span<const std::size_t> c) const {
  std::size_t i = 0;
  for (int a = 0; a < dim_; ++a) i = (i << bits_) | c[a];
  return i;
}

std::size_t Grid::difference(std::size_t x, std::size_t y) const {
  const std::size_t mask = per_axis() - 1;
  std::size_t out = 0;
  for (int a = 0; a < dim_; ++a) {
    const int shift = bits_ * (dim_ - 1 - a);
    const std::size_t xa = (x >> shift) & mask, ya = (y >> shift) & mask;
    out |= ((xa - ya) & mask) << shift;
  }
  return out;
}

GridFunction GridFunction::zeros(int dim, int bits, int k_max) {
  Grid g(dim, bits);
  return GridFunction{dim, bits, k_max, std::vector<Complex>(g.size())};
}

double GridFunction::sup_norm() const {
  double s = 0.0;
  for (const auto& v : values) s = std::max(s, std::abs(v));
  return s;
}

double GridFunction::l2_norm() const { return std::sqrt(inner(*this, *this).real()); }

Complex inner(const GridFunction& f, const GridFunction& g) {
  if (f.dim != g.dim || f.bits != g.bits) throw InvalidInput("grid functions live on different grids");
  Complex s = 0.0;
  for (std::size_t i = 0; i < f.values.size(); ++i) s += f.values[i] * std::conj(g.values[i]);
  return s * f.grid().weight();
}

void write_grid_function(std::ostream& os, const GridFunction& f) {
  put_u32(os, static_cast<std::uint32_t>(f.dim));
  put_u32(os, static_cast<std::uint32_t>(f.bits));
  put_u32(os, static_cast<std::uint32_t>(f.k_max));
  for (const auto& v : f.values) {
    put_f64(os, v.real());
    put_f64(os, v.imag());
  }
}

GridFunction read_grid_function(std::istream& is) {
  const auto m = static_cast<int>(get_bytes(is, 4));
  const auto g = static_cast<int>(get_bytes(is, 4));
  const auto k = static_cast<int>(get_bytes(is, 4));
  GridFunction f = GridFunction::zeros(m, g, k);
  for (auto& v : f.values) {
    const double re = std::bit_cast<double>(get_bytes(is, 8));
    const double im = std::bit_cast<double>(get_bytes(is, 8));
    v = {re, im};
  }
  if (is.peek() != std::char_traits<char>::eof()) throw InvalidInput("trailing bytes in grid function file");
  return f;
}

GridFunction random_grid_function(std::mt19937_64& rng, int dim, int bits, int cell_bits, int k_max) {
  if (cell_bits < 0 || cell_bits > bits) throw InvalidInput("cell resolution exceeds the grid");
  GridFunction f = GridFunction::zeros(dim, bits, k_max);
  Grid cells(dim, cell_bits);
  std::vector<Complex> vals(cells.size());
  auto u = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0; };
  for (auto& v : vals) {
    const double re = u();
    v = {re, u()};
  }
  Grid g = f.grid();
  std::vector<std::size_t> c(dim);
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.coords(i, c);
    for (auto& v : c) v >>= (bits - cell_bits);
    f.values[i] = vals[cells.index(c)];
  }
  return f;
}

KernelDecomposition::KernelDecomposition(int dim, int k_max) : dim_(dim), k_max_(k_max) {
  if (dim < 1 || dim > kMaxDim) throw InvalidInput("kernel dimension out of range");
  if (k_max < 0 || k_max > kMaxGridBits) throw InvalidInput("kernel k_max out of range");
  using G = boost::math::quadrature::gauss<double, 12>;
  const double p = dim - 1.0;
  const double a = G::integrate([&](double r) { return inner_lobe(r) * std::pow(r, p); }, 2.0, 4.0);
  const double b = G::integrate([&](double r) { return lobe((r - 6.0) / 2.0) * std::pow(r, p); }, 4.0, 8.0);
  alpha_ = a / b;
}

double KernelDecomposition::inner_lobe(double r) const { return lobe(r - 3.0); }

double KernelDecomposition::outer_lobe(double r) const { return alpha_ * lobe((r - 6.0) / 2.0); }

double KernelDecomposition::psi_tilde(double r) const { return inner_lobe(r) - outer_lobe(r); }

double KernelDecomposition::psi(int k, double r) const {
  return std::ldexp(psi_tilde(std::ldexp(r, k)), dim_ * k);
}

double KernelDecomposition::kernel(double r) const {
  double s = 0.0;
  for (int k = 0; k <= k_max_; ++k) s += psi(k, r);
  return s;
}

double KernelDecomposition::psi_tilde_integral() const {
  using G = boost::math::quadrature::gauss<double, 20>;
  const double p = dim_ - 1.0;
  auto f = [&](double r) { return psi_tilde(r) * std::pow(r, p); };
  double s = 0.0;
  for (int i = 0; i < 12; ++i) s += G::integrate(f, 2.0 + 0.5 * i, 2.5 + 0.5 * i);
  const double sphere = 2.0 * std::pow(std::numbers::pi, 0.5 * dim_) / boost::math::tgamma(0.5 * dim_);
  return sphere * s;
}

KernelDecomposition build_psi(int dim, int k_max) { return KernelDecomposition(dim, k_max); }

KernelTable kernel_table(const KernelDecomposition& kd, const Grid& grid, int scale) {
  if (grid.dim() != kd.dim()) throw InvalidInput("kernel and grid dimensions differ");
  const int m = grid.dim();
  const double reach = std::ldexp(8.0, -scale);
  const double amp = std::ldexp(1.0, m * scale);
  std::vector<double> in(grid.size()), out(grid.size());
  std::vector<std::size_t> c(m);
  std::vector<double> u(m);
  std::vector<long> lo(m), hi(m), n(m);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    grid.coords(j, c);
    for (int a = 0; a < m; ++a) {
      u[a] = std::ldexp(static_cast<double>(c[a]), -grid.bits());
      lo[a] = static_cast<long>(std::ceil(-reach - u[a]));
      hi[a] = static_cast<long>(std::floor(reach - u[a]));
      n[a] = lo[a];
    }
    double s_in = 0.0, s_out = 0.0;
    bool empty = false;
    for (int a = 0; a < m; ++a) empty = empty || lo[a] > hi[a];
    while (!empty) {
      double r2 = 0.0;
      for (int a = 0; a < m; ++a) r2 += (u[a] + n[a]) * (u[a] + n[a]);
      const double r = std::ldexp(std::sqrt(r2), scale);
      s_in += kd.inner_lobe(r);
      s_out += kd.outer_lobe(r);
      int a = m - 1;
      while (a >= 0 && n[a] == hi[a]) {
        n[a] = lo[a];
        --a;
      }
      if (a < 0) break;
      ++n[a];
    }
    in[j] = amp * s_in;
    out[j] = amp * s_out;
  }
  double sum_in = 0.0, sum_out = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    sum_in += in[j];
    sum_out += out[j];
  }
  KernelTable t;
  t.scale = scale;
  t.grid_alpha = kd.mean_zero_coefficient() * sum_in / sum_out;
  const double rescale = sum_in / sum_out;
  t.values.resize(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) t.values[j] = in[j] - rescale * out[j];
  return t;
}

LinearizingSymbol::LinearizingSymbol(int dim, int degree, int cell_bits, std::vector<Polynomial> cells)
    : dim_(dim), degree_(degree), cell_bits_(cell_bits), cells_(std::move(cells)) {
  if (dim < 1 || dim > kMaxDim) throw InvalidInput("symbol dimension out of range");
  if (cell_bits < 0 || cell_bits * dim > 2 * kMaxGridBits) throw InvalidInput("symbol resolution out of range");
  if (cells_.size() != (std::size_t{1} << (cell_bits * dim)))
    throw InvalidInput("symbol needs 2^(cell_bits m) cell polynomials");
  for (const auto& q : cells_) {
    if (q.dim() != dim) throw InvalidInput("symbol polynomial dimension mismatch");
    if (q.degree() > degree) throw InvalidInput("symbol polynomial exceeds the degree");
    if (!q.in_q_class()) throw InvalidInput("symbol polynomials must vanish at 0");
  }
}

LinearizingSymbol LinearizingSymbol::constant(const Polynomial& q) {
  return LinearizingSymbol(q.dim(), std::max(1, q.degree_bound()), 0, {q});
}

LinearizingSymbol LinearizingSymbol::random(std::mt19937_64& rng, const FrequencyWindow& window,
                                            int cell_bits) {
  const std::size_t n = std::size_t{1} << (cell_bits * window.dim);
  const std::size_t lattice = window.lattice_size();
  std::vector<Polynomial> cells;
  cells.reserve(n);
  for (std::size_t i = 0; i < n; ++i) cells.push_back(window.potential(rng() % lattice));
  return LinearizingSymbol(window.dim, window.degree, cell_bits, std::move(cells));
}

std::size_t LinearizingSymbol::cell_of(std::span<const double> x) const {
  const double n = std::ldexp(1.0, cell_bits_);
  std::size_t idx = 0;
  for (int a = 0; a < dim_; ++a) {
    double w = x[a] - std::floor(x[a]);
    auto i = std::min(static_cast<std::size_t>(w * n), (std::size_t{1} << cell_bits_) - 1);
    idx = (idx << cell_bits_) | i;
  }
  return idx;
}

LinearizingSymbol LinearizingSymbol::shifted(const Polynomial& q0) const {
  const int d = std::max(degree_, q0.degree());
  std::vector<Polynomial> out;
  for (const auto& q : cells_) {
    std::vector<Term> terms(q.terms().begin(), q.terms().end());
    terms.insert(terms.end(), q0.terms().begin(), q0.terms().end());
    out.push_back(Polynomial::from_terms(dim_, d, std::move(terms)));
  }
  return LinearizingSymbol(dim_, d, cell_bits_, std::move(out));
}

bool LinearizingSymbol::within(const FrequencyWindow& window) const {
  return std::all_of(cells_.begin(), cells_.end(), [&](const Polynomial& q) { return window.contains(q); });
}

TileOperator::TileOperator(const TileFamily& family, const LinearizingSymbol& symbol,
                           const KernelDecomposition& kd, int grid_bits)
    : family_(&family),
      symbol_(symbol),
      grid_(family.config().dim, grid_bits),
      k_max_(family.config().k_max),
      degree_(family.config().degree) {
  const int m = grid_.dim();
  if (symbol.dim() != m || kd.dim() != m) throw InvalidInput("family, symbol and kernel dimensions differ");
  if (k_max_ > kd.k_max()) throw InvalidInput("family scales exceed the kernel decomposition");
  if (grid_bits < k_max_ + 3)
    throw InvalidInput("grid too coarse: scale " + std::to_string(k_max_) + " needs at least 2^" +
                       std::to_string(k_max_ + 3) + " points per axis");
  if (symbol.cell_bits() > grid_bits) throw InvalidInput("symbol is finer than the grid");
  for (const auto& net : family.nets())
    if (net.tiles().empty()) throw InvalidInput("missing tiles on cube " + format_cube(net.cube()));

  for (int k = 0; k <= k_max_; ++k) tables_.push_back(kernel_table(kd, grid_, k));

  const std::size_t n = grid_.size();
  cell_of_point_.resize(n);
  for (std::size_t x = 0; x < n; ++x) cell_of_point_[x] = symbol_.cell_of(grid_.point(x));
  phase_.assign(symbol_.cells().size(), std::vector<Complex>(n));
  for (std::size_t c = 0; c < symbol_.cells().size(); ++c) {
    const auto& q = symbol_.cells()[c];
    for (std::size_t y = 0; y < n; ++y) phase_[c][y] = std::polar(1.0, q.eval(grid_.point(y)));
  }

  owners_.assign(k_max_ + 1, std::vector<std::size_t>(n));
  e_sets_.assign(family.tiles().size(), {});
  std::vector<GradientField> fields;
  for (const auto& q : symbol_.cells()) fields.push_back(grad(q));
  for (int k = 0; k <= k_max_; ++k) {
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> cache;
    for (std::size_t x = 0; x < n; ++x) {
      const DyadicCube cube = DyadicCube::containing(grid_.point(x), k);
      const std::size_t pos = family.net_position(cube);
      const auto key = std::make_pair(cell_of_point_[x], pos);
      auto it = cache.find(key);
      if (it == cache.end()) {
        const CubeNet& net = family.nets()[pos];
        const std::size_t id = family.id_of(cube, net.owner(fields[key.first]));
        it = cache.emplace(key, id).first;
      }
      owners_[k][x] = it->second;
      e_sets_[it->second].push_back(x);
    }
  }
}

double TileOperator::e_measure(std::size_t tile) const {
  return static_cast<double>(e_sets_[tile].size()) * grid_.weight();
}

void TileOperator::check(const GridFunction& f) const {
  if (f.dim != grid_.dim() || f.bits != grid_.bits())
    throw InvalidInput("grid function does not match the operator grid");
}

Complex TileOperator::kernel_at(int scale, std::size_t x, std::size_t y) const {
  const auto& ph = phase_[cell_of_point_[x]];
  return ph[x] * std::conj(ph[y]) * tables_[scale].values[grid_.difference(x, y)];
}

Complex TileOperator::inner_sum(int scale, std::size_t x, const GridFunction& f) const {
  const auto& ph = phase_[cell_of_point_[x]];
  const auto& table = tables_[scale].values;
  Complex s = 0.0;
  for (std::size_t y = 0; y < grid_.size(); ++y) {
    if (f.values[y] == 0.0) continue;
    s += std::conj(ph[y]) * table[grid_.difference(x, y)] * f.values[y];
  }
  return ph[x] * s * grid_.weight();
}

GridFunction TileOperator::apply_T_P(std::size_t tile, const GridFunction& f) const {
  check(f);
  const int k = family_->tiles()[tile].scale();
  GridFunction out = GridFunction::zeros(grid_.dim(), grid_.bits(), f.k_max);
  for (auto x : e_sets_[tile]) out.values[x] = inner_sum(k, x, f);
  return out;
}

GridFunction TileOperator::apply_T_P_adjoint(std::size_t tile, const GridFunction& g) const {
  check(g);
  const int k = family_->tiles()[tile].scale();
  GridFunction out = GridFunction::zeros(grid_.dim(), grid_.bits(), g.k_max);
  for (auto x : e_sets_[tile]) {
    const Complex gx = g.values[x] * grid_.weight();
    if (gx == 0.0) continue;
    for (std::size_t y = 0; y < grid_.size(); ++y) out.values[y] += std::conj(kernel_at(k, x, y)) * gx;
  }
  return out;
}

GridFunction TileOperator::apply_T_k(int scale, const GridFunction& f) const {
  check(f);
  if (scale < 0 || scale > k_max_) throw InvalidInput("scale outside the family");
  GridFunction out = GridFunction::zeros(grid_.dim(), grid_.bits(), f.k_max);
  for (std::size_t x = 0; x < grid_.size(); ++x) out.values[x] = inner_sum(scale, x, f);
  return out;
}

GridFunction TileOperator::sum_T_P(int scale, const GridFunction& f) const {
  check(f);
  GridFunction out = GridFunction::zeros(grid_.dim(), grid_.bits(), f.k_max);
  const auto tiles = family_->tiles();
  for (std::size_t id = 0; id < tiles.size(); ++id) {
    if (tiles[id].scale() != scale || e_sets_[id].empty()) continue;
    auto part = apply_T_P(id, f);
    for (std::size_t x = 0; x < out.values.size(); ++x) out.values[x] += part.values[x];
  }
  return out;
}

std::vector<ScaleResidual> TileOperator::decomposition_check(const GridFunction& f) const {
  std::vector<ScaleResidual> out;
  for (int k = 0; k <= k_max_; ++k) {
    auto whole = apply_T_k(k, f);
    auto parts = sum_T_P(k, f);
    double r = 0.0;
    for (std::size_t x = 0; x < whole.values.size(); ++x)
      r = std::max(r, std::abs(whole.values[x] - parts.values[x]));
    out.push_back({k, r});
  }
  return out;
}

Complex TileOperator::interaction_kernel(std::size_t p1, std::size_t p2, std::size_t x,
                                         std::size_t s) const {
  const auto tiles = family_->tiles();
  const int k1 = tiles[p1].scale(), k2 = tiles[p2].scale();
  if (owners_[k1][x] != p1 || owners_[k2][s] != p2) return 0.0;
  Complex sum = 0.0;
  for (std::size_t y = 0; y < grid_.size(); ++y)
    sum += kernel_at(k1, x, y) * std::conj(kernel_at(k2, s, y));
  return sum * grid_.weight();
}

InteractionResult TileOperator::interaction(std::size_t p1, std::size_t p2, const GridFunction& f) const {
  check(f);
  const auto tiles = family_->tiles();
  InteractionResult r;
  auto pf = pair_factor(tiles[p1], tiles[p2]);
  r.cubes_meet = pf.has_value();
  r.delta = pf.value_or(0.0);
  double mass = 0.0;
  for (auto x : e_sets_[p2]) mass += std::abs(f.values[x]);
  mass *= grid_.weight();
  const double big = std::max(tiles[p1].cube.volume(), tiles[p2].cube.volume());
  r.rhs = std::pow(bracket(r.delta), 1.0 / std::max(1, degree_)) * mass / big;
  if (e_sets_[p2].empty() || e_sets_[p1].empty()) return r;
  auto h = apply_T_P_adjoint(p2, f);
  const int k1 = tiles[p1].scale();
  for (auto x : e_sets_[p1]) r.lhs = std::max(r.lhs, std::abs(inner_sum(k1, x, h)));
  r.ratio = r.rhs > 0 ? r.lhs / r.rhs : 0.0;
  return r;
}

}  // namespace polycarl
