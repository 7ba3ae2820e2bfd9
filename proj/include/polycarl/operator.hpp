#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "polycarl/polynomial.hpp"
#include "polycarl/tiles.hpp"

namespace polycarl {

using Complex = std::complex<double>;

// Uniform torus grid with 2^bits points per axis, x_i = i / 2^bits.  Flat
// indices are row-major with the last axis fastest.
class Grid {
 public:
  Grid(int dim, int bits);

  int dim() const { return dim_; }
  int bits() const { return bits_; }
  std::size_t per_axis() const { return std::size_t{1} << bits_; }
  std::size_t size() const { return size_; }
  double weight() const { return weight_; }  // 1 / N^m

  std::vector<double> point(std::size_t index) const;
  void coords(std::size_t index, std::span<std::size_t> out) const;
  std::size_t index(std::span<const std::size_t> coords) const;
  // Index of (x - y) mod N componentwise.
  std::size_t difference(std::size_t x, std::size_t y) const;

 private:
  int dim_, bits_;
  std::size_t size_;
  double weight_;
};

struct GridFunction {
  int dim = 1;
  int bits = 0;
  int k_max = 0;  // carried in the fixture header
  std::vector<Complex> values;

  static GridFunction zeros(int dim, int bits, int k_max = 0);
  Grid grid() const { return Grid(dim, bits); }
  double sup_norm() const;
  double l2_norm() const;  // grid L^2 with weight 1/N^m
};

// <f, g> = sum f conj(g) / N^m
Complex inner(const GridFunction& f, const GridFunction& g);

// Binary fixture: three little-endian uint32 (m, g, k_max) then row-major
// (re, im) little-endian float64 pairs.
void write_grid_function(std::ostream& os, const GridFunction& f);
GridFunction read_grid_function(std::istream& is);

// Random values piecewise constant on 2^cell_bits cells per axis, real and
// imaginary parts uniform in [-1, 1].
GridFunction random_grid_function(std::mt19937_64& rng, int dim, int bits, int cell_bits,
                                  int k_max = 0);

// psi~(u) = b((|u| - 3)) - alpha b((|u| - 6) / 2), b(t) = (1 - t^2)^2 on |t| < 1,
// so psi~ lives on 2 < |u| < 8 and alpha makes its integral over R^m vanish.
class KernelDecomposition {
 public:
  KernelDecomposition(int dim, int k_max);

  int dim() const { return dim_; }
  int k_max() const { return k_max_; }
  double mean_zero_coefficient() const { return alpha_; }

  double inner_lobe(double r) const;
  double outer_lobe(double r) const;
  double psi_tilde(double r) const;
  // psi_k at radius r: 2^{mk} psi~(2^k r).
  double psi(int k, double r) const;
  // Sum over k <= k_max of psi_k at radius r.
  double kernel(double r) const;
  // Radial quadrature of psi~ over R^m.
  double psi_tilde_integral() const;

 private:
  int dim_, k_max_;
  double alpha_;
};

KernelDecomposition build_psi(int dim, int k_max);

// Periodized psi_k sampled at grid displacements, with the outer lobe rescaled
// so the grid sum is exactly mean zero.
struct KernelTable {
  int scale = 0;
  double grid_alpha = 0;
  std::vector<double> values;  // indexed by Grid::difference
};

KernelTable kernel_table(const KernelDecomposition& kd, const Grid& grid, int scale);

// Q_x piecewise constant on 2^cell_bits cells per axis.
class LinearizingSymbol {
 public:
  LinearizingSymbol(int dim, int degree, int cell_bits, std::vector<Polynomial> cells);
  static LinearizingSymbol constant(const Polynomial& q);
  // Coefficients drawn uniformly from the window's lattice.
  static LinearizingSymbol random(std::mt19937_64& rng, const FrequencyWindow& window, int cell_bits);

  int dim() const { return dim_; }
  int degree() const { return degree_; }
  int cell_bits() const { return cell_bits_; }
  std::span<const Polynomial> cells() const { return cells_; }
  std::size_t cell_of(std::span<const double> x) const;
  const Polynomial& at(std::span<const double> x) const { return cells_[cell_of(x)]; }
  LinearizingSymbol shifted(const Polynomial& q0) const;
  bool within(const FrequencyWindow& window) const;

 private:
  int dim_, degree_, cell_bits_;
  std::vector<Polynomial> cells_;
};

struct ScaleResidual {
  int scale = 0;
  double residual = 0;  // max_x |T_k f - sum_P T_P f|
};

struct InteractionResult {
  double lhs = 0;    // max_x |T_P1 T_P2^* f (x)|
  double rhs = 0;    // bracket(Delta)^{1/d} int_{E(P2)} |f| / max(|I1|, |I2|)
  double ratio = 0;  // 0 when E(P2) is empty
  double delta = 0;
  bool cubes_meet = false;
};

// T_P, T_P^*, T_k and the sets E(P) for one family, symbol and grid.
class TileOperator {
 public:
  TileOperator(const TileFamily& family, const LinearizingSymbol& symbol,
               const KernelDecomposition& kd, int grid_bits);

  const Grid& grid() const { return grid_; }
  const TileFamily& family() const { return *family_; }
  int k_max() const { return k_max_; }
  const LinearizingSymbol& symbol() const { return symbol_; }
  std::size_t cell_of_point(std::size_t x) const { return cell_of_point_[x]; }

  // Tile id owning grid point x at scale k.
  std::size_t owner(int scale, std::size_t x) const { return owners_[scale][x]; }
  std::span<const std::size_t> e_set(std::size_t tile) const { return e_sets_[tile]; }
  double e_measure(std::size_t tile) const;

  GridFunction apply_T_P(std::size_t tile, const GridFunction& f) const;
  GridFunction apply_T_P_adjoint(std::size_t tile, const GridFunction& g) const;
  GridFunction apply_T_k(int scale, const GridFunction& f) const;
  // Sum over tiles at `scale` of T_P f, accumulated in tile order.
  GridFunction sum_T_P(int scale, const GridFunction& f) const;
  std::vector<ScaleResidual> decomposition_check(const GridFunction& f) const;

  // Kernel of T_P1 T_P2^* at grid points (x, s).
  Complex interaction_kernel(std::size_t p1, std::size_t p2, std::size_t x, std::size_t s) const;
  InteractionResult interaction(std::size_t p1, std::size_t p2, const GridFunction& f) const;

 private:
  Complex inner_sum(int scale, std::size_t x, const GridFunction& f) const;
  Complex kernel_at(int scale, std::size_t x, std::size_t y) const;
  void check(const GridFunction& f) const;

  const TileFamily* family_;
  LinearizingSymbol symbol_;
  Grid grid_;
  int k_max_;
  int degree_;
  std::vector<KernelTable> tables_;
  std::vector<std::size_t> cell_of_point_;
  std::vector<std::vector<Complex>> phase_;  // per symbol cell: e^{i Q_c(y)}
  std::vector<std::vector<std::size_t>> owners_;
  std::vector<std::vector<std::size_t>> e_sets_;
};

}  // namespace polycarl
