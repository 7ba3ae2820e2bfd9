#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "polycarl/dyadic.hpp"
#include "polycarl/geometry.hpp"
#include "polycarl/operator.hpp"
#include "polycarl/tiles.hpp"

namespace polycarl {

inline constexpr int kDefaultMassExponent = 10;
inline constexpr double kMassDilation = 10.0;

struct MassRecord {
  std::size_t tile = 0;
  DyadicCube ambient;  // component of the ambient set holding I_P
  double value = 0;
  std::size_t witness = 0;
  int exponent = kDefaultMassExponent;
};

// Densities |E(P)|/|I_P| and the weights bracket(Delta(10P, 10P'))^N over one
// operator's tile family.
class MassEngine {
 public:
  explicit MassEngine(const TileOperator& op, int exponent = kDefaultMassExponent);

  const TileOperator& op() const { return *op_; }
  const TileFamily& family() const { return op_->family(); }
  int exponent() const { return exponent_; }
  double density(std::size_t tile) const { return density_[tile]; }
  double weight(std::size_t p, std::size_t q) const;

  // sup over members P' of `family` with I_P ⊆ I' ⊆ the ambient cube holding
  // I_P.  An empty `family` means the whole tile family.
  MassRecord mass(std::size_t tile, std::span<const DyadicCube> ambient,
                  std::span<const std::size_t> family = {}) const;

 private:
  const TileOperator* op_;
  int exponent_;
  std::vector<double> density_;
  mutable std::map<std::pair<std::size_t, std::size_t>, double> weights_;
};

// Component of `ambient` containing `cube`, if any.
std::optional<DyadicCube> ambient_component(const DyadicCube& cube, std::span<const DyadicCube> ambient);

// {2^{j / per_octave} : j = 0 .. count - 1}
std::vector<double> lambda_grid(int per_octave = 4, int count = 41);

// |E(lambda P)|: grid points of I_P whose gradient lies in the lambda-dilated ball.
double dilated_e_measure(const TileOperator& op, std::size_t tile, double lambda);

// sup over the grid of |E(lambda P)| lambda^{-N} / |I_P|.
double zk_mass(const TileOperator& op, std::size_t tile, int exponent, std::span<const double> lambdas);

struct MonotonicityWitness {
  std::size_t fine = 0;    // P
  std::size_t coarse = 0;  // P' with P <= P'
  std::size_t symbol = 0;  // index into the scanned symbols
  double zk_fine = 0, zk_coarse = 0;
  double mass_fine = 0, mass_coarse = 0;  // original mass, whole torus
};

struct MonotonicitySearch {
  std::optional<MonotonicityWitness> witness;
  std::size_t symbols_scanned = 0;
  std::size_t pairs_scanned = 0;
  // Comparable pairs where the original mass is not monotone.
  std::size_t mass_exceptions = 0;
};

// Constant symbols at the centers of the coarsest tiles: E-density sits on
// the coarse scale only.
std::vector<LinearizingSymbol> coarse_concentrated_symbols(const TileFamily& family);

// Scans P <= P' with |I_P| < |I_P'| for zk_mass(P) < zk_mass(P') - 1e-9 and
// stops at the first symbol that has one.
MonotonicitySearch monotonicity_violation_search(const TileFamily& family, const OrderOracle& order,
                                                 std::span<const LinearizingSymbol> symbols,
                                                 const KernelDecomposition& kd, int grid_bits,
                                                 int exponent = kDefaultMassExponent,
                                                 std::span<const double> lambdas = {});

// Collection relations on sets of dyadic cubes.
bool strongly_nested(std::span<const DyadicCube> a, std::span<const DyadicCube> b);  // A ⋐ B
bool dominated(std::span<const DyadicCube> a, std::span<const DyadicCube> b);        // A ≺ B
// Largest c with A ≺_c B; -1 when A ⊀ B, +inf when A is empty.
double domination_constant(std::span<const DyadicCube> a, std::span<const DyadicCube> b);
std::vector<DyadicCube> maximal_cubes(std::vector<DyadicCube> cubes);

struct StoppingConfig {
  int exponent = kDefaultMassExponent;
  double c0 = 4.0;
  int max_retries = 3;
  double counting_bound = 8.0;
};

struct StoppingLevel {
  int n = 0;
  std::vector<std::vector<DyadicCube>> cubes;       // [k - 1] -> S_n^k
  std::vector<std::vector<std::size_t>> maximal;    // [k - 1] -> P_n^{k,max}
  std::vector<std::vector<std::size_t>> tiles;      // [k - 1] -> P_n^k
};

struct StoppingPartition {
  std::vector<StoppingLevel> levels;  // ascending n
  double c0 = 0;
  std::vector<MassRecord> masses;  // final mass of every assigned tile
};

struct ContractBullet {
  std::string id;
  bool pass = false;
  double fitted_constant = 0;
  std::string detail;
};

struct ContractReport {
  std::vector<ContractBullet> bullets;
  bool pass() const;
  const ContractBullet& bullet(const std::string& id) const;
};

struct StoppingResult {
  StoppingPartition partition;
  ContractReport report;
  int attempts = 0;
  bool flagged = false;
};

// One pass of the greedy construction at threshold c0.
StoppingPartition stopping_partition(const MassEngine& engine, const OrderOracle& order,
                                     std::span<const std::size_t> tiles, double c0,
                                     int exponent = kDefaultMassExponent);
ContractReport check_contract(const StoppingPartition& partition, const MassEngine& engine,
                              const OrderOracle& order, std::span<const std::size_t> tiles,
                              const StoppingConfig& config = {});
// Doubles c0 after each failed contract check.
StoppingResult run_stopping(const MassEngine& engine, const OrderOracle& order,
                            std::span<const std::size_t> tiles, const StoppingConfig& config = {});

// Sup over the finest cubes of sum chi_{I_P}.
double counting_sup(const TileFamily& family, std::span<const std::size_t> tiles);

struct Tree {
  std::size_t top = 0;
  std::vector<std::size_t> members;  // includes the top
};

struct Row {
  std::vector<Tree> trees;
};

// Tiles P among `candidates` with aP ⊴ aP0, by the ball sufficient condition.
Tree build_tree(const TileFamily& family, std::size_t top, std::span<const std::size_t> candidates,
                double dilation = 2.0);
// Every member has (dilation I) inside I0.
bool is_normal(const TileFamily& family, const Tree& tree, double dilation = 100.0);
bool is_row(const TileFamily& family, const Row& row, double normal_dilation = 100.0);
// Pair factors use the tilde dilation of the geometry module.
bool separated(const TileFamily& family, const Tree& t1, const Tree& t2, double delta,
               double tilde_factor = kDefaultTildeFactor);

std::vector<std::size_t> row_tiles(const Row& row);
GridFunction apply_tiles(const TileOperator& op, std::span<const std::size_t> tiles, const GridFunction& f);
GridFunction apply_tiles_adjoint(const TileOperator& op, std::span<const std::size_t> tiles,
                                 const GridFunction& g);

struct InnerProductCheck {
  Complex inner;
  double ratio = 0;  // |inner| / (delta^{1/(2d)} ||f|| ||g||), 0 when f or g vanish
};

InnerProductCheck tree_inner_product_check(const TileOperator& op, const Tree& t1, const Tree& t2,
                                           double delta, const GridFunction& f, const GridFunction& g);
InnerProductCheck row_tree_check(const TileOperator& op, const Row& row, const Tree& tree, double delta,
                                 const GridFunction& f, const GridFunction& g,
                                 double normal_dilation = 100.0);

struct SeparationSweepConfig {
  int degree = 1;
  int k_max = 2;
  int grid_bits = 9;
  int cell_bits = 4;
  int trials = 20;
  std::uint64_t seed = 0x5e9a'7a7e'd7ee'5001ULL;
};

struct SeparationSweepRow {
  double delta = 0;
  double shift = 0;       // distance between the two top frequencies
  double mean_inner = 0;  // mean |<T1^* f, T2^* g>| / (||f|| ||g||)
  double max_ratio = 0;
};

struct SeparationSweep {
  std::vector<SeparationSweepRow> rows;
  double exponent = 0;  // mean_inner ~ delta^exponent
  double max_ratio = 0;
};

// m = 1 tree pairs on the unit cube with linear top frequencies -s and +s, s
// the smallest multiple of 2^k_max that separates them at each delta.  The
// symbol sends each cell near one of the two tops.
SeparationSweep separated_tree_sweep(std::span<const double> deltas, const SeparationSweepConfig& config = {});

using GridMap = std::function<GridFunction(const GridFunction&)>;
// ||A|| from power iteration on A^* A.
double power_norm(const GridMap& a, const GridMap& a_adjoint, int dim, int bits, int steps = 50,
                  std::uint64_t seed = 0x9e3779b97f4a7c15ULL);

struct RowPairNorms {
  std::size_t j = 0, k = 0;
  double star_first = 0;  // ||T_k^* T_j||
  double star_last = 0;   // ||T_k T_j^*||
};

struct OrthogonalityReport {
  std::vector<RowPairNorms> pairs;
  double max_star_first = 0;
  double max_star_last = 0;
  bool pass = true;  // every star-first norm <= 1e-10
};

OrthogonalityReport forest_rows_orthogonality_check(const TileOperator& op, std::span<const Row> rows,
                                                    int steps = 50);

struct MassDecay {
  std::vector<int> n;
  std::vector<double> ratio;  // ||T^{P_n} f|| / ||f||
  double eta = 0;             // ratio ~ 2^{-n eta}
  bool monotone_beyond_n0 = true;
};

MassDecay main_proposition_decay(const TileOperator& op, const StoppingPartition& partition,
                                 const GridFunction& f, int n0 = 3);

}  // namespace polycarl
