#pragma once

// Discretisation of L^2(F): quadrature grid on the fundamental polygon, the
// kernel blocks A_gamma, Hilbert-Schmidt norms and SVD truncation.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "json.hpp"

#include "covergap/realization.hpp"

namespace covergap {

struct QuadratureGrid {
  std::vector<HPoint> points;
  /// Exact hyperbolic areas of the cells.
  std::vector<double> weights;
  /// Cells per edge of each fan triangle; size() == 2 k s^2 for a k-gon.
  int subdivision = 0;

  std::size_t size() const noexcept { return points.size(); }
  double total_weight() const;
};

/// Splits the polygon into fan triangles (centre, vertex, side midpoint) and
/// each into s^2 geodesic triangles, rows at equal fractions of the radial
/// distance. One node per cell at its hyperboloid centroid, weighted by the
/// exact cell area, so the weights sum to the polygon area up to rounding.
QuadratureGrid build_grid(const FuchsianRealization& real, int target_m);

using SparseBlock = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// A_gamma[j][k] = sqrt(w_j) 1[d(z_j, gamma z_k) <= t] sqrt(w_k).
class OperatorBlock {
 public:
  static constexpr double kSparseDensity = 0.25;

  OperatorBlock(GroupElement gamma, Eigen::MatrixXd dense);
  OperatorBlock(GroupElement gamma, SparseBlock sparse);

  const GroupElement& gamma() const noexcept { return gamma_; }
  Eigen::Index size() const noexcept { return n_; }
  bool is_sparse() const noexcept { return sparse_.has_value(); }
  double density() const noexcept { return density_; }
  double hs_norm() const noexcept { return hs_norm_; }
  bool is_zero() const noexcept { return hs_norm_ == 0.0; }

  Eigen::MatrixXd to_dense() const;
  /// Y += A X
  void apply_add(const Eigen::MatrixXd& x, Eigen::MatrixXd& y) const;
  /// A block with the given element and this block's transpose.
  OperatorBlock transposed(GroupElement inverse) const;

 private:
  GroupElement gamma_;
  Eigen::Index n_ = 0;
  std::optional<Eigen::MatrixXd> dense_;
  std::optional<SparseBlock> sparse_;
  double density_ = 0.0;
  double hs_norm_ = 0.0;
};

/// Builds the block from kernel values; picks sparse storage below 25%
/// density.
OperatorBlock assemble_block(const GroupElement& gamma, KernelRadius t, const QuadratureGrid& grid);

/// Blocks for a support set: one kernel evaluation per inverse pair, the
/// partner is the exact transpose. Zero blocks are pruned from both the
/// support and the block list, which stay index-aligned.
struct BlockFamily {
  KernelRadius t{0.0};
  SupportSet support;
  std::vector<OperatorBlock> blocks;

  std::size_t grid_size() const { return blocks.empty() ? 0 : static_cast<std::size_t>(blocks.front().size()); }
};

BlockFamily assemble_blocks(const SupportSet& support, KernelRadius t, const QuadratureGrid& grid, int threads = 1);

/// S(t) computed on the grid nodes followed by assembly, so the support is
/// exactly the set of nonzero blocks.
BlockFamily assemble_family(const FuchsianRealization& real, KernelRadius t, const QuadratureGrid& grid,
                            int threads = 1);

struct HsFit {
  double c_hat = 0.0;
  /// (t, max_gamma hs_norm)
  std::vector<std::pair<double, double>> max_hs;
  bool bound_holds = false;
  /// hs_norm of each element present at every t is nondecreasing in t.
  bool monotone = false;
};

/// Fits C with max_gamma ||A_gamma||_HS <= C e^t over the families (needs at
/// least two values of t).
HsFit hs_norm_bound_check(const std::vector<BlockFamily>& families);

/// Full SVD of one block, computed on its nonzero rows and columns.
struct BlockSvd {
  Word word;
  Eigen::Index size = 0;
  std::vector<Eigen::Index> rows;
  std::vector<Eigen::Index> cols;
  Eigen::MatrixXd u;
  Eigen::VectorXd sigma;
  Eigen::MatrixXd v;
  double hs_norm = 0.0;
};

BlockSvd block_svd(const OperatorBlock& block);

struct TruncatedBlock {
  Word word;
  int rank = 0;
  /// m x rank factors and the kept singular values.
  Eigen::MatrixXd left_factors;
  Eigen::VectorXd singular_values;
  Eigen::MatrixXd right_factors;
  /// sigma_{r+1}, zero when r >= rank.
  double op_error_bound = 0.0;
  double hs_norm = 0.0;

  Eigen::MatrixXd to_dense() const;
};

/// Keeps the top r singular triples. Throws std::logic_error if
/// sigma_{r+1} > hs_norm / sqrt(r).
TruncatedBlock truncate(const BlockSvd& svd, int r);
TruncatedBlock svd_truncate(const OperatorBlock& block, int r);

/// Writes <stem>.json (grid, per-block metadata, byte offsets) and
/// <stem>.f64 (each block as a dense row-major m x m array of little-endian
/// float64, in JSON order).
void export_blocks(const std::filesystem::path& stem, const BlockFamily& family, const QuadratureGrid& grid,
                   const SurfacePresentation& p);

nlohmann::json to_json(const QuadratureGrid& grid);

}  // namespace covergap
