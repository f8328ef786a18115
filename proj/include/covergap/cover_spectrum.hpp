#pragma once

// The cover operator T = sum_gamma A_gamma (x) rho(gamma) on L^2(F) (x) V_n,
// its top eigenvalue, the spectral gap estimate and the baselines.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "covergap/domain_ops.hpp"
#include "covergap/selberg.hpp"
#include "covergap/symmetric_group.hpp"

namespace covergap {

/// y = A x for a symmetric or general linear map of a fixed size.
using LinearMap = std::function<void(const Eigen::VectorXd& x, Eigen::VectorXd& y)>;

struct LanczosOptions {
  /// ||T v - theta v|| relative to the largest Ritz magnitude.
  double tolerance = 1e-8;
  int subspace = 40;
  int max_restarts = 300;
};

struct EigenEstimate {
  double value = 0.0;
  Eigen::VectorXd vector;
  double residual = 0.0;
  /// Smallest Ritz value of the final subspace and its relative residual.
  double min_value = 0.0;
  double min_residual = 0.0;
  int matvecs = 0;
};

class LanczosNoConvergence : public std::runtime_error {
 public:
  LanczosNoConvergence(double best, double residual);
  double best() const noexcept { return best_; }
  double residual() const noexcept { return residual_; }

 private:
  double best_;
  double residual_;
};

/// Largest eigenvalue of a symmetric map by thick-restarted Lanczos with full
/// reorthogonalization. The start vector is drawn from `seed`, so results are
/// reproducible bit for bit.
EigenEstimate lanczos_top(const LinearMap& op, Eigen::Index dim, std::uint64_t seed, LanczosOptions opts = {});

/// One term of a cover operator: its group element and a linear action on
/// m x k coefficient blocks.
class BlockTerm {
 public:
  static BlockTerm full(const OperatorBlock& block);
  static BlockTerm low_rank(const Word& word, Eigen::MatrixXd left, Eigen::MatrixXd right);

  const Word& word() const noexcept { return word_; }
  Eigen::Index size() const noexcept { return m_; }
  /// A x
  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;

 private:
  Word word_;
  Eigen::Index m_ = 0;
  std::variant<std::monostate, OperatorBlock, std::pair<Eigen::MatrixXd, Eigen::MatrixXd>> op_;
};

struct OperatorTerms {
  Eigen::Index m = 0;
  std::vector<BlockTerm> terms;
};

std::shared_ptr<const OperatorTerms> make_terms(const BlockFamily& family);

enum class Fiber { MeanZero, Full };

/// T = sum_gamma A_gamma (x) rho(gamma), rho(gamma) x = x o phi(gamma)^-1.
///
/// Vectors are m x d coefficient matrices flattened column-major: fiber
/// coordinate i occupies entries [i m, (i + 1) m). The full fiber uses the
/// standard basis of C^n, the mean-zero fiber Helmert coordinates of V_n^0.
class CoverOperator {
 public:
  CoverOperator(std::shared_ptr<const OperatorTerms> terms, const HomTuple& hom, Fiber fiber, int threads = 1);

  Eigen::Index grid_size() const noexcept { return terms_->m; }
  Eigen::Index fiber_dimension() const noexcept { return fiber_ == Fiber::Full ? n_ : n_ - 1; }
  Eigen::Index dimension() const noexcept { return grid_size() * fiber_dimension(); }
  Fiber fiber() const noexcept { return fiber_; }
  const HomTuple& hom() const noexcept { return hom_; }

  /// Y = T X on m x d coefficient matrices.
  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
  void matvec(const Eigen::VectorXd& x, Eigen::VectorXd& y) const;
  LinearMap as_map() const;
  Eigen::MatrixXd to_dense() const;

 private:
  std::shared_ptr<const OperatorTerms> terms_;
  HomTuple hom_;
  Fiber fiber_;
  int threads_;
  Eigen::Index n_;
  /// phi(gamma) images per term
  std::vector<std::vector<int>> perms_;
  /// (n - 1) x n Helmert rows
  Eigen::MatrixXd helmert_;
};

EigenEstimate top_norm(const CoverOperator& t, std::uint64_t seed, LanczosOptions opts = {});

/// Top eigenvalue of sum_gamma A_gamma, the discrete counterpart of
/// 2 pi (cosh t - 1) for constant functions.
EigenEstimate constant_eigenvalue(const BlockFamily& family, std::uint64_t seed = 0, LanczosOptions opts = {});

struct SpectralEstimate {
  double op_norm = 0.0;
  double peak_baseline = 0.0;
  double ceiling = 0.0;
  double param_a = 0.0;
  double lambda_lower_bound = 0.25;
  /// 1/4 - a^2 when op_norm > h_t(0).
  std::optional<double> lambda_hat;
  /// 1/4 - (op_norm - h_t(0)) / c(t), or 1/4 when op_norm <= h_t(0).
  double linearized_bound = 0.25;
  bool clamped = false;
  double krylov_residual = 0.0;
  double min_eigenvalue = 0.0;
  int n = 0;
  double t = 0.0;
  Eigen::Index m = 0;
  std::uint64_t seed = 0;
  bool transitive = false;
};

struct GapOptions {
  /// Slack above 2 pi (cosh t - 1) tolerated before invert_h fails; set it
  /// to the observed constant-eigenvalue discretization error.
  double ceiling_tolerance = 1e-10;
  std::uint64_t lanczos_seed = 0;
  LanczosOptions lanczos;
};

/// Excess of the constant eigenvalue over 2 pi (cosh t - 1), plus rounding
/// slack: the ceiling tolerance to use with operators built from `family`.
double ceiling_slack(const BlockFamily& family, std::uint64_t seed = 0);

/// Converts an operator norm into the spectral gap reading.
SpectralEstimate gap_from_norm(double op_norm, KernelRadius t, double ceiling_tolerance = 1e-10);
SpectralEstimate estimate_gap(const CoverOperator& op, KernelRadius t, GapOptions opts = {});

nlohmann::json to_json(const SpectralEstimate& e);

struct TruncationBound {
  int rank = 0;
  double truncated_norm = 0.0;
  /// sum_gamma sigma_{r+1}(gamma)
  double error_sum = 0.0;
  /// truncated_norm + error_sum, an upper bound for the top eigenvalue of T
  double certified = 0.0;
  /// sum_gamma hs(gamma) / sqrt(r)
  double hs_reference = 0.0;
};

/// Per-block SVDs reused across ranks.
struct FamilySvd {
  std::vector<BlockSvd> svds;
  /// term index -> index into svds and whether the term is the transpose
  std::vector<std::pair<std::size_t, bool>> source;
  Eigen::Index m = 0;
};

FamilySvd family_svd(const BlockFamily& family);

/// Terms B_gamma^(r); B_{gamma^-1} = B_gamma^T exactly and the identity term
/// is symmetrized, so the truncated operator stays symmetric.
std::shared_ptr<const OperatorTerms> truncated_terms(const BlockFamily& family, const FamilySvd& svd, int r,
                                                     double* error_sum = nullptr);

TruncationBound truncated_norm_bound(const BlockFamily& family, const FamilySvd& svd, const HomTuple& hom, int r,
                                     std::uint64_t seed, LanczosOptions opts = {});

struct RegularBaseline {
  /// h_t(0), the norm of the operator on L^2(H)
  double exact = 0.0;
  /// Rayleigh-quotient lower bounds from tile-constant functions on the
  /// tile balls of radius 0..R, and the ball sizes.
  std::vector<double> lower_bounds;
  std::vector<std::size_t> ball_sizes;
};

/// The lower bounds use f(delta z) = c_delta for delta in the tile ball, so
/// the quotient is the top eigenvalue of M(delta, delta gamma) =
/// <sqrt w, A_gamma sqrt w> / area on the ball.
RegularBaseline regular_baseline(const FuchsianRealization& real, const BlockFamily& family, const QuadratureGrid& grid,
                                 int radius, std::uint64_t seed = 0);

/// ||A|| via the top eigenvalue of the dilation [[0, A], [A^T, 0]].
double dilation_norm(const LinearMap& a, const LinearMap& at, Eigen::Index rows, Eigen::Index cols,
                     std::uint64_t seed = 0, LanczosOptions opts = {});

struct DilationCheck {
  double dilation = 0.0;
  /// max(|lambda_max|, |lambda_min|) of T
  double direct = 0.0;
  bool agrees = false;
};

DilationCheck self_adjointize_check(const CoverOperator& op, std::uint64_t seed = 0, double tolerance = 1e-8);

}  // namespace covergap
