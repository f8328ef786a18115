#include "covergap/cover_spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include <boost/random/normal_distribution.hpp>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseCore>

#include "covergap/parallel.hpp"

namespace covergap {

namespace {

Eigen::VectorXd random_unit(Eigen::Index dim, std::uint64_t seed) {
  Rng rng(seed);
  boost::random::normal_distribution<double> normal;
  Eigen::VectorXd v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v[i] = normal(rng);
  return v / v.norm();
}

/// Two passes of classical Gram-Schmidt against the first k columns.
double orthogonalize(const Eigen::MatrixXd& v, Eigen::Index k, Eigen::VectorXd& w) {
  for (int pass = 0; pass < 2; ++pass) {
    if (k > 0) w -= v.leftCols(k) * (v.leftCols(k).transpose() * w);
  }
  return w.norm();
}

double relative(double residual, double scale) {
  if (scale > 0.0) return residual / scale;
  return residual == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

}  // namespace

LanczosNoConvergence::LanczosNoConvergence(double best, double residual)
    : std::runtime_error("Lanczos did not converge: best " + std::to_string(best) + ", residual " +
                         std::to_string(residual)),
      best_(best),
      residual_(residual) {}

EigenEstimate lanczos_top(const LinearMap& op, Eigen::Index dim, std::uint64_t seed, LanczosOptions opts) {
  if (dim < 1) throw std::invalid_argument("Lanczos on an empty operator");
  const Eigen::Index cap = std::min<Eigen::Index>(std::max(opts.subspace, 4), dim);
  const Eigen::Index keep = std::max<Eigen::Index>(1, cap / 2);

  Eigen::MatrixXd v(dim, cap);
  Eigen::MatrixXd w(dim, cap);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(cap, cap);
  Eigen::Index k = 0;
  Eigen::VectorXd next = random_unit(dim, seed);
  Eigen::VectorXd tw(dim);

  EigenEstimate out;
  double best = 0.0;
  double best_residual = std::numeric_limits<double>::infinity();

  for (int restart = 0; restart <= opts.max_restarts; ++restart) {
    while (k < cap) {
      v.col(k) = next;
      op(next, tw);
      ++out.matvecs;
      w.col(k) = tw;
      const Eigen::VectorXd col = v.leftCols(k + 1).transpose() * tw;
      const Eigen::VectorXd row = w.leftCols(k + 1).transpose() * next;
      for (Eigen::Index i = 0; i <= k; ++i) h(i, k) = h(k, i) = 0.5 * (col[i] + row[i]);
      ++k;

      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.topLeftCorner(k, k));
      const double theta = es.eigenvalues()[k - 1];
      const double theta_min = es.eigenvalues()[0];
      const double scale = std::max(std::abs(theta), std::abs(theta_min));
      const Eigen::VectorXd y = es.eigenvectors().col(k - 1);
      const Eigen::VectorXd x = v.leftCols(k) * y;
      const Eigen::VectorXd r = w.leftCols(k) * y - theta * x;
      const double rel = relative(r.norm(), scale);
      if (rel < best_residual) {
        best_residual = rel;
        best = theta;
      }
      if (rel <= opts.tolerance) {
        const Eigen::VectorXd y0 = es.eigenvectors().col(0);
        const Eigen::VectorXd r0 = w.leftCols(k) * y0 - theta_min * (v.leftCols(k) * y0);
        out.value = theta;
        out.vector = x;
        out.residual = rel;
        out.min_value = theta_min;
        out.min_residual = relative(r0.norm(), scale);
        return out;
      }
      if (k == cap) break;
      next = tw;
      const double before = next.norm();
      double after = orthogonalize(v, k, next);
      for (std::uint64_t salt = 1; after <= 1e-10 * std::max(before, 1.0); ++salt) {
        next = random_unit(dim, seed + salt * 0x9e3779b97f4a7c15ULL);
        after = orthogonalize(v, k, next);
      }
      next /= after;
    }

    // Thick restart on the top Ritz vectors, continued from the top residual.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.topLeftCorner(k, k));
    const Eigen::MatrixXd y = es.eigenvectors().rightCols(keep);
    const Eigen::MatrixXd vk = v.leftCols(k) * y;
    const Eigen::MatrixXd wk = w.leftCols(k) * y;
    const double theta = es.eigenvalues()[k - 1];
    next = wk.col(keep - 1) - theta * vk.col(keep - 1);
    v.leftCols(keep) = vk;
    w.leftCols(keep) = wk;
    const Eigen::MatrixXd hk = vk.transpose() * wk;
    h.setZero();
    h.topLeftCorner(keep, keep) = 0.5 * (hk + hk.transpose());
    k = keep;
    const double before = next.norm();
    double after = orthogonalize(v, k, next);
    for (std::uint64_t salt = 1; after <= 1e-10 * std::max(before, 1.0); ++salt) {
      next = random_unit(dim, seed + salt * 0x9e3779b97f4a7c15ULL);
      after = orthogonalize(v, k, next);
    }
    next /= after;
  }
  throw LanczosNoConvergence(best, best_residual);
}

BlockTerm BlockTerm::full(const OperatorBlock& block) {
  BlockTerm t;
  t.word_ = block.gamma().word;
  t.m_ = block.size();
  t.op_ = block;
  return t;
}

BlockTerm BlockTerm::low_rank(const Word& word, Eigen::MatrixXd left, Eigen::MatrixXd right) {
  if (left.rows() != right.rows() || left.cols() != right.cols()) throw std::invalid_argument("low-rank factor shapes differ");
  BlockTerm t;
  t.word_ = word;
  t.m_ = left.rows();
  t.op_ = std::make_pair(std::move(left), std::move(right));
  return t;
}

Eigen::MatrixXd BlockTerm::apply(const Eigen::MatrixXd& x) const {
  if (const auto* b = std::get_if<OperatorBlock>(&op_)) {
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(m_, x.cols());
    b->apply_add(x, y);
    return y;
  }
  if (const auto* f = std::get_if<std::pair<Eigen::MatrixXd, Eigen::MatrixXd>>(&op_)) {
    return f->first * (f->second.transpose() * x);
  }
  throw std::logic_error("empty block term");
}

std::shared_ptr<const OperatorTerms> make_terms(const BlockFamily& family) {
  auto out = std::make_shared<OperatorTerms>();
  out->m = static_cast<Eigen::Index>(family.grid_size());
  out->terms.reserve(family.blocks.size());
  for (const OperatorBlock& b : family.blocks) out->terms.push_back(BlockTerm::full(b));
  return out;
}

CoverOperator::CoverOperator(std::shared_ptr<const OperatorTerms> terms, const HomTuple& hom, Fiber fiber,
                             int threads)
    : terms_(std::move(terms)), hom_(hom), fiber_(fiber), threads_(threads), n_(hom.n) {
  if (!terms_ || terms_->terms.empty()) throw std::invalid_argument("cover operator without blocks");
  if (hom.n < 1 || static_cast<int>(hom.gens.size()) != 2 * hom.genus) throw std::invalid_argument("malformed hom tuple");
  perms_.reserve(terms_->terms.size());
  for (const BlockTerm& t : terms_->terms) perms_.push_back(evaluate(hom, t.word()).images());
  helmert_.resize(n_ - 1, n_);
  std::vector<double> e(static_cast<std::size_t>(n_), 0.0);
  for (Eigen::Index j = 0; j < n_; ++j) {
    e[static_cast<std::size_t>(j)] = 1.0;
    const std::vector<double> c = helmert_coordinates(e);
    for (Eigen::Index k = 0; k + 1 < n_; ++k) helmert_(k, j) = c[static_cast<std::size_t>(k)];
    e[static_cast<std::size_t>(j)] = 0.0;
  }
}

Eigen::MatrixXd CoverOperator::apply(const Eigen::MatrixXd& x) const {
  const Eigen::Index m = grid_size();
  if (x.rows() != m || x.cols() != fiber_dimension()) throw std::invalid_argument("cover operator: dimension mismatch");
  if (fiber_dimension() == 0) return Eigen::MatrixXd(m, 0);
  const Eigen::MatrixXd xf = fiber_ == Fiber::Full ? x : Eigen::MatrixXd(x * helmert_);
  Eigen::MatrixXd yf = Eigen::MatrixXd::Zero(m, n_);
  const auto& terms = terms_->terms;
  // Y[:, pi(j)] += (A X)[:, j], summed in term order whatever the thread count.
  auto accumulate = [&](std::size_t k, const Eigen::MatrixXd& p) {
    const auto& pi = perms_[k];
    for (Eigen::Index j = 0; j < n_; ++j) yf.col(pi[static_cast<std::size_t>(j)]) += p.col(j);
  };
  if (threads_ <= 1) {
    for (std::size_t k = 0; k < terms.size(); ++k) accumulate(k, terms[k].apply(xf));
  } else {
    std::vector<Eigen::MatrixXd> parts(terms.size());
    parallel_for(terms.size(), threads_, [&](std::size_t k) { parts[k] = terms[k].apply(xf); });
    for (std::size_t k = 0; k < terms.size(); ++k) accumulate(k, parts[k]);
  }
  if (fiber_ == Fiber::Full) return yf;
  return yf * helmert_.transpose();
}

void CoverOperator::matvec(const Eigen::VectorXd& x, Eigen::VectorXd& y) const {
  if (x.size() != dimension()) throw std::invalid_argument("cover operator: dimension mismatch");
  const Eigen::Map<const Eigen::MatrixXd> xm(x.data(), grid_size(), fiber_dimension());
  const Eigen::MatrixXd ym = apply(xm);
  y = Eigen::Map<const Eigen::VectorXd>(ym.data(), ym.size());
}

LinearMap CoverOperator::as_map() const {
  return [this](const Eigen::VectorXd& x, Eigen::VectorXd& y) { matvec(x, y); };
}

Eigen::MatrixXd CoverOperator::to_dense() const {
  const Eigen::Index d = dimension();
  Eigen::MatrixXd out(d, d);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd y;
  for (Eigen::Index c = 0; c < d; ++c) {
    e[c] = 1.0;
    matvec(e, y);
    out.col(c) = y;
    e[c] = 0.0;
  }
  return out;
}

EigenEstimate top_norm(const CoverOperator& t, std::uint64_t seed, LanczosOptions opts) {
  return lanczos_top(t.as_map(), t.dimension(), seed, opts);
}

EigenEstimate constant_eigenvalue(const BlockFamily& family, std::uint64_t seed, LanczosOptions opts) {
  const auto m = static_cast<Eigen::Index>(family.grid_size());
  LinearMap sum = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) {
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(m, 1);
    for (const OperatorBlock& b : family.blocks) b.apply_add(x, acc);
    y = acc.col(0);
  };
  return lanczos_top(sum, m, seed, opts);
}

double ceiling_slack(const BlockFamily& family, std::uint64_t seed) {
  return std::max(0.0, constant_eigenvalue(family, seed).value - ball_area(family.t)) + 1e-9;
}

SpectralEstimate gap_from_norm(double op_norm, KernelRadius t, double ceiling_tolerance) {
  SpectralEstimate e;
  e.op_norm = op_norm;
  e.t = t.value();
  e.peak_baseline = h_peak(t);
  e.ceiling = ball_area(t);
  InvertOptions io;
  io.ceiling_tolerance = ceiling_tolerance;
  const Inversion inv = invert_h(t, std::max(op_norm, e.peak_baseline), io);
  e.param_a = inv.param.value();
  e.clamped = inv.clamped;
  e.lambda_lower_bound = 0.25 - e.param_a * e.param_a;
  if (op_norm > e.peak_baseline) {
    e.lambda_hat = e.lambda_lower_bound;
    e.linearized_bound = 0.25 - (op_norm - e.peak_baseline) / gap_lower_bound_coefficient(t);
  }
  return e;
}

SpectralEstimate estimate_gap(const CoverOperator& op, KernelRadius t, GapOptions opts) {
  if (op.fiber() != Fiber::MeanZero) throw std::invalid_argument("estimate_gap needs the mean-zero fiber");
  const EigenEstimate top = top_norm(op, opts.lanczos_seed, opts.lanczos);
  SpectralEstimate e = gap_from_norm(top.value, t, opts.ceiling_tolerance);
  e.krylov_residual = top.residual;
  e.min_eigenvalue = top.min_value;
  e.n = op.hom().n;
  e.m = op.grid_size();
  e.seed = op.hom().seed;
  e.transitive = op.hom().transitive;
  return e;
}

nlohmann::json to_json(const SpectralEstimate& e) {
  nlohmann::json j = {{"op_norm", e.op_norm},
                      {"peak_baseline", e.peak_baseline},
                      {"ceiling", e.ceiling},
                      {"param_a", e.param_a},
                      {"lambda_lower_bound", e.lambda_lower_bound},
                      {"lambda_hat", nullptr},
                      {"linearized_bound", e.linearized_bound},
                      {"clamped", e.clamped},
                      {"krylov_residual", e.krylov_residual},
                      {"min_eigenvalue", e.min_eigenvalue},
                      {"metadata", {{"n", e.n}, {"t", e.t}, {"m", e.m}, {"seed", e.seed}, {"transitive", e.transitive}}}};
  if (e.lambda_hat) j["lambda_hat"] = *e.lambda_hat;
  return j;
}

FamilySvd family_svd(const BlockFamily& family) {
  FamilySvd out;
  out.m = static_cast<Eigen::Index>(family.grid_size());
  out.source.resize(family.blocks.size());
  std::vector<std::size_t> own(family.blocks.size(), 0);
  for (std::size_t i = 0; i < family.blocks.size(); ++i) {
    const std::size_t j = family.support.inverse_of.at(i);
    if (j < i) {
      out.source[i] = {own[j], true};
    } else {
      own[i] = out.svds.size();
      out.svds.push_back(block_svd(family.blocks[i]));
      out.source[i] = {own[i], false};
    }
  }
  return out;
}

std::shared_ptr<const OperatorTerms> truncated_terms(const BlockFamily& family, const FamilySvd& svd, int r,
                                                     double* error_sum) {
  if (svd.source.size() != family.blocks.size()) throw std::invalid_argument("missing truncation for some block");
  if (r >= svd.m) {
    if (error_sum) *error_sum = 0.0;
    return make_terms(family);
  }
  auto out = std::make_shared<OperatorTerms>();
  out->m = svd.m;
  double err = 0.0;
  for (std::size_t i = 0; i < family.blocks.size(); ++i) {
    const auto [src, transposed] = svd.source[i];
    const TruncatedBlock tb = truncate(svd.svds.at(src), r);
    err += tb.op_error_bound;
    Eigen::MatrixXd left = tb.left_factors * tb.singular_values.asDiagonal();
    const Word& word = family.blocks[i].gamma().word;
    if (transposed) {
      out->terms.push_back(BlockTerm::low_rank(word, tb.right_factors * tb.singular_values.asDiagonal(), tb.left_factors));
    } else if (family.support.inverse_of[i] == i) {
      // (B + B^T) / 2 keeps the sigma_{r+1} error since the block is symmetric.
      Eigen::MatrixXd l(svd.m, 2 * tb.rank);
      Eigen::MatrixXd rt(svd.m, 2 * tb.rank);
      l << 0.5 * left, 0.5 * tb.right_factors * tb.singular_values.asDiagonal();
      rt << tb.right_factors, tb.left_factors;
      out->terms.push_back(BlockTerm::low_rank(word, std::move(l), std::move(rt)));
    } else {
      out->terms.push_back(BlockTerm::low_rank(word, std::move(left), tb.right_factors));
    }
  }
  if (error_sum) *error_sum = err;
  return out;
}

TruncationBound truncated_norm_bound(const BlockFamily& family, const FamilySvd& svd, const HomTuple& hom, int r,
                                     std::uint64_t seed, LanczosOptions opts) {
  TruncationBound out;
  out.rank = r;
  const auto terms = truncated_terms(family, svd, r, &out.error_sum);
  const CoverOperator op(terms, hom, Fiber::MeanZero);
  out.truncated_norm = top_norm(op, seed, opts).value;
  out.certified = out.truncated_norm + out.error_sum;
  double hs = 0.0;
  for (const OperatorBlock& b : family.blocks) hs += b.hs_norm();
  out.hs_reference = hs / std::sqrt(static_cast<double>(r));
  return out;
}

RegularBaseline regular_baseline(const FuchsianRealization& real, const BlockFamily& family, const QuadratureGrid& grid,
                                 int radius, std::uint64_t seed) {
  RegularBaseline out;
  out.exact = h_peak(family.t);
  const auto m = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXd root(m, 1);
  for (Eigen::Index i = 0; i < m; ++i) root(i, 0) = std::sqrt(grid.weights[static_cast<std::size_t>(i)]);
  const double area = grid.total_weight();

  // <1_F, K 1_{gamma F}> / |F| for each block.
  std::vector<double> s(family.blocks.size());
  for (std::size_t k = 0; k < family.blocks.size(); ++k) {
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(m, 1);
    family.blocks[k].apply_add(root, y);
    s[k] = root.col(0).dot(y.col(0)) / area;
  }

  const TileBall ball = tile_ball(real, radius);
  const ElementLookup lookup(real, ball.elements);
  // M(delta, delta gamma) = s_gamma, since <1_{delta F}, K 1_{delta' F}> depends on delta^-1 delta'.
  std::vector<Eigen::Triplet<double, std::ptrdiff_t>> entries;
  entries.reserve(ball.elements.size() * family.blocks.size());
  for (std::size_t a = 0; a < ball.elements.size(); ++a) {
    for (std::size_t k = 0; k < family.blocks.size(); ++k) {
      if (s[k] == 0.0) continue;
      const auto b = lookup.find(ball.elements[a].matrix * family.support.elements[k].matrix);
      if (b) entries.emplace_back(static_cast<std::ptrdiff_t>(a), static_cast<std::ptrdiff_t>(*b), s[k]);
    }
  }

  LanczosOptions opts;
  opts.subspace = 24;
  for (int d = 0; d <= radius; ++d) {
    const auto size = static_cast<std::ptrdiff_t>(
        std::upper_bound(ball.depth.begin(), ball.depth.end(), d) - ball.depth.begin());
    Eigen::SparseMatrix<double, Eigen::RowMajor, std::ptrdiff_t> mat(size, size);
    std::vector<Eigen::Triplet<double, std::ptrdiff_t>> sub;
    for (const auto& e : entries)
      if (e.row() < size && e.col() < size) sub.push_back(e);
    mat.setFromTriplets(sub.begin(), sub.end());
    LinearMap op = [&mat](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y = mat * x; };
    out.lower_bounds.push_back(lanczos_top(op, size, seed, opts).value);
    out.ball_sizes.push_back(static_cast<std::size_t>(size));
  }
  return out;
}

double dilation_norm(const LinearMap& a, const LinearMap& at, Eigen::Index rows, Eigen::Index cols,
                     std::uint64_t seed, LanczosOptions opts) {
  LinearMap dil = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) {
    Eigen::VectorXd top;
    Eigen::VectorXd bottom;
    a(x.tail(cols), top);
    at(x.head(rows), bottom);
    y.resize(rows + cols);
    y.head(rows) = top;
    y.tail(cols) = bottom;
  };
  return lanczos_top(dil, rows + cols, seed, opts).value;
}

DilationCheck self_adjointize_check(const CoverOperator& op, std::uint64_t seed, double tolerance) {
  DilationCheck out;
  const LinearMap t = op.as_map();
  const Eigen::Index d = op.dimension();
  out.dilation = dilation_norm(t, t, d, d, seed);
  const double top = top_norm(op, seed).value;
  LinearMap neg = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) {
    op.matvec(x, y);
    y = -y;
  };
  const double bottom = -lanczos_top(neg, d, seed).value;
  out.direct = std::max(std::abs(top), std::abs(bottom));
  out.agrees = std::abs(out.dilation - out.direct) <= tolerance * std::max(1.0, out.direct);
  return out;
}

}  // namespace covergap
