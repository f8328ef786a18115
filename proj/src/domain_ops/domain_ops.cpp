#include "covergap/domain_ops.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>

#include "covergap/parallel.hpp"

namespace covergap {

namespace {

HPoint centroid(HPoint p, HPoint q, HPoint r) {
  const HyperboloidPoint a = to_hyperboloid(p), b = to_hyperboloid(q), c = to_hyperboloid(r);
  HyperboloidPoint s{a[0] + b[0] + c[0], a[1] + b[1] + c[1], a[2] + b[2] + c[2]};
  const double n = std::sqrt(s[0] * s[0] - s[1] * s[1] - s[2] * s[2]);
  for (double& x : s) x /= n;
  return from_hyperboloid(s);
}

// Same arithmetic as cosh_distance() without the validity checks, so the
// grid-based support set and the block entries agree bit for bit.
inline double cosh_dist(HPoint z, HPoint w) {
  const double dx = z.x - w.x;
  const double dy = z.y - w.y;
  return 1.0 + (dx * dx + dy * dy) / (2.0 * z.y * w.y);
}

Eigen::MatrixXd kernel_matrix(const Isometry& g, KernelRadius t, const QuadratureGrid& grid) {
  const auto m = static_cast<Eigen::Index>(grid.size());
  std::vector<HPoint> moved(grid.points.size());
  for (std::size_t k = 0; k < moved.size(); ++k) moved[k] = apply(g, grid.points[k]);
  std::vector<double> root(grid.weights.size());
  for (std::size_t k = 0; k < root.size(); ++k) root[k] = std::sqrt(grid.weights[k]);
  const double threshold = std::cosh(t.value());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const HPoint z = grid.points[static_cast<std::size_t>(j)];
    for (Eigen::Index k = 0; k < m; ++k) {
      if (cosh_dist(z, moved[static_cast<std::size_t>(k)]) <= threshold) {
        a(j, k) = root[static_cast<std::size_t>(j)] * root[static_cast<std::size_t>(k)];
      }
    }
  }
  return a;
}

OperatorBlock make_block(GroupElement gamma, Eigen::MatrixXd a) {
  const double nnz = static_cast<double>((a.array() != 0.0).count());
  if (nnz < OperatorBlock::kSparseDensity * static_cast<double>(a.size())) {
    SparseBlock s = a.sparseView();
    s.makeCompressed();
    return OperatorBlock(std::move(gamma), std::move(s));
  }
  return OperatorBlock(std::move(gamma), std::move(a));
}

}  // namespace

double QuadratureGrid::total_weight() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

QuadratureGrid build_grid(const FuchsianRealization& real, int target_m) {
  if (target_m < 50) throw std::invalid_argument("grid target must be at least 50 nodes");
  const auto& v = real.domain_vertices;
  if (v.size() < 3) throw std::invalid_argument("fundamental polygon has fewer than three vertices");
  if (!polygon_contains(v, real.base_point)) throw std::invalid_argument("base point is outside the polygon");

  // boundary ring: every vertex followed by the midpoint of the next side
  std::vector<HPoint> ring;
  for (std::size_t k = 0; k < v.size(); ++k) {
    ring.push_back(v[k]);
    ring.push_back(geodesic_point(v[k], v[(k + 1) % v.size()], 0.5));
  }
  const double fans = static_cast<double>(ring.size());
  const int s = std::max(1, static_cast<int>(std::lround(std::sqrt(target_m / fans))));

  QuadratureGrid grid;
  grid.subdivision = s;
  const HPoint c = real.base_point;
  for (std::size_t f = 0; f < ring.size(); ++f) {
    const HPoint a = ring[f];
    const HPoint b = ring[(f + 1) % ring.size()];
    if (triangle_area(c, a, b) <= 0.0) throw std::invalid_argument("degenerate fan triangle");
    // rows[l][j], j = 0..l: on the ray towards the point at fraction j / l of
    // side ab, at fraction l / s of the distance to it
    std::vector<std::vector<HPoint>> rows(static_cast<std::size_t>(s) + 1);
    rows[0] = {c};
    for (int l = 1; l <= s; ++l) {
      for (int j = 0; j <= l; ++j) {
        const HPoint q = geodesic_point(a, b, static_cast<double>(j) / l);
        rows[static_cast<std::size_t>(l)].push_back(l == s ? q : geodesic_point(c, q, static_cast<double>(l) / s));
      }
    }
    auto cell = [&](HPoint p, HPoint q, HPoint r) {
      grid.points.push_back(centroid(p, q, r));
      grid.weights.push_back(triangle_area(p, q, r));
    };
    for (std::size_t l = 0; l + 1 < rows.size(); ++l) {
      const auto& lo = rows[l];
      const auto& hi = rows[l + 1];
      for (std::size_t j = 0; j < lo.size(); ++j) {
        cell(lo[j], hi[j], hi[j + 1]);
        if (j + 1 < lo.size()) cell(lo[j], hi[j + 1], lo[j + 1]);
      }
    }
  }
  for (const HPoint& z : grid.points) {
    if (!polygon_contains(v, z, -1e-12)) throw std::logic_error("grid node outside the polygon");
  }
  return grid;
}

OperatorBlock::OperatorBlock(GroupElement gamma, Eigen::MatrixXd dense)
    : gamma_(std::move(gamma)), n_(dense.rows()) {
  if (dense.rows() != dense.cols()) throw std::invalid_argument("operator block must be square");
  density_ = n_ == 0 ? 0.0 : static_cast<double>((dense.array() != 0.0).count()) / static_cast<double>(dense.size());
  hs_norm_ = dense.norm();
  dense_ = std::move(dense);
}

OperatorBlock::OperatorBlock(GroupElement gamma, SparseBlock sparse) : gamma_(std::move(gamma)), n_(sparse.rows()) {
  if (sparse.rows() != sparse.cols()) throw std::invalid_argument("operator block must be square");
  sparse.makeCompressed();
  density_ = n_ == 0 ? 0.0 : static_cast<double>(sparse.nonZeros()) / (static_cast<double>(n_) * static_cast<double>(n_));
  hs_norm_ = sparse.norm();
  sparse_ = std::move(sparse);
}

Eigen::MatrixXd OperatorBlock::to_dense() const {
  if (dense_) return *dense_;
  return Eigen::MatrixXd(*sparse_);
}

void OperatorBlock::apply_add(const Eigen::MatrixXd& x, Eigen::MatrixXd& y) const {
  if (x.rows() != n_ || y.rows() != n_ || x.cols() != y.cols()) {
    throw std::invalid_argument("block apply: dimension mismatch");
  }
  if (dense_) {
    y.noalias() += *dense_ * x;
  } else {
    y.noalias() += *sparse_ * x;
  }
}

OperatorBlock OperatorBlock::transposed(GroupElement inverse) const {
  if (dense_) return OperatorBlock(std::move(inverse), Eigen::MatrixXd(dense_->transpose()));
  return OperatorBlock(std::move(inverse), SparseBlock(sparse_->transpose()));
}

OperatorBlock assemble_block(const GroupElement& gamma, KernelRadius t, const QuadratureGrid& grid) {
  return make_block(gamma, kernel_matrix(gamma.matrix, t, grid));
}

BlockFamily assemble_blocks(const SupportSet& support, KernelRadius t, const QuadratureGrid& grid, int threads) {
  const std::size_t n = support.size();
  // one representative per inverse pair: the smaller index
  std::vector<std::size_t> reps;
  for (std::size_t i = 0; i < n; ++i) {
    if (support.inverse_of[i] >= i) reps.push_back(i);
  }
  std::vector<std::optional<OperatorBlock>> slots(n);
  parallel_for(reps.size(), threads, [&](std::size_t r) {
    const std::size_t i = reps[r];
    const std::size_t j = support.inverse_of[i];
    OperatorBlock b = assemble_block(support.elements[i], t, grid);
    if (j != i) slots[j] = b.transposed(support.elements[j]);
    slots[i] = std::move(b);
  });

  BlockFamily fam;
  fam.t = t;
  fam.support.radius_used = support.radius_used;
  std::vector<std::size_t> new_index(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (slots[i]->is_zero()) continue;
    new_index[i] = fam.blocks.size();
    fam.support.elements.push_back(support.elements[i]);
    fam.blocks.push_back(std::move(*slots[i]));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (new_index[i] != n) fam.support.inverse_of.push_back(new_index[support.inverse_of[i]]);
  }
  return fam;
}

BlockFamily assemble_family(const FuchsianRealization& real, KernelRadius t, const QuadratureGrid& grid, int threads) {
  return assemble_blocks(support_set(real, t, grid.points, 0.0), t, grid, threads);
}

HsFit hs_norm_bound_check(const std::vector<BlockFamily>& families) {
  if (families.size() < 2) throw std::invalid_argument("hs_norm_bound_check needs at least two kernel radii");
  HsFit fit;
  for (const auto& fam : families) {
    double best = 0.0;
    for (const auto& b : fam.blocks) best = std::max(best, b.hs_norm());
    fit.max_hs.emplace_back(fam.t.value(), best);
    fit.c_hat = std::max(fit.c_hat, best * std::exp(-fam.t.value()));
  }
  fit.bound_holds = true;
  for (const auto& [t, hs] : fit.max_hs) {
    if (!(std::isfinite(hs) && hs <= fit.c_hat * std::exp(t) * (1.0 + 1e-12))) fit.bound_holds = false;
  }

  std::vector<const BlockFamily*> order;
  for (const auto& f : families) order.push_back(&f);
  std::sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->t.value() < b->t.value(); });
  fit.monotone = true;
  std::map<Word, double> last;
  for (const BlockFamily* f : order) {
    std::map<Word, double> cur;
    for (std::size_t i = 0; i < f->blocks.size(); ++i) cur[f->support.elements[i].word] = f->blocks[i].hs_norm();
    for (const auto& [w, hs] : last) {
      const auto it = cur.find(w);
      const double now = it == cur.end() ? 0.0 : it->second;
      if (now < hs) fit.monotone = false;
    }
    last = std::move(cur);
  }
  return fit;
}

BlockSvd block_svd(const OperatorBlock& block) {
  const Eigen::MatrixXd a = block.to_dense();
  BlockSvd out;
  out.word = block.gamma().word;
  out.size = a.rows();
  out.hs_norm = block.hs_norm();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    if (a.row(i).any()) out.rows.push_back(i);
    if (a.col(i).any()) out.cols.push_back(i);
  }
  const auto nr = static_cast<Eigen::Index>(out.rows.size());
  const auto nc = static_cast<Eigen::Index>(out.cols.size());
  if (nr == 0) {
    out.sigma.resize(0);
    return out;
  }
  Eigen::MatrixXd sub(nr, nc);
  for (Eigen::Index r = 0; r < nr; ++r)
    for (Eigen::Index c = 0; c < nc; ++c) sub(r, c) = a(out.rows[static_cast<std::size_t>(r)], out.cols[static_cast<std::size_t>(c)]);
  // BDCSVD in Eigen 3.4 returns singular vectors with ~1e-5 relative
  // reconstruction error on these blocks; one-sided Jacobi is exact to rounding.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(sub, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw std::runtime_error("SVD failed for block " + std::to_string(out.word.size()));
  out.u = svd.matrixU();
  out.v = svd.matrixV();
  out.sigma = svd.singularValues();
  return out;
}

TruncatedBlock truncate(const BlockSvd& svd, int r) {
  if (r < 1) throw std::invalid_argument("truncation rank must be at least 1");
  const auto available = svd.sigma.size();
  const Eigen::Index keep = std::min<Eigen::Index>(r, available);
  TruncatedBlock out;
  out.word = svd.word;
  out.rank = static_cast<int>(keep);
  out.hs_norm = svd.hs_norm;
  out.singular_values = svd.sigma.head(keep);
  out.left_factors = Eigen::MatrixXd::Zero(svd.size, keep);
  out.right_factors = Eigen::MatrixXd::Zero(svd.size, keep);
  for (std::size_t i = 0; i < svd.rows.size(); ++i)
    out.left_factors.row(svd.rows[i]) = svd.u.row(static_cast<Eigen::Index>(i)).head(keep);
  for (std::size_t i = 0; i < svd.cols.size(); ++i)
    out.right_factors.row(svd.cols[i]) = svd.v.row(static_cast<Eigen::Index>(i)).head(keep);
  out.op_error_bound = r < available ? svd.sigma[r] : 0.0;
  const double hs_bound = svd.hs_norm / std::sqrt(static_cast<double>(r));
  if (out.op_error_bound > hs_bound * (1.0 + 1e-12)) {
    throw std::logic_error("truncation certificate violated: sigma_{r+1} > hs / sqrt(r)");
  }
  return out;
}

TruncatedBlock svd_truncate(const OperatorBlock& block, int r) { return truncate(block_svd(block), r); }

Eigen::MatrixXd TruncatedBlock::to_dense() const {
  return left_factors * singular_values.asDiagonal() * right_factors.transpose();
}

nlohmann::json to_json(const QuadratureGrid& grid) {
  nlohmann::json pts = nlohmann::json::array();
  for (const HPoint& z : grid.points) pts.push_back({z.x, z.y});
  return {{"m", grid.size()}, {"subdivision", grid.subdivision}, {"points", pts}, {"weights", grid.weights}};
}

void export_blocks(const std::filesystem::path& stem, const BlockFamily& family, const QuadratureGrid& grid,
                   const SurfacePresentation& p) {
  std::filesystem::path json_path = stem;
  json_path += ".json";
  std::filesystem::path raw_path = stem;
  raw_path += ".f64";
  std::ofstream raw(raw_path, std::ios::binary);
  if (!raw) throw std::runtime_error("cannot open " + raw_path.string());

  nlohmann::json blocks = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (std::size_t i = 0; i < family.blocks.size(); ++i) {
    const auto& b = family.blocks[i];
    const auto& e = family.support.elements[i];
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> a = b.to_dense();
    for (Eigen::Index k = 0; k < a.size(); ++k) {
      std::uint64_t bits = 0;
      const double x = a.data()[k];
      std::memcpy(&bits, &x, sizeof bits);
      if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
      raw.write(reinterpret_cast<const char*>(&bits), sizeof bits);
    }
    const std::array<double, 4> mat = e.matrix.sign_normalized().entries();
    blocks.push_back({{"index", i},
                      {"word", e.word.letters()},
                      {"word_text", p.to_string(e.word)},
                      {"isometry", mat},
                      {"inverse", family.support.inverse_of[i]},
                      {"hs_norm", b.hs_norm()},
                      {"density", b.density()},
                      {"storage", b.is_sparse() ? "sparse" : "dense"},
                      {"rows", a.rows()},
                      {"cols", a.cols()},
                      {"offset_bytes", offset}});
    offset += static_cast<std::uint64_t>(a.size()) * sizeof(double);
  }
  if (!raw) throw std::runtime_error("failed writing " + raw_path.string());

  const nlohmann::json doc = {{"format", "covergap-blocks"},
                              {"version", 1},
                              {"t", family.t.value()},
                              {"raw_file", raw_path.filename().string()},
                              {"dtype", "float64"},
                              {"byte_order", "little"},
                              {"layout", "row-major"},
                              {"grid", to_json(grid)},
                              {"blocks", blocks}};
  std::ofstream js(json_path);
  if (!js) throw std::runtime_error("cannot open " + json_path.string());
  js << doc.dump(1) << '\n';
}

}  // namespace covergap
