#include "covergap/realization.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace covergap {

namespace {

using cd = std::complex<double>;

HPoint disk_to_half_plane(cd w) {
  const cd z = cd(0.0, 1.0) * (1.0 + w) / (1.0 - w);
  return make_point(z.real(), z.imag());
}

// SU(1,1) matrix [[p, q], [conj q, conj p]] conjugated by the Cayley map
// K = [[i, i], [-1, 1]].
Isometry disk_isometry(cd p, cd q) {
  const cd i(0.0, 1.0);
  const cd k[2][2] = {{i, i}, {-1.0, 1.0}};
  const cd kinv[2][2] = {{1.0 / (2.0 * i), -i / (2.0 * i)}, {1.0 / (2.0 * i), i / (2.0 * i)}};
  const cd m[2][2] = {{p, q}, {std::conj(q), std::conj(p)}};
  cd t[2][2]{};
  cd r[2][2]{};
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c) t[a][b] += k[a][c] * m[c][b];
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c) r[a][b] += t[a][c] * kinv[c][b];
  return Isometry(r[0][0].real(), r[0][1].real(), r[1][0].real(), r[1][1].real());
}

double det3(const HyperboloidPoint& a, const HyperboloidPoint& b, const HyperboloidPoint& c) {
  return a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) +
         a[2] * (b[0] * c[1] - b[1] * c[0]);
}

double norm3(const HyperboloidPoint& a) {
  return std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]);
}

// Orbit points are at least min_separation apart (the action is free), so
// bucketing the (X1, X2) hyperboloid coordinates in unit cells finds
// duplicates without any ambiguity in the floating-point comparison.
class OrbitIndex {
 public:
  explicit OrbitIndex(double match_radius) : cosh_match_(std::cosh(match_radius)) {}

  void insert(HPoint z, std::size_t id) {
    points_.emplace(id, z);
    cells_[key(z)].push_back(id);
  }

  std::optional<std::size_t> find(HPoint z, double* dist = nullptr) const {
    const auto [cx, cy] = key(z);
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        const auto it = cells_.find({cx + dx, cy + dy});
        if (it == cells_.end()) continue;
        for (std::size_t id : it->second) {
          const double c = cosh_distance(z, points_.at(id));
          if (c <= cosh_match_) {
            if (dist) *dist = distance(z, points_.at(id));
            return id;
          }
        }
      }
    }
    return std::nullopt;
  }

 private:
  using Key = std::pair<std::int64_t, std::int64_t>;
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept {
      return std::hash<std::int64_t>{}(k.first * 0x9E3779B97F4A7C15LL ^ k.second);
    }
  };

  static Key key(HPoint z) {
    const HyperboloidPoint h = to_hyperboloid(z);
    return {static_cast<std::int64_t>(std::floor(h[1])), static_cast<std::int64_t>(std::floor(h[2]))};
  }

  double cosh_match_;
  std::unordered_map<std::size_t, HPoint> points_;
  std::unordered_map<Key, std::vector<std::size_t>, KeyHash> cells_;
};

double min_orbit_separation(const FuchsianRealization& real) {
  double sep = std::numeric_limits<double>::infinity();
  for (const auto& s : real.side_pairings) {
    sep = std::min(sep, distance(real.base_point, apply(s.matrix, real.base_point)));
  }
  return sep;
}

void fill_inverses(SupportSet& s, const FuchsianRealization& real) {
  OrbitIndex index(0.25 * min_orbit_separation(real));
  for (std::size_t i = 0; i < s.elements.size(); ++i) {
    index.insert(apply(s.elements[i].matrix, real.base_point), i);
  }
  s.inverse_of.assign(s.elements.size(), 0);
  for (std::size_t i = 0; i < s.elements.size(); ++i) {
    const auto j = index.find(apply(s.elements[i].matrix.inverse(), real.base_point));
    if (!j) throw std::logic_error("element set is not closed under inverses");
    s.inverse_of[i] = *j;
  }
}

}  // namespace

Isometry evaluate(const Word& w, const FuchsianRealization& real) {
  Isometry m;
  for (Letter l : w.letters()) {
    if (!real.presentation.is_letter(l)) throw std::invalid_argument("letter outside the presentation");
    const Isometry& g = real.generator_matrices[static_cast<std::size_t>(std::abs(l) - 1)];
    m = m * (l > 0 ? g : g.inverse());
  }
  return m;
}

FuchsianRealization build_bolza_realization() {
  constexpr double pi = std::numbers::pi;
  const double sqrt2 = std::numbers::sqrt2;
  // inradius rho: cosh rho = 1 + sqrt 2; circumradius: cosh = 3 + 2 sqrt 2
  const double rho = std::acosh(1.0 + sqrt2);
  const double circum = std::acosh(3.0 + 2.0 * sqrt2);

  // T_k translates by 2 rho towards the midpoint of side k (angle k pi / 4).
  std::vector<Isometry> t;
  for (int k = 0; k < 8; ++k) {
    t.push_back(disk_isometry(std::cosh(rho), std::sinh(rho) * std::polar(1.0, k * pi / 4.0)));
  }

  FuchsianRealization real;
  real.presentation = SurfacePresentation(2);
  // a1 = T0 T1^-1, b1 = T2 T3^-1 T1^-1, a2 = T2 T3^-1, b2 = T3^-1
  real.generator_matrices = {t[0] * t[1].inverse(), t[2] * t[3].inverse() * t[1].inverse(),
                             t[2] * t[3].inverse(), t[3].inverse()};
  const std::vector<Word> side_words = {Word{1, -2, 3}, Word{-2, 3}, Word{3, -4}, Word{-4}};
  for (int k = 0; k < 8; ++k) {
    const Word w = k < 4 ? side_words[static_cast<std::size_t>(k)]
                         : side_words[static_cast<std::size_t>(k - 4)].inverse();
    real.side_pairings.push_back({w, t[static_cast<std::size_t>(k)]});
  }

  real.base_point = make_point(0.0, 1.0);
  const double r_disk = std::tanh(circum / 2.0);
  for (int k = 0; k < 8; ++k) {
    real.domain_vertices.push_back(disk_to_half_plane(std::polar(r_disk, k * pi / 4.0 - pi / 8.0)));
  }
  for (const HPoint& v : real.domain_vertices) {
    real.domain_radius = std::max(real.domain_radius, distance(real.base_point, v));
    for (const HPoint& u : real.domain_vertices) {
      real.domain_diameter = std::max(real.domain_diameter, distance(u, v));
    }
  }

  if (!evaluate(real.presentation.relator(), real).is_identity(1e-8)) {
    throw std::runtime_error("octagon realization fails the surface relation");
  }
  for (const auto& s : real.side_pairings) {
    if (!evaluate(s.word, real).approx_equal(s.matrix, 1e-9)) {
      throw std::runtime_error("side pairing word disagrees with its matrix");
    }
  }
  for (const auto& g : real.generator_matrices) {
    if (!(std::abs(g.trace()) > 2.0)) throw std::runtime_error("generator is not hyperbolic");
  }
  return real;
}

double polygon_area(std::span<const HPoint> vertices) {
  if (vertices.size() < 3) throw std::invalid_argument("polygon needs at least three vertices");
  double area = 0.0;
  for (std::size_t k = 1; k + 1 < vertices.size(); ++k) {
    area += triangle_area(vertices[0], vertices[k], vertices[k + 1]);
  }
  return area;
}

bool polygon_contains(std::span<const HPoint> vertices, HPoint z, double tol) {
  // Geodesics are planes through the origin in hyperboloid coordinates, so
  // a convex polygon is an intersection of half-spaces (the Klein picture).
  const HyperboloidPoint p = to_hyperboloid(z);
  const double pn = norm3(p);
  const std::size_t n = vertices.size();
  for (std::size_t k = 0; k < n; ++k) {
    const HyperboloidPoint a = to_hyperboloid(vertices[k]);
    const HyperboloidPoint b = to_hyperboloid(vertices[(k + 1) % n]);
    const HyperboloidPoint c = to_hyperboloid(vertices[(k + 2) % n]);
    const double inside = det3(a, b, c);
    const double s = det3(a, b, p) / (norm3(a) * norm3(b) * pn);
    if ((inside > 0.0 ? s : -s) < -tol) return false;
  }
  return true;
}

std::size_t SupportSet::identity_index() const {
  for (std::size_t i = 0; i < elements.size(); ++i) {
    if (elements[i].word.empty()) return i;
  }
  throw std::logic_error("support set has no identity");
}

SupportSet lattice_points(const FuchsianRealization& real, double R, LatticeOptions opts) {
  if (!(R >= 0.0)) throw std::invalid_argument("lattice radius must be nonnegative");
  if (R > opts.radius_cap) {
    throw std::invalid_argument("lattice radius " + std::to_string(R) + " exceeds the cap " +
                                std::to_string(opts.radius_cap));
  }
  const double prune = R + real.domain_radius + 1e-9;
  const double sep = min_orbit_separation(real);
  OrbitIndex index(0.25 * sep);

  std::vector<GroupElement> all;
  all.push_back({Word{}, Isometry::identity(), 0.0});
  index.insert(real.base_point, 0);
  for (std::size_t head = 0; head < all.size(); ++head) {
    for (const auto& s : real.side_pairings) {
      const Isometry m = all[head].matrix * s.matrix;
      const HPoint image = apply(m, real.base_point);
      const double disp = distance(real.base_point, image);
      if (disp > prune) continue;
      double d = 0.0;
      const auto hit = index.find(image, &d);
      if (hit) {
        // a match is unambiguous unless it sits far from the exact orbit point
        if (d < 1e-6) continue;
        if (same_element(all[*hit].word, all[head].word * s.word, real.presentation)) continue;
      }
      all.push_back({all[head].word * s.word, m, disp});
      index.insert(image, all.size() - 1);
    }
  }

  SupportSet out;
  out.radius_used = R;
  for (auto& e : all) {
    if (e.displacement <= R) out.elements.push_back(std::move(e));
  }
  fill_inverses(out, real);
  return out;
}

std::vector<HPoint> boundary_samples(const FuchsianRealization& real, int per_side) {
  if (per_side < 1) throw std::invalid_argument("need at least one sample per side");
  std::vector<HPoint> out{real.base_point};
  const auto& v = real.domain_vertices;
  for (std::size_t k = 0; k < v.size(); ++k) {
    for (int j = 0; j < per_side; ++j) {
      out.push_back(geodesic_point(v[k], v[(k + 1) % v.size()], static_cast<double>(j) / per_side));
    }
  }
  return out;
}

SupportSet support_set(const FuchsianRealization& real, KernelRadius t, std::span<const HPoint> samples,
                       double slack, LatticeOptions opts) {
  if (samples.empty()) throw std::invalid_argument("support_set needs sample points");
  double sample_radius = 0.0;
  for (const HPoint& z : samples) sample_radius = std::max(sample_radius, distance(real.base_point, z));
  if (sample_radius > real.domain_radius + 1e-9) {
    throw std::invalid_argument("sample point lies outside the fundamental domain");
  }
  const double reach = t.value() + slack;
  const SupportSet cand = lattice_points(real, 2.0 * sample_radius + reach, opts);
  const double cosh_reach = std::cosh(reach);

  std::vector<char> hit(cand.size(), 0);
  for (std::size_t i = 0; i < cand.size(); ++i) {
    const Isometry& g = cand.elements[i].matrix;
    for (std::size_t b = 0; b < samples.size() && !hit[i]; ++b) {
      const HPoint gw = apply(g, samples[b]);
      for (const HPoint& z : samples) {
        if (cosh_distance(z, gw) <= cosh_reach) {
          hit[i] = 1;
          break;
        }
      }
    }
  }

  SupportSet out;
  out.radius_used = reach;
  for (std::size_t i = 0; i < cand.size(); ++i) {
    if (hit[i] || hit[cand.inverse_of[i]]) out.elements.push_back(cand.elements[i]);
  }
  fill_inverses(out, real);
  return out;
}

SupportSet support_set(const FuchsianRealization& real, KernelRadius t, LatticeOptions opts) {
  constexpr int per_side = 64;
  const auto samples = boundary_samples(real, per_side);
  double spacing = 0.0;
  const auto& v = real.domain_vertices;
  for (std::size_t k = 0; k < v.size(); ++k) {
    spacing = std::max(spacing, distance(v[k], v[(k + 1) % v.size()]) / per_side);
  }
  return support_set(real, t, samples, spacing, opts);
}

std::size_t max_word_length(const SupportSet& s, const SurfacePresentation& p) {
  std::size_t best = 0;
  for (const auto& e : s.elements) best = std::max(best, dehn_reduce(e.word, p).size());
  return best;
}

nlohmann::json to_json(const SupportSet& s, const SurfacePresentation& p) {
  nlohmann::json elems = nlohmann::json::array();
  for (std::size_t i = 0; i < s.elements.size(); ++i) {
    const auto& e = s.elements[i];
    const std::array<double, 4> m = e.matrix.sign_normalized().entries();
    elems.push_back({{"word", e.word.letters()},
                     {"word_text", p.to_string(e.word)},
                     {"matrix", m},
                     {"displacement", e.displacement},
                     {"inverse", s.inverse_of[i]}});
  }
  return {{"genus", p.genus()}, {"radius_used", s.radius_used}, {"elements", std::move(elems)}};
}

TileBall tile_ball(const FuchsianRealization& real, int depth) {
  if (depth < 0) throw std::invalid_argument("tile ball depth must be nonnegative");
  OrbitIndex index(0.25 * min_orbit_separation(real));
  TileBall ball;
  ball.elements.push_back({Word{}, Isometry::identity(), 0.0});
  ball.depth.push_back(0);
  index.insert(real.base_point, 0);
  for (std::size_t head = 0; head < ball.elements.size(); ++head) {
    if (ball.depth[head] == depth) break;
    for (const auto& s : real.side_pairings) {
      const Isometry m = ball.elements[head].matrix * s.matrix;
      const HPoint image = apply(m, real.base_point);
      double d = 0.0;
      const auto hit = index.find(image, &d);
      if (hit && (d < 1e-6 || same_element(ball.elements[*hit].word, ball.elements[head].word * s.word,
                                           real.presentation))) {
        continue;
      }
      ball.elements.push_back({ball.elements[head].word * s.word, m, distance(real.base_point, image)});
      ball.depth.push_back(ball.depth[head] + 1);
      index.insert(image, ball.elements.size() - 1);
    }
  }
  return ball;
}

struct ElementLookup::Impl {
  explicit Impl(double radius) : index(radius) {}
  OrbitIndex index;
  HPoint base;
};

ElementLookup::ElementLookup(const FuchsianRealization& real, std::span<const GroupElement> elements)
    : impl_(std::make_unique<Impl>(0.25 * min_orbit_separation(real))) {
  impl_->base = real.base_point;
  for (std::size_t i = 0; i < elements.size(); ++i) impl_->index.insert(apply(elements[i].matrix, real.base_point), i);
}

ElementLookup::~ElementLookup() = default;
ElementLookup::ElementLookup(ElementLookup&&) noexcept = default;
ElementLookup& ElementLookup::operator=(ElementLookup&&) noexcept = default;

std::optional<std::size_t> ElementLookup::find(const Isometry& g) const {
  return impl_->index.find(apply(g, impl_->base));
}

}  // namespace covergap
