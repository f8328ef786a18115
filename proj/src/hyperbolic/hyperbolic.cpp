#include "covergap/hyperbolic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace covergap {

namespace {

void require_valid(HPoint z) {
  if (!(z.y > 0.0) || !std::isfinite(z.x) || !std::isfinite(z.y)) {
    throw std::invalid_argument("point is not in the upper half-plane (y = " +
                                std::to_string(z.y) + ")");
  }
}

// ad - bc carries rounding error of order eps (|ad| + |bc|); rescaling on
// that noise would damage large matrices, so only larger drift counts.
bool drifted(double a, double b, double c, double d) {
  const double noise = 8.0 * std::numeric_limits<double>::epsilon() * (std::abs(a * d) + std::abs(b * c));
  return std::abs(a * d - b * c - 1.0) > std::max(Isometry::kDeterminantTolerance, noise);
}

}  // namespace

HPoint make_point(double x, double y) {
  HPoint z{x, y};
  require_valid(z);
  return z;
}

KernelRadius::KernelRadius(double t) : t_(t) {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw std::invalid_argument("kernel radius must be finite and nonnegative");
  }
}

Isometry::Isometry(double a, double b, double c, double d) : m_{a, b, c, d} {
  const double det = determinant();
  if (!(det > 0.0) || !std::isfinite(det)) {
    throw std::invalid_argument("isometry matrix must have positive determinant");
  }
  if (drifted(m_[0], m_[1], m_[2], m_[3])) {
    const double s = 1.0 / std::sqrt(det);
    for (double& e : m_) e *= s;
  }
}

double Isometry::translation_length() const {
  const double half = std::abs(trace()) / 2.0;
  return half > 1.0 ? 2.0 * std::acosh(half) : 0.0;
}

Isometry Isometry::operator*(const Isometry& r) const {
  const double a = m_[0] * r.m_[0] + m_[1] * r.m_[2];
  const double b = m_[0] * r.m_[1] + m_[1] * r.m_[3];
  const double c = m_[2] * r.m_[0] + m_[3] * r.m_[2];
  const double d = m_[2] * r.m_[1] + m_[3] * r.m_[3];
  if (drifted(a, b, c, d)) {
    const double s = 1.0 / std::sqrt(a * d - b * c);
    return Isometry(Raw{}, a * s, b * s, c * s, d * s);
  }
  return Isometry(Raw{}, a, b, c, d);
}

Isometry Isometry::inverse() const noexcept {
  return Isometry(Raw{}, m_[3], -m_[1], -m_[2], m_[0]);
}

Isometry Isometry::sign_normalized() const noexcept {
  for (double e : m_) {
    if (e > 0.0) return *this;
    if (e < 0.0) return Isometry(Raw{}, -m_[0], -m_[1], -m_[2], -m_[3]);
  }
  return *this;
}

bool Isometry::approx_equal(const Isometry& o, double tol) const noexcept {
  double plus = 0.0;
  double minus = 0.0;
  for (int i = 0; i < 4; ++i) {
    plus = std::max(plus, std::abs(m_[i] - o.m_[i]));
    minus = std::max(minus, std::abs(m_[i] + o.m_[i]));
  }
  return std::min(plus, minus) <= tol;
}

bool Isometry::is_identity(double tol) const noexcept {
  return approx_equal(Isometry(), tol);
}

double cosh_distance(HPoint z, HPoint w) {
  require_valid(z);
  require_valid(w);
  const double dx = z.x - w.x;
  const double dy = z.y - w.y;
  return 1.0 + (dx * dx + dy * dy) / (2.0 * z.y * w.y);
}

double distance(HPoint z, HPoint w) {
  require_valid(z);
  require_valid(w);
  const double dx = z.x - w.x;
  const double dy = z.y - w.y;
  const double eps = (dx * dx + dy * dy) / (2.0 * z.y * w.y);
  if (eps < 1e-12) return std::sqrt(2.0 * eps);
  // arccosh(1 + eps) without forming 1 + eps
  return std::log1p(eps + std::sqrt(eps * (2.0 + eps)));
}

HPoint apply(const Isometry& m, HPoint z) {
  require_valid(z);
  // (a z + b) / (c z + d) with z = x + iy, det = 1
  const double cx = m.c() * z.x + m.d();
  const double cy = m.c() * z.y;
  const double denom = cx * cx + cy * cy;
  const double nx = m.a() * z.x + m.b();
  const double ny = m.a() * z.y;
  const double x = (nx * cx + ny * cy) / denom;
  const double y = z.y / denom;
  return HPoint{x, y};
}

double ball_area(KernelRadius t) {
  // 2 pi (cosh t - 1) = 4 pi sinh^2(t / 2)
  const double s = std::sinh(t.value() / 2.0);
  return 4.0 * std::numbers::pi * s * s;
}

int ball_kernel(KernelRadius t, HPoint z, HPoint w) {
  return distance(z, w) <= t.value() ? 1 : 0;
}

HyperboloidPoint to_hyperboloid(HPoint z) {
  require_valid(z);
  const double r2 = z.x * z.x + z.y * z.y;
  return {(r2 + 1.0) / (2.0 * z.y), z.x / z.y, (r2 - 1.0) / (2.0 * z.y)};
}

HPoint from_hyperboloid(const HyperboloidPoint& p) {
  // inverse of the map above: y = 1 / (X0 - X2), x = X1 y
  const double y = 1.0 / (p[0] - p[2]);
  return make_point(p[1] * y, y);
}

HPoint geodesic_point(HPoint p, HPoint q, double s) {
  const double len = distance(p, q);
  if (len < 1e-14) return p;
  const HyperboloidPoint a = to_hyperboloid(p);
  const HyperboloidPoint b = to_hyperboloid(q);
  const double sl = std::sinh(len);
  const double ca = std::sinh((1.0 - s) * len) / sl;
  const double cb = std::sinh(s * len) / sl;
  return from_hyperboloid({ca * a[0] + cb * b[0], ca * a[1] + cb * b[1], ca * a[2] + cb * b[2]});
}

double triangle_area(HPoint p, HPoint q, HPoint r) {
  const HyperboloidPoint a = to_hyperboloid(p);
  const HyperboloidPoint b = to_hyperboloid(q);
  const HyperboloidPoint c = to_hyperboloid(r);
  const double det = a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) +
                     a[2] * (b[0] * c[1] - b[1] * c[0]);
  const double denom = 1.0 + cosh_distance(p, q) + cosh_distance(q, r) + cosh_distance(r, p);
  return 2.0 * std::atan(std::abs(det) / denom);
}

}  // namespace covergap
