#pragma once

// Upper half-plane geometry: points, PSL(2,R) isometries, distance and the
// ball indicator kernel.

#include <array>
#include <stdexcept>

namespace covergap {

/// A point x + iy of the upper half-plane. Construct through make_point()
/// when the coordinates come from outside; every operation taking an HPoint
/// rejects y <= 0.
struct HPoint {
  double x = 0.0;
  double y = 1.0;
};

HPoint make_point(double x, double y);

/// Hyperbolic radius of a ball kernel (t >= 0).
class KernelRadius {
 public:
  explicit KernelRadius(double t);
  double value() const noexcept { return t_; }

 private:
  double t_;
};

/// Real 2x2 matrix with unit determinant acting by Moebius transformations.
/// M and -M are the same isometry.
class Isometry {
 public:
  static constexpr double kDeterminantTolerance = 1e-12;

  Isometry() noexcept : m_{1.0, 0.0, 0.0, 1.0} {}
  /// Rescales by 1/sqrt(det) when |det - 1| exceeds the tolerance; throws if
  /// det <= 0.
  Isometry(double a, double b, double c, double d);

  static Isometry identity() noexcept { return Isometry(); }

  double a() const noexcept { return m_[0]; }
  double b() const noexcept { return m_[1]; }
  double c() const noexcept { return m_[2]; }
  double d() const noexcept { return m_[3]; }
  const std::array<double, 4>& entries() const noexcept { return m_; }

  double determinant() const noexcept { return m_[0] * m_[3] - m_[1] * m_[2]; }
  double trace() const noexcept { return m_[0] + m_[3]; }
  /// 2 arccosh(|tr|/2) for hyperbolic elements, 0 otherwise.
  double translation_length() const;

  Isometry operator*(const Isometry& rhs) const;
  Isometry inverse() const noexcept;

  /// Representative with its first nonzero entry positive.
  Isometry sign_normalized() const noexcept;
  /// Entrywise comparison up to global sign.
  bool approx_equal(const Isometry& other, double tol) const noexcept;
  bool is_identity(double tol) const noexcept;

 private:
  struct Raw {};
  Isometry(Raw, double a, double b, double c, double d) noexcept : m_{a, b, c, d} {}
  std::array<double, 4> m_;
};

/// cosh of the hyperbolic distance; cheaper than distance() and monotone in it.
double cosh_distance(HPoint z, HPoint w);
double distance(HPoint z, HPoint w);
HPoint apply(const Isometry& m, HPoint z);

/// Area 2 pi (cosh t - 1) of a hyperbolic disc of radius t.
double ball_area(KernelRadius t);
/// 1 if d(z, w) <= t, else 0.
int ball_kernel(KernelRadius t, HPoint z, HPoint w);

/// Point on the hyperboloid X0^2 - X1^2 - X2^2 = 1, X0 > 0.
using HyperboloidPoint = std::array<double, 3>;
HyperboloidPoint to_hyperboloid(HPoint z);
HPoint from_hyperboloid(const HyperboloidPoint& p);
/// Point at fraction s of the geodesic from p to q, by arclength.
HPoint geodesic_point(HPoint p, HPoint q, double s);
/// Area of the geodesic triangle from tan(A/2) = |det(p,q,r)| / (1 + cosh a +
/// cosh b + cosh c) on hyperboloid vectors.
double triangle_area(HPoint p, HPoint q, HPoint r);

}  // namespace covergap
