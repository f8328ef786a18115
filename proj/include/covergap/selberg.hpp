#pragma once

// Selberg transform of the ball indicator kernel k_t and its inversion.

#include <stdexcept>

#include "covergap/hyperbolic.hpp"

namespace covergap {

/// Spectral parameter of lambda = 1/4 + r^2: real r >= 0, or r = a i with
/// a in [0, 1/2].
class SpectralParameter {
 public:
  enum class Kind { Real, Imaginary };

  static SpectralParameter real(double r);
  static SpectralParameter imaginary(double a);

  Kind kind() const noexcept { return kind_; }
  double value() const noexcept { return value_; }
  bool is_imaginary() const noexcept { return kind_ == Kind::Imaginary; }

 private:
  SpectralParameter(Kind k, double v) : kind_(k), value_(v) {}
  Kind kind_;
  double value_;
};

struct TransformValue {
  double value = 0.0;
  KernelRadius t{0.0};
  SpectralParameter param = SpectralParameter::real(0.0);
  double quadrature_error_estimate = 0.0;
};

/// h_t(r) = 4 sqrt2 int_0^t cos(r u) sqrt(cosh t - cosh u) du, with cosh(a u)
/// for r = a i. Integrated after u = t - s^2, which makes the integrand
/// analytic in s.
TransformValue selberg_h(KernelRadius t, SpectralParameter p);

/// h_t(0), the norm of the kernel operator on L^2 of the plane.
double h_peak(KernelRadius t);

/// Thrown when a norm exceeds h_t(i/2) = ball area by more than the allowed
/// tolerance.
class NormAboveCeiling : public std::domain_error {
 public:
  NormAboveCeiling(double v, double ceiling);
  double norm() const noexcept { return v_; }
  double ceiling() const noexcept { return ceiling_; }

 private:
  double v_;
  double ceiling_;
};

struct Inversion {
  SpectralParameter param = SpectralParameter::imaginary(0.0);
  /// v was below h_t(0) (a = 0) or above h_t(i/2) within tolerance (a = 1/2).
  bool clamped = false;
};

struct InvertOptions {
  /// Allowed excess of v over h_t(i/2), absolute.
  double ceiling_tolerance = 1e-10;
  /// Bisection stops once the bracket on a is this narrow.
  double a_tolerance = 1e-10;
};

/// The a in [0, 1/2] with h_t(a i) = clamp(v, h_t(0), h_t(i/2)).
Inversion invert_h(KernelRadius t, double v, InvertOptions opts = {});

/// 1/4 + r^2 or 1/4 - a^2.
double lambda_from_param(SpectralParameter p);

/// Plancherel density of the Laplacian on the plane:
/// (1 / 4 pi) tanh(pi sqrt(lambda - 1/4)) for lambda >= 1/4, else 0.
double plane_density(double lambda);

/// c(t) = 2 sqrt2 int_0^t u^2 sqrt(cosh t - cosh u) du, so that
/// h_t(a i) - h_t(0) >= c(t) a^2.
double gap_lower_bound_coefficient(KernelRadius t);

}  // namespace covergap
