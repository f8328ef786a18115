#include "covergap/selberg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

namespace covergap {

namespace {

struct Integral {
  double value;
  double error;
};

// 4 sqrt2 int_0^t f(u) sqrt(cosh t - cosh u) du with u = t - s^2 and
// cosh t - cosh u = 2 sinh(t - s^2 / 2) sinh(s^2 / 2).
template <class F>
Integral weighted_integral(double t, F f) {
  if (t == 0.0) return {0.0, 0.0};
  auto g = [t, &f](double s) {
    const double s2 = s * s;
    const double w = std::sqrt(2.0 * std::sinh(t - s2 / 2.0) * std::sinh(s2 / 2.0));
    return 2.0 * s * f(t - s2) * w;
  };
  using boost::math::quadrature::gauss_kronrod;
  const double len = std::sqrt(t);
  double err = 0.0;
  const double v = gauss_kronrod<double, 61>::integrate(g, 0.0, len, 12, 1e-13, &err);
  const double coarse = gauss_kronrod<double, 31>::integrate(g, 0.0, len, 12, 1e-13);
  const double scale = 4.0 * std::numbers::sqrt2;
  // boost reports the Kronrod-Gauss gap on the interval mapped to [-1, 1]
  return {scale * v, scale * std::max(std::abs(v - coarse), 0.5 * len * err)};
}

}  // namespace

SpectralParameter SpectralParameter::real(double r) {
  if (!(r >= 0.0) || !std::isfinite(r)) throw std::invalid_argument("real spectral parameter must be >= 0");
  return {Kind::Real, r};
}

SpectralParameter SpectralParameter::imaginary(double a) {
  if (!(a >= 0.0 && a <= 0.5)) throw std::invalid_argument("imaginary spectral parameter must lie in [0, 1/2]");
  return {Kind::Imaginary, a};
}

TransformValue selberg_h(KernelRadius t, SpectralParameter p) {
  const double x = p.value();
  const Integral i = p.is_imaginary() ? weighted_integral(t.value(), [x](double u) { return std::cosh(x * u); })
                                      : weighted_integral(t.value(), [x](double u) { return std::cos(x * u); });
  return {i.value, t, p, i.error};
}

double h_peak(KernelRadius t) { return selberg_h(t, SpectralParameter::real(0.0)).value; }

NormAboveCeiling::NormAboveCeiling(double v, double ceiling)
    : std::domain_error("norm exceeds lambda=0 value: " + std::to_string(v) + " > " + std::to_string(ceiling)),
      v_(v),
      ceiling_(ceiling) {}

Inversion invert_h(KernelRadius t, double v, InvertOptions opts) {
  const double lo = h_peak(t);
  const double hi = selberg_h(t, SpectralParameter::imaginary(0.5)).value;
  if (v > hi + opts.ceiling_tolerance) throw NormAboveCeiling(v, hi);
  if (v <= lo) return {SpectralParameter::imaginary(0.0), v < lo};
  if (v >= hi) return {SpectralParameter::imaginary(0.5), v > hi};

  auto f = [&](double a) { return selberg_h(t, SpectralParameter::imaginary(a)).value - v; };
  auto done = [&](double a, double b) { return std::abs(b - a) <= opts.a_tolerance; };
  const auto [a0, a1] = boost::math::tools::bisect(f, 0.0, 0.5, done);
  return {SpectralParameter::imaginary(std::clamp(0.5 * (a0 + a1), 0.0, 0.5)), false};
}

double lambda_from_param(SpectralParameter p) {
  const double x = p.value();
  return p.is_imaginary() ? 0.25 - x * x : 0.25 + x * x;
}

double plane_density(double lambda) {
  if (!(lambda > 0.25)) return 0.0;
  return std::tanh(std::numbers::pi * std::sqrt(lambda - 0.25)) / (4.0 * std::numbers::pi);
}

double gap_lower_bound_coefficient(KernelRadius t) {
  // 2 sqrt2 = half of the 4 sqrt2 prefactor
  return 0.5 * weighted_integral(t.value(), [](double u) { return u * u; }).value;
}

}  // namespace covergap
