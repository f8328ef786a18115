#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "covergap/hyperbolic.hpp"
#include "doctest.h"

using namespace covergap;

namespace {

HPoint random_point(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> x(-3.0, 3.0);
  std::uniform_real_distribution<double> logy(-2.0, 2.0);
  return make_point(x(rng), std::exp(logy(rng)));
}

Isometry random_isometry(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (;;) {
    const double a = u(rng), b = u(rng), c = u(rng);
    if (std::abs(a) < 0.1) continue;
    return Isometry(a, b, c, (1.0 + b * c) / a);
  }
}

}  // namespace

TEST_CASE("distance closed forms") {
  CHECK(distance(make_point(0, 1), make_point(0, 1)) == 0.0);
  CHECK(distance(make_point(0, 1), make_point(0, 2)) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(distance(make_point(0, 1), make_point(0, 2)) == doctest::Approx(std::acosh(1.25)).epsilon(1e-14));
  CHECK_THROWS_AS(make_point(0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(distance(HPoint{0.0, -1.0}, make_point(0, 1)), std::invalid_argument);
}

TEST_CASE("distance near the diagonal keeps relative accuracy") {
  const double h = 1e-9;
  // exact: 2 asinh(h / 2) for points (0,1), (h,1)
  CHECK(distance(make_point(0, 1), make_point(h, 1)) == doctest::Approx(2.0 * std::asinh(h / 2.0)).epsilon(1e-9));
}

TEST_CASE("apply") {
  const HPoint z = make_point(0.3, 0.7);
  const HPoint w = apply(Isometry::identity(), z);
  CHECK(w.x == z.x);
  CHECK(w.y == z.y);
  const HPoint two_i = apply(Isometry(std::sqrt(2.0), 0.0, 0.0, 1.0 / std::sqrt(2.0)), make_point(0, 1));
  CHECK(two_i.x == doctest::Approx(0.0));
  CHECK(two_i.y == doctest::Approx(2.0).epsilon(1e-15));

  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) {
    const Isometry m = random_isometry(rng);
    const HPoint p = random_point(rng);
    const HPoint back = apply(m, apply(m.inverse(), p));
    CHECK(distance(back, p) <= 1e-10);
    CHECK(apply(m, p).y > 0.0);
  }
}

TEST_CASE("isometry construction and equality up to sign") {
  CHECK_THROWS_AS(Isometry(1, 0, 0, -1), std::invalid_argument);
  const Isometry scaled(2, 0, 0, 2);
  CHECK(scaled.is_identity(1e-15));
  const Isometry m(1, 2, 1, 3);
  const Isometry neg(-1, -2, -1, -3);
  CHECK(m.approx_equal(neg, 1e-15));
  CHECK(neg.sign_normalized().a() == doctest::Approx(1.0));
  CHECK(m.inverse().approx_equal(Isometry(3, -2, -1, 1), 1e-15));
  CHECK((m * m.inverse()).is_identity(1e-14));
}

TEST_CASE("ball area") {
  CHECK(ball_area(KernelRadius(0.0)) == 0.0);
  CHECK(ball_area(KernelRadius(1.0)) == doctest::Approx(3.4122762652849).epsilon(1e-12));
  for (double t : {0.3, 1.0, 2.5, 6.0}) {
    const double oracle = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        [](double r) { return 2.0 * std::numbers::pi * std::sinh(r); }, 0.0, t, 0, 1e-14);
    CHECK(std::abs(ball_area(KernelRadius(t)) - oracle) <= 1e-10 * std::max(1.0, oracle));
  }
  CHECK_THROWS_AS(KernelRadius(-0.1), std::invalid_argument);
}

TEST_CASE("ball kernel") {
  const HPoint i = make_point(0, 1);
  const HPoint two_i = make_point(0, 2);
  CHECK(ball_kernel(KernelRadius(1.0), i, i) == 1);
  CHECK(ball_kernel(KernelRadius(0.5), i, two_i) == 0);
  CHECK(ball_kernel(KernelRadius(0.7), i, two_i) == 1);
  CHECK(ball_kernel(KernelRadius(0.7), two_i, i) == 1);
}

TEST_CASE("property: triangle inequality and symmetry") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 1000; ++i) {
    const HPoint z = random_point(rng), w = random_point(rng), u = random_point(rng);
    CHECK(distance(z, w) - distance(z, u) - distance(u, w) <= 1e-10);
    CHECK(distance(z, w) == distance(w, z));
  }
}

TEST_CASE("property: isometry invariance") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 100; ++i) {
    const Isometry m = random_isometry(rng);
    const HPoint z = random_point(rng), w = random_point(rng);
    CHECK(distance(apply(m, z), apply(m, w)) == doctest::Approx(distance(z, w)).epsilon(1e-10));
  }
}

TEST_CASE("property: determinant stays one along composition chains") {
  // rotations about i composed with short translations, so that entries stay
  // moderate over the whole chain
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> len(0.0, 0.1);
  Isometry acc;
  for (int i = 0; i < 100; ++i) {
    const double th = angle(rng) / 2.0;
    const double l = len(rng) / 2.0;
    const Isometry rot(std::cos(th), std::sin(th), -std::sin(th), std::cos(th));
    const Isometry shift(std::exp(l), 0.0, 0.0, std::exp(-l));
    acc = acc * rot * shift;
    CHECK(std::abs(acc.determinant() - 1.0) <= 1e-9);
  }
}

TEST_CASE("hyperboloid round trip and geodesic interpolation") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    const HPoint p = random_point(rng), q = random_point(rng);
    const HyperboloidPoint h = to_hyperboloid(p);
    CHECK(h[0] * h[0] - h[1] * h[1] - h[2] * h[2] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(distance(from_hyperboloid(h), p) <= 1e-10);
    const double s = 0.3;
    const HPoint m = geodesic_point(p, q, s);
    const double d = distance(p, q);
    CHECK(distance(p, m) == doctest::Approx(s * d).epsilon(1e-8));
    CHECK(distance(m, q) == doctest::Approx((1 - s) * d).epsilon(1e-8));
  }
}

TEST_CASE("triangle area agrees with the angle deficit") {
  // oracle: pi minus the angle sum, angles from the hyperbolic law of cosines
  auto angle = [](double a, double b, double c) {
    // angle opposite side c
    return std::acos((std::cosh(a) * std::cosh(b) - std::cosh(c)) / (std::sinh(a) * std::sinh(b)));
  };
  std::mt19937_64 rng(13);
  for (int i = 0; i < 200; ++i) {
    const HPoint p = random_point(rng), q = random_point(rng), r = random_point(rng);
    const double a = distance(q, r), b = distance(r, p), c = distance(p, q);
    const double deficit = std::numbers::pi - angle(b, c, a) - angle(c, a, b) - angle(a, b, c);
    CHECK(std::abs(triangle_area(p, q, r) - deficit) <= 1e-7);
  }
}
