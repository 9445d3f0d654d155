#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "hypwhitney/audit.hpp"
#include "hypwhitney/surface.hpp"

using namespace hw;

namespace {

Point2 rnd(Rng& g) { return {2 * uniform01(g) - 1, 2 * uniform01(g) - 1}; }

// independent oracle: explicit inverse of [[0,1],[1,h]] and a plain dot product
double quad_form_oracle(const PhaseFamily& f, Point2 zb, Point2 z1, Point2 z2, Point2 z1p, Point2 z2p) {
  const auto H = grad_hess(f, zb).hess;
  const double det = H[0] * H[3] - H[1] * H[2];
  const double inv[4] = {H[3] / det, -H[1] / det, -H[2] / det, H[0] / det};
  const auto a = grad_hess(f, z1).grad, b = grad_hess(f, z2).grad;
  const auto c = grad_hess(f, z1p).grad, d = grad_hess(f, z2p).grad;
  const double v0 = b[0] - a[0], v1 = b[1] - a[1];
  const double w0 = d[0] - c[0], w1 = d[1] - c[1];
  return (inv[0] * v0 + inv[1] * v1) * w0 + (inv[2] * v0 + inv[3] * v1) * w1;
}

}  // namespace

TEST_CASE("phase values on the three family members") {
  CHECK(phase_eval(PhaseFamily::base(), {0, 0}) == 0.0);
  CHECK(phase_eval(PhaseFamily::base(), {1, 1}) == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
  CHECK(phase_eval(PhaseFamily::prototype(0.25), {1, 1}) == doctest::Approx(7.0 / 3.0).epsilon(1e-15));
  CHECK(phase_eval(PhaseFamily::rescaled(2.0), {1, 1}) == doctest::Approx(7.0 / 6.0).epsilon(1e-15));
  // rescaled with delta <= 1 is the base phase
  CHECK(PhaseFamily::rescaled(0.125).cubic() == PhaseFamily::base().cubic());
}

TEST_CASE("gradient and hessian") {
  auto g = grad_hess(PhaseFamily::base(), {2, 3});
  CHECK(g.grad[0] == 3.0);
  CHECK(g.grad[1] == 11.0);
  CHECK(g.hess == Mat2{0, 1, 1, 6});
  CHECK(g.det == -1.0);
  auto p = grad_hess(PhaseFamily::prototype(0.5), {1, 1});
  CHECK(p.grad[0] == 1.0);
  CHECK(p.grad[1] == doctest::Approx(3.0).epsilon(1e-15));
  auto r = grad_hess(PhaseFamily::rescaled(4.0), {0, 1});
  CHECK(r.hess[3] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(r.det == -1.0);
}

TEST_CASE("gradient and hessian against central differences") {
  Rng g = make_rng(7, 0);
  const double h = 1e-5;
  for (auto fam : {PhaseFamily::base(), PhaseFamily::rescaled(8.0), PhaseFamily::prototype(0.0625)}) {
    for (int k = 0; k < 200; ++k) {
      const Point2 z = rnd(g);
      const auto gh = grad_hess(fam, z);
      auto f = [&](double dx, double dy) { return phase_eval(fam, {z.x + dx, z.y + dy}); };
      const double fx = (f(h, 0) - f(-h, 0)) / (2 * h), fy = (f(0, h) - f(0, -h)) / (2 * h);
      const double fyy = (f(0, h) - 2 * f(0, 0) + f(0, -h)) / (h * h);
      const double fxy = (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4 * h * h);
      CHECK(std::fabs(fx - gh.grad[0]) < 1e-8);
      CHECK(std::fabs(fy - gh.grad[1]) < 1e-6);
      CHECK(std::fabs(fxy - gh.hess[1]) < 1e-3);
      CHECK(std::fabs(fyy - gh.hess[3]) < 1e-2 * std::max(1.0, std::fabs(gh.hess[3])));
    }
  }
}

TEST_CASE("determinant is -1 everywhere on the family") {
  Rng g = make_rng(8, 0);
  for (int k = 0; k < 10000; ++k) {
    const Point2 z = rnd(g);
    const double d = std::ldexp(1.0, static_cast<int>(uniform_int(g, -20, 6)));
    for (auto fam : {PhaseFamily::base(), PhaseFamily::rescaled(d), PhaseFamily::prototype(d)})
      REQUIRE(std::fabs(grad_hess(fam, z).det + 1.0) <= 1e-14);
  }
}

TEST_CASE("tau examples") {
  const double d = 0.01;
  const Point2 z1{0, 0}, z2{-1 + d, 1};
  CHECK(tau(z1, z1, z2) == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(tau(z2, z1, z2) == doctest::Approx(-0.99).epsilon(1e-12));
  CHECK(tau({0, 0}, {0, 0}, {1, 1}) == 2.0);
  CHECK(tau({0, 0}, {1, 1}, {0, 0}) == -2.0);
  CHECK(gamma2({0, 0}, {0, 0}, {1, 1}) == 4.0);
  CHECK(gamma2({0.3, 0.2}, {0.3, 0.2}, {0.3, 0.2}) == 0.0);
}

TEST_CASE("tau properties on random triples") {
  Rng g = make_rng(9, 0);
  for (int k = 0; k < 100000; ++k) {
    const Point2 zb = rnd(g), z1 = rnd(g), z2 = rnd(g);
    const double dy = z2.y - z1.y;
    REQUIRE(std::fabs(tau(z1, z1, z2) - tau(z2, z1, z2) - dy * dy) <= 1e-12);
    REQUIRE(tau(zb, z1, z2) == -tau(zb, z2, z1));
    REQUIRE(std::fabs(gamma2(zb, z1, z2) - quad_form_oracle(PhaseFamily::base(), zb, z1, z2, z1, z2)) <= 1e-12);
    // base specializations
    REQUIRE(std::fabs(tau(z1, z1, z2) - (z2.x - z1.x + z2.y * dy)) <= 1e-15);
    REQUIRE(std::fabs(tau(z2, z1, z2) - (z2.x - z1.x + z1.y * dy)) <= 1e-15);
  }
}

TEST_CASE("four-point form") {
  Rng g = make_rng(10, 0);
  for (int k = 0; k < 2000; ++k) {
    const Point2 zb = rnd(g), a = rnd(g), b = rnd(g), c = rnd(g), d = rnd(g);
    CHECK(gamma4(zb, a, b, a, b) == doctest::Approx(gamma2(zb, a, b)).epsilon(1e-12).scale(1));
    CHECK(gamma4(zb, a, b, c, c) == 0.0);
    CHECK(std::fabs(gamma4(zb, a, b, c, d) - quad_form_oracle(PhaseFamily::base(), zb, a, b, c, d)) <= 1e-12);
    const auto f = PhaseFamily::prototype(0.125);
    CHECK(std::fabs(gamma_form(f, zb, a, b, c, d) - quad_form_oracle(f, zb, a, b, c, d)) <= 1e-10);
  }
}

TEST_CASE("transversality frame") {
  Rng g = make_rng(11, 0);
  for (int k = 0; k < 5000; ++k) {
    const Point2 z1 = rnd(g), z2 = rnd(g);
    const auto f = tv_pair(PhaseFamily::base(), z1, z2);
    const auto a = grad_hess(PhaseFamily::base(), z1).grad, b = grad_hess(PhaseFamily::base(), z2).grad;
    CHECK(std::fabs(std::hypot(f.omega[0], f.omega[1]) - 1.0) <= 1e-12);
    const double dn = std::hypot(b[0] - a[0], b[1] - a[1]);
    CHECK(std::fabs(f.omega[0] * (b[0] - a[0]) + f.omega[1] * (b[1] - a[1])) <= 1e-12 * std::max(1.0, dn));
    CHECK(f.omega[1] >= 0.0);
    CHECK(f.normal1.z == -1.0);
    CHECK(f.normal2.z == -1.0);
  }
}

TEST_CASE("unscaled base example: tv1 of order delta, tv2 of order one") {
  for (double d : {0.1, 0.01, 0.001}) {
    const auto f = tv_pair(PhaseFamily::base(), {0, 0}, {-1 + d, 1});
    CHECK(std::fabs(f.tv1) / d > 0.1);
    CHECK(std::fabs(f.tv1) / d < 10.0);
    CHECK(std::fabs(f.tv2) > 0.1);
    CHECK(std::fabs(f.tv2) < 10.0);
  }
}

TEST_CASE("errors") {
  CHECK_THROWS_AS(tv_pair(PhaseFamily::base(), {0.2, 0.3}, {0.2, 0.3}), DegenerateGradient);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(phase_eval(PhaseFamily::base(), {nan, 0}), DomainError);
  CHECK_THROWS_AS(grad_hess(PhaseFamily::base(), {0, std::numeric_limits<double>::infinity()}), DomainError);
  CHECK_THROWS_AS(phase_eval(PhaseFamily::prototype(0.0), {0, 0}), DomainError);
  CHECK_THROWS_AS(phase_eval(PhaseFamily::rescaled(-1.0), {0, 0}), DomainError);
}
