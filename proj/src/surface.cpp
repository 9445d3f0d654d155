#include "hypwhitney/surface.hpp"

#include <algorithm>
#include <cmath>

namespace hw {

namespace {

void check_finite(Point2 z) {
  if (!std::isfinite(z.x) || !std::isfinite(z.y)) throw DomainError("non-finite point");
}

void check_family(const PhaseFamily& f) {
  if (f.kind != PhaseKind::Base && !(f.param > 0.0 && std::isfinite(f.param)))
    throw DomainError("phase parameter must be positive");
}

std::array<double, 2> grad_of(double c, Point2 z) { return {z.y, z.x + 3.0 * c * z.y * z.y}; }

// Hessian is [[0,1],[1,h]]; its inverse is [[-h,1],[1,0]] since the determinant is -1.
std::array<double, 2> hess_inv_apply(double h, std::array<double, 2> v) {
  return {-h * v[0] + v[1], v[0]};
}

}  // namespace

double PhaseFamily::cubic() const {
  switch (kind) {
    case PhaseKind::Base: return 1.0 / 3.0;
    case PhaseKind::Rescaled: return 1.0 / (3.0 * std::max(1.0, param));
    case PhaseKind::Prototype: return 1.0 / (3.0 * param);
  }
  return 1.0 / 3.0;
}

std::string PhaseFamily::name() const {
  switch (kind) {
    case PhaseKind::Base: return "base";
    case PhaseKind::Rescaled: return "rescaled";
    case PhaseKind::Prototype: return "prototype";
  }
  return "base";
}

double phase_eval(const PhaseFamily& fam, Point2 z) {
  check_family(fam);
  check_finite(z);
  return z.x * z.y + fam.cubic() * z.y * z.y * z.y;
}

GradHess grad_hess(const PhaseFamily& fam, Point2 z) {
  check_family(fam);
  check_finite(z);
  const double c = fam.cubic();
  GradHess g;
  g.grad = grad_of(c, z);
  g.hess = {0.0, 1.0, 1.0, 6.0 * c * z.y};
  g.det = g.hess[0] * g.hess[3] - g.hess[1] * g.hess[2];
  return g;
}

double tau(Point2 zb, Point2 z1, Point2 z2) {
  return z2.x - z1.x + (z1.y + z2.y - zb.y) * (z2.y - z1.y);
}

double gamma2(Point2 zb, Point2 z1, Point2 z2) { return 2.0 * (z2.y - z1.y) * tau(zb, z1, z2); }

double gamma4(Point2 zb, Point2 z1, Point2 z2, Point2 z1p, Point2 z2p) {
  return gamma_form(PhaseFamily::base(), zb, z1, z2, z1p, z2p);
}

double gamma_form(const PhaseFamily& fam, Point2 zb, Point2 z1, Point2 z2, Point2 z1p, Point2 z2p) {
  const double c = fam.cubic();
  auto g1 = grad_of(c, z1), g2 = grad_of(c, z2);
  auto h1 = grad_of(c, z1p), h2 = grad_of(c, z2p);
  std::array<double, 2> d{g2[0] - g1[0], g2[1] - g1[1]};
  std::array<double, 2> e{h2[0] - h1[0], h2[1] - h1[1]};
  auto w = hess_inv_apply(6.0 * c * zb.y, d);
  return w[0] * e[0] + w[1] * e[1];
}

TransversalityFrame tv_pair(const PhaseFamily& fam, Point2 z1, Point2 z2) {
  auto a = grad_hess(fam, z1);
  auto b = grad_hess(fam, z2);
  const double dx = b.grad[0] - a.grad[0], dy = b.grad[1] - a.grad[1];
  const double dn = std::hypot(dx, dy);
  if (!(dn >= 1e-14)) throw DegenerateGradient("gradient difference vanishes");

  TransversalityFrame f;
  double ox = -dy / dn, oy = dx / dn;
  if (oy < 0.0 || (oy == 0.0 && ox < 0.0)) {
    ox = -ox;
    oy = -oy;
  }
  f.omega = {ox, oy};
  f.normal1 = {a.grad[0], a.grad[1], -1.0};
  f.normal2 = {b.grad[0], b.grad[1], -1.0};

  const double n1 = std::sqrt(1.0 + a.grad[0] * a.grad[0] + a.grad[1] * a.grad[1]);
  const double n2 = std::sqrt(1.0 + b.grad[0] * b.grad[0] + b.grad[1] * b.grad[1]);

  // v . J . w with J = [[0,1],[-1,0]] is v0*w1 - v1*w0
  auto form = [&](const GradHess& g, double vx, double vy) {
    const double wx = g.hess[0] * ox + g.hess[1] * oy;
    const double wy = g.hess[2] * ox + g.hess[3] * oy;
    return (vx * wy - vy * wx) / (n1 * n2 * std::hypot(wx, wy));
  };
  f.tv2 = form(b, -dx, -dy);
  f.tv1 = form(a, dx, dy);
  return f;
}

}  // namespace hw
