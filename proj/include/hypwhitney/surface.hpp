#pragma once

#include <array>
#include <stdexcept>
#include <string>

namespace hw {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

struct DegenerateGradient : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class PhaseKind { Base, Rescaled, Prototype };

// xy + c*y^3, with c = 1/3, 1/(3 max(1,d)) or 1/(3d)
struct PhaseFamily {
  PhaseKind kind = PhaseKind::Base;
  double param = 1.0;

  static PhaseFamily base() { return {PhaseKind::Base, 1.0}; }
  static PhaseFamily rescaled(double d) { return {PhaseKind::Rescaled, d}; }
  static PhaseFamily prototype(double d) { return {PhaseKind::Prototype, d}; }

  double cubic() const;
  std::string name() const;
};

using Mat2 = std::array<double, 4>;  // row-major {a00, a01, a10, a11}

struct GradHess {
  std::array<double, 2> grad{};
  Mat2 hess{};
  double det = 0.0;
};

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;
};

struct TransversalityFrame {
  std::array<double, 2> omega{};
  Vec3 normal1, normal2;
  double tv1 = 0.0;
  double tv2 = 0.0;
};

double phase_eval(const PhaseFamily& fam, Point2 z);
GradHess grad_hess(const PhaseFamily& fam, Point2 z);

// x2 - x1 + (y1 + y2 - y)(y2 - y1), y taken from the base point
double tau(Point2 zb, Point2 z1, Point2 z2);
double gamma2(Point2 zb, Point2 z1, Point2 z2);
double gamma4(Point2 zb, Point2 z1, Point2 z2, Point2 z1p, Point2 z2p);

// <H^{-1}(zb) (grad(z2) - grad(z1)), grad(z2p) - grad(z1p)> for any member of the family
double gamma_form(const PhaseFamily& fam, Point2 zb, Point2 z1, Point2 z2, Point2 z1p, Point2 z2p);
inline double gamma_form(const PhaseFamily& fam, Point2 zb, Point2 z1, Point2 z2) {
  return gamma_form(fam, zb, z1, z2, z1, z2);
}

TransversalityFrame tv_pair(const PhaseFamily& fam, Point2 z1, Point2 z2);

}  // namespace hw
