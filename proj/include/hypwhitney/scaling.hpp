#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <json.hpp>

#include "hypwhitney/audit.hpp"
#include "hypwhitney/geometry.hpp"
#include "hypwhitney/surface.hpp"

namespace hw {

struct ScalingError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct AffineMap2 {
  Mat2 linear{1.0, 0.0, 0.0, 1.0};
  std::array<double, 2> offset{};

  Point2 apply(Point2 z) const;
  AffineMap2 inverse() const;
  AffineMap2 after(const AffineMap2& inner) const;  // this o inner
  double det() const;
};

// T for a type-1 pair: z1_0 goes to the origin, boxes become unit-ish
struct ReductionResult {
  AffineMap2 map;
  PhaseFamily family;
  std::array<double, 3> remainder{};  // L(z) = l0 + l1 x + l2 y
  double scaled_a = 0.0, scaled_b = 0.0;
  double scale = 0.0;  // rho^3 (1 v delta)
  double rho = 0.0, delta = 0.0, C0 = 0.0;

  double remainder_at(Point2 z) const;
  // phi(z) - scale*phi_delta(Tz) - L(z)
  double residual(Point2 z) const;
  bool in_first_image(Point2 zp) const;   // [0, 1^delta)^2
  bool in_second_image(Point2 zp) const;  // 0<=y'-b<1, 0<=x'+y'^2/(1 v delta)-a<1^delta
};

// type 2 is reduced after swapping roles
ReductionResult reduce(const AdmissiblePair& pair);
AuditReport audit_reduction(const AdmissiblePair& pair, std::size_t n, std::uint64_t seed);
AuditReport gamma_scaled_audit(const AdmissiblePair& pair, std::size_t n, std::uint64_t seed);

struct PrototypeScene {
  double delta = 0.0, c0 = 0.0, a = 0.0, b = 0.0;
  PhaseFamily family;  // prototype(delta), acts on A-scaled points

  AffineMap2 A() const;  // (xbar, ybar) -> (delta xbar, ybar)
  Point2 to_scaled(Point2 z) const { return {z.x / delta, z.y}; }
  Point2 from_scaled(Point2 zb) const { return {zb.x * delta, zb.y}; }
  bool in_U1(Point2 z) const;
  bool in_U2(Point2 z) const;
  bool in_U1s(Point2 zb) const { return in_U1(from_scaled(zb)); }
  bool in_U2s(Point2 zb) const { return in_U2(from_scaled(zb)); }
  std::pair<Point2, Point2> sample(Rng& g) const;  // unscaled members
};

// window checks on a, b, c0 only; no upper bound on delta
PrototypeScene make_prototype_scene(double delta, double c0, double a, double b);
// the curved-box regime proper, delta <= 1/10
PrototypeScene prototype(double delta, double c0, double a, double b);

AuditReport audit_prototype_tv(const PrototypeScene& scene, std::size_t n, std::uint64_t seed);

// medians of |TV_i^s| across several delta, plus fitted exponent of the unscaled |TV_1|
struct PrototypeSweep {
  std::vector<double> deltas, med_tv1s, med_tv2s, med_tv1;
  double spread_tv1s = 0.0, spread_tv2s = 0.0;
  PowerLawFit unscaled_fit;
};
PrototypeSweep prototype_sweep(const std::vector<double>& deltas, double c0, std::size_t n, std::uint64_t seed);

nlohmann::json to_json(const AffineMap2& m);
nlohmann::json to_json(const ReductionResult& r);
nlohmann::json to_json(const PrototypeSweep& s);

}  // namespace hw
