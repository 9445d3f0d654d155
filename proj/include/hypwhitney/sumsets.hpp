#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "hypwhitney/audit.hpp"
#include "hypwhitney/geometry.hpp"

namespace hw {

// Index families U_{1,i,j} = U1 at (i rho^2 delta, j rho delta) and U_{2,i',j} sharing y1_0 = j rho delta,
// with the curved box cut into slabs U_2^k = {k rho delta <= y < (k+1) rho delta}.
struct SumsetFamily {
  Strip V1, V2;
  double C0 = 32.0, delta = 0.125;

  double rho() const { return V1.interval.rho; }
  std::int64_t j_lo() const;  // y1_0 = j rho delta inside V1
  std::int64_t j_hi() const;  // exclusive
  std::int64_t k_lo() const;  // slabs inside V2
  std::int64_t k_hi() const;
  std::int64_t i_max() const { return static_cast<std::int64_t>(std::llround(1.0 / delta)); }  // N = 0 block

  PairResult pair(std::int64_t i, std::int64_t ip, std::int64_t j) const;
  // D~_rho^{-1} of (b1, phi(b1)) + (b2, phi(b2)) for the base points of U_{1,i,j} and U_{2,i',j}^k
  std::array<double, 3> base_sum(std::int64_t i, std::int64_t ip, std::int64_t j, std::int64_t k) const;
  std::array<double, 3> scaled_sum(Point2 z1, Point2 z2) const;
};

SumsetFamily make_sumset_family(const Strip& V1, const Strip& V2, double C0, double delta);

AuditReport audit_sumset_x(const Strip& V1, const Strip& V2, double C0, double rho, double delta, std::size_t n,
                           std::uint64_t seed, double window_scale = 1.0);

// number of cubes base_sum + [-side/2, side/2]^3 over admissible N = 0 tuples that hold X (scaled coordinates)
int cube_multiplicity(const SumsetFamily& fam, const std::array<double, 3>& X, double side);
int cube_multiplicity_brute(const SumsetFamily& fam, const std::array<double, 3>& X, double side);

AuditReport audit_sumset_cubes(const Strip& V1, const Strip& V2, double C0, double rho, double delta, std::size_t n,
                               std::uint64_t seed, double side_factor = 4.0);

struct CubeSweep {
  std::vector<double> deltas;
  std::vector<AuditReport> reports;
  double multiplicity_spread = 1.0;  // max/min of the per-delta maximum multiplicity
};
CubeSweep sumset_cube_sweep(const Strip& V1, const Strip& V2, double C0, const std::vector<double>& deltas,
                            std::size_t n, std::uint64_t seed, double side_factor = 4.0);

}  // namespace hw
