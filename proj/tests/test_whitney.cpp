#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hypwhitney/whitney.hpp"

using namespace hw;

namespace {

const double kC0 = 32, kRho = 0.0625;
const Strip kV1 = make_strip(-12, kRho), kV2 = make_strip(12, kRho);

// sum over all (J, J') in {0..9} x {0..9}, by bitmask enumeration of all 2^20 pairs
int chi_brute(unsigned S, unsigned St, bool both_nonempty) {
  int total = 0;
  for (unsigned J = 0; J < 1024; ++J)
    for (unsigned Jp = 0; Jp < 1024; ++Jp) {
      if (both_nonempty ? (J == 0 || Jp == 0) : (J == 0 && Jp == 0)) continue;
      const bool in = (J & ~S) == 0 && (Jp & ~St) == 0;
      if (!in) continue;
      total += (std::popcount(J) + std::popcount(Jp)) % 2 == 1 ? 1 : -1;
    }
  return total;
}

std::vector<std::array<double, 4>> keys(std::vector<AdmissiblePair> v) {
  std::vector<std::array<double, 4>> k;
  for (const auto& p : v) k.push_back({static_cast<double>(p.type) * 1e6 + p.delta, p.params[0], p.params[1], p.params[2]});
  std::sort(k.begin(), k.end());
  return k;
}

}  // namespace

TEST_CASE("inclusion-exclusion against brute-force subset sums") {
  const auto d = decompose(kV1, kV2, kC0, 0x1.0p-20, 1024.0);
  Rng g = make_rng(1, 0);
  int ones = 0;
  for (int k = 0; k < 16; ++k) {
    auto [z1, z2] = sample_strips(kV1, kV2, g);
    const auto [S, St] = class_masks(d, z1, z2);
    CHECK(classes_and_chi(d, z1, z2) == chi_brute(S, St, false));
    CHECK(classes_and_chi_both_nonempty(d, z1, z2) == chi_brute(S, St, true));
    ones += classes_and_chi(d, z1, z2) == 1;
  }
  CHECK(ones == 16);
  // synthetic masks cover the empty and the mixed cases
  for (unsigned S : {0u, 1u, 5u, 1023u})
    for (unsigned St : {0u, 2u, 768u}) {
      const int expect = (S | St) ? 1 : 0;
      CHECK(chi_brute(S, St, false) == expect);
      const int literal = chi_brute(S, St, true);
      CHECK(literal == ((S && St) ? -1 : 0));
    }
}

TEST_CASE("chi audit and outside points") {
  const auto d = decompose(kV1, kV2, kC0, 0x1.0p-20, 1024.0);
  const auto r = audit_chi(d, 3000, 2);
  INFO(to_json(r).dump());
  CHECK(r.pass);
  CHECK(r.count("wrong_inside") == 0);
  CHECK(r.count("wrong_outside") == 0);
  Rng g = make_rng(3, 0);
  auto [z1, z2] = sample_strips(kV1, kV2, g);
  z1.y = 0.5;  // outside V1
  CHECK(classes_and_chi(d, z1, z2) == 0);
  z1.y = -0.74;
  z1.x = 1.5;
  CHECK(classes_and_chi(d, z1, z2) == 0);
  const auto empty = decompose(kV1, kV2, kC0, 1.0, 0.5);
  CHECK(empty.empty());
  CHECK(audit_disjoint(empty, 100, 1).pass);
}

TEST_CASE("materialized and on-demand decompositions agree") {
  const double C0 = 16, rho = 0.125;
  const Strip V1 = make_strip(-6, rho), V2 = make_strip(6, rho);
  DecomposeOptions opt;
  opt.materialize = true;
  const auto m = decompose(V1, V2, C0, 2.0, 8.0, opt);
  const auto lazy = decompose(V1, V2, C0, 2.0, 8.0);
  REQUIRE(m.materialized);
  REQUIRE(m.exponents == std::vector<int>{1, 2, 3});
  std::uint64_t total = 0;
  for (int e : m.exponents) total += m.pair_count(e, 1) + m.pair_count(e, 2);
  CHECK(m.store.size() == total);
  Rng g = make_rng(4, 0);
  int covered = 0;
  for (int k = 0; k < 3000; ++k) {
    auto [z1, z2] = sample_strips(V1, V2, g);
    const auto a = containing_pairs(m, z1, z2), b = containing_pairs(lazy, z1, z2);
    REQUIRE(keys(a) == keys(b));
    for (const auto& p : a) REQUIRE(contains(p, z1, z2));
    covered += !a.empty();
  }
  CHECK(covered > 0);
  std::ostringstream os;
  write_pairs_jsonl(m, os);
  const std::string s = os.str();
  CHECK(static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')) == total);
  const auto j = summary_json(m);
  CHECK(j.at("scales").size() == 3);
}

TEST_CASE("disjointness within a scale and the injected-duplicate control") {
  auto d = decompose(kV1, kV2, kC0, 0x1.0p-20, 1024.0);
  const auto r = audit_disjoint(d, 4000, 5);
  CHECK(r.pass);
  CHECK(r.get("within_scale_multiplicity_max") <= 1.0);
  Rng g = make_rng(6, 0);
  auto p = sample_pair(kV1, kV2, 0.125, kC0, 1, g);
  REQUIRE(p);
  AdmissiblePair dup = *p;
  const double h = dup.x_step() / 2;
  dup.params[0] += h;
  dup.params[2] += h;
  dup.base1.x += h;
  dup.base2.x += h;
  d.extra.push_back(dup);
  CHECK_FALSE(audit_disjoint(d, 2000, 5).pass);
}

TEST_CASE("cross-scale overlap bounds") {
  const auto d = decompose(kV1, kV2, kC0, 0x1.0p-20, 1024.0);
  const auto r = audit_overlap(d, 4000, 7);
  INFO(to_json(r).dump());
  CHECK(r.count("multiplicity_out") == 0);
  CHECK(r.count("scale_span_out") == 0);
  CHECK(r.count("mixed_count_out") == 0);
  CHECK(r.count("uncovered") < 40);
  CHECK(r.get("type1_multiplicity_max") <= 64);
}

TEST_CASE("locate") {
  const auto r = audit_locate(kV1, kV2, kC0, 20000, 8);
  INFO(to_json(r).dump());
  CHECK(r.pass);
  CHECK(r.get("success_rate") == 1.0);
  // self-location of members of known pairs
  Rng g = make_rng(9, 0);
  for (int k = 0; k < 200; ++k) {
    const double dl = std::ldexp(1.0, static_cast<int>(uniform_int(g, -8, 0)));
    auto p = sample_pair(kV1, kV2, dl, kC0, 1 + k % 2, g);
    REQUIRE(p);
    auto [z1, z2] = sample_member(*p, g);
    const auto q = locate_pair(z1, z2, kV1, kV2, kC0);
    CHECK(contains(q, z1, z2));
    const double T = std::min(std::fabs(tau(z1, z1, z2)), std::fabs(tau(z2, z1, z2)));
    const double unit = kC0 * kC0 * kRho * kRho;
    CHECK(unit * q.delta <= T);
    CHECK(T < 2 * unit * q.delta);
  }
}

TEST_CASE("errors") {
  // tau at z1 vanishes: x2 - x1 = -y2 (y2 - y1)
  const Point2 z1{0.1, -0.74}, z2{0.1 - 0.76 * (0.76 + 0.74), 0.76};
  CHECK_THROWS_AS(locate_pair(z1, z2, kV1, kV2, kC0), DegenerateTau);
  CHECK_THROWS_AS(locate_pair({0.1, 0.3}, {0.5, 0.76}, kV1, kV2, kC0), LocateFailure);
  CHECK_THROWS_AS(decompose(make_strip(0, kRho), make_strip(2, kRho), kC0, 0.125, 1.0), GeometryError);
  DecomposeOptions opt;
  opt.materialize = true;
  opt.cap = 1000;
  CHECK_THROWS_AS(decompose(kV1, kV2, kC0, 0.125, 1.0, opt), ResourceLimit);
}

TEST_CASE("closed-form pair counts follow the type swap") {
  const auto d = decompose(kV1, kV2, kC0, 0.25, 4.0);
  for (int e : d.exponents) {
    CHECK(d.pair_count(e, 1) > 0);
    CHECK(d.pair_count(e, 2) == count_pairs(kV2, kV1, std::ldexp(1.0, e), kC0, 1));
  }
  CHECK(scale_class(-1) == 9);
  CHECK(scale_class(-20) == 0);
  CHECK(scale_class(13) == 3);
}
