#include "hypwhitney/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "parallel.hpp"

namespace hw {

Point2 AffineMap2::apply(Point2 z) const {
  return {linear[0] * z.x + linear[1] * z.y + offset[0], linear[2] * z.x + linear[3] * z.y + offset[1]};
}

double AffineMap2::det() const { return linear[0] * linear[3] - linear[1] * linear[2]; }

AffineMap2 AffineMap2::inverse() const {
  const double d = det();
  if (!(std::fabs(d) > 0.0)) throw ScalingError("affine map is singular");
  AffineMap2 m;
  m.linear = {linear[3] / d, -linear[1] / d, -linear[2] / d, linear[0] / d};
  m.offset = {-(m.linear[0] * offset[0] + m.linear[1] * offset[1]),
              -(m.linear[2] * offset[0] + m.linear[3] * offset[1])};
  return m;
}

AffineMap2 AffineMap2::after(const AffineMap2& in) const {
  AffineMap2 m;
  const auto& a = linear;
  const auto& b = in.linear;
  m.linear = {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3], a[2] * b[0] + a[3] * b[2],
              a[2] * b[1] + a[3] * b[3]};
  m.offset = {a[0] * in.offset[0] + a[1] * in.offset[1] + offset[0],
              a[2] * in.offset[0] + a[3] * in.offset[1] + offset[1]};
  return m;
}

double ReductionResult::remainder_at(Point2 z) const {
  return remainder[0] + remainder[1] * z.x + remainder[2] * z.y;
}

double ReductionResult::residual(Point2 z) const {
  return phase_eval(PhaseFamily::base(), z) - scale * phase_eval(family, map.apply(z)) - remainder_at(z);
}

bool ReductionResult::in_first_image(Point2 zp) const {
  const double s = std::min(1.0, delta);
  return zp.x >= 0.0 && zp.x < s && zp.y >= 0.0 && zp.y < s;
}

bool ReductionResult::in_second_image(Point2 zp) const {
  const double d = zp.y - scaled_b;
  if (!(d >= 0.0 && d < 1.0)) return false;
  const double u = zp.x + zp.y * zp.y / std::max(1.0, delta) - scaled_a;
  return u >= 0.0 && u < std::min(1.0, delta);
}

ReductionResult reduce(const AdmissiblePair& pair) {
  if (pair.type == 2) return reduce(swap_roles(pair));
  const double x1 = pair.params[0], y1 = pair.params[1], t2 = pair.params[2], y2 = pair.params[3];
  const double rho = pair.rho, m = std::max(1.0, pair.delta);
  const double sx = 1.0 / (rho * rho * m);

  ReductionResult r;
  r.rho = rho;
  r.delta = pair.delta;
  r.C0 = pair.C0;
  r.family = PhaseFamily::rescaled(pair.delta);
  r.scale = rho * rho * rho * m;
  // x' = (x - x1 + y1 (y - y1)) / (rho^2 m),  y' = (y - y1)/rho
  r.map.linear = {sx, y1 * sx, 0.0, 1.0 / rho};
  r.map.offset = {-(x1 + y1 * y1) * sx, -y1 / rho};
  // expand xy + y^3/3 around z1_0 in the sheared variables; what is left is affine
  r.remainder = {-x1 * y1 - 2.0 * y1 * y1 * y1 / 3.0, y1, x1 + y1 * y1};
  r.scaled_a = (t2 - x1) * sx;
  r.scaled_b = (y2 - y1) / rho;
  return r;
}

AuditReport audit_reduction(const AdmissiblePair& pair, std::size_t n, std::uint64_t seed) {
  AuditReport rep;
  rep.name = "reduction";
  rep.trials = n;
  const ReductionResult r = reduce(pair);
  const AdmissiblePair p1 = pair.type == 2 ? swap_roles(pair) : pair;
  const AffineMap2 inv = r.map.inverse();
  const double lo = std::min(1.0, pair.delta);
  const double C0 = pair.C0;

  struct Row {
    double res = 0, roundtrip = 0;
    bool img1 = true, img2 = true, back = true;
  };
  std::vector<Row> rows(n);
  detail::for_each_index(n, [&](std::size_t i) {
    Rng g = make_rng(seed, i);
    auto [z1, z2] = sample_member(p1, g);
    Row& w = rows[i];
    w.res = std::max(std::fabs(r.residual(z1)), std::fabs(r.residual(z2)));
    const Point2 a = r.map.apply(z1), b = r.map.apply(z2);
    w.img1 = r.in_first_image(a);
    w.img2 = r.in_second_image(b);
    const Point2 q = inv.apply(a);
    w.roundtrip = std::max(std::fabs(q.x - z1.x), std::fabs(q.y - z1.y));
    // the other direction: a point of [0,1^delta)^2 pulls back into U1
    Point2 zp{(kEdgeGuard + uniform01(g) * (1 - 2 * kEdgeGuard)) * lo,
              (kEdgeGuard + uniform01(g) * (1 - 2 * kEdgeGuard)) * lo};
    w.back = contains_first(p1, inv.apply(zp));
  });

  std::uint64_t bad_res = 0, bad_img = 0, bad_back = 0;
  for (const auto& w : rows) {
    rep.note_max("residual_max", w.res);
    rep.note_max("roundtrip_max", w.roundtrip);
    const bool f1 = !(w.res <= 1e-12), f2 = !(w.img1 && w.img2), f3 = !w.back;
    bad_res += f1;
    bad_img += f2;
    bad_back += f3;
    rep.failures += (f1 || f2 || f3);
  }
  const Point2 origin = r.map.apply(p1.base1);
  const bool corner = origin.x == 0.0 && origin.y == 0.0;
  const double ab = std::fabs(r.scaled_b), aa = std::fabs(r.scaled_a);
  const bool bwin = ab >= C0 / 2.0 && ab <= 2.0 * C0;
  const double s = C0 * C0 * lo;
  const bool awin = aa >= s / 4.0 && aa <= 4.0 * s;
  rep.extremes["a"] = r.scaled_a;
  rep.extremes["b"] = r.scaled_b;
  rep.counters["residual_out"] = bad_res;
  rep.counters["image_out"] = bad_img;
  rep.counters["pullback_out"] = bad_back;
  rep.counters["window_out"] = (bwin ? 0 : 1) + (awin ? 0 : 1) + (corner ? 0 : 1);
  rep.failures += rep.counters["window_out"];
  rep.notes = "residual tol 1e-12; |b| in [C0/2,2C0]; |a| in C0^2 (1^delta) [1/4,4]; T(z1_0) = 0";
  rep.pass = rep.failures == 0;
  return rep;
}

AuditReport gamma_scaled_audit(const AdmissiblePair& pair, std::size_t n, std::uint64_t seed) {
  AuditReport rep;
  rep.name = "gamma_scaled";
  rep.trials = n;
  const AdmissiblePair p1 = pair.type == 2 ? swap_roles(pair) : pair;
  const ReductionResult r = reduce(p1);
  const double C0 = p1.C0;
  const double n1 = C0 * C0 * C0 * std::min(1.0, p1.delta), n2 = C0 * C0 * C0;
  std::vector<double> v1(n), v2(n);
  detail::for_each_index(n, [&](std::size_t i) {
    Rng g = make_rng(seed, i);
    auto [z1, z2] = sample_member(p1, g);
    auto [w1, w2] = sample_member(p1, g);  // independent base points
    const Point2 a = r.map.apply(z1), b = r.map.apply(z2);
    v1[i] = std::fabs(gamma_form(r.family, r.map.apply(w1), a, b)) / n1;
    v2[i] = std::fabs(gamma_form(r.family, r.map.apply(w2), a, b)) / n2;
  });
  std::uint64_t out1 = 0, out2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const bool f1 = !(v1[i] >= 1.0 / 64.0 && v1[i] <= 64.0);
    const bool f2 = !(v2[i] >= 1.0 / 64.0 && v2[i] <= 64.0);
    out1 += f1;
    out2 += f2;
    rep.failures += (f1 || f2);
    rep.note_min("near_min", v1[i]);
    rep.note_max("near_max", v1[i]);
    rep.note_min("far_min", v2[i]);
    rep.note_max("far_max", v2[i]);
  }
  rep.counters["near_out"] = out1;
  rep.counters["far_out"] = out2;
  rep.notes = "near: base in U1', over C0^3 (1^delta); far: base in U2', over C0^3; window [1/64,64]";
  rep.pass = rep.failures == 0;
  return rep;
}

AffineMap2 PrototypeScene::A() const {
  AffineMap2 m;
  m.linear = {delta, 0.0, 0.0, 1.0};
  return m;
}

bool PrototypeScene::in_U1(Point2 z) const {
  return z.x >= 0.0 && z.x < c0 * c0 * delta && z.y >= 0.0 && z.y < c0 * delta;
}

bool PrototypeScene::in_U2(Point2 z) const {
  const double d = z.y - b;
  if (!(d >= 0.0 && d < c0)) return false;
  const double u = z.x + z.y * z.y - a;
  return u >= 0.0 && u < c0 * c0 * delta;
}

std::pair<Point2, Point2> PrototypeScene::sample(Rng& g) const {
  auto frac = [&] { return kEdgeGuard + uniform01(g) * (1.0 - 2.0 * kEdgeGuard); };
  for (int attempt = 0; attempt < 64; ++attempt) {
    Point2 z1{frac() * c0 * c0 * delta, frac() * c0 * delta};
    Point2 z2;
    z2.y = b + frac() * c0;
    z2.x = a + frac() * c0 * c0 * delta - z2.y * z2.y;
    if (in_U1(z1) && in_U2(z2)) return {z1, z2};
  }
  throw ScalingError("prototype sample kept landing on a boundary");
}

PrototypeScene make_prototype_scene(double delta, double c0, double a, double b) {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw ScalingError("prototype: delta must be positive");
  if (!(c0 > 0.0 && c0 < 1.0)) throw ScalingError("prototype: c0 must lie in (0,1)");
  if (!(std::fabs(b) >= 0.5 && std::fabs(b) <= 2.0)) throw ScalingError("prototype: |b| must lie in [1/2,2]");
  if (!(std::fabs(a) >= delta / 4.0 && std::fabs(a) <= 4.0 * delta))
    throw ScalingError("prototype: |a| must lie in [delta/4, 4 delta]");
  return PrototypeScene{delta, c0, a, b, PhaseFamily::prototype(delta)};
}

PrototypeScene prototype(double delta, double c0, double a, double b) {
  if (!(delta <= 0.1)) throw ScalingError("prototype: delta must not exceed 1/10");
  return make_prototype_scene(delta, c0, a, b);
}

AuditReport audit_prototype_tv(const PrototypeScene& s, std::size_t n, std::uint64_t seed) {
  AuditReport rep;
  rep.name = "prototype_tv";
  rep.trials = n;
  struct Row {
    double tv1s = 0, tv2s = 0, tv1 = 0, h1 = 0, h2 = 0;
    bool degenerate = false;
  };
  std::vector<Row> rows(n);
  detail::for_each_index(n, [&](std::size_t i) {
    Rng g = make_rng(seed, i);
    auto [z1, z2] = s.sample(g);
    Row& w = rows[i];
    const Point2 b1 = s.to_scaled(z1), b2 = s.to_scaled(z2);
    w.h1 = std::fabs(grad_hess(s.family, b1).hess[3]);
    w.h2 = std::fabs(grad_hess(s.family, b2).hess[3]);
    try {
      auto fs = tv_pair(s.family, b1, b2);
      auto fu = tv_pair(PhaseFamily::base(), z1, z2);
      w.tv1s = std::fabs(fs.tv1);
      w.tv2s = std::fabs(fs.tv2);
      w.tv1 = std::fabs(fu.tv1);
    } catch (const DegenerateGradient&) {
      w.degenerate = true;
    }
  });
  std::vector<double> a, b, c;
  std::uint64_t degenerate = 0, hess_bad = 0;
  const double h1_cap = 2.0 * s.c0 + 1e-12;
  const double h2_floor = (std::fabs(s.b) - s.c0) * 2.0 / s.delta - 1e-12;
  for (const auto& w : rows) {
    rep.note_max("hess22_U1s_max", w.h1);
    rep.note_min("hess22_U2s_min", w.h2);
    if (!(w.h1 < h1_cap) || !(w.h2 > h2_floor)) ++hess_bad;
    if (w.degenerate) {
      ++degenerate;
      continue;
    }
    a.push_back(w.tv1s);
    b.push_back(w.tv2s);
    c.push_back(w.tv1);
    rep.note_min("tv1s_min", w.tv1s);
    rep.note_max("tv1s_max", w.tv1s);
    rep.note_min("tv2s_min", w.tv2s);
    rep.note_max("tv2s_max", w.tv2s);
    rep.note_min("tv1_min", w.tv1);
    rep.note_max("tv1_max", w.tv1);
  }
  rep.extremes["tv1s_median"] = median(a);
  rep.extremes["tv2s_median"] = median(b);
  rep.extremes["tv1_median"] = median(c);
  rep.counters["degenerate"] = degenerate;
  rep.counters["hessian_out"] = hess_bad;
  rep.failures = hess_bad + (a.empty() ? 1 : 0);
  rep.notes = "scaled TV via the prototype family at A^{-1} z; unscaled TV_1 via the base family";
  rep.pass = rep.failures == 0;
  return rep;
}

PrototypeSweep prototype_sweep(const std::vector<double>& deltas, double c0, std::size_t n, std::uint64_t seed) {
  PrototypeSweep out;
  for (std::size_t k = 0; k < deltas.size(); ++k) {
    const double d = deltas[k];
    auto scene = make_prototype_scene(d, c0, d, 1.0);
    auto rep = audit_prototype_tv(scene, n, mix_seed(seed, k));
    out.deltas.push_back(d);
    out.med_tv1s.push_back(rep.get("tv1s_median"));
    out.med_tv2s.push_back(rep.get("tv2s_median"));
    out.med_tv1.push_back(rep.get("tv1_median"));
  }
  auto spread = [](const std::vector<double>& v) {
    if (v.empty()) return 1.0;
    auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi / *lo;
  };
  out.spread_tv1s = spread(out.med_tv1s);
  out.spread_tv2s = spread(out.med_tv2s);
  if (out.deltas.size() >= 2) out.unscaled_fit = fit_power_law(out.deltas, out.med_tv1);
  return out;
}

nlohmann::json to_json(const AffineMap2& m) { return {{"linear", m.linear}, {"offset", m.offset}}; }

nlohmann::json to_json(const ReductionResult& r) {
  return {{"map", to_json(r.map)},
          {"family", {{"kind", r.family.name()}, {"delta", r.family.param}}},
          {"remainder", r.remainder},
          {"a", r.scaled_a},
          {"b", r.scaled_b},
          {"scale", r.scale},
          {"rho", r.rho},
          {"delta", r.delta},
          {"C0", r.C0}};
}

nlohmann::json to_json(const PrototypeSweep& s) {
  return {{"deltas", s.deltas},         {"median_tv1s", s.med_tv1s},       {"median_tv2s", s.med_tv2s},
          {"median_tv1", s.med_tv1},    {"spread_tv1s", s.spread_tv1s},    {"spread_tv2s", s.spread_tv2s},
          {"unscaled_tv1_fit", to_json(s.unscaled_fit)}};
}

}  // namespace hw
