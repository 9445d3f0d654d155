#include "hypwhitney/whitney.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "parallel.hpp"

namespace hw {

namespace {

struct CoreView {
  const Strip* A;  // strip of the small box
  const Strip* B;  // strip of the curved box
  Point2 p, q;     // the points in A and B
};

CoreView core_view(int type, const Strip& V1, const Strip& V2, Point2 z1, Point2 z2) {
  if (type == 1) return {&V1, &V2, z1, z2};
  return {&V2, &V1, z2, z1};
}

AdmissiblePair raw_pair(int type, double x1, double y1, double t2, double y2, double rho, double delta, double C0) {
  AdmissiblePair p;
  p.type = 1;
  p.rho = rho;
  p.delta = delta;
  p.C0 = C0;
  p.params = {x1, y1, t2, y2};
  p.base1 = {x1, y1};
  p.base2 = {t2 - y2 * (y2 - y1), y2};
  return type == 1 ? p : swap_roles(p);
}

// core parameters of either layout
std::array<double, 4> core_params(const AdmissiblePair& p) {
  if (p.type == 1) return p.params;
  return {p.params[2], p.params[3], p.params[0], p.params[1]};
}

bool revalidate(const AdmissiblePair& p) {
  const auto c = core_params(p);
  return accepted(make_type1_pair(c[0], c[1], c[2], c[3], p.rho, p.delta, p.C0));
}

PairKey key_of(const AdmissiblePair& p, const Strip& V1, const Strip& V2) {
  const Strip& A = p.type == 1 ? V1 : V2;
  const auto c = core_params(p);
  const double w = p.y_step(), h = p.x_step();
  int e = 0;
  std::frexp(p.delta, &e);
  return PairKey{p.type, e - 1, std::llround((c[1] - A.interval.lo()) / w), std::llround(c[0] / h),
                 std::llround(c[2] / h)};
}

double frac01(Rng& g) { return kEdgeGuard + uniform01(g) * (1.0 - 2.0 * kEdgeGuard); }

}  // namespace

std::size_t PairKeyHash::operator()(const PairKey& k) const {
  std::uint64_t h = mix_seed(static_cast<std::uint64_t>(k.type * 131 + k.e), static_cast<std::uint64_t>(k.ky));
  h = mix_seed(h, static_cast<std::uint64_t>(k.kx));
  return static_cast<std::size_t>(mix_seed(h, static_cast<std::uint64_t>(k.kt)));
}

std::uint64_t WhitneyDecomposition::pair_count(int e, int type) const {
  return count_pairs(V1, V2, std::ldexp(1.0, e), C0, type);
}

WhitneyDecomposition decompose(const Strip& V1, const Strip& V2, double C0, double delta_min, double delta_max,
                               const DecomposeOptions& opt) {
  if (V1.interval.rho != V2.interval.rho) throw GeometryError("decompose: strips of different width");
  if (!separated_strips(V1, V2, C0))
    throw GeometryError("decompose: strips are not y-separated at this C0, so no admissible pair exists");
  WhitneyDecomposition d;
  d.V1 = V1;
  d.V2 = V2;
  d.C0 = C0;
  const double rho = V1.interval.rho;
  if (!(delta_min > 0.0) || delta_max < delta_min) return d;
  const int elo = static_cast<int>(std::ceil(std::log2(delta_min)));
  const int ehi = static_cast<int>(std::floor(std::log2(delta_max)));
  for (int e = elo; e <= ehi; ++e)
    if (rho * rho * std::ldexp(1.0, e) <= kXExtent) d.exponents.push_back(e);

  if (opt.materialize) {
    std::uint64_t total = 0;
    for (int e : d.exponents) total += d.pair_count(e, 1) + d.pair_count(e, 2);
    if (total > opt.cap)
      throw ResourceLimit("decompose: " + std::to_string(total) + " pairs exceed the cap of " +
                          std::to_string(opt.cap));
    d.store.reserve(total);
    for (int e : d.exponents)
      for (int type : {1, 2})
        enumerate_pairs(V1, V2, std::ldexp(1.0, e), C0, type, [&](const AdmissiblePair& p) {
          d.store.emplace(key_of(p, V1, V2), p);
          return true;
        });
    d.materialized = true;
  }
  return d;
}

namespace {

struct Snap {
  double x1, y1, t2;
};

// the cell holding the core points, with the small box moved dy rows in y
Snap snap_core(const CoreView& v, double w, double h, int dy) {
  const double L = v.A->interval.lo();
  double y1 = L + std::floor((v.p.y - L) / w) * w;
  if (v.p.y - y1 < 0.0) y1 -= w;
  if (v.p.y - y1 >= w) y1 += w;
  y1 += dy * w;
  double x1 = std::floor((v.p.x + y1 * (v.p.y - y1)) / h) * h;
  double t2 = std::floor((v.q.x + v.q.y * (v.q.y - y1)) / h) * h;
  if (dy == 0) {
    for (int k = 0; k < 2; ++k) {
      const double s = v.p.x - x1 + y1 * (v.p.y - y1);
      if (s < 0.0) x1 -= h;
      else if (s >= h) x1 += h;
      const double u = v.q.x - t2 + v.q.y * (v.q.y - y1);
      if (u < 0.0) t2 -= h;
      else if (u >= h) t2 += h;
    }
  }
  return {x1, y1, t2};
}

}  // namespace

AdmissiblePair grid_cell(Point2 z1, Point2 z2, const Strip& V1, const Strip& V2, double delta, double C0, int type) {
  const CoreView v = core_view(type, V1, V2, z1, z2);
  const double rho = V1.interval.rho;
  const double w = rho * std::min(1.0, delta), h = rho * rho * delta;
  const Snap s = snap_core(v, w, h, 0);
  return raw_pair(type, s.x1, s.y1, s.t2, v.B->interval.lo(), rho, delta, C0);
}

std::vector<AdmissiblePair> containing_pairs(const WhitneyDecomposition& d, Point2 z1, Point2 z2) {
  std::vector<AdmissiblePair> out;
  const double rho = d.V1.interval.rho;
  for (int e : d.exponents) {
    const double delta = std::ldexp(1.0, e);
    const double w = rho * std::min(1.0, delta), h = rho * rho * delta;
    const auto ny = std::llround(rho / w);
    for (int type : {1, 2}) {
      const CoreView v = core_view(type, d.V1, d.V2, z1, z2);
      const Strip& A = *v.A;
      // the snapped cell and its 26 neighbours; disjointness means at most one of them holds the point
      for (int dy = -1; dy <= 1; ++dy) {
        const Snap s = snap_core(v, w, h, dy);
        const auto ky = std::llround((s.y1 - A.interval.lo()) / w);
        if (ky < 0 || ky >= ny) continue;
        for (int dx = -1; dx <= 1; ++dx)
          for (int dt = -1; dt <= 1; ++dt) {
            const double x1 = s.x1 + dx * h, t2 = s.t2 + dt * h;
            if (x1 < -kXExtent || x1 >= kXExtent || t2 < -kXExtent || t2 >= kXExtent) continue;
            const AdmissiblePair c = raw_pair(type, x1, s.y1, t2, v.B->interval.lo(), rho, delta, d.C0);
            if (!contains(c, z1, z2)) continue;
            if (d.materialized) {
              auto it = d.store.find(key_of(c, d.V1, d.V2));
              if (it != d.store.end()) out.push_back(it->second);
            } else if (revalidate(c)) {
              out.push_back(c);
            }
          }
      }
    }
  }
  for (const auto& p : d.extra)
    if (contains(p, z1, z2)) out.push_back(p);
  return out;
}

AdmissiblePair locate_pair(Point2 z1, Point2 z2, const Strip& V1, const Strip& V2, double C0) {
  const double t1 = std::fabs(tau(z1, z1, z2)), t2 = std::fabs(tau(z2, z1, z2));
  if (std::min(t1, t2) < 1e-14) throw DegenerateTau("locate_pair: tau vanishes at the query");
  const int type = t1 <= t2 ? 1 : 2;
  const double T = type == 1 ? t1 : t2;
  const double rho = V1.interval.rho;
  const double unit = C0 * C0 * rho * rho;
  int e = static_cast<int>(std::floor(std::log2(T / unit)));
  while (unit * std::ldexp(1.0, e) > T) --e;
  while (T >= 2.0 * unit * std::ldexp(1.0, e)) ++e;
  if (e < -40) throw DegenerateTau("locate_pair: scale below 2^-40");
  const double delta = std::ldexp(1.0, e);
  AdmissiblePair p = grid_cell(z1, z2, V1, V2, delta, C0, type);
  if (!contains(p, z1, z2)) throw LocateFailure("locate_pair: query is not inside V1 x V2");
  const auto c = core_params(p);
  auto r = make_type1_pair(c[0], c[1], c[2], c[3], rho, delta, C0);
  if (!accepted(r)) throw LocateFailure("locate_pair: constructed pair rejected (" + std::get<Rejected>(r).which + ")");
  return type == 1 ? std::get<AdmissiblePair>(r) : swap_roles(std::get<AdmissiblePair>(r));
}

std::pair<Point2, Point2> sample_strips(const Strip& V1, const Strip& V2, Rng& g) {
  auto pt = [&](const Strip& V) {
    return Point2{-1.0 + 2.0 * uniform01(g), V.interval.lo() + frac01(g) * V.interval.rho};
  };
  Point2 a = pt(V1);
  Point2 b = pt(V2);
  return {a, b};
}

namespace {

std::pair<Point2, Point2> audit_sample(const WhitneyDecomposition& d, std::size_t i, Rng& g) {
  if (!d.extra.empty() && (i % 2 == 1)) {
    const auto& p = d.extra[static_cast<std::size_t>(uniform_int(g, 0, static_cast<std::int64_t>(d.extra.size()) - 1))];
    return sample_member(p, g);
  }
  return sample_strips(d.V1, d.V2, g);
}

int exponent_of(double delta) {
  int e = 0;
  std::frexp(delta, &e);
  return e - 1;
}

}  // namespace

AuditReport audit_disjoint(const WhitneyDecomposition& d, std::size_t n, std::uint64_t seed) {
  AuditReport rep;
  rep.name = "disjoint";
  rep.trials = n;
  std::vector<int> worst(n, 0);
  detail::for_each_index(n, [&](std::size_t i) {
    Rng g = make_rng(seed, i);
    auto [z1, z2] = audit_sample(d, i, g);
    auto hits = containing_pairs(d, z1, z2);
    std::map<std::pair<int, int>, int> per;
    for (const auto& p : hits) ++per[{p.type, exponent_of(p.delta)}];
    int m = 0;
    for (auto& kv : per) m = std::max(m, kv.second);
    worst[i] = m;
  });
  int mx = 0;
  for (int m : worst) {
    mx = std::max(mx, m);
    rep.failures += m > 1;
  }
  rep.extremes["within_scale_multiplicity_max"] = mx;
  rep.counters["extra_pairs"] = d.extra.size();
  rep.notes = "a sampled point may lie in at most one product per (type, scale)";
  rep.pass = rep.failures == 0;
  return rep;
}

AuditReport audit_overlap(const WhitneyDecomposition& d, std::size_t n, std::uint64_t seed, double kappa) {
  AuditReport rep;
  rep.name = "overlap";
  rep.trials = n;
  struct Row {
    int m1 = 0, m2 = 0, span1 = 0, span2 = 0, mixed_span = 0;
    double mixed_delta_min = 0.0;
    bool low_delta = false, mixed = false, covered = false;
  };
  std::vector<Row> rows(n);
  detail::for_each_index(n, [&](std::size_t i) {
    Rng g = make_rng(seed, i);
    auto [z1, z2] = audit_sample(d, i, g);
    auto hits = containing_pairs(d, z1, z2);
    Row& r = rows[i];
    r.covered = !hits.empty();
    int lo1 = 1 << 20, hi1 = -(1 << 20), lo2 = lo1, hi2 = hi1;
    for (const auto& p : hits) {
      const int e = exponent_of(p.delta);
      if (p.type == 1) {
        ++r.m1;
        lo1 = std::min(lo1, e);
        hi1 = std::max(hi1, e);
      } else {
        ++r.m2;
        lo2 = std::min(lo2, e);
        hi2 = std::max(hi2, e);
      }
    }
    if (r.m1) r.span1 = hi1 - lo1;
    if (r.m2) r.span2 = hi2 - lo2;
    if (r.m1 && r.m2) {
      r.mixed = true;
      r.mixed_span = std::max(hi1, hi2) - std::min(lo1, lo2);
      r.mixed_delta_min = hits.front().delta;
      for (const auto& p : hits) {
        r.mixed_delta_min = std::min(r.mixed_delta_min, p.delta);
        if (p.delta < 1.0 / 800.0) r.low_delta = true;
      }
    }
  });
  std::uint64_t mult_out = 0, span_out = 0, low_out = 0, mixed_span_out = 0, mixed_count_out = 0, mixed = 0,
                uncovered = 0;
  for (const auto& r : rows) {
    rep.note_max("type1_multiplicity_max", r.m1);
    rep.note_max("type2_multiplicity_max", r.m2);
    rep.note_max("type1_log2_scale_span_max", r.span1);
    rep.note_max("type2_log2_scale_span_max", r.span2);
    const bool f1 = r.m1 > 64 || r.m2 > 64;
    const bool f2 = r.span1 > 7 || r.span2 > 7;
    bool f3 = false, f4 = false, f5 = false;
    if (r.mixed) {
      ++mixed;
      rep.note_max("mixed_log2_scale_span_max", r.mixed_span);
      rep.note_max("mixed_count_max", std::max(r.m1, r.m2));
      rep.note_min("mixed_delta_min", r.mixed_delta_min);
      f3 = r.low_delta;
      f4 = r.mixed_span > 10;
      f5 = std::max(r.m1, r.m2) > kappa * d.C0;
    }
    mult_out += f1;
    span_out += f2;
    low_out += f3;
    mixed_span_out += f4;
    mixed_count_out += f5;
    uncovered += !r.covered;
    rep.failures += (f1 || f2 || f3 || f4 || f5);
  }
  rep.counters["multiplicity_out"] = mult_out;
  rep.counters["scale_span_out"] = span_out;
  rep.counters["mixed_small_delta"] = low_out;
  rep.counters["mixed_scale_span_out"] = mixed_span_out;
  rep.counters["mixed_count_out"] = mixed_count_out;
  rep.counters["mixed_points"] = mixed;
  rep.counters["uncovered"] = uncovered;
  rep.extremes["kappa"] = kappa;
  rep.notes = "same-type multiplicity <= 64 and scale ratio <= 2^7; mixed containment needs both delta >= 1/800, "
              "ratio <= 2^10, count <= kappa C0";
  rep.pass = rep.failures == 0;
  return rep;
}

AuditReport audit_locate(const Strip& V1, const Strip& V2, double C0, std::size_t n, std::uint64_t seed) {
  AuditReport rep;
  rep.name = "locate";
  rep.trials = n;
  enum Outcome : int { Ok, Degenerate, Failed, NotContaining, NotAdmissible, WrongScale };
  std::vector<int> res(n, Ok);
  std::vector<int> scale(n, 0);
  const double unit = C0 * C0 * V1.interval.rho * V1.interval.rho;
  detail::for_each_index(n, [&](std::size_t i) {
    Rng g = make_rng(seed, i);
    auto [z1, z2] = sample_strips(V1, V2, g);
    try {
      auto p = locate_pair(z1, z2, V1, V2, C0);
      scale[i] = exponent_of(p.delta);
      const double T = std::min(std::fabs(tau(z1, z1, z2)), std::fabs(tau(z2, z1, z2)));
      if (!contains(p, z1, z2)) res[i] = NotContaining;
      else if (!revalidate(p)) res[i] = NotAdmissible;
      else if (!(unit * p.delta <= T && T < 2.0 * unit * p.delta)) res[i] = WrongScale;
    } catch (const DegenerateTau&) {
      res[i] = Degenerate;
    } catch (const LocateFailure&) {
      res[i] = Failed;
    }
  });
  std::uint64_t cnt[6] = {0, 0, 0, 0, 0, 0};
  for (std::size_t i = 0; i < n; ++i) {
    ++cnt[res[i]];
    if (res[i] == Ok) {
      rep.note_min("log2_delta_min", scale[i]);
      rep.note_max("log2_delta_max", scale[i]);
    }
  }
  rep.counters["located"] = cnt[Ok];
  rep.counters["degenerate"] = cnt[Degenerate];
  rep.counters["rejected"] = cnt[Failed];
  rep.counters["not_containing"] = cnt[NotContaining];
  rep.counters["not_admissible"] = cnt[NotAdmissible];
  rep.counters["wrong_scale"] = cnt[WrongScale];
  rep.failures = cnt[Failed] + cnt[NotContaining] + cnt[NotAdmissible] + cnt[WrongScale];
  const std::uint64_t nondeg = n - cnt[Degenerate];
  rep.extremes["success_rate"] = nondeg ? static_cast<double>(cnt[Ok]) / static_cast<double>(nondeg) : 1.0;
  rep.notes = "success over non-degenerate samples; each result re-validated, containing, and on the right scale";
  rep.pass = rep.failures == 0;
  return rep;
}

std::pair<unsigned, unsigned> class_masks(const WhitneyDecomposition& d, Point2 z1, Point2 z2) {
  unsigned a = 0, b = 0;
  if (!(d.V1.contains(z1) && d.V2.contains(z2))) return {0u, 0u};
  for (const auto& p : containing_pairs(d, z1, z2)) {
    const unsigned bit = 1u << scale_class(exponent_of(p.delta));
    (p.type == 1 ? a : b) |= bit;
  }
  return {a, b};
}

namespace {

int signed_sum(unsigned S, unsigned St, bool both_nonempty) {
  // iterate J over submasks of S and J' over submasks of St, including the empty ones
  int total = 0;
  for (unsigned J = S;; J = (J - 1) & S) {
    for (unsigned Jp = St;; Jp = (Jp - 1) & St) {
      const bool skip = both_nonempty ? (J == 0 || Jp == 0) : (J == 0 && Jp == 0);
      if (!skip) total += ((std::popcount(J) + std::popcount(Jp) + 1) % 2) ? -1 : 1;
      if (Jp == 0) break;
    }
    if (J == 0) break;
  }
  return total;
}

}  // namespace

int classes_and_chi(const WhitneyDecomposition& d, Point2 z1, Point2 z2) {
  auto [S, St] = class_masks(d, z1, z2);
  return signed_sum(S, St, false);
}

int classes_and_chi_both_nonempty(const WhitneyDecomposition& d, Point2 z1, Point2 z2) {
  auto [S, St] = class_masks(d, z1, z2);
  return signed_sum(S, St, true);
}

AuditReport audit_chi(const WhitneyDecomposition& d, std::size_t n, std::uint64_t seed) {
  AuditReport rep;
  rep.name = "chi_identity";
  rep.trials = n;
  const double unit = d.C0 * d.C0 * d.V1.interval.rho * d.V1.interval.rho;
  const double lowest = d.exponents.empty() ? 0.0 : unit * std::ldexp(1.0, d.exponents.front());
  enum { Good, OutsideRange, BadInside, BadOutside };
  std::vector<int> res(n, Good);
  std::vector<int> literal(n, 0);
  detail::for_each_index(n, [&](std::size_t i) {
    Rng g = make_rng(seed, i);
    auto [z1, z2] = sample_strips(d.V1, d.V2, g);
    const double T = std::min(std::fabs(tau(z1, z1, z2)), std::fabs(tau(z2, z1, z2)));
    if (T < lowest) {
      res[i] = OutsideRange;  // would be located below the smallest scale kept
    } else if (classes_and_chi(d, z1, z2) != 1) {
      res[i] = BadInside;
    }
    literal[i] = classes_and_chi_both_nonempty(d, z1, z2);
    // a mirrored point outside the strips
    Point2 w1 = z1;
    w1.y -= 2.0 * d.V1.interval.rho;
    if (res[i] == Good && classes_and_chi(d, w1, z2) != 0) res[i] = BadOutside;
  });
  std::uint64_t cnt[4] = {0, 0, 0, 0};
  std::uint64_t lit_one = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ++cnt[res[i]];
    lit_one += literal[i] == 1;
  }
  rep.counters["ones"] = cnt[Good];
  rep.counters["below_scale_range"] = cnt[OutsideRange];
  rep.counters["wrong_inside"] = cnt[BadInside];
  rep.counters["wrong_outside"] = cnt[BadOutside];
  rep.counters["both_nonempty_variant_equal_one"] = lit_one;
  rep.failures = cnt[BadInside] + cnt[BadOutside];
  rep.notes = "J, J' not both empty; the both-nonempty variant is reported for comparison only";
  rep.pass = rep.failures == 0;
  return rep;
}

nlohmann::json summary_json(const WhitneyDecomposition& d) {
  nlohmann::json j;
  j["V1"] = {{"j", d.V1.interval.j}, {"rho", d.V1.interval.rho}};
  j["V2"] = {{"j", d.V2.interval.j}, {"rho", d.V2.interval.rho}};
  j["C0"] = d.C0;
  j["materialized"] = d.materialized;
  nlohmann::json scales = nlohmann::json::array();
  std::array<std::uint64_t, 10> c1{}, c2{};
  for (int e : d.exponents) {
    const auto a = d.pair_count(e, 1), b = d.pair_count(e, 2);
    scales.push_back({{"log2_delta", e}, {"delta", std::ldexp(1.0, e)}, {"type1", a}, {"type2", b}});
    c1[static_cast<std::size_t>(scale_class(e))] += a;
    c2[static_cast<std::size_t>(scale_class(e))] += b;
  }
  j["scales"] = scales;
  j["class_sizes"] = {{"type1", c1}, {"type2", c2}};
  j["extra_pairs"] = d.extra.size();
  return j;
}

void write_pairs_jsonl(const WhitneyDecomposition& d, std::ostream& os) {
  std::vector<std::pair<PairKey, const AdmissiblePair*>> v;
  v.reserve(d.store.size());
  for (const auto& kv : d.store) v.emplace_back(kv.first, &kv.second);
  std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
    const auto& x = a.first;
    const auto& y = b.first;
    return std::tie(x.type, x.e, x.ky, x.kx, x.kt) < std::tie(y.type, y.e, y.ky, y.kx, y.kt);
  });
  for (const auto& kv : v) os << to_json(*kv.second).dump() << '\n';
  for (const auto& p : d.extra) os << to_json(p).dump() << '\n';
}

}  // namespace hw
