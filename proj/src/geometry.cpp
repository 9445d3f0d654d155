#include "hypwhitney/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "parallel.hpp"

namespace hw {

namespace {

std::int64_t floor_div2(std::int64_t j) { return j >= 0 ? j / 2 : -((-j + 1) / 2); }

bool on_grid(double v, double step) { return std::nearbyint(v / step) * step == v; }

struct Core {  // type-1 layout
  double x1, y1, t2, y2;
};

Core core_of(const AdmissiblePair& p) {
  if (p.type == 1) return {p.params[0], p.params[1], p.params[2], p.params[3]};
  return {p.params[2], p.params[3], p.params[0], p.params[1]};
}

bool core_first(const Core& c, double w, double h, Point2 z) {
  const double d = z.y - c.y1;
  if (!(d >= 0.0 && d < w)) return false;
  const double s = z.x - c.x1 + c.y1 * (z.y - c.y1);
  return s >= 0.0 && s < h;
}

bool core_second(const Core& c, double rho, double h, Point2 z) {
  const double d = z.y - c.y2;
  if (!(d >= 0.0 && d < rho)) return false;
  const double s = z.x - c.t2 + z.y * (z.y - c.y1);
  return s >= 0.0 && s < h;
}

std::pair<Point2, Point2> core_member(const Core& c, double w, double rho, double h,
                                      const std::array<double, 4>& f) {
  Point2 a, b;
  a.y = c.y1 + f[0] * w;
  a.x = c.x1 + f[1] * h - c.y1 * (a.y - c.y1);
  b.y = c.y2 + f[2] * rho;
  b.x = c.t2 + f[3] * h - b.y * (b.y - c.y1);
  return {a, b};
}

void require_dyadic(double v, const char* what) {
  if (!is_dyadic(v)) throw GeometryError(std::string(what) + " must be a positive power of two");
}

std::int64_t iceil(double v) { return static_cast<std::int64_t>(std::ceil(v)); }
std::int64_t ifloor(double v) { return static_cast<std::int64_t>(std::floor(v)); }

// sum over m in [lo,hi] of max(0, k2 - m)
std::uint64_t tail_sum(std::int64_t lo, std::int64_t hi, std::int64_t k2) {
  hi = std::min(hi, k2 - 1);
  if (lo > hi) return 0;
  const std::int64_t n = hi - lo + 1;
  return static_cast<std::uint64_t>(n * k2 - (lo + hi) * n / 2);
}

}  // namespace

double AdmissiblePair::y_step() const { return rho * std::min(1.0, delta); }
double AdmissiblePair::x_step() const { return rho * rho * delta; }

bool related_intervals(const DyadicInterval& J, const DyadicInterval& Jp) {
  if (J.rho != Jp.rho) throw GeometryError("related_intervals: scale mismatch");
  const std::int64_t pa = floor_div2(J.j), pb = floor_div2(Jp.j);
  const bool parents_adjacent = std::llabs(pa - pb) == 1;
  const bool adjacent_or_equal = std::llabs(J.j - Jp.j) <= 1;
  return parents_adjacent && !adjacent_or_equal;
}

std::vector<std::pair<Strip, Strip>> admissible_strip_pairs(double rho, double C0) {
  require_dyadic(rho, "rho");
  require_dyadic(C0, "C0");
  if (C0 < 16.0) throw GeometryError("admissible_strip_pairs: C0 must be at least 16");
  if (rho > 4.0 / C0) throw GeometryError("admissible_strip_pairs: rho must not exceed 4/C0");
  const double L = C0 * rho / 8.0;
  const auto pieces = static_cast<std::int64_t>(C0 / 8.0);
  const auto mlo = -static_cast<std::int64_t>(std::llround(1.0 / L));
  const auto mhi = static_cast<std::int64_t>(std::llround(1.0 / L)) - 1;
  std::vector<std::pair<Strip, Strip>> out;
  for (std::int64_t m = mlo; m <= mhi; ++m) {
    for (std::int64_t mp = std::max(mlo, m - 3); mp <= std::min(mhi, m + 3); ++mp) {
      if (!related_intervals({m, L}, {mp, L})) continue;
      for (std::int64_t k = 0; k < pieces; ++k)
        for (std::int64_t kp = 0; kp < pieces; ++kp)
          out.emplace_back(make_strip(m * pieces + k, rho), make_strip(mp * pieces + kp, rho));
    }
  }
  return out;
}

bool separated_strips(const Strip& V1, const Strip& V2, double C0) {
  if (V1.interval.rho != V2.interval.rho) return false;
  const auto dj = std::llabs(V2.interval.j - V1.interval.j);
  return static_cast<double>(dj - 1) >= C0 / 2.0 && static_cast<double>(dj + 1) <= C0;
}

PairResult make_type1_pair(double x1_0, double y1_0, double t2_0, double y2_0, double rho, double delta,
                           double C0) {
  require_dyadic(rho, "rho");
  require_dyadic(delta, "delta");
  require_dyadic(C0, "C0");
  const double w = rho * std::min(1.0, delta);
  const double h = rho * rho * delta;
  const double j1 = std::floor(y1_0 / rho);
  if (!on_grid(y2_0, rho)) throw GeometryError("y2_0 must be the left endpoint of a dyadic interval");
  if (!on_grid(y1_0 - j1 * rho, w)) throw GeometryError("y1_0 is not on the fine y-grid");
  if (!on_grid(x1_0, h) || !on_grid(t2_0, h)) throw GeometryError("x-parameters are not on the rho^2 delta grid");

  // members have y1 in [y1_0, y1_0 + w) and y2 in [y2_0, y2_0 + rho)
  const double lo = y2_0 >= y1_0 ? y2_0 - y1_0 - w : y1_0 - y2_0 - rho;
  const double hi = y2_0 >= y1_0 ? y2_0 + rho - y1_0 : y1_0 + w - y2_0;
  if (lo < C0 * rho / 2.0 || hi > C0 * rho) return Rejected{"y_separation"};

  AdmissiblePair p;
  p.type = 1;
  p.rho = rho;
  p.delta = delta;
  p.C0 = C0;
  p.params = {x1_0, y1_0, t2_0, y2_0};
  p.base1 = {x1_0, y1_0};
  p.base2 = {t2_0 - y2_0 * (y2_0 - y1_0), y2_0};

  const double s = C0 * C0 * rho * rho;
  const double t1 = std::fabs(tau(p.base1, p.base1, p.base2));
  if (!(t1 >= s * delta / 4.0 && t1 < 4.0 * s * delta)) return Rejected{"admissible1"};
  const double big = std::max(1.0, delta);
  const double t2 = std::fabs(tau(p.base2, p.base1, p.base2));
  if (!(t2 >= s * big / 512.0 && t2 < 5.0 * s * big)) return Rejected{"admissible2"};
  return p;
}

AdmissiblePair swap_roles(const AdmissiblePair& p) {
  AdmissiblePair q = p;
  q.type = p.type == 1 ? 2 : 1;
  // both layouts keep the "curved side" parameters in slots 2,3 of the other role
  q.params = {p.params[2], p.params[3], p.params[0], p.params[1]};
  q.base1 = p.base2;
  q.base2 = p.base1;
  return q;
}

PairResult make_type2_pair(double t1_0, double y1_0, double x2_0, double y2_0, double rho, double delta,
                           double C0) {
  auto r = make_type1_pair(x2_0, y2_0, t1_0, y1_0, rho, delta, C0);
  if (!accepted(r)) return r;
  return swap_roles(std::get<AdmissiblePair>(r));
}

bool contains_first(const AdmissiblePair& p, Point2 z1) {
  const Core c = core_of(p);
  if (p.type == 1) return core_first(c, p.y_step(), p.x_step(), z1);
  return core_second(c, p.rho, p.x_step(), z1);
}

bool contains_second(const AdmissiblePair& p, Point2 z2) {
  const Core c = core_of(p);
  if (p.type == 1) return core_second(c, p.rho, p.x_step(), z2);
  return core_first(c, p.y_step(), p.x_step(), z2);
}

bool contains(const AdmissiblePair& p, Point2 z1, Point2 z2) {
  return contains_first(p, z1) && contains_second(p, z2);
}

std::pair<Point2, Point2> member_at(const AdmissiblePair& p, const std::array<double, 4>& frac) {
  const Core c = core_of(p);
  if (p.type == 1) return core_member(c, p.y_step(), p.rho, p.x_step(), frac);
  auto [a, b] = core_member(c, p.y_step(), p.rho, p.x_step(), {frac[2], frac[3], frac[0], frac[1]});
  return {b, a};
}

std::pair<Point2, Point2> sample_member(const AdmissiblePair& p, Rng& g) {
  for (int attempt = 0; attempt < 64; ++attempt) {
    std::array<double, 4> f{};
    for (auto& v : f) v = kEdgeGuard + uniform01(g) * (1.0 - 2.0 * kEdgeGuard);
    auto m = member_at(p, f);
    if (contains(p, m.first, m.second)) return m;
  }
  throw GeometryError("sample_member: could not place a sample inside the pair");
}

std::vector<std::pair<Point2, Point2>> sample_members(const AdmissiblePair& p, std::size_t n, std::uint64_t seed) {
  std::vector<std::pair<Point2, Point2>> out(n);
  detail::for_each_index(n, [&](std::size_t i) {
    Rng g = make_rng(seed, i);
    out[i] = sample_member(p, g);
  });
  return out;
}

AuditReport audit_tau_bounds(const AdmissiblePair& p, std::size_t n, std::uint64_t seed) {
  AuditReport r;
  r.name = "tau_bounds";
  r.trials = n;
  const double s = p.C0 * p.C0 * p.rho * p.rho;
  const double n1 = s * p.delta, n2 = s * std::max(1.0, p.delta);
  std::vector<double> r1(n), r2(n), dy(n);
  auto members = sample_members(p, n, seed);
  for (std::size_t i = 0; i < n; ++i) {
    auto [z1, z2] = members[i];
    const double a = std::fabs(tau(z1, z1, z2)), b = std::fabs(tau(z2, z1, z2));
    r1[i] = (p.type == 1 ? a : b) / n1;
    r2[i] = (p.type == 1 ? b : a) / n2;
    dy[i] = std::fabs(z2.y - z1.y) / (p.C0 * p.rho);
  }
  std::uint64_t bad1 = 0, bad2 = 0, bady = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const bool f1 = !(r1[i] >= 1.0 / 8.0 && r1[i] <= 8.0);
    const bool f2 = !(r2[i] >= 1.0 / 1000.0 && r2[i] <= 1000.0);
    const bool fy = !(dy[i] >= 0.5 && dy[i] <= 1.0);
    bad1 += f1;
    bad2 += f2;
    bady += fy;
    r.failures += (f1 || f2 || fy);
    r.note_min("tau_near_min", r1[i]);
    r.note_max("tau_near_max", r1[i]);
    r.note_min("tau_far_min", r2[i]);
    r.note_max("tau_far_max", r2[i]);
  }
  r.counters["tau_near_out"] = bad1;
  r.counters["tau_far_out"] = bad2;
  r.counters["y_separation_out"] = bady;
  r.notes = "near = |tau| at the small-box point over C0^2 rho^2 delta, window [1/8,8]; "
            "far = other point over C0^2 rho^2 (1 v delta), window [1/1000,1000]";
  r.pass = r.failures == 0;
  return r;
}

void enumerate_pairs(const Strip& V1, const Strip& V2, double delta, double C0, int type,
                     const std::function<bool(const AdmissiblePair&)>& visit) {
  if (type == 2) {
    enumerate_pairs(V2, V1, delta, C0, 1, [&](const AdmissiblePair& p) { return visit(swap_roles(p)); });
    return;
  }
  const double rho = V1.interval.rho;
  const double w = rho * std::min(1.0, delta), h = rho * rho * delta;
  if (h > kXExtent) return;
  const auto ny = static_cast<std::int64_t>(std::llround(rho / w));
  const auto K = static_cast<std::int64_t>(std::llround(kXExtent / h));
  const std::int64_t mA = iceil(C0 * C0 / 4.0), mB = iceil(4.0 * C0 * C0) - 1;
  for (std::int64_t ky = 0; ky < ny; ++ky) {
    const double y1 = V1.interval.lo() + static_cast<double>(ky) * w;
    const double y2 = V2.interval.lo();
    for (std::int64_t kx = -K; kx < K; ++kx) {
      for (std::int64_t m = mA; m <= mB; ++m) {
        for (int s : {1, -1}) {
          const std::int64_t kt = kx + s * m;
          if (kt < -K || kt >= K) continue;
          auto r = make_type1_pair(static_cast<double>(kx) * h, y1, static_cast<double>(kt) * h, y2, rho, delta, C0);
          if (auto* p = std::get_if<AdmissiblePair>(&r)) {
            if (!visit(*p)) return;
          } else if (std::get<Rejected>(r).which == "y_separation") {
            goto next_row;
          }
        }
      }
    }
  next_row:;
  }
}

std::uint64_t count_pairs(const Strip& V1, const Strip& V2, double delta, double C0, int type) {
  if (type == 2) return count_pairs(V2, V1, delta, C0, 1);
  const double rho = V1.interval.rho;
  const double w = rho * std::min(1.0, delta), h = rho * rho * delta;
  if (h > kXExtent) return 0;
  const auto ny = static_cast<std::int64_t>(std::llround(rho / w));
  const auto k2 = 2 * static_cast<std::int64_t>(std::llround(kXExtent / h));
  const std::int64_t mA = iceil(C0 * C0 / 4.0), mB = iceil(4.0 * C0 * C0) - 1;
  const double s = C0 * C0 * rho * rho * std::max(1.0, delta);
  const double L2 = s / 512.0, U2 = 5.0 * s;
  std::uint64_t total = 0;
  for (std::int64_t ky = 0; ky < ny; ++ky) {
    const double y1 = V1.interval.lo() + static_cast<double>(ky) * w;
    const double y2 = V2.interval.lo();
    const double lo = y2 >= y1 ? y2 - y1 - w : y1 - y2 - rho;
    const double hi = y2 >= y1 ? y2 + rho - y1 : y1 + w - y2;
    if (lo < C0 * rho / 2.0 || hi > C0 * rho) continue;
    const double D2 = (y2 - y1) * (y2 - y1);
    auto add = [&](std::int64_t a, std::int64_t b) {
      total += tail_sum(std::max(a, mA), std::min(b, mB), k2);
    };
    // t - x = +m h: tau at the far base point is m h - D2
    add(iceil((D2 + L2) / h), iceil((D2 + U2) / h) - 1);
    add(ifloor((D2 - U2) / h) + 1, ifloor((D2 - L2) / h));
    // t - x = -m h: tau is -(m h + D2)
    add(iceil((L2 - D2) / h), iceil((U2 - D2) / h) - 1);
  }
  return total;
}

std::optional<AdmissiblePair> sample_pair(const Strip& V1, const Strip& V2, double delta, double C0, int type,
                                          Rng& g) {
  if (type == 2) {
    auto p = sample_pair(V2, V1, delta, C0, 1, g);
    if (!p) return std::nullopt;
    return swap_roles(*p);
  }
  if (!separated_strips(V1, V2, C0)) return std::nullopt;
  const double rho = V1.interval.rho;
  const double w = rho * std::min(1.0, delta), h = rho * rho * delta;
  const auto ny = static_cast<std::int64_t>(std::llround(rho / w));
  const std::int64_t kxlo = iceil(-1.0 / h), kxhi = iceil(1.0 / h) - 1;
  const std::int64_t mA = iceil(C0 * C0 / 4.0), mB = iceil(4.0 * C0 * C0) - 1;
  for (int attempt = 0; attempt < 20000; ++attempt) {
    const double y1 = V1.interval.lo() + static_cast<double>(uniform_int(g, 0, ny - 1)) * w;
    const std::int64_t kx = uniform_int(g, kxlo, kxhi);
    const std::int64_t m = uniform_int(g, mA, mB);
    const std::int64_t kt = kx + ((g() & 1) ? m : -m);
    const double x = static_cast<double>(kx) * h, t = static_cast<double>(kt) * h;
    if (t < -kXExtent || t >= kXExtent) continue;
    auto r = make_type1_pair(x, y1, t, V2.interval.lo(), rho, delta, C0);
    if (auto* p = std::get_if<AdmissiblePair>(&r)) return *p;
  }
  return std::nullopt;
}

nlohmann::json to_json(const AdmissiblePair& p) {
  nlohmann::json j;
  j["type"] = p.type;
  j["rho"] = p.rho;
  j["delta"] = p.delta;
  j["C0"] = p.C0;
  if (p.type == 1)
    j["params"] = {{"x1_0", p.params[0]}, {"y1_0", p.params[1]}, {"t2_0", p.params[2]}, {"y2_0", p.params[3]}};
  else
    j["params"] = {{"t1_0", p.params[0]}, {"y1_0", p.params[1]}, {"x2_0", p.params[2]}, {"y2_0", p.params[3]}};
  j["base1"] = {{"x", p.base1.x}, {"y", p.base1.y}};
  j["base2"] = {{"x", p.base2.x}, {"y", p.base2.y}};
  return j;
}

AdmissiblePair pair_from_json(const nlohmann::json& j) {
  const int type = j.at("type").get<int>();
  const auto& q = j.at("params");
  const double rho = j.at("rho"), delta = j.at("delta"), C0 = j.at("C0");
  PairResult r = type == 1 ? make_type1_pair(q.at("x1_0"), q.at("y1_0"), q.at("t2_0"), q.at("y2_0"), rho, delta, C0)
                           : make_type2_pair(q.at("t1_0"), q.at("y1_0"), q.at("x2_0"), q.at("y2_0"), rho, delta, C0);
  if (!accepted(r)) throw GeometryError("pair record is not admissible: " + std::get<Rejected>(r).which);
  return std::get<AdmissiblePair>(r);
}

}  // namespace hw
