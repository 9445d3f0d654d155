#include "hypwhitney/sumsets.hpp"

#include <algorithm>
#include <cmath>

#include "parallel.hpp"

namespace hw {

namespace {

double frac01(Rng& g) { return kEdgeGuard + uniform01(g) * (1.0 - 2.0 * kEdgeGuard); }

std::int64_t m_lo(double C0) { return static_cast<std::int64_t>(std::ceil(C0 * C0 / 4.0)); }
std::int64_t m_hi(double C0) { return static_cast<std::int64_t>(std::ceil(4.0 * C0 * C0)) - 1; }

}  // namespace

std::int64_t SumsetFamily::j_lo() const { return std::llround(static_cast<double>(V1.interval.j) / delta); }
std::int64_t SumsetFamily::j_hi() const { return std::llround(static_cast<double>(V1.interval.j + 1) / delta); }
std::int64_t SumsetFamily::k_lo() const { return std::llround(static_cast<double>(V2.interval.j) / delta); }
std::int64_t SumsetFamily::k_hi() const { return std::llround(static_cast<double>(V2.interval.j + 1) / delta); }

PairResult SumsetFamily::pair(std::int64_t i, std::int64_t ip, std::int64_t j) const {
  const double r = rho(), h = r * r * delta, w = r * delta;
  return make_type1_pair(static_cast<double>(i) * h, static_cast<double>(j) * w, static_cast<double>(ip) * h,
                         V2.interval.lo(), r, delta, C0);
}

std::array<double, 3> SumsetFamily::scaled_sum(Point2 z1, Point2 z2) const {
  const double r = rho();
  const PhaseFamily base = PhaseFamily::base();
  return {(z1.x + z2.x) / (r * r), (z1.y + z2.y) / r, (phase_eval(base, z1) + phase_eval(base, z2)) / (r * r * r)};
}

std::array<double, 3> SumsetFamily::base_sum(std::int64_t i, std::int64_t ip, std::int64_t j, std::int64_t k) const {
  const double r = rho(), h = r * r * delta, w = r * delta;
  const Point2 b1{static_cast<double>(i) * h, static_cast<double>(j) * w};
  const double yk = static_cast<double>(k) * w;
  const Point2 b2{static_cast<double>(ip) * h - yk * (yk - b1.y), yk};
  return scaled_sum(b1, b2);
}

SumsetFamily make_sumset_family(const Strip& V1, const Strip& V2, double C0, double delta) {
  if (V1.interval.rho != V2.interval.rho) throw GeometryError("sumsets: strips of different width");
  if (!is_dyadic(delta) || delta > 0.5) throw GeometryError("sumsets: delta must be dyadic and at most 1/2");
  if (!separated_strips(V1, V2, C0)) throw GeometryError("sumsets: strips are not y-separated");
  if (V1.interval.j < 0 || V2.interval.j <= V1.interval.j)
    throw GeometryError("sumsets: expects 0 <= y1 < y2 (V1 below V2, both in the upper half)");
  return SumsetFamily{V1, V2, C0, delta};
}

AuditReport audit_sumset_x(const Strip& V1, const Strip& V2, double C0, double rho, double delta, std::size_t n,
                           std::uint64_t seed, double window_scale) {
  const SumsetFamily fam = make_sumset_family(V1, V2, C0, delta);
  if (rho != fam.rho()) throw GeometryError("sumsets: rho does not match the strips");
  AuditReport rep;
  rep.name = "sumset_x";
  rep.trials = n;
  const auto blocks = static_cast<std::int64_t>(std::llround(1.0 / (rho * rho)));
  const double xw = 10.0 * C0 * C0 * rho * rho * window_scale, yw = 2.0 * C0 * rho * window_scale;
  struct Row {
    double dx = 0, ys = 0;
    bool ok = true, sampled = false;
  };
  std::vector<Row> rows(n);
  detail::for_each_index(n, [&](std::size_t s) {
    Rng g = make_rng(seed, s);
    for (int attempt = 0; attempt < 10000; ++attempt) {
      const std::int64_t N = uniform_int(g, 0, blocks - 1);
      const std::int64_t i = N * fam.i_max() + uniform_int(g, 0, fam.i_max());
      const std::int64_t j = uniform_int(g, fam.j_lo(), fam.j_hi() - 1);
      const std::int64_t m = uniform_int(g, m_lo(C0), m_hi(C0));
      const std::int64_t ip = (g() & 1) ? i + m : i - m;
      auto r = fam.pair(i, ip, j);
      if (!accepted(r)) continue;
      auto [z1, z2] = sample_member(std::get<AdmissiblePair>(r), g);
      const double c = 2.0 * static_cast<double>(N) * rho * rho;
      const double sx = z1.x + z2.x, sy = z1.y + z2.y;
      Row& w = rows[s];
      w.sampled = true;
      w.dx = (sx - c) / (C0 * C0 * rho * rho);
      w.ys = sy / (C0 * rho);
      w.ok = sx >= c - xw && sx <= c + xw && sy >= 0.0 && sy <= yw;
      return;
    }
  });
  std::uint64_t unsampled = 0;
  for (const auto& w : rows) {
    if (!w.sampled) {
      ++unsampled;
      continue;
    }
    rep.failures += !w.ok;
    rep.note_min("x_offset_min", w.dx);
    rep.note_max("x_offset_max", w.dx);
    rep.note_min("y_sum_min", w.ys);
    rep.note_max("y_sum_max", w.ys);
  }
  rep.counters["unsampled"] = unsampled;
  rep.extremes["window_scale"] = window_scale;
  rep.notes = "x offsets in units of C0^2 rho^2 about 2 N rho^2 (window +-10), y sums in units of C0 rho (window [0,2])";
  rep.failures += unsampled;
  rep.pass = rep.failures == 0;
  return rep;
}

int cube_multiplicity(const SumsetFamily& fam, const std::array<double, 3>& X, double side) {
  const double d = fam.delta, hs = side / 2.0;
  const std::int64_t klo = fam.k_lo(), khi = fam.k_hi();
  int count = 0;
  for (std::int64_t j = fam.j_lo(); j < fam.j_hi(); ++j) {
    // y: (j + k) delta within hs of X[1]
    const std::int64_t k0 = std::max(klo, static_cast<std::int64_t>(std::ceil((X[1] - hs) / d)) - j - 1);
    const std::int64_t k1 = std::min(khi - 1, static_cast<std::int64_t>(std::floor((X[1] + hs) / d)) - j + 1);
    for (std::int64_t k = k0; k <= k1; ++k) {
      const double kd = static_cast<double>(k), jd = static_cast<double>(j);
      // x: (i + i') delta - delta^2 k (k - j) within hs of X[0]
      const double D = d * d * kd * (kd - jd);
      const auto I0 = static_cast<std::int64_t>(std::ceil((X[0] + D - hs) / d)) - 1;
      const auto I1 = static_cast<std::int64_t>(std::floor((X[0] + D + hs) / d)) + 1;
      for (std::int64_t I = I0; I <= I1; ++I) {
        // z is affine in i at fixed I = i + i', slope delta^2 (j - k)
        const double Id = static_cast<double>(I);
        const double C = Id * d * d * kd - d * d * d * kd * kd * (kd - jd) + std::pow(jd * d, 3) / 3.0 +
                         std::pow(kd * d, 3) / 3.0;
        const double slope = d * d * (jd - kd);
        double a = (X[2] - hs - C) / slope, b = (X[2] + hs - C) / slope;
        if (a > b) std::swap(a, b);
        const std::int64_t i0 = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::ceil(a)) - 1);
        const std::int64_t i1 = std::min<std::int64_t>(fam.i_max(), static_cast<std::int64_t>(std::floor(b)) + 1);
        for (std::int64_t i = i0; i <= i1; ++i) {
          const std::int64_t ip = I - i;
          const auto P = fam.base_sum(i, ip, j, k);
          if (std::fabs(X[0] - P[0]) > hs || std::fabs(X[1] - P[1]) > hs || std::fabs(X[2] - P[2]) > hs) continue;
          if (accepted(fam.pair(i, ip, j))) ++count;
        }
      }
    }
  }
  return count;
}

int cube_multiplicity_brute(const SumsetFamily& fam, const std::array<double, 3>& X, double side) {
  const double hs = side / 2.0;
  const std::int64_t span = m_hi(fam.C0);
  int count = 0;
  for (std::int64_t j = fam.j_lo(); j < fam.j_hi(); ++j)
    for (std::int64_t k = fam.k_lo(); k < fam.k_hi(); ++k)
      for (std::int64_t i = 0; i <= fam.i_max(); ++i)
        for (std::int64_t ip = i - span; ip <= i + span; ++ip) {
          const auto P = fam.base_sum(i, ip, j, k);
          if (std::fabs(X[0] - P[0]) > hs || std::fabs(X[1] - P[1]) > hs || std::fabs(X[2] - P[2]) > hs) continue;
          if (accepted(fam.pair(i, ip, j))) ++count;
        }
  return count;
}

AuditReport audit_sumset_cubes(const Strip& V1, const Strip& V2, double C0, double rho, double delta, std::size_t n,
                               std::uint64_t seed, double side_factor) {
  const SumsetFamily fam = make_sumset_family(V1, V2, C0, delta);
  if (rho != fam.rho()) throw GeometryError("sumsets: rho does not match the strips");
  AuditReport rep;
  rep.name = "sumset_cubes";
  rep.trials = n;
  const double side = side_factor * delta;
  struct Row {
    double need = 0;
    int mult = 0;
    bool sampled = false, slab_ok = true;
  };
  std::vector<Row> rows(n);
  detail::for_each_index(n, [&](std::size_t s) {
    Rng g = make_rng(seed, s);
    for (int attempt = 0; attempt < 10000; ++attempt) {
      const std::int64_t i = uniform_int(g, 0, fam.i_max());
      const std::int64_t j = uniform_int(g, fam.j_lo(), fam.j_hi() - 1);
      const std::int64_t m = uniform_int(g, m_lo(C0), m_hi(C0));
      const std::int64_t ip = (g() & 1) ? i + m : i - m;
      auto r = fam.pair(i, ip, j);
      if (!accepted(r)) continue;
      const auto& p = std::get<AdmissiblePair>(r);
      const std::int64_t k = uniform_int(g, fam.k_lo(), fam.k_hi() - 1);
      const double f2 = static_cast<double>(k) * delta - static_cast<double>(V2.interval.j) + delta * frac01(g);
      auto [z1, z2] = member_at(p, {frac01(g), frac01(g), f2, frac01(g)});
      if (!contains(p, z1, z2)) continue;
      Row& w = rows[s];
      w.sampled = true;
      w.slab_ok = static_cast<std::int64_t>(std::floor(z2.y / (rho * delta))) == k;
      const auto X = fam.scaled_sum(z1, z2);
      const auto P = fam.base_sum(i, ip, j, k);
      double dev = 0;
      for (int c = 0; c < 3; ++c) dev = std::max(dev, std::fabs(X[static_cast<std::size_t>(c)] - P[static_cast<std::size_t>(c)]));
      w.need = 2.0 * dev / delta;
      w.mult = cube_multiplicity(fam, X, side);
      return;
    }
  });
  std::uint64_t unsampled = 0, outside = 0, slab = 0;
  std::vector<double> mults;
  for (const auto& w : rows) {
    if (!w.sampled) {
      ++unsampled;
      continue;
    }
    outside += w.need > side_factor;
    slab += !w.slab_ok;
    rep.note_max("needed_side_factor_max", w.need);
    rep.note_max("multiplicity_max", w.mult);
    rep.note_min("multiplicity_min", w.mult);
    mults.push_back(w.mult);
  }
  rep.extremes["multiplicity_median"] = median(mults);
  rep.extremes["side_factor"] = side_factor;
  rep.counters["outside_cube"] = outside;
  rep.counters["slab_mismatch"] = slab;
  rep.counters["unsampled"] = unsampled;
  rep.failures = outside + slab + unsampled;
  rep.notes = "cube of side side_factor*delta centred at the scaled base sum; multiplicity counts every N=0 cube "
              "holding the scaled sum";
  rep.pass = rep.failures == 0;
  return rep;
}

CubeSweep sumset_cube_sweep(const Strip& V1, const Strip& V2, double C0, const std::vector<double>& deltas,
                            std::size_t n, std::uint64_t seed, double side_factor) {
  CubeSweep s;
  double lo = 0, hi = 0;
  for (std::size_t k = 0; k < deltas.size(); ++k) {
    auto rep = audit_sumset_cubes(V1, V2, C0, V1.interval.rho, deltas[k], n, mix_seed(seed, k), side_factor);
    const double m = rep.get("multiplicity_max");
    lo = k == 0 ? m : std::min(lo, m);
    hi = k == 0 ? m : std::max(hi, m);
    s.deltas.push_back(deltas[k]);
    s.reports.push_back(std::move(rep));
  }
  s.multiplicity_spread = lo > 0 ? hi / lo : 0.0;
  return s;
}

}  // namespace hw
