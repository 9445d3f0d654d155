// Acceptance run: one verdict line per criterion on stdout, details indented below it.
// Criteria listed in kKnown are expected to fail at C0 = 32 for the reasons given
// there; they print FAIL but do not make the process exit nonzero. Anything else
// failing does.

#include <algorithm>
#include <cstdarg>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>

#include "hypwhitney/experiment.hpp"
#include "hypwhitney/scaling.hpp"
#include "hypwhitney/sumsets.hpp"
#include "hypwhitney/whitney.hpp"

using namespace hw;

namespace {

// tolerances
constexpr double kIdentityTol = 1e-12;
constexpr double kIdentitySeconds = 5;
constexpr double kSizeSeconds = 30;
constexpr std::uint64_t kSizeDraws = 5;
constexpr double kWhitneySeconds = 120;
constexpr double kResidualTol = 1e-12;
constexpr double kTvSpread = 4;
constexpr double kTvExponentTol = 0.15;
constexpr double kAreaTol = 1e-10;
constexpr double kRefineTol = 1e-8;
constexpr double kLinearityTol = 1e-12;
constexpr double kCubeSide = 4;  // in units of delta
constexpr double kCubeSpread = 2;
constexpr double kSumsetSeconds = 60;
constexpr double kScalingTol = 0.15;
constexpr double kStraightUpper = 0.3;
constexpr double kR2 = 0.9;
constexpr double kScalingSeconds = 600;

const std::map<int, const char*> kKnown = {
    {2, "about 1% of pairs put the far ratio below 1/1000: tau at z2 can vanish inside the pair because its "
        "in-pair variation ~ 6 C0 rho^2 (1 v delta) exceeds the window floor C0^2 rho^2 (1 v delta)/512 "
        "unless C0 > 3072"},
    {3, "(iii): mixed-type containment happens with delta' well below 1/800; the admissibility windows "
        "alone only give delta' >= 1/2048, and points near the zero of tau at z2 go lower still"},
    {8, "cubes of side 4 delta in scaled coordinates do not hold the sums (needed factor ~ 3 C0^2), and "
        "the maximal multiplicity is not delta-stable on 2^-3..2^-6"},
};

int unexpected = 0;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void verdict(int id, const char* title, bool ok, double secs) {
  const auto it = kKnown.find(id);
  if (ok) {
    std::printf("criterion %2d PASS  %s (%.1f s)\n", id, title, secs);
  } else if (it != kKnown.end()) {
    std::printf("criterion %2d FAIL  %s (%.1f s) [known: %s]\n", id, title, secs, it->second);
  } else {
    std::printf("criterion %2d FAIL  %s (%.1f s)\n", id, title, secs);
    ++unexpected;
  }
  std::fflush(stdout);
}

void detail(const char* fmt, ...) __attribute__((format(printf, 1, 2)));
void detail(const char* fmt, ...) {
  std::printf("    ");
  va_list ap;
  va_start(ap, fmt);
  std::vprintf(fmt, ap);
  va_end(ap);
  std::printf("\n");
}

const AuditReport& find(const Bundle& b, const std::string& name) {
  for (const auto& e : b.entries)
    if (e.report.name == name) return e.report;
  throw std::runtime_error("missing report " + name);
}

ExperimentConfig base_config() {
  ExperimentConfig c;  // C0 = 32, c0 = 2^-5, rho_grid 2^-4..2^-6, delta_grid 2^-6..2^2, whitney rho 2^-4
  c.seed = 20240501;
  return c;
}

void criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = audit_identities(100000, 1);
  const double s = seconds_since(t0);
  double worst = 0;
  for (const auto& [k, v] : r.extremes) worst = std::max(worst, v);
  detail("100000 triples, worst abs error %.3g (tol %.0e)", worst, kIdentityTol);
  verdict(1, "algebraic identities", r.pass && worst <= kIdentityTol && s < kIdentitySeconds, s);
}

void criterion2(const ExperimentConfig& c) {
  // 200 pairs per draw; a pass has to hold for every draw, not for one lucky seed
  const auto t0 = std::chrono::steady_clock::now();
  auto cfg = c;
  cfg.samples.identities = 0;
  bool all = true;
  for (std::uint64_t draw = 0; draw < kSizeDraws; ++draw) {
    cfg.seed = mix_seed(c.seed, 500 + draw);
    const auto b = run_tau_audits(cfg);
    const auto& r = find(b, "tau_bounds");
    all = all && r.pass;
    detail("draw %llu: %llu pairs x %zu members, %llu failing (near out %llu, far out %llu); near ratio [%.4g, %.4g] "
           "in [1/8,8], far ratio [%.4g, %.4g] in [1/1000,1000]",
           static_cast<unsigned long long>(draw), static_cast<unsigned long long>(r.trials), cfg.samples.tau_members,
           static_cast<unsigned long long>(r.failures), static_cast<unsigned long long>(r.count("tau_near_out")),
           static_cast<unsigned long long>(r.count("tau_far_out")), r.get("tau_near_min"), r.get("tau_near_max"),
           r.get("tau_far_min"), r.get("tau_far_max"));
  }
  const double s = seconds_since(t0);
  // the same audit at larger C0, where the far window has slack
  for (auto [C0, rho] : {std::pair{256.0, 0x1.0p-9}, std::pair{1024.0, 0x1.0p-11}}) {
    ExperimentConfig big = cfg;
    big.C0 = C0;
    big.rho_grid = {rho};
    big.samples.tau_pairs = 400;
    big.samples.tau_members = 300;
    const auto bb = run_tau_audits(big);
    const auto& rb = find(bb, "tau_bounds");
    detail("C0 = %g, rho = %g: %llu of %llu pairs fail", C0, big.rho_grid[0],
           static_cast<unsigned long long>(rb.failures), static_cast<unsigned long long>(rb.trials));
  }
  verdict(2, "size lemma windows at C0 = 32", all && s < kSizeSeconds, s);
}

void criterion3_4(const ExperimentConfig& c) {
  auto cfg = c;
  cfg.samples.whitney = 100000;
  const auto t0 = std::chrono::steady_clock::now();
  const auto b = run_decompose(cfg);
  const double s = seconds_since(t0);
  const auto& dis = find(b, "disjoint");
  const auto& ov = find(b, "overlap");
  const auto& loc = find(b, "locate");
  const auto& chi = find(b, "chi_identity");
  const bool i = dis.pass;
  const bool ii = ov.count("multiplicity_out") == 0 && ov.count("scale_span_out") == 0;
  const bool iii = ov.count("mixed_small_delta") == 0 && ov.count("mixed_scale_span_out") == 0 &&
                   ov.count("mixed_count_out") == 0;
  const bool iv = loc.pass && loc.get("success_rate") == 1.0;
  detail("(i) within-scale multiplicity max %g, %llu violations", dis.get("within_scale_multiplicity_max"),
         static_cast<unsigned long long>(dis.failures));
  detail("(ii) type-1 multiplicity max %g (<= 64), log2 scale span max %g (<= 7)", ov.get("type1_multiplicity_max"),
         ov.get("type1_log2_scale_span_max"));
  detail("(iii) mixed points %llu, with some delta < 1/800: %llu; smallest mixed delta 2^%.1f",
         static_cast<unsigned long long>(ov.count("mixed_points")),
         static_cast<unsigned long long>(ov.count("mixed_small_delta")), std::log2(ov.get("mixed_delta_min", 1.0)));
  detail("(iv) located %llu of %llu non-degenerate, success rate %.6f",
         static_cast<unsigned long long>(loc.count("located")),
         static_cast<unsigned long long>(loc.trials - loc.count("degenerate")), loc.get("success_rate"));
  verdict(3, "Whitney covering, C0 = 32, rho = 2^-4", i && ii && iii && iv && s < kWhitneySeconds, s);

  // mixed overlap with a larger C0: the floor is set by the base windows, not by C0
  {
    const double C0 = 256, rho = 0x1.0p-9;
    auto [V1, V2] = whitney_strips(rho, C0);
    const auto d = decompose(V1, V2, C0, 0x1.0p-20, 4.0 / (rho * rho));
    const auto r = audit_overlap(d, 20000, 77);
    detail("(iii) at C0 = %g: %llu of %llu mixed points have delta < 1/800; smallest mixed delta 2^%.1f", C0,
           static_cast<unsigned long long>(r.count("mixed_small_delta")),
           static_cast<unsigned long long>(r.count("mixed_points")), std::log2(r.get("mixed_delta_min", 1.0)));
  }

  detail("%llu interior samples equal to 1, %llu wrong inside, %llu wrong outside, %llu below the kept scale range; "
         "both-nonempty variant equals 1 on %llu",
         static_cast<unsigned long long>(chi.count("ones")), static_cast<unsigned long long>(chi.count("wrong_inside")),
         static_cast<unsigned long long>(chi.count("wrong_outside")),
         static_cast<unsigned long long>(chi.count("below_scale_range")),
         static_cast<unsigned long long>(chi.count("both_nonempty_variant_equal_one")));
  verdict(4, "inclusion-exclusion identity", chi.pass, s);
}

void criterion5(const ExperimentConfig& c) {
  auto cfg = c;
  cfg.samples.reduction_pairs = 100;
  cfg.samples.reduction_points = 10000;
  cfg.samples.gamma_points = 1000;
  const auto t0 = std::chrono::steady_clock::now();
  const auto b = run_reduction_audits(cfg);
  const double s = seconds_since(t0);
  const auto& r = find(b, "reduction");
  const auto& g = find(b, "gamma_scaled");
  detail("100 pairs x 10^4 points: residual max %.3g (tol %.0e), image violations %llu, window violations %llu",
         r.get("residual_max"), kResidualTol, static_cast<unsigned long long>(r.count("image_out")),
         static_cast<unsigned long long>(r.count("window_out")));
  detail("scaled Gamma (reported only): near [%.3g, %.3g], far [%.3g, %.3g], window [1/64, 64], %llu pairs outside",
         g.get("near_min"), g.get("near_max"), g.get("far_min"), g.get("far_max"),
         static_cast<unsigned long long>(g.failures));
  verdict(5, "reduction lemma", r.pass && r.get("residual_max") <= kResidualTol, s);
}

void criterion6(const ExperimentConfig& c) {
  auto cfg = c;
  cfg.samples.prototype = 10000;
  cfg.prototype_deltas = {0x1.0p-2, 0x1.0p-3, 0x1.0p-4, 0x1.0p-5, 0x1.0p-6, 0x1.0p-7, 0x1.0p-8};
  const auto t0 = std::chrono::steady_clock::now();
  const auto b = run_transversality(cfg);
  const double s = seconds_since(t0);
  const auto& r = find(b, "prototype_stability");
  const double e = r.get("unscaled_tv1_exponent");
  detail("median |TV1^s| spread %.3f, |TV2^s| spread %.3f (<= %g); unscaled |TV1| exponent %.4f (1 +- %g), r2 %.4f",
         r.get("spread_tv1s"), r.get("spread_tv2s"), kTvSpread, e, kTvExponentTol, r.get("unscaled_tv1_r2"));
  const bool ok = r.get("spread_tv1s") <= kTvSpread && r.get("spread_tv2s") <= kTvSpread &&
                  std::fabs(e - 1.0) <= kTvExponentTol;
  bool all = ok;
  for (const auto& en : b.entries) all = all && en.report.pass;
  verdict(6, "prototype transversality", all, s);
}

void criterion7() {
  const auto t0 = std::chrono::steady_clock::now();
  QuadratureSpec q, fine;
  fine.panel_multiplier = 2;
  const auto pair = scaling_pair(0.03125, 0.125, 32);
  double area_err = 0, refine = 0, lin = 0;
  Rng g = make_rng(7, 0);
  for (const Carrier& car : {rectangle(0, 1, 0, 1), first_carrier(pair), second_carrier(pair)}) {
    const auto f = TestFunction::indicator(car);
    area_err = std::max(area_err, std::abs(extend(f, PhaseFamily::base(), {0, 0, 0}, q) - cplx(car.area(), 0)));
    for (int k = 0; k < 200; ++k) {
      std::array<double, 3> xi{};
      double n2 = 0;
      do {
        for (auto& x : xi) x = 128 * uniform01(g) - 64;
        n2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
      } while (n2 > 64.0 * 64.0);
      const cplx a = extend(f, PhaseFamily::base(), xi, q);
      refine = std::max(refine, std::abs(a - extend(f, PhaseFamily::base(), xi, fine)));
      cplx sum = 0;
      for (auto s : {std::array<double, 4>{0, 0.3, 0, 0.6}, {0.3, 1, 0, 0.6}, {0, 0.7, 0.6, 1}, {0.7, 1, 0.6, 1}})
        sum += extend(TestFunction::sub_box(car, s), PhaseFamily::base(), xi, q);
      lin = std::max(lin, std::abs(sum - a));
    }
  }
  const double s = seconds_since(t0);
  detail("|extend(chi_U, 0) - |U|| max %.3g (tol %.0e); refinement change max %.3g for |xi| <= 64 (tol %.0e); "
         "partition defect max %.3g (tol %.0e)",
         area_err, kAreaTol, refine, kRefineTol, lin, kLinearityTol);
  verdict(7, "quadrature", area_err <= kAreaTol && refine <= kRefineTol && lin <= kLinearityTol, s);
}

void criterion8(const ExperimentConfig& c) {
  auto cfg = c;
  cfg.sumset_deltas = {0x1.0p-3, 0x1.0p-4, 0x1.0p-5, 0x1.0p-6};
  cfg.samples.sumset = 25000;  // 10^5 over the four scales
  cfg.samples.cubes = 2000;
  const auto t0 = std::chrono::steady_clock::now();
  const auto b = run_sumsets(cfg);
  const double s = seconds_since(t0);
  bool windows = true, cubes = true;
  std::uint64_t sums = 0, viol = 0;
  for (const auto& e : b.entries) {
    const auto& r = e.report;
    if (r.name == "sumset_x") {
      windows = windows && r.pass;
      sums += r.trials;
      viol += r.failures;
    } else if (r.name == "sumset_cubes") {
      cubes = cubes && r.pass;
      detail("cubes delta = 2^%g: %llu of %llu sums outside the side-%g delta cube; needed factor max %.0f; "
             "multiplicity max %g",
             std::log2(r.get("delta")), static_cast<unsigned long long>(r.count("outside_cube")),
             static_cast<unsigned long long>(r.trials), kCubeSide, r.get("needed_side_factor_max"),
             r.get("multiplicity_max"));
    }
  }
  const auto& st = find(b, "sumset_cube_stability");
  detail("x/y windows: %llu sums, %llu violations", static_cast<unsigned long long>(sums),
         static_cast<unsigned long long>(viol));
  detail("multiplicity spread across delta %.2f (<= %g)", st.get("multiplicity_spread"), kCubeSpread);
  // below the audited range the side-4 delta multiplicity levels off
  {
    auto [V1, V2] = sumset_strips(cfg.sumset_rho, cfg.C0);
    const auto sw = sumset_cube_sweep(V1, V2, cfg.C0, {0x1.0p-7, 0x1.0p-8, 0x1.0p-9}, 500, 5, kCubeSide);
    detail("side 4 delta, delta = 2^-7, 2^-8, 2^-9: multiplicity max %g, %g, %g (spread %.2f)",
           sw.reports[0].get("multiplicity_max"), sw.reports[1].get("multiplicity_max"),
           sw.reports[2].get("multiplicity_max"), sw.multiplicity_spread);
  }
  verdict(8, "sumset windows and cubes", windows && cubes && st.pass && s < kSumsetSeconds, s);
}

void criterion9(const ExperimentConfig& c) {
  auto cfg = c;
  cfg.p = cfg.q = 2;
  cfg.scaling.tolerance = kScalingTol;
  cfg.scaling.straight_upper = kStraightUpper;
  cfg.scaling.r2_min = kR2;
  cfg.quad.truncation = {1024, 1024, 1024};
  cfg.quad.grid = {64, 64, 64};
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = run_scaling_law(cfg);
  const double s = seconds_since(t0);
  bool curved_straight = true;
  for (const auto& f : r.fits) {
    detail("%-8s exponent %.4f (theory %.2f, band [%.2f, %s]), r2 %.4f -> %s", f.regime.c_str(), f.fit.exponent,
           f.theory, f.band_lo, std::isfinite(f.band_hi) ? std::to_string(f.band_hi).c_str() : "inf",
           f.fit.r_squared, f.within ? "within" : "outside");
    if (f.regime != "rho") curved_straight = curved_straight && f.within;
  }
  for (const auto& w : r.rows)
    detail("  delta %-9g rho %-9g ratio %.6g  refinement %.3g", w.delta, w.rho, w.ratio, w.refinement_delta);
  verdict(9, "scaling law at p = q = 2", curved_straight && s <= kScalingSeconds, s);
}

void criterion10(const ExperimentConfig& c) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto b = run_negative_controls(c);
  const double s = seconds_since(t0);
  for (const auto& e : b.entries)
    detail("%s: %s (%llu failures)", e.report.name.c_str(), e.report.pass ? "PASSED (vacuous audit)" : "failed",
           static_cast<unsigned long long>(e.report.failures));
  verdict(10, "negative controls fail", b.negative_controls_ok() && !b.entries.empty(), s);
}

}  // namespace

int main() {
  try {
    const auto c = base_config();
    criterion1();
    criterion2(c);
    criterion3_4(c);
    criterion5(c);
    criterion6(c);
    criterion7();
    criterion8(c);
    criterion9(c);
    criterion10(c);
  } catch (const std::exception& e) {
    std::printf("acceptance aborted: %s\n", e.what());
    return 3;
  }
  std::printf("%d unexpected failure(s)\n", unexpected);
  return unexpected == 0 ? 0 : 1;
}
