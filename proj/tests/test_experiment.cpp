#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hypwhitney/experiment.hpp"

using namespace hw;

namespace {

ExperimentConfig tiny() {
  ExperimentConfig c;
  c.samples = {2000, 6, 200, 4, 200, 200, 500, 1000, 1000, 20};
  c.delta_grid = {0.0625, 1.0};
  c.prototype_deltas = {0.25, 0.03125};
  c.sumset_deltas = {0.125, 0.0625};
  c.whitney_delta_min = 0x1.0p-12;
  return c;
}

ExperimentConfig empty_grids() {
  ExperimentConfig c;
  c.rho_grid.clear();
  c.delta_grid.clear();
  c.prototype_deltas.clear();
  c.sumset_deltas.clear();
  c.samples.identities = 0;
  c.samples.whitney = 0;
  return c;
}

}  // namespace

TEST_CASE("power-law fits") {
  std::vector<double> x{0.5, 0.25, 0.125, 0.0625}, y;
  for (double v : x) y.push_back(v * v);
  auto f = fit_power_law(x, y);
  CHECK(f.exponent == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(f.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  Rng g = make_rng(1, 0);
  std::vector<double> xs, ys;
  for (int k = 0; k < 40; ++k) {
    const double v = std::ldexp(1.0, -k % 10) * (1 + uniform01(g));
    xs.push_back(v);
    ys.push_back(3 * std::sqrt(v) * (1 + 0.01 * (2 * uniform01(g) - 1)));
  }
  f = fit_power_law(xs, ys);
  CHECK(std::fabs(f.exponent - 0.5) <= 0.05);
  CHECK(f.log_constant == doctest::Approx(std::log(3.0)).epsilon(0.01));
  CHECK(f.residuals.size() == 40u);
  CHECK_THROWS_AS(fit_power_law({1.0, 1.0}, {2.0, 3.0}), FitError);
  CHECK_THROWS_AS(fit_power_law({1.0}, {2.0}), FitError);
  CHECK_THROWS_AS(fit_power_law({1.0, 2.0}, {0.0, 3.0}), FitError);
}

TEST_CASE("theoretical exponents") {
  CHECK(theoretical_delta_exponent(2, 2) == doctest::Approx(0.5));
  CHECK(theoretical_delta_exponent(3, 4) == doctest::Approx(5 - 0.75 - 2));
  CHECK(straight_delta_exponent(2, 2) == 0.0);
  CHECK(rho_exponent(2, 2) == 0.0);
  CHECK(rho_exponent(4, 4) == doctest::Approx(3.0));
}

TEST_CASE("config round trip and validation") {
  ExperimentConfig c = tiny();
  c.seed = 77;
  c.quad.grid = {16, 16, 16};
  const auto j = to_json(c);
  const auto back = config_from_json(nlohmann::json::parse(j.dump()));
  CHECK(to_json(back) == j);
  CHECK(back.seed == 77u);
  CHECK(back.samples.cubes == 20u);

  auto bad = [&](auto mutate) {
    nlohmann::json k = j;
    mutate(k);
    CHECK_THROWS_AS(config_from_json(k), ConfigError);
  };
  bad([](nlohmann::json& k) { k["p"] = 1.5; });
  bad([](nlohmann::json& k) { k["q"] = 1.9; });
  bad([](nlohmann::json& k) { k["delta_grid"] = {0.3}; });
  bad([](nlohmann::json& k) { k["C0"] = 24; });
  bad([](nlohmann::json& k) { k["rho_grid"] = {0.5}; });
  bad([](nlohmann::json& k) { k["bogus"] = 1; });
  bad([](nlohmann::json& k) { k["quad"]["grid"] = {15, 16, 16}; });
  bad([](nlohmann::json& k) { k["quad"]["nodes_per_panel"] = 7; });
  bad([](nlohmann::json& k) { k["samples"]["extra"] = 1; });
  bad([](nlohmann::json& k) { k["p"] = "two"; });
  bad([](nlohmann::json& k) {
    k["linear_regime"] = true;
    k["p"] = 1.8;
    k["q"] = 2.0;
  });
  nlohmann::json ok = {{"p", 3.0}, {"q", 2.0}, {"linear_regime", true}, {"schema", "hypwhitney/1"}};
  CHECK_NOTHROW(config_from_json(ok));
  CHECK_THROWS_AS(config_from_json(nlohmann::json::array()), ConfigError);
}

TEST_CASE("empty grids give an empty passing bundle") {
  const auto b = run_audits(empty_grids(), false);
  CHECK(b.entries.empty());
  CHECK(b.pass());
  const auto j = to_json(b, empty_grids());
  CHECK(j.at("schema") == "hypwhitney/1");
  CHECK(j.at("pass") == true);
}

TEST_CASE("bundles are identical across thread settings") {
  auto c = tiny();
  set_serial_mode(true);
  const auto a = to_json(run_audits(c, true), c).dump();
  set_serial_mode(false);
  const auto b = to_json(run_audits(c, true), c).dump();
  CHECK(a == b);
  c.seed = 2;
  CHECK(to_json(run_audits(c, false), c).dump() != b);
}

TEST_CASE("negative controls fail") {
  const auto c = tiny();
  const auto nc = run_negative_controls(c);
  CHECK(nc.entries.size() == 4u);
  CHECK(nc.negative_controls_ok());
  CHECK(nc.pass());  // negative controls never count against the bundle
  for (const auto& e : nc.entries) CHECK(e.negative_control);
}

TEST_CASE("scaling pairs") {
  for (double d : {0.03125, 0.5, 2.0, 8.0}) {
    const auto p = scaling_pair(0.03125, d, 32);
    CHECK(p.params[2] - p.params[0] == doctest::Approx(32.0 * 32 * 0.03125 * 0.03125 * d));
  }
  CHECK_THROWS_AS(scaling_pair(0.03125, 0.3, 32), GeometryError);
}

TEST_CASE("a small scaling-law run") {
  ExperimentConfig c;
  c.quad.grid = {8, 8, 8};
  c.quad.truncation = {64, 64, 64};
  c.scaling.curved_deltas = {0.5, 0.25, 0.125, 0.0625};
  c.scaling.straight_deltas = {2.0, 4.0};
  c.scaling.rho_sweep = {0.03125, 0.015625};
  const auto r = run_scaling_law(c);
  CHECK(r.rows.size() == 8u);
  CHECK(r.fits.size() == 3u);
  for (const auto& row : r.rows) CHECK(row.ratio > 0);
  std::ostringstream os;
  write_sweep_csv(r, os);
  const std::string s = os.str();
  CHECK(s.rfind("delta,rho,p,q,ratio,truncation,refinement_delta\n", 0) == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == 9);
  const auto j = to_json(r);
  CHECK(j.at("fits")[0].at("band_hi").is_null());
  CHECK(j.at("fits")[1].at("band_hi").is_number());
  CHECK(r.fits[0].r2_min == c.scaling.r2_min);
  CHECK(r.fits[1].r2_min == 0.0);
  // the same run reproduces itself
  std::ostringstream again;
  write_sweep_csv(run_scaling_law(c), again);
  CHECK(again.str() == s);

  c.scaling.curved_deltas = {0.5, 0.25};
  CHECK_THROWS_AS(run_scaling_law(c), ConfigError);
}
