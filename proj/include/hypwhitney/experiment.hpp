#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "hypwhitney/audit.hpp"
#include "hypwhitney/extension.hpp"
#include "hypwhitney/geometry.hpp"

namespace hw {

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct SampleCounts {
  std::size_t identities = 100000;
  std::size_t tau_pairs = 200;       // spread over rho_grid x delta_grid
  std::size_t tau_members = 1000;
  std::size_t reduction_pairs = 100;
  std::size_t reduction_points = 1000;
  std::size_t gamma_points = 1000;
  std::size_t prototype = 10000;
  std::size_t whitney = 20000;
  std::size_t sumset = 20000;
  std::size_t cubes = 2000;
};

struct ScalingConfig {
  std::vector<double> curved_deltas{0.5, 0.25, 0.125, 0.0625, 0.03125};
  std::vector<double> straight_deltas{2.0, 4.0, 8.0};
  std::vector<double> rho_sweep{0.03125, 0.015625, 0.0078125};
  double rho = 0.03125;           // for the delta sweeps
  double rho_sweep_delta = 0.125;
  double tolerance = 0.15;        // measured >= theory - tolerance
  double straight_upper = 0.3;    // straight regime is also bounded above
  double r2_min = 0.9;
};

struct ExperimentConfig {
  double C0 = 32.0;
  double c0 = 0.03125;
  std::vector<double> rho_grid{0.0625, 0.03125, 0.015625};
  std::vector<double> delta_grid{0.015625, 0.03125, 0.0625, 0.125, 0.25, 0.5, 1.0, 2.0, 4.0};
  std::vector<double> prototype_deltas{0.25, 0.125, 0.0625, 0.03125, 0.015625, 0.0078125, 0.00390625};
  std::vector<double> sumset_deltas{0.125, 0.0625, 0.03125, 0.015625};
  double sumset_rho = 0.015625;
  double whitney_rho = 0.0625;
  double whitney_delta_min = 0x1.0p-20;
  double whitney_delta_max = 0.0;  // 0: 4 / rho^2
  bool materialize = false;
  double p = 2.0, q = 2.0;
  bool linear_regime = false;
  QuadratureSpec quad;
  SampleCounts samples;
  ScalingConfig scaling;
  std::uint64_t seed = 1;
  std::string output_dir = "out";
};

void validate(const ExperimentConfig& c);
ExperimentConfig config_from_json(const nlohmann::json& j);  // missing keys keep defaults; validates
nlohmann::json to_json(const ExperimentConfig& c);
ExperimentConfig load_config(const std::string& path);

// strips used by the decomposition audits: j = -+ 3 C0/8 at width rho
std::pair<Strip, Strip> whitney_strips(double rho, double C0);
// sumset strips: j1 = 0 and j2 = 3 C0/4
std::pair<Strip, Strip> sumset_strips(double rho, double C0);

AuditReport audit_identities(std::size_t n, std::uint64_t seed);

struct BundleEntry {
  std::string group;
  AuditReport report;
  bool negative_control = false;
  nlohmann::json extra;
};

struct Bundle {
  std::string command;
  std::vector<BundleEntry> entries;

  bool pass() const;                  // every non-negative-control entry passes
  bool negative_controls_ok() const;  // every negative control fails
};

nlohmann::json to_json(const Bundle& b, const ExperimentConfig& c);

Bundle run_tau_audits(const ExperimentConfig& c);
Bundle run_reduction_audits(const ExperimentConfig& c);
Bundle run_transversality(const ExperimentConfig& c);
Bundle run_decompose(const ExperimentConfig& c, std::ostream* pairs_jsonl = nullptr);
Bundle run_sumsets(const ExperimentConfig& c);
Bundle run_negative_controls(const ExperimentConfig& c);
Bundle run_audits(const ExperimentConfig& c, bool negative_controls);

// x1_0 = y1_0 = 0, y2_0 = 3 C0 rho/4, t2_0 = C0^2 rho^2 delta
AdmissiblePair scaling_pair(double rho, double delta, double C0);

struct SweepRow {
  double delta = 0, rho = 0, p = 0, q = 0, ratio = 0, truncation = 0, refinement_delta = 0;
};

struct SweepFit {
  std::string regime;    // curved | straight | rho
  std::string variable;  // delta | rho
  double theory = 0.0;
  PowerLawFit fit;
  double band_lo = 0.0, band_hi = 0.0;  // band on the measured exponent
  double r2_min = 0.0;
  bool within = false;
};

struct ScalingLawResult {
  std::vector<SweepRow> rows;
  std::vector<SweepFit> fits;
  bool pass() const;
};

double theoretical_delta_exponent(double p, double q);     // curved regime
double straight_delta_exponent(double p, double q);
double rho_exponent(double p, double q);

ScalingLawResult run_scaling_law(const ExperimentConfig& c);
void write_sweep_csv(const ScalingLawResult& r, std::ostream& os);
nlohmann::json to_json(const ScalingLawResult& r);

}  // namespace hw
