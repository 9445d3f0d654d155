#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace hw {

struct AuditReport {
  std::string name;
  std::uint64_t trials = 0;
  std::uint64_t failures = 0;
  std::map<std::string, double> extremes;
  std::map<std::string, std::uint64_t> counters;
  std::string notes;
  bool pass = false;

  void note_min(const std::string& key, double v);
  void note_max(const std::string& key, double v);
  double get(const std::string& key, double fallback = 0.0) const;
  std::uint64_t count(const std::string& key) const;
};

nlohmann::json to_json(const AuditReport& r);

// splitmix64 finalizer; seeds per-sample generators so results do not depend on thread count
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

using Rng = std::mt19937_64;
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream) { return Rng(mix_seed(seed, stream)); }

// uniform in [0,1)
double uniform01(Rng& g);
std::int64_t uniform_int(Rng& g, std::int64_t lo, std::int64_t hi);  // inclusive

double median(std::vector<double> v);

// exact power of two test
bool is_dyadic(double v);

void set_threads(int n);
bool serial_mode();
void set_serial_mode(bool on);

}  // namespace hw

namespace hw {

struct PowerLawFit {
  double exponent = 0.0;
  double log_constant = 0.0;
  double r_squared = 0.0;
  std::vector<double> residuals;
};

struct FitError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// OLS of log y on log x
PowerLawFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y);
nlohmann::json to_json(const PowerLawFit& f);

}  // namespace hw
