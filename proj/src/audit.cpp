#include "hypwhitney/audit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <omp.h>

namespace hw {

namespace {
bool g_serial = false;
}

void AuditReport::note_min(const std::string& key, double v) {
  auto it = extremes.find(key);
  if (it == extremes.end() || v < it->second) extremes[key] = v;
}

void AuditReport::note_max(const std::string& key, double v) {
  auto it = extremes.find(key);
  if (it == extremes.end() || v > it->second) extremes[key] = v;
}

double AuditReport::get(const std::string& key, double fallback) const {
  auto it = extremes.find(key);
  return it == extremes.end() ? fallback : it->second;
}

std::uint64_t AuditReport::count(const std::string& key) const {
  auto it = counters.find(key);
  return it == counters.end() ? 0 : it->second;
}

nlohmann::json to_json(const AuditReport& r) {
  nlohmann::json j;
  j["name"] = r.name;
  j["trials"] = r.trials;
  j["failures"] = r.failures;
  j["extremes"] = nlohmann::json::object();
  for (auto& [k, v] : r.extremes) j["extremes"][k] = std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
  j["counters"] = r.counters;
  j["notes"] = r.notes;
  j["pass"] = r.pass;
  return j;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double uniform01(Rng& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

std::int64_t uniform_int(Rng& g, std::int64_t lo, std::int64_t hi) {
  if (hi <= lo) return lo;
  std::uniform_int_distribution<std::int64_t> d(lo, hi);
  return d(g);
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t m = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + m, v.end());
  double hi = v[m];
  if (v.size() % 2) return hi;
  double lo = *std::max_element(v.begin(), v.begin() + m);
  return 0.5 * (lo + hi);
}

bool is_dyadic(double v) {
  if (!(v > 0.0) || !std::isfinite(v)) return false;
  int e = 0;
  return std::frexp(v, &e) == 0.5;
}

void set_threads(int n) {
  if (n > 0) omp_set_num_threads(n);
}

bool serial_mode() { return g_serial; }
void set_serial_mode(bool on) { g_serial = on; }

}  // namespace hw

namespace hw {

PowerLawFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw FitError("fit_power_law: size mismatch");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw FitError("fit_power_law: values must be positive");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  const double n = static_cast<double>(lx.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) mx += lx[i], my += ly[i];
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (lx.size() < 2 || sxx <= 1e-300) throw FitError("fit_power_law: need at least two distinct x");
  PowerLawFit f;
  f.exponent = sxy / sxx;
  f.log_constant = my - f.exponent * mx;
  double ssr = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - (f.log_constant + f.exponent * lx[i]);
    f.residuals.push_back(r);
    ssr += r * r;
  }
  f.r_squared = syy > 0 ? std::clamp(1.0 - ssr / syy, 0.0, 1.0) : 1.0;
  return f;
}

nlohmann::json to_json(const PowerLawFit& f) {
  return {{"exponent", f.exponent}, {"log_constant", f.log_constant}, {"r_squared", f.r_squared},
          {"residuals", f.residuals}};
}

}  // namespace hw
