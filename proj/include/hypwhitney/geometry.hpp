#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "hypwhitney/audit.hpp"
#include "hypwhitney/surface.hpp"

namespace hw {

struct GeometryError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Parameter grids for x1_0, t2_0 (and their type-2 mirrors) live in [-kXExtent, kXExtent).
inline constexpr double kXExtent = 4.0;
// sampled offsets stay this far (relative) from every face of a box
inline constexpr double kEdgeGuard = 0x1.0p-30;

struct DyadicInterval {
  std::int64_t j = 0;
  double rho = 1.0;
  double lo() const { return static_cast<double>(j) * rho; }
  double hi() const { return static_cast<double>(j) * rho + rho; }
  bool contains(double y) const { return y >= lo() && y < hi(); }
};

struct Strip {
  DyadicInterval interval;
  bool contains(Point2 z) const { return z.x >= -1.0 && z.x <= 1.0 && interval.contains(z.y); }
};

inline Strip make_strip(std::int64_t j, double rho) { return Strip{DyadicInterval{j, rho}}; }

struct AdmissiblePair {
  int type = 1;
  double rho = 0.0;
  double delta = 0.0;
  double C0 = 0.0;
  // type 1: {x1_0, y1_0, t2_0, y2_0}; type 2: {t1_0, y1_0, x2_0, y2_0}
  std::array<double, 4> params{};
  Point2 base1, base2;

  double y_step() const;  // rho (1 ^ delta)
  double x_step() const;  // rho^2 delta
};

struct Rejected {
  std::string which;  // "y_separation" | "admissible1" | "admissible2"
};

using PairResult = std::variant<AdmissiblePair, Rejected>;

inline bool accepted(const PairResult& r) { return std::holds_alternative<AdmissiblePair>(r); }

bool related_intervals(const DyadicInterval& J, const DyadicInterval& Jp);
std::vector<std::pair<Strip, Strip>> admissible_strip_pairs(double rho, double C0);

// Strips whose members satisfy C0 rho/2 <= |y2 - y1| <= C0 rho.
bool separated_strips(const Strip& V1, const Strip& V2, double C0);

PairResult make_type1_pair(double x1_0, double y1_0, double t2_0, double y2_0, double rho, double delta,
                           double C0);
PairResult make_type2_pair(double t1_0, double y1_0, double x2_0, double y2_0, double rho, double delta,
                           double C0);

// type-2 pair in V1xV2 <-> type-1 pair in V2xV1
AdmissiblePair swap_roles(const AdmissiblePair& p);

bool contains(const AdmissiblePair& p, Point2 z1, Point2 z2);
bool contains_first(const AdmissiblePair& p, Point2 z1);
bool contains_second(const AdmissiblePair& p, Point2 z2);

// offsets given as fractions of the four defining ranges, each in [0,1)
std::pair<Point2, Point2> member_at(const AdmissiblePair& p, const std::array<double, 4>& frac);
std::vector<std::pair<Point2, Point2>> sample_members(const AdmissiblePair& p, std::size_t n, std::uint64_t seed);
std::pair<Point2, Point2> sample_member(const AdmissiblePair& p, Rng& g);

AuditReport audit_tau_bounds(const AdmissiblePair& p, std::size_t n, std::uint64_t seed);

void enumerate_pairs(const Strip& V1, const Strip& V2, double delta, double C0, int type,
                     const std::function<bool(const AdmissiblePair&)>& visit);
std::uint64_t count_pairs(const Strip& V1, const Strip& V2, double delta, double C0, int type);

// uniform over admissible pairs whose first x-parameter lies in [-1,1)
std::optional<AdmissiblePair> sample_pair(const Strip& V1, const Strip& V2, double delta, double C0, int type,
                                          Rng& g);

nlohmann::json to_json(const AdmissiblePair& p);
AdmissiblePair pair_from_json(const nlohmann::json& j);

}  // namespace hw
