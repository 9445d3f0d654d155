#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "hypwhitney/audit.hpp"
#include "hypwhitney/geometry.hpp"

namespace hw {

struct DegenerateTau : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ResourceLimit : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LocateFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DecomposeOptions {
  bool materialize = false;         // otherwise pairs are reconstructed on demand from the grids
  std::uint64_t cap = 4'000'000;    // materialization guard
};

// (type, log2 delta, ky, kx, kt) of the type-1 core
struct PairKey {
  int type = 1;
  int e = 0;
  std::int64_t ky = 0, kx = 0, kt = 0;
  bool operator==(const PairKey&) const = default;
};

struct PairKeyHash {
  std::size_t operator()(const PairKey& k) const;
};

struct WhitneyDecomposition {
  Strip V1, V2;
  double C0 = 32.0;
  std::vector<int> exponents;  // dyadic scales 2^e, ascending
  bool materialized = false;
  std::unordered_map<PairKey, AdmissiblePair, PairKeyHash> store;
  // injected pairs that bypass validation; only used by negative controls
  std::vector<AdmissiblePair> extra;

  bool empty() const { return exponents.empty(); }
  std::uint64_t pair_count(int e, int type) const;  // closed form
};

// classes r = e mod 10 (nonnegative); P_r collects the scales 2^{10j+r}
inline int scale_class(int e) { return ((e % 10) + 10) % 10; }

WhitneyDecomposition decompose(const Strip& V1, const Strip& V2, double C0, double delta_min, double delta_max,
                               const DecomposeOptions& opt = {});

// every pair of the decomposition (and extras) whose product holds (z1,z2)
std::vector<AdmissiblePair> containing_pairs(const WhitneyDecomposition& d, Point2 z1, Point2 z2);

AdmissiblePair locate_pair(Point2 z1, Point2 z2, const Strip& V1, const Strip& V2, double C0);

// the grid cell of a given scale and type that holds (z1,z2), without any admissibility check
AdmissiblePair grid_cell(Point2 z1, Point2 z2, const Strip& V1, const Strip& V2, double delta, double C0, int type);

// uniform on V1 x V2
std::pair<Point2, Point2> sample_strips(const Strip& V1, const Strip& V2, Rng& g);

AuditReport audit_disjoint(const WhitneyDecomposition& d, std::size_t n, std::uint64_t seed);
AuditReport audit_overlap(const WhitneyDecomposition& d, std::size_t n, std::uint64_t seed, double kappa = 8.0);
AuditReport audit_locate(const Strip& V1, const Strip& V2, double C0, std::size_t n, std::uint64_t seed);

// sum over J, J' subsets of {0..9}, not both empty, of (-1)^{#J+#J'+1} chi of the intersection
int classes_and_chi(const WhitneyDecomposition& d, Point2 z1, Point2 z2);
// the same sum restricted to J and J' both nonempty
int classes_and_chi_both_nonempty(const WhitneyDecomposition& d, Point2 z1, Point2 z2);
// class membership bitmasks (bit r set if the point lies in A_r, resp. the type-2 class)
std::pair<unsigned, unsigned> class_masks(const WhitneyDecomposition& d, Point2 z1, Point2 z2);
AuditReport audit_chi(const WhitneyDecomposition& d, std::size_t n, std::uint64_t seed);

nlohmann::json summary_json(const WhitneyDecomposition& d);
void write_pairs_jsonl(const WhitneyDecomposition& d, std::ostream& os);

}  // namespace hw
