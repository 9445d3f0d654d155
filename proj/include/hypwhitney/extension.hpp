#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include <json.hpp>

#include "hypwhitney/geometry.hpp"
#include "hypwhitney/scaling.hpp"
#include "hypwhitney/surface.hpp"

namespace hw {

using cplx = std::complex<double>;

struct UnresolvedOscillation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// {x = alpha + u + beta y + gamma y^2 : u in [u0,u1), y in [y0,y1)}; the map (u,y) -> (x,y) has unit Jacobian
struct Carrier {
  double alpha = 0.0, beta = 0.0, gamma = 0.0;
  double u0 = 0.0, u1 = 1.0, y0 = 0.0, y1 = 1.0;

  double x_at(double u, double y) const { return alpha + u + beta * y + gamma * y * y; }
  double area() const { return (u1 - u0) * (y1 - y0); }
  bool contains(Point2 z) const;
  // (x,y) -> (x/k, y)
  Carrier scaled_x(double k) const;
};

Carrier rectangle(double x0, double x1, double y0, double y1);
Carrier first_carrier(const AdmissiblePair& p);   // the set holding z1
Carrier second_carrier(const AdmissiblePair& p);  // the set holding z2
Carrier prototype_first(const PrototypeScene& s, bool scaled);
Carrier prototype_second(const PrototypeScene& s, bool scaled);

enum class TestKind { Indicator, Modulated, SubBox };

struct TestFunction {
  TestKind kind = TestKind::Indicator;
  Carrier carrier;
  std::array<double, 2> lambda{};         // Modulated: f = e^{i lambda.z} on the carrier
  std::array<double, 4> sub{0, 1, 0, 1};  // SubBox: fractions [u-lo,u-hi) x [y-lo,y-hi) of the carrier
  double amplitude = 1.0;

  static TestFunction indicator(const Carrier& c) { return {TestKind::Indicator, c}; }
  static TestFunction modulated(const Carrier& c, std::array<double, 2> lam) {
    TestFunction f{TestKind::Modulated, c};
    f.lambda = lam;
    return f;
  }
  static TestFunction sub_box(const Carrier& c, std::array<double, 4> frac) {
    TestFunction f{TestKind::SubBox, c};
    f.sub = frac;
    return f;
  }

  Carrier domain() const;  // where f is nonzero
  double norm(double q) const;
};

struct QuadratureSpec {
  int nodes_per_panel = 8;
  double phase_per_panel = 1.5707963267948966;  // pi/2
  int panel_multiplier = 1;                     // refinement knob
  std::uint64_t node_budget = 1u << 20;
  std::array<double, 3> truncation{1024.0, 1024.0, 1024.0};
  std::array<int, 3> grid{64, 64, 64};
};

// tensor Gauss-Legendre nodes on the domain of f, sized for frequencies up to |xi_i| <= xi_max_i
struct NodeSet {
  std::vector<double> x, y, phi, w;
  std::array<double, 2> shift{};  // modulation, subtracted from (xi1, xi2)
  int panels_u = 0, panels_y = 0;
};

NodeSet build_nodes(const TestFunction& f, const PhaseFamily& fam, std::array<double, 3> xi_max,
                    const QuadratureSpec& q);

cplx extend(const TestFunction& f, const PhaseFamily& fam, std::array<double, 3> xi, const QuadratureSpec& q);

// midpoint grid -R + (k + 1/2) 2R/N on each axis
std::vector<double> grid_axis(double R, int N);

struct Field {
  std::array<double, 3> truncation{};
  std::array<int, 3> grid{};
  std::vector<cplx> values;  // index (a*N2 + b)*N3 + c
  cplx at(int a, int b, int c) const { return values[(static_cast<std::size_t>(a) * grid[1] + b) * grid[2] + c]; }
  std::array<double, 3> xi(int a, int b, int c) const;
};

Field field_serial(const TestFunction& f, const PhaseFamily& fam, const QuadratureSpec& q);
Field field_parallel(const TestFunction& f, const PhaseFamily& fam, const QuadratureSpec& q);
// per-point extend, no shared tables; slow, for cross-checks
Field field_reference(const TestFunction& f, const PhaseFamily& fam, const QuadratureSpec& q);

Field bilinear_field(const TestFunction& f, const TestFunction& g, const PhaseFamily& fam, const QuadratureSpec& q);
Field bilinear_field(const AdmissiblePair& pair, const TestFunction& f, const TestFunction& g, const PhaseFamily& fam,
                     const QuadratureSpec& q);

struct NormEstimate {
  double p = 2.0;
  double value = 0.0;
  std::array<double, 3> truncation{};
  std::array<int, 3> grid{};
  double refinement_delta = 0.0;  // relative change vs the even-index subgrid (8x cell volume)
};

NormEstimate lp_norm(const Field& field, double p);

struct RatioResult {
  double ratio = 0.0;
  NormEstimate norm;
  double f_norm = 0.0, g_norm = 0.0;
};

RatioResult bilinear_ratio(const TestFunction& f, const TestFunction& g, double p, double q,
                           const PhaseFamily& fam, const QuadratureSpec& quad);

void write_field_csv(const Field& field, std::ostream& os);
nlohmann::json to_json(const NormEstimate& n);
nlohmann::json to_json(const QuadratureSpec& q);

}  // namespace hw
