#include "hypwhitney/extension.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>

#define EIGEN_DONT_PARALLELIZE
#include <Eigen/Dense>

#include "hypwhitney/quadrature.hpp"
#include "parallel.hpp"

namespace hw {

bool Carrier::contains(Point2 z) const {
  if (!(z.y >= y0 && z.y < y1)) return false;
  const double u = z.x - alpha - beta * z.y - gamma * z.y * z.y;
  return u >= u0 && u < u1;
}

Carrier Carrier::scaled_x(double k) const {
  Carrier c = *this;
  c.alpha /= k;
  c.beta /= k;
  c.gamma /= k;
  c.u0 /= k;
  c.u1 /= k;
  return c;
}

Carrier rectangle(double x0, double x1, double y0, double y1) { return Carrier{0.0, 0.0, 0.0, x0, x1, y0, y1}; }

namespace {

std::array<double, 4> core_of(const AdmissiblePair& p) {
  if (p.type == 1) return p.params;
  return {p.params[2], p.params[3], p.params[0], p.params[1]};
}

Carrier small_box(const AdmissiblePair& p) {
  const auto c = core_of(p);
  const double y1 = c[1];
  return Carrier{c[0] + y1 * y1, -y1, 0.0, 0.0, p.x_step(), y1, y1 + p.y_step()};
}

Carrier curved_box(const AdmissiblePair& p) {
  const auto c = core_of(p);
  return Carrier{c[2], c[1], -1.0, 0.0, p.x_step(), c[3], c[3] + p.rho};
}

}  // namespace

Carrier first_carrier(const AdmissiblePair& p) { return p.type == 1 ? small_box(p) : curved_box(p); }
Carrier second_carrier(const AdmissiblePair& p) { return p.type == 1 ? curved_box(p) : small_box(p); }

Carrier prototype_first(const PrototypeScene& s, bool scaled) {
  Carrier c = rectangle(0.0, s.c0 * s.c0 * s.delta, 0.0, s.c0 * s.delta);
  return scaled ? c.scaled_x(s.delta) : c;
}

Carrier prototype_second(const PrototypeScene& s, bool scaled) {
  Carrier c{s.a, 0.0, -1.0, 0.0, s.c0 * s.c0 * s.delta, s.b, s.b + s.c0};
  return scaled ? c.scaled_x(s.delta) : c;
}

Carrier TestFunction::domain() const {
  if (kind != TestKind::SubBox) return carrier;
  Carrier c = carrier;
  const double du = carrier.u1 - carrier.u0, dy = carrier.y1 - carrier.y0;
  c.u0 = carrier.u0 + sub[0] * du;
  c.u1 = carrier.u0 + sub[1] * du;
  c.y0 = carrier.y0 + sub[2] * dy;
  c.y1 = carrier.y0 + sub[3] * dy;
  return c;
}

double TestFunction::norm(double q) const { return std::fabs(amplitude) * std::pow(domain().area(), 1.0 / q); }

NodeSet build_nodes(const TestFunction& f, const PhaseFamily& fam, std::array<double, 3> xi_max,
                    const QuadratureSpec& q) {
  const Carrier d = f.domain();
  NodeSet ns;
  if (f.kind == TestKind::Modulated) ns.shift = f.lambda;
  const double c = fam.cubic();
  const double e1 = std::fabs(xi_max[0]) + std::fabs(ns.shift[0]);
  const double e2 = std::fabs(xi_max[1]) + std::fabs(ns.shift[1]);
  const double e3 = std::fabs(xi_max[2]);
  const double Y = std::max(std::fabs(d.y0), std::fabs(d.y1));
  const double B = std::max(std::fabs(d.beta + 2 * d.gamma * d.y0), std::fabs(d.beta + 2 * d.gamma * d.y1));
  const double X = std::fabs(d.alpha) + std::max(std::fabs(d.u0), std::fabs(d.u1)) + std::fabs(d.beta) * Y +
                   std::fabs(d.gamma) * Y * Y;
  // sup of the phase gradient in (u, y)
  const double gu = e1 + e3 * Y;
  const double gy = e1 * B + e2 + e3 * (Y * B + X + 3.0 * std::fabs(c) * Y * Y);
  auto panels = [&](double g, double len) {
    const double n = std::ceil(g * len / q.phase_per_panel);
    return static_cast<int>(std::max(1.0, std::min(n, 1e9))) * std::max(1, q.panel_multiplier);
  };
  ns.panels_u = panels(gu, d.u1 - d.u0);
  ns.panels_y = panels(gy, d.y1 - d.y0);
  const auto np = static_cast<std::uint64_t>(q.nodes_per_panel);
  const std::uint64_t total = static_cast<std::uint64_t>(ns.panels_u) * static_cast<std::uint64_t>(ns.panels_y) * np * np;
  if (total > q.node_budget)
    throw UnresolvedOscillation("extend: " + std::to_string(total) + " nodes needed, budget " +
                                std::to_string(q.node_budget));
  const GaussRule& r = gauss_legendre(q.nodes_per_panel);
  std::vector<double> us, wu, ys, wy;
  tensor_axis(d.u0, d.u1, ns.panels_u, r, us, wu);
  tensor_axis(d.y0, d.y1, ns.panels_y, r, ys, wy);
  ns.x.reserve(total);
  for (std::size_t j = 0; j < ys.size(); ++j)
    for (std::size_t i = 0; i < us.size(); ++i) {
      const double y = ys[j], x = d.x_at(us[i], y);
      ns.x.push_back(x);
      ns.y.push_back(y);
      ns.phi.push_back(x * y + c * y * y * y);
      ns.w.push_back(f.amplitude * wu[i] * wy[j]);
    }
  return ns;
}

cplx extend(const TestFunction& f, const PhaseFamily& fam, std::array<double, 3> xi, const QuadratureSpec& q) {
  const NodeSet ns = build_nodes(f, fam, xi, q);
  const double k1 = xi[0] - ns.shift[0], k2 = xi[1] - ns.shift[1], k3 = xi[2];
  std::vector<double> re(ns.w.size()), im(ns.w.size());
  for (std::size_t n = 0; n < ns.w.size(); ++n) {
    const double t = k1 * ns.x[n] + k2 * ns.y[n] + k3 * ns.phi[n];
    re[n] = ns.w[n] * std::cos(t);
    im[n] = -ns.w[n] * std::sin(t);
  }
  return {pairwise_sum(re), pairwise_sum(im)};
}

std::vector<double> grid_axis(double R, int N) {
  std::vector<double> v(static_cast<std::size_t>(N));
  for (int k = 0; k < N; ++k) v[static_cast<std::size_t>(k)] = -R + (k + 0.5) * 2.0 * R / N;
  return v;
}

std::array<double, 3> Field::xi(int a, int b, int c) const {
  auto ax = [&](int i, int k) { return -truncation[i] + (k + 0.5) * 2.0 * truncation[i] / grid[i]; };
  return {ax(0, a), ax(1, b), ax(2, c)};
}

namespace {

// Nodes are processed in fixed chunks. Within a chunk the field is a sum of
// rank-one terms, so for each a the (b, c) slab is one complex GEMM:
//   E_a += (w * A_a * B)(N2 x K) * C(K x N3).
// Every a owns its slab and the chunk order is fixed, so threads do not
// change the result.
constexpr std::size_t kChunk = 2048;

using CMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic>;
using CRowMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void phase_block(const std::vector<double>& xs, double shift, const double* coord, std::size_t k, CMat& out,
                 bool nodes_in_rows) {
  if (nodes_in_rows)
    out.resize(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(xs.size()));
  else
    out.resize(static_cast<Eigen::Index>(xs.size()), static_cast<Eigen::Index>(k));
  for (std::size_t g = 0; g < xs.size(); ++g)
    for (std::size_t m = 0; m < k; ++m) {
      const double t = (xs[g] - shift) * coord[m];
      const cplx e{std::cos(t), -std::sin(t)};
      if (nodes_in_rows)
        out(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(g)) = e;
      else
        out(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(m)) = e;
    }
}

Field tabulated(const TestFunction& f, const PhaseFamily& fam, const QuadratureSpec& q, bool parallel) {
  Field fld;
  fld.truncation = q.truncation;
  fld.grid = q.grid;
  const NodeSet ns = build_nodes(f, fam, q.truncation, q);
  const int N1 = q.grid[0], N2 = q.grid[1], N3 = q.grid[2];
  fld.values.assign(static_cast<std::size_t>(N1) * N2 * N3, cplx{});
  const auto x1 = grid_axis(q.truncation[0], N1), x2 = grid_axis(q.truncation[1], N2),
             x3 = grid_axis(q.truncation[2], N3);
  const bool par = parallel && !serial_mode();
  CMat A, B, C;
  for (std::size_t m0 = 0; m0 < ns.w.size(); m0 += kChunk) {
    const std::size_t k = std::min(kChunk, ns.w.size() - m0);
    phase_block(x1, ns.shift[0], &ns.x[m0], k, A, false);
    phase_block(x2, ns.shift[1], &ns.y[m0], k, B, false);
    phase_block(x3, 0.0, &ns.phi[m0], k, C, true);
    for (std::size_t m = 0; m < k; ++m) A.col(static_cast<Eigen::Index>(m)) *= ns.w[m0 + m];
    auto slab = [&](int a, CMat& P) {
      P.noalias() = B * A.row(a).transpose().asDiagonal();
      Eigen::Map<CRowMat> E(&fld.values[static_cast<std::size_t>(a) * N2 * N3], N2, N3);
      E.noalias() += P * C;
    };
    if (par) {
#pragma omp parallel
      {
        CMat P;
#pragma omp for schedule(static)
        for (int a = 0; a < N1; ++a) slab(a, P);
      }
    } else {
      CMat P;
      for (int a = 0; a < N1; ++a) slab(a, P);
    }
  }
  return fld;
}

}  // namespace

Field field_serial(const TestFunction& f, const PhaseFamily& fam, const QuadratureSpec& q) {
  return tabulated(f, fam, q, false);
}

Field field_parallel(const TestFunction& f, const PhaseFamily& fam, const QuadratureSpec& q) {
  return tabulated(f, fam, q, true);
}

Field field_reference(const TestFunction& f, const PhaseFamily& fam, const QuadratureSpec& q) {
  Field fld;
  fld.truncation = q.truncation;
  fld.grid = q.grid;
  fld.values.resize(static_cast<std::size_t>(q.grid[0]) * q.grid[1] * q.grid[2]);
  for (int a = 0; a < q.grid[0]; ++a)
    for (int b = 0; b < q.grid[1]; ++b)
      for (int c = 0; c < q.grid[2]; ++c)
        fld.values[(static_cast<std::size_t>(a) * q.grid[1] + b) * q.grid[2] + c] = extend(f, fam, fld.xi(a, b, c), q);
  return fld;
}

Field bilinear_field(const TestFunction& f, const TestFunction& g, const PhaseFamily& fam, const QuadratureSpec& q) {
  Field F = field_parallel(f, fam, q);
  const Field G = field_parallel(g, fam, q);
  for (std::size_t i = 0; i < F.values.size(); ++i) F.values[i] *= G.values[i];
  return F;
}

Field bilinear_field(const AdmissiblePair& pair, const TestFunction& f, const TestFunction& g, const PhaseFamily& fam,
                     const QuadratureSpec& q) {
  auto inside = [](const Carrier& d, const std::function<bool(Point2)>& in) {
    for (double fu : {0.25, 0.75})
      for (double fy : {0.25, 0.75}) {
        const double u = d.u0 + fu * (d.u1 - d.u0), y = d.y0 + fy * (d.y1 - d.y0);
        if (!in({d.x_at(u, y), y})) return false;
      }
    return true;
  };
  if (!inside(f.domain(), [&](Point2 z) { return contains_first(pair, z); }) ||
      !inside(g.domain(), [&](Point2 z) { return contains_second(pair, z); }))
    throw std::invalid_argument("bilinear_field: test functions are not carried by the pair");
  return bilinear_field(f, g, fam, q);
}

NormEstimate lp_norm(const Field& field, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: p must be at least 1");
  NormEstimate e;
  e.p = p;
  e.truncation = field.truncation;
  e.grid = field.grid;
  double cell = 1.0;
  for (int i = 0; i < 3; ++i) cell *= 2.0 * field.truncation[static_cast<std::size_t>(i)] / field.grid[static_cast<std::size_t>(i)];
  std::vector<double> all, even;
  all.reserve(field.values.size());
  for (int a = 0; a < field.grid[0]; ++a)
    for (int b = 0; b < field.grid[1]; ++b)
      for (int c = 0; c < field.grid[2]; ++c) {
        const double v = std::pow(std::abs(field.at(a, b, c)), p);
        all.push_back(v);
        if (a % 2 == 0 && b % 2 == 0 && c % 2 == 0) even.push_back(v);
      }
  e.value = std::pow(pairwise_sum(all) * cell, 1.0 / p);
  const double coarse = std::pow(pairwise_sum(even) * cell * 8.0, 1.0 / p);
  e.refinement_delta = e.value > 0.0 ? std::fabs(e.value - coarse) / e.value : 0.0;
  return e;
}

RatioResult bilinear_ratio(const TestFunction& f, const TestFunction& g, double p, double q,
                           const PhaseFamily& fam, const QuadratureSpec& quad) {
  RatioResult r;
  r.norm = lp_norm(bilinear_field(f, g, fam, quad), p);
  r.f_norm = f.norm(q);
  r.g_norm = g.norm(q);
  r.ratio = r.norm.value / (r.f_norm * r.g_norm);
  return r;
}

void write_field_csv(const Field& field, std::ostream& os) {
  os << "xi1,xi2,xi3,re,im\n";
  os.precision(17);
  for (int a = 0; a < field.grid[0]; ++a)
    for (int b = 0; b < field.grid[1]; ++b)
      for (int c = 0; c < field.grid[2]; ++c) {
        const auto x = field.xi(a, b, c);
        const cplx v = field.at(a, b, c);
        os << x[0] << ',' << x[1] << ',' << x[2] << ',' << v.real() << ',' << v.imag() << '\n';
      }
}

nlohmann::json to_json(const NormEstimate& n) {
  return {{"p", n.p},
          {"value", n.value},
          {"truncation", n.truncation},
          {"grid", n.grid},
          {"refinement_delta", n.refinement_delta}};
}

nlohmann::json to_json(const QuadratureSpec& q) {
  return {{"nodes_per_panel", q.nodes_per_panel}, {"phase_per_panel", q.phase_per_panel},
          {"panel_multiplier", q.panel_multiplier}, {"node_budget", q.node_budget},
          {"truncation", q.truncation},           {"grid", q.grid}};
}

}  // namespace hw
