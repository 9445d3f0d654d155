#include "hypwhitney/quadrature.hpp"

#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>

namespace hw {

namespace {

template <int N>
GaussRule build() {
  using G = boost::math::quadrature::gauss<double, N>;
  const auto& a = G::abscissa();
  const auto& w = G::weights();
  GaussRule r;
  // boost stores the nonnegative half
  for (std::size_t i = a.size(); i-- > 0;) {
    if (a[i] == 0.0) continue;
    r.nodes.push_back(-a[i]);
    r.weights.push_back(w[i]);
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    r.nodes.push_back(a[i]);
    r.weights.push_back(w[i]);
  }
  return r;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
  static const GaussRule r4 = build<4>(), r8 = build<8>(), r12 = build<12>(), r16 = build<16>(), r20 = build<20>();
  switch (n) {
    case 4: return r4;
    case 8: return r8;
    case 12: return r12;
    case 16: return r16;
    case 20: return r20;
    default: throw std::invalid_argument("gauss_legendre: unsupported node count");
  }
}

void tensor_axis(double a, double b, int panels, const GaussRule& r, std::vector<double>& x, std::vector<double>& w) {
  x.clear();
  w.clear();
  const double len = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * len;
    for (std::size_t k = 0; k < r.nodes.size(); ++k) {
      x.push_back(lo + 0.5 * len * (r.nodes[k] + 1.0));
      w.push_back(0.5 * len * r.weights[k]);
    }
  }
}

double pairwise_sum(const double* v, std::size_t n) {
  if (n <= 16) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

}  // namespace hw
