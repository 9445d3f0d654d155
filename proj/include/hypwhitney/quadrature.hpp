#pragma once

#include <cstddef>
#include <vector>

namespace hw {

struct GaussRule {
  std::vector<double> nodes;    // on [-1,1], ascending
  std::vector<double> weights;
};

// n in {4, 8, 12, 16, 20}
const GaussRule& gauss_legendre(int n);

// panels x rule mapped onto [a,b)
void tensor_axis(double a, double b, int panels, const GaussRule& r, std::vector<double>& x, std::vector<double>& w);

// deterministic pairwise summation
double pairwise_sum(const double* v, std::size_t n);
inline double pairwise_sum(const std::vector<double>& v) { return pairwise_sum(v.data(), v.size()); }

}  // namespace hw
