#include "nlci/simd/kernels.hpp"

namespace nlci::simd::scalar {

void apply_sign(std::span<double> v) noexcept {
  for (double& x : v) {
    const double pos = x > 0.0 ? 1.0 : 0.0;
    const double neg = x < 0.0 ? 1.0 : 0.0;
    x = pos - neg;
  }
}

void apply_clip(std::span<double> v, double tau) noexcept {
  const double lo = -tau;
  for (double& x : v) {
    // Same operand order as _mm256_max_pd(lo, x) / _mm256_min_pd(tau, y).
    const double y = lo > x ? lo : x;
    x = tau < y ? tau : y;
  }
}

double reciprocal_sum(std::span<const double> x, double scale, double offset) noexcept {
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  const std::size_t n4 = x.size() & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    for (std::size_t l = 0; l < 4; ++l) {
      const double prod = scale * x[i + l];
      const double den = prod + offset;
      lane[l] += 1.0 / den;
    }
  }
  double total = (lane[0] + lane[1]) + (lane[2] + lane[3]);
  for (std::size_t i = n4; i < x.size(); ++i) {
    const double prod = scale * x[i];
    total += 1.0 / (prod + offset);
  }
  return total;
}

double sum_squares(std::span<const double> x) noexcept {
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  const std::size_t n4 = x.size() & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    for (std::size_t l = 0; l < 4; ++l) {
      const double sq = x[i + l] * x[i + l];
      lane[l] += sq;
    }
  }
  double total = (lane[0] + lane[1]) + (lane[2] + lane[3]);
  for (std::size_t i = n4; i < x.size(); ++i) {
    const double sq = x[i] * x[i];
    total += sq;
  }
  return total;
}

}  // namespace nlci::simd::scalar
