#include "nlci/simd/kernels.hpp"

#include <immintrin.h>

namespace nlci::simd::avx2 {

namespace {

double fold(__m256d acc) noexcept {
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

}  // namespace

void apply_sign(std::span<double> v) noexcept {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  double* p = v.data();
  const std::size_t n4 = v.size() & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    const __m256d x = _mm256_loadu_pd(p + i);
    const __m256d pos = _mm256_and_pd(_mm256_cmp_pd(x, zero, _CMP_GT_OQ), one);
    const __m256d neg = _mm256_and_pd(_mm256_cmp_pd(x, zero, _CMP_LT_OQ), one);
    _mm256_storeu_pd(p + i, _mm256_sub_pd(pos, neg));
  }
  scalar::apply_sign(v.subspan(n4));
}

void apply_clip(std::span<double> v, double tau) noexcept {
  const __m256d hi = _mm256_set1_pd(tau);
  const __m256d lo = _mm256_set1_pd(-tau);
  double* p = v.data();
  const std::size_t n4 = v.size() & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    const __m256d x = _mm256_loadu_pd(p + i);
    // max_pd/min_pd return the second operand when either is NaN.
    const __m256d y = _mm256_max_pd(lo, x);
    _mm256_storeu_pd(p + i, _mm256_min_pd(hi, y));
  }
  scalar::apply_clip(v.subspan(n4), tau);
}

double reciprocal_sum(std::span<const double> x, double scale, double offset) noexcept {
  const __m256d s = _mm256_set1_pd(scale);
  const __m256d o = _mm256_set1_pd(offset);
  const __m256d one = _mm256_set1_pd(1.0);
  __m256d acc = _mm256_setzero_pd();
  const double* p = x.data();
  const std::size_t n4 = x.size() & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    const __m256d den = _mm256_add_pd(_mm256_mul_pd(s, _mm256_loadu_pd(p + i)), o);
    acc = _mm256_add_pd(acc, _mm256_div_pd(one, den));
  }
  double total = fold(acc);
  for (std::size_t i = n4; i < x.size(); ++i) {
    const double prod = scale * x[i];
    total += 1.0 / (prod + offset);
  }
  return total;
}

double sum_squares(std::span<const double> x) noexcept {
  __m256d acc = _mm256_setzero_pd();
  const double* p = x.data();
  const std::size_t n4 = x.size() & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    const __m256d v = _mm256_loadu_pd(p + i);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(v, v));
  }
  double total = fold(acc);
  for (std::size_t i = n4; i < x.size(); ++i) {
    const double sq = x[i] * x[i];
    total += sq;
  }
  return total;
}

}  // namespace nlci::simd::avx2
