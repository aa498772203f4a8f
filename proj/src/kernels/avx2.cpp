#include <immintrin.h>

#include "kernels/kernel_abi.hpp"

namespace ncc::kernels::avx2 {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline double masked_sum(const double* t, const double* b, size_t k, double si) {
  const __m256d vs = _mm256_set1_pd(si);
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  size_t j = 0;
  for (; j + 8 <= k; j += 8) {
    const __m256d m0 = _mm256_cmp_pd(vs, _mm256_loadu_pd(t + j), _CMP_GT_OQ);
    const __m256d m1 = _mm256_cmp_pd(vs, _mm256_loadu_pd(t + j + 4), _CMP_GT_OQ);
    acc0 = _mm256_add_pd(acc0, _mm256_and_pd(m0, _mm256_loadu_pd(b + j)));
    acc1 = _mm256_add_pd(acc1, _mm256_and_pd(m1, _mm256_loadu_pd(b + j + 4)));
  }
  for (; j + 4 <= k; j += 4) {
    const __m256d m0 = _mm256_cmp_pd(vs, _mm256_loadu_pd(t + j), _CMP_GT_OQ);
    acc0 = _mm256_add_pd(acc0, _mm256_and_pd(m0, _mm256_loadu_pd(b + j)));
  }
  double inner = hsum(_mm256_add_pd(acc0, acc1));
  for (; j < k; ++j)
    if (si > t[j]) inner += b[j];
  return inner;
}

}  // namespace

double pair_greater_sum(const double* s, const double* a, size_t n, const double* t, const double* b,
                        size_t k) {
  double total = 0.0;
  for (size_t i = 0; i < n; ++i) total += a[i] * masked_sum(t, b, k, s[i]);
  return total;
}

double mass_above(const double* s, const double* m, size_t n, double c) {
  const __m256d vc = _mm256_set1_pd(c);
  __m256d acc = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(s + i), vc, _CMP_GT_OQ);
    acc = _mm256_add_pd(acc, _mm256_and_pd(mask, _mm256_loadu_pd(m + i)));
  }
  double total = hsum(acc);
  for (; i < n; ++i)
    if (s[i] > c) total += m[i];
  return total;
}

}  // namespace ncc::kernels::avx2
