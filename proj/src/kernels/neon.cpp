#include <arm_neon.h>

#include "kernels/kernel_abi.hpp"

namespace ncc::kernels::neon {
namespace {

inline float64x2_t masked(float64x2_t lhs, float64x2_t rhs, float64x2_t val) {
  const uint64x2_t gt = vcgtq_f64(lhs, rhs);
  return vreinterpretq_f64_u64(vandq_u64(gt, vreinterpretq_u64_f64(val)));
}

}  // namespace

double pair_greater_sum(const double* s, const double* a, size_t n, const double* t, const double* b,
                        size_t k) {
  double total = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const float64x2_t vs = vdupq_n_f64(s[i]);
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    size_t j = 0;
    for (; j + 4 <= k; j += 4) {
      acc0 = vaddq_f64(acc0, masked(vs, vld1q_f64(t + j), vld1q_f64(b + j)));
      acc1 = vaddq_f64(acc1, masked(vs, vld1q_f64(t + j + 2), vld1q_f64(b + j + 2)));
    }
    double inner = vaddvq_f64(vaddq_f64(acc0, acc1));
    for (; j < k; ++j)
      if (s[i] > t[j]) inner += b[j];
    total += a[i] * inner;
  }
  return total;
}

double mass_above(const double* s, const double* m, size_t n, double c) {
  const float64x2_t vc = vdupq_n_f64(c);
  float64x2_t acc = vdupq_n_f64(0.0);
  size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, masked(vld1q_f64(s + i), vc, vld1q_f64(m + i)));
  double total = vaddvq_f64(acc);
  for (; i < n; ++i)
    if (s[i] > c) total += m[i];
  return total;
}

}  // namespace ncc::kernels::neon
