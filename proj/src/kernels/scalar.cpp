#include "kernels/kernel_abi.hpp"

namespace ncc::kernels::scalar {

double pair_greater_sum(const double* s, const double* a, size_t n, const double* t, const double* b,
                        size_t k) {
  double total = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double inner = 0.0;
    for (size_t j = 0; j < k; ++j)
      if (s[i] > t[j]) inner += b[j];
    total += a[i] * inner;
  }
  return total;
}

double mass_above(const double* s, const double* m, size_t n, double c) {
  double total = 0.0;
  for (size_t i = 0; i < n; ++i)
    if (s[i] > c) total += m[i];
  return total;
}

}  // namespace ncc::kernels::scalar
