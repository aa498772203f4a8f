#pragma once

// Raw-pointer entry points shared by every kernel variant. Kept free of
// standard-library headers so the NEON unit can be checked freestanding.
#include <stddef.h>

namespace ncc::kernels {

namespace scalar {
double pair_greater_sum(const double* s, const double* a, size_t n, const double* t, const double* b, size_t k);
double mass_above(const double* s, const double* m, size_t n, double c);
}  // namespace scalar

namespace avx2 {
double pair_greater_sum(const double* s, const double* a, size_t n, const double* t, const double* b, size_t k);
double mass_above(const double* s, const double* m, size_t n, double c);
}  // namespace avx2

namespace neon {
double pair_greater_sum(const double* s, const double* a, size_t n, const double* t, const double* b, size_t k);
double mass_above(const double* s, const double* m, size_t n, double c);
}  // namespace neon

}  // namespace ncc::kernels
