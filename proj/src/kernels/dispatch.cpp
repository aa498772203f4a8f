#include <atomic>
#include <cstdlib>
#include <string>
#include <string_view>

#include "kernels/kernel_abi.hpp"
#include "nccipw/error.hpp"
#include "nccipw/kernels.hpp"

namespace ncc::kernels {
namespace {

Isa detect() {
  if (const char* env = std::getenv("NCC_SIMD"); env && std::string_view(env) == "scalar") return Isa::Scalar;
#if defined(NCCIPW_HAVE_AVX2)
  if (__builtin_cpu_supports("avx2")) return Isa::Avx2;
#endif
#if defined(NCCIPW_HAVE_NEON)
  return Isa::Neon;
#endif
  return Isa::Scalar;
}

std::atomic<int> override_isa{-1};

Isa current() {
  const int o = override_isa.load(std::memory_order_relaxed);
  if (o >= 0) return static_cast<Isa>(o);
  static const Isa detected = detect();
  return detected;
}

void check_lengths(std::size_t a, std::size_t b) {
  if (a != b) throw InputError("kernel inputs have mismatched lengths");
}

}  // namespace

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "?";
}

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2:
#if defined(NCCIPW_HAVE_AVX2)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Isa::Neon:
#if defined(NCCIPW_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Isa active_isa() { return current(); }

void set_isa(Isa isa) {
  if (!isa_available(isa)) throw InputError("SIMD variant " + std::string(to_string(isa)) + " is not available");
  override_isa.store(static_cast<int>(isa));
}

void reset_isa() { override_isa.store(-1); }

double pair_greater_sum(Isa isa, std::span<const double> s, std::span<const double> a, std::span<const double> t,
                        std::span<const double> b) {
  check_lengths(s.size(), a.size());
  check_lengths(t.size(), b.size());
  switch (isa) {
#if defined(NCCIPW_HAVE_AVX2)
    case Isa::Avx2: return avx2::pair_greater_sum(s.data(), a.data(), s.size(), t.data(), b.data(), t.size());
#endif
#if defined(NCCIPW_HAVE_NEON)
    case Isa::Neon: return neon::pair_greater_sum(s.data(), a.data(), s.size(), t.data(), b.data(), t.size());
#endif
    default: return scalar::pair_greater_sum(s.data(), a.data(), s.size(), t.data(), b.data(), t.size());
  }
}

double mass_above(Isa isa, std::span<const double> s, std::span<const double> m, double c) {
  check_lengths(s.size(), m.size());
  switch (isa) {
#if defined(NCCIPW_HAVE_AVX2)
    case Isa::Avx2: return avx2::mass_above(s.data(), m.data(), s.size(), c);
#endif
#if defined(NCCIPW_HAVE_NEON)
    case Isa::Neon: return neon::mass_above(s.data(), m.data(), s.size(), c);
#endif
    default: return scalar::mass_above(s.data(), m.data(), s.size(), c);
  }
}

double pair_greater_sum(std::span<const double> s, std::span<const double> a, std::span<const double> t,
                        std::span<const double> b) {
  return pair_greater_sum(current(), s, a, t, b);
}

double mass_above(std::span<const double> s, std::span<const double> m, double c) {
  return mass_above(current(), s, m, c);
}

}  // namespace ncc::kernels
