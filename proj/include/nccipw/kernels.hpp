#pragma once

#include <span>
#include <string_view>

namespace ncc::kernels {

enum class Isa { Scalar, Avx2, Neon };

std::string_view to_string(Isa isa);
bool isa_available(Isa isa);

/// Best available variant, unless NCC_SIMD=scalar is set in the environment
/// or an override is installed with set_isa.
Isa active_isa();
void set_isa(Isa isa);
void reset_isa();

/// Σ_i a_i Σ_j b_j 1(s_i > t_j).
double pair_greater_sum(std::span<const double> s, std::span<const double> a, std::span<const double> t,
                        std::span<const double> b);
double pair_greater_sum(Isa isa, std::span<const double> s, std::span<const double> a, std::span<const double> t,
                        std::span<const double> b);

/// Σ_i m_i 1(s_i > c).
double mass_above(std::span<const double> s, std::span<const double> m, double c);
double mass_above(Isa isa, std::span<const double> s, std::span<const double> m, double c);

}  // namespace ncc::kernels
