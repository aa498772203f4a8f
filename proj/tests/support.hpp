#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include "nccipw/cohort.hpp"
#include "nccipw/sampling.hpp"

namespace ncc::test {

/// Cohort with one marker per subject and optional matching variables.
inline Cohort make_cohort(const std::vector<double>& t, const std::vector<int>& d, const std::vector<double>& z = {},
                          const std::vector<std::vector<double>>& match = {}) {
  const auto n = static_cast<Eigen::Index>(t.size());
  RowMatrix zm(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) zm(i, 0) = z.empty() ? 0.0 : z[static_cast<std::size_t>(i)];
  RowMatrix mm(n, match.empty() ? 0 : static_cast<Eigen::Index>(match[0].size()));
  for (Eigen::Index i = 0; i < mm.rows(); ++i)
    for (Eigen::Index k = 0; k < mm.cols(); ++k) mm(i, k) = match[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
  std::vector<std::uint8_t> dd(d.begin(), d.end());
  return Cohort(t, dd, zm, mm);
}

}  // namespace ncc::test

namespace ncc::test {

/// Exhaustive count over every joint outcome of the control sampler given the
/// cases: each case picks one of its equally likely control subsets, and the
/// outcomes are aggregated by the resulting control mask (N <= 16).
struct ControlEnumeration {
  std::vector<std::uint64_t> selected;  // outcomes with V0_j = 1
  std::uint64_t total = 0;
};

inline std::vector<unsigned> subsets_of_size(const std::vector<std::size_t>& pool, std::size_t k) {
  std::vector<unsigned> out;
  const std::size_t n = pool.size();
  for (unsigned bits = 0; bits < (1u << n); ++bits) {
    if (static_cast<std::size_t>(__builtin_popcount(bits)) != k) continue;
    unsigned mask = 0;
    for (std::size_t r = 0; r < n; ++r)
      if (bits & (1u << r)) mask |= 1u << pool[r];
    out.push_back(mask);
  }
  return out;
}

inline ControlEnumeration enumerate_controls(const Cohort& c, const std::vector<std::uint8_t>& v1, std::size_t m,
                                             const std::optional<std::vector<double>>& tol = std::nullopt) {
  const std::size_t n = c.size();
  std::vector<std::uint64_t> ways(std::size_t{1} << n, 0);
  ways[0] = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (!v1[i]) continue;
    std::vector<std::size_t> pool;
    for (std::size_t k : risk_set(c, i, tol))
      if (k != i) pool.push_back(k);
    const auto options = subsets_of_size(pool, std::min(m, pool.size()));
    std::vector<std::uint64_t> next(ways.size(), 0);
    for (std::size_t mask = 0; mask < ways.size(); ++mask) {
      if (!ways[mask]) continue;
      for (unsigned o : options) next[mask | o] += ways[mask];
    }
    ways.swap(next);
  }
  ControlEnumeration out;
  out.selected.assign(n, 0);
  for (std::size_t mask = 0; mask < ways.size(); ++mask) {
    out.total += ways[mask];
    for (std::size_t j = 0; j < n; ++j)
      if (mask & (std::size_t{1} << j)) out.selected[j] += ways[mask];
  }
  return out;
}

}  // namespace ncc::test
