#pragma once

// Partial-conjunction p-values for H_{0j}: "fewer than s_bar of the base
// hypotheses in column j are false", with the exclusion-corrected forms
// used by the adaptive Holm procedures.

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "bcp/errors.hpp"
#include "bcp/pvalue_matrix.hpp"

namespace bcp {

enum class Combiner { bonferroni, simes };

inline std::string to_string(Combiner c) { return c == Combiner::bonferroni ? "bonferroni" : "simes"; }

struct PchInput {
  std::vector<double> base;          // m base p-values (column j without the diagonal)
  int s_bar = 1;                     // strict upper bound on |S|
  std::vector<std::size_t> exclude;  // positions in `base` to drop (the set A)
};

namespace detail {

// Sorted base values with the excluded positions removed; validates the
// contract shared by both combiners.
inline std::vector<double> remaining_sorted(std::span<const double> base, int s_bar, std::span<const std::size_t> exclude) {
  const std::size_t m = base.size();
  if (m == 0) throw ContractError("partial conjunction needs at least one base p-value");
  if (s_bar < 1 || static_cast<std::size_t>(s_bar) > m)
    throw ContractError("s_bar must lie in [1, m] (m = " + std::to_string(m) + ")");
  std::vector<bool> drop(m, false);
  std::size_t a = 0;
  for (std::size_t e : exclude) {
    if (e >= m) throw ContractError("excluded position out of range");
    if (!drop[e]) ++a;
    drop[e] = true;
  }
  if (a >= static_cast<std::size_t>(s_bar))
    throw ContractError("|A| must be smaller than s_bar");
  std::vector<double> rest;
  rest.reserve(m - a);
  for (std::size_t k = 0; k < m; ++k)
    if (!drop[k]) rest.push_back(base[k]);
  std::stable_sort(rest.begin(), rest.end());
  return rest;
}

}  // namespace detail

/// min(1, (m + 1 - s_bar) * P_(s_bar - |A|)) over the base values outside A.
inline double bonferroni_pch(std::span<const double> base, int s_bar, std::span<const std::size_t> exclude = {}) {
  const auto rest = detail::remaining_sorted(base, s_bar, exclude);
  const std::size_t m = base.size();
  const std::size_t a = m - rest.size();
  const std::size_t k = static_cast<std::size_t>(s_bar) - a;  // 1-based, <= rest.size() by construction
  return std::min(1.0, static_cast<double>(m + 1 - static_cast<std::size_t>(s_bar)) * rest[k - 1]);
}

/// Simes partial conjunction:
/// min over i in [s_bar - a, m - a] of (m + 1 - s_bar) / (i - s_bar + 1 + a) * P_(i)(A).
inline double simes_pch(std::span<const double> base, int s_bar, std::span<const std::size_t> exclude = {}) {
  const auto rest = detail::remaining_sorted(base, s_bar, exclude);
  const std::size_t m = base.size();
  const auto a = static_cast<long>(m - rest.size());
  const auto sb = static_cast<long>(s_bar);
  const double numer = static_cast<double>(static_cast<long>(m) + 1 - sb);
  double best = 1.0;
  for (long i = sb - a; i <= static_cast<long>(m) - a; ++i) {
    const double v = numer / static_cast<double>(i - sb + 1 + a) * rest[static_cast<std::size_t>(i - 1)];
    best = std::min(best, v);
  }
  return std::min(1.0, best);
}

inline double bonferroni_pch(const PchInput& in) { return bonferroni_pch(in.base, in.s_bar, in.exclude); }
inline double simes_pch(const PchInput& in) { return simes_pch(in.base, in.s_bar, in.exclude); }

inline double combine(Combiner c, std::span<const double> base, int s_bar, std::span<const std::size_t> exclude = {}) {
  return c == Combiner::bonferroni ? bonferroni_pch(base, s_bar, exclude) : simes_pch(base, s_bar, exclude);
}

/// PCH p-value for H_{0j} from column j of the matrix (A empty).
inline double single_test(const PValueMatrix& matrix, int j, int s_bar, Combiner combiner) {
  if (j < 0 || j >= matrix.size()) throw ParameterError("column index out of range");
  if (s_bar < 1 || s_bar > matrix.size() - 1) throw ParameterError("s_bar must lie in [1, p - 1]");
  for (int i = 0; i < matrix.size(); ++i)
    if (i != j && matrix.status_of(i, j) == EntryStatus::unset)
      throw ContractError("column " + std::to_string(j) + " has unset entries");
  const auto col = matrix.column(j);
  return combine(combiner, col, s_bar);
}

}  // namespace bcp
