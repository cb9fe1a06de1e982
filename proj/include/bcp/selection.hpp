#pragma once

// Controlled selection of Markov-boundary members from a base p-value
// matrix: adaptive Holm (FWER) and BH on Simes partial-conjunction
// p-values (FDR), plus the plain procedures used as baselines.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "bcp/errors.hpp"
#include "bcp/pch.hpp"
#include "bcp/pvalue_matrix.hpp"

namespace bcp {

enum class OverflowPolicy { stop, reject_all };

struct TraceStep {
  int step = 0;
  int candidate = -1;  // covariate label
  double pvalue = 1.0;
  double threshold = 0.0;
  bool rejected = false;
  std::string note;
};

struct SelectionResult {
  std::vector<int> rejected;  // covariate labels, in rejection order
  std::vector<TraceStep> trace;
  std::string procedure;
  double alpha = 0.0;
  int s_bar = 0;
  // Dependence assumption the error guarantee relies on.
  std::string validity;
  // PCH p-value per column with A empty (label order).
  std::vector<double> pch_pvalues;
};

inline std::string validity_regime(Combiner c) {
  return c == Combiner::bonferroni ? "arbitrary-dependence" : "PRDS-assumed";
}

namespace detail {

inline void check_selection_args(const PValueMatrix& matrix, int s_bar, double alpha) {
  const int p = matrix.size();
  if (p < 2) throw ParameterError("selection needs at least two covariates");
  if (s_bar < 1 || s_bar > p - 1) throw ParameterError("s_bar must lie in [1, p - 1]");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("alpha must lie in (0, 1)");
  matrix.require_complete();
}

inline std::vector<double> pch_all(const PValueMatrix& matrix, int s_bar, Combiner combiner) {
  std::vector<double> out(static_cast<std::size_t>(matrix.size()));
  for (int j = 0; j < matrix.size(); ++j) out[static_cast<std::size_t>(j)] = combine(combiner, matrix.column(j), s_bar);
  return out;
}

inline std::vector<int> ascending_order(const std::vector<double>& v) {
  std::vector<int> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return v[static_cast<std::size_t>(a)] < v[static_cast<std::size_t>(b)]; });
  return order;
}

}  // namespace detail

/// Holm step-down on a vector of p-values; returns rejected positions in
/// rejection order.
inline std::vector<int> holm_positions(const std::vector<double>& pvalues, double alpha,
                                       std::vector<TraceStep>* trace = nullptr) {
  const auto order = detail::ascending_order(pvalues);
  const auto m = static_cast<int>(pvalues.size());
  std::vector<int> out;
  for (int k = 1; k <= m; ++k) {
    const int c = order[static_cast<std::size_t>(k - 1)];
    const double thr = alpha / static_cast<double>(m - k + 1);
    const bool rej = pvalues[static_cast<std::size_t>(c)] <= thr;
    if (trace) trace->push_back({k, c, pvalues[static_cast<std::size_t>(c)], thr, rej, {}});
    if (!rej) break;
    out.push_back(c);
  }
  return out;
}

/// Benjamini-Hochberg step-up (or Benjamini-Yekutieli when `by` is set).
inline std::vector<int> bh_positions(const std::vector<double>& pvalues, double alpha, bool by = false,
                                     std::vector<TraceStep>* trace = nullptr) {
  const auto order = detail::ascending_order(pvalues);
  const auto m = static_cast<int>(pvalues.size());
  double harmonic = 1.0;
  if (by) {
    harmonic = 0.0;
    for (int k = 1; k <= m; ++k) harmonic += 1.0 / k;
  }
  int k_star = 0;
  for (int k = 1; k <= m; ++k) {
    const double thr = static_cast<double>(k) * alpha / (static_cast<double>(m) * harmonic);
    const int c = order[static_cast<std::size_t>(k - 1)];
    const bool ok = pvalues[static_cast<std::size_t>(c)] <= thr;
    if (trace) trace->push_back({k, c, pvalues[static_cast<std::size_t>(c)], thr, ok, {}});
    if (ok) k_star = k;
  }
  std::vector<int> out(order.begin(), order.begin() + k_star);
  if (trace)
    for (auto& t : *trace) t.rejected = t.step <= k_star;
  return out;
}

/// Holm with exclusion-corrected PCH p-values: at step k every unrejected
/// column is re-combined with the current rejections removed from its
/// base p-values, and the smallest is compared with alpha / (p - k + 1).
inline SelectionResult adaptive_holm(const PValueMatrix& matrix, int s_bar, double alpha, Combiner combiner,
                                     OverflowPolicy overflow = OverflowPolicy::stop) {
  detail::check_selection_args(matrix, s_bar, alpha);
  const int p = matrix.size();
  SelectionResult res;
  res.procedure = "adaptive-holm-" + to_string(combiner);
  res.alpha = alpha;
  res.s_bar = s_bar;
  res.validity = validity_regime(combiner);
  res.pch_pvalues = detail::pch_all(matrix, s_bar, combiner);

  std::vector<bool> in_set(static_cast<std::size_t>(p), false);
  std::vector<int> rejected_pos;
  for (int k = 1; k <= p; ++k) {
    if (static_cast<int>(rejected_pos.size()) == s_bar) {
      TraceStep t{k, -1, 0.0, alpha / static_cast<double>(p - k + 1), false, {}};
      if (overflow == OverflowPolicy::reject_all) {
        t.note = "reached step s_bar + 1: rejecting all remaining";
        t.rejected = true;
        for (int j = 0; j < p; ++j)
          if (!in_set[static_cast<std::size_t>(j)]) {
            in_set[static_cast<std::size_t>(j)] = true;
            rejected_pos.push_back(j);
          }
      } else {
        t.note = "reached step s_bar + 1: stopping";
      }
      res.trace.push_back(t);
      break;
    }
    int best = -1;
    double best_p = 2.0;
    for (int j = 0; j < p; ++j) {
      if (in_set[static_cast<std::size_t>(j)]) continue;
      std::vector<std::size_t> exclude;
      exclude.reserve(rejected_pos.size());
      for (int r : rejected_pos) exclude.push_back(static_cast<std::size_t>(r < j ? r : r - 1));
      const double v = combine(combiner, matrix.column(j), s_bar, exclude);
      if (v < best_p) {  // ties keep the lowest index
        best_p = v;
        best = j;
      }
    }
    const double thr = alpha / static_cast<double>(p - k + 1);
    const bool rej = best_p <= thr;
    res.trace.push_back({k, matrix.labels[static_cast<std::size_t>(best)], best_p, thr, rej, {}});
    if (!rej) break;
    in_set[static_cast<std::size_t>(best)] = true;
    rejected_pos.push_back(best);
  }
  for (int r : rejected_pos) res.rejected.push_back(matrix.labels[static_cast<std::size_t>(r)]);
  return res;
}

/// Ordinary Holm on the uncorrected PCH p-values.
inline SelectionResult plain_holm(const PValueMatrix& matrix, int s_bar, double alpha, Combiner combiner) {
  detail::check_selection_args(matrix, s_bar, alpha);
  SelectionResult res;
  res.procedure = "holm-" + to_string(combiner);
  res.alpha = alpha;
  res.s_bar = s_bar;
  res.validity = validity_regime(combiner);
  res.pch_pvalues = detail::pch_all(matrix, s_bar, combiner);
  const auto pos = holm_positions(res.pch_pvalues, alpha, &res.trace);
  for (auto& t : res.trace) t.candidate = matrix.labels[static_cast<std::size_t>(t.candidate)];
  for (int r : pos) res.rejected.push_back(matrix.labels[static_cast<std::size_t>(r)]);
  return res;
}

enum class FdrVariant { bh_simes, by_bonferroni };

/// FDR selection: BH on Simes PCH p-values, or BY on Bonferroni PCH
/// p-values for the arbitrary-dependence route.
inline SelectionResult fdr_select(const PValueMatrix& matrix, int s_bar, double alpha,
                                  FdrVariant variant = FdrVariant::bh_simes) {
  detail::check_selection_args(matrix, s_bar, alpha);
  const bool by = variant == FdrVariant::by_bonferroni;
  const Combiner combiner = by ? Combiner::bonferroni : Combiner::simes;
  SelectionResult res;
  res.procedure = by ? "by-bonferroni" : "bh-simes";
  res.alpha = alpha;
  res.s_bar = s_bar;
  res.validity = validity_regime(combiner);
  res.pch_pvalues = detail::pch_all(matrix, s_bar, combiner);
  const auto pos = bh_positions(res.pch_pvalues, alpha, by, &res.trace);
  for (auto& t : res.trace) t.candidate = matrix.labels[static_cast<std::size_t>(t.candidate)];
  for (int r : pos) res.rejected.push_back(matrix.labels[static_cast<std::size_t>(r)]);
  return res;
}

inline SelectionResult bh_select(const PValueMatrix& matrix, int s_bar, double alpha) {
  return fdr_select(matrix, s_bar, alpha, FdrVariant::bh_simes);
}

}  // namespace bcp
