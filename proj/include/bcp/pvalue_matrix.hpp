#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "bcp/errors.hpp"

namespace bcp {

enum class EntryStatus : std::uint8_t { unset, computed, screened, diagonal };

inline std::string to_string(EntryStatus s) {
  switch (s) {
    case EntryStatus::unset: return "unset";
    case EntryStatus::computed: return "computed";
    case EntryStatus::screened: return "screened";
    case EntryStatus::diagonal: return "diagonal";
  }
  return "unknown";
}

/// Base p-values P(i, j) for H_{i,j}, stored with column j holding the
/// p-values that feed the partial-conjunction test for covariate j.
/// `labels` maps positions to original covariate indices (a dense subset
/// keeps its global labels).
struct PValueMatrix {
  Eigen::MatrixXd values;
  std::vector<EntryStatus> status;  // row-major
  Eigen::MatrixXi resamples;        // resamples actually used per entry
  std::vector<int> labels;
  std::uint64_t seed = 0;
  int K = 0;
  std::vector<std::string> warnings;  // sampler diagnostics

  PValueMatrix() = default;

  explicit PValueMatrix(int p) { reset(p); }

  void reset(int p) {
    values = Eigen::MatrixXd::Constant(p, p, std::numeric_limits<double>::quiet_NaN());
    status.assign(static_cast<std::size_t>(p) * static_cast<std::size_t>(p), EntryStatus::unset);
    resamples = Eigen::MatrixXi::Zero(p, p);
    labels.resize(static_cast<std::size_t>(p));
    for (int k = 0; k < p; ++k) {
      labels[static_cast<std::size_t>(k)] = k;
      at_status(k, k) = EntryStatus::diagonal;
    }
  }

  /// Build from a plain matrix; off-diagonal entries are marked computed.
  static PValueMatrix from_values(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) throw ParameterError("p-value matrix must be square");
    PValueMatrix out(static_cast<int>(m.rows()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        if (i == j) continue;
        const double v = m(i, j);
        if (!(v > 0.0 && v <= 1.0)) throw ParameterError("p-values must lie in (0, 1]");
        out.set(static_cast<int>(i), static_cast<int>(j), v, EntryStatus::computed, 0);
      }
    return out;
  }

  int size() const { return static_cast<int>(values.rows()); }

  EntryStatus& at_status(int i, int j) { return status[static_cast<std::size_t>(i) * static_cast<std::size_t>(size()) + static_cast<std::size_t>(j)]; }
  EntryStatus status_of(int i, int j) const {
    return status[static_cast<std::size_t>(i) * static_cast<std::size_t>(size()) + static_cast<std::size_t>(j)];
  }

  void set(int i, int j, double v, EntryStatus s, int used) {
    values(i, j) = v;
    at_status(i, j) = s;
    resamples(i, j) = used;
  }

  /// Off-diagonal entries of column j in ascending row order.
  std::vector<double> column(int j) const {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(size()) - 1);
    for (int i = 0; i < size(); ++i)
      if (i != j) out.push_back(values(i, j));
    return out;
  }

  void require_complete() const {
    for (int i = 0; i < size(); ++i)
      for (int j = 0; j < size(); ++j)
        if (i != j && (status_of(i, j) == EntryStatus::unset || !(values(i, j) > 0.0 && values(i, j) <= 1.0)))
          throw ContractError("p-value matrix entry (" + std::to_string(i) + ", " + std::to_string(j) +
                              ") is unset or outside (0, 1]");
  }

  std::size_t count(EntryStatus s) const {
    std::size_t c = 0;
    for (auto v : status) c += v == s;
    return c;
  }

  /// Submatrix over positions `keep` (labels carried along).
  PValueMatrix submatrix(const std::vector<int>& keep) const {
    PValueMatrix out(static_cast<int>(keep.size()));
    out.seed = seed;
    out.K = K;
    out.warnings = warnings;
    for (std::size_t a = 0; a < keep.size(); ++a) {
      out.labels[a] = labels[static_cast<std::size_t>(keep[a])];
      for (std::size_t b = 0; b < keep.size(); ++b) {
        if (a == b) continue;
        out.set(static_cast<int>(a), static_cast<int>(b), values(keep[a], keep[b]), status_of(keep[a], keep[b]),
                resamples(keep[a], keep[b]));
      }
    }
    return out;
  }
};

}  // namespace bcp
