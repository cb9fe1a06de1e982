#pragma once

// Bivariate distilled conditional randomization tests. One DcrtEngine per
// data set owns the lasso precomputation and a per-pair cache of distilled
// residuals; matrix construction, conditioning on a dense subset and the
// LOO / univariate benchmarks all draw from it.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "bcp/errors.hpp"
#include "bcp/models.hpp"
#include "bcp/parallel.hpp"
#include "bcp/pvalue_matrix.hpp"
#include "bcp/regression.hpp"
#include "bcp/rng.hpp"

namespace bcp {

struct SpeedupConfig {
  bool lasso_screen = false;
  bool column_early_stop = false;
  double tau_col = 0.1;
  int c_col = 0;  // 0: |D| - floor(|D| / 2), which matches s_bar = |D| / 2
  bool adaptive_resampling = false;
  double initial_fraction = 0.1;
  double tau_p = 0.1;

  static SpeedupConfig none() { return {}; }
  static SpeedupConfig all() {
    SpeedupConfig s;
    s.lasso_screen = s.column_early_stop = s.adaptive_resampling = true;
    return s;
  }
  bool any() const { return lasso_screen || column_early_stop || adaptive_resampling; }

  void validate() const {
    if (!(initial_fraction > 0.0 && initial_fraction <= 1.0)) throw ParameterError("initial fraction must lie in (0, 1]");
    if (!(tau_p > 0.0 && tau_p < 1.0)) throw ParameterError("tau_p must lie in (0, 1)");
    if (!(tau_col > 0.0 && tau_col < 1.0)) throw ParameterError("tau_col must lie in (0, 1)");
    if (c_col < 0) throw ParameterError("c_col must be nonnegative");
  }
};

/// Features the distillation lasso regresses y on.
enum class DistillFeatures { raw, transformed };

inline std::string to_string(DistillFeatures f) { return f == DistillFeatures::raw ? "raw" : "transformed"; }

inline DistillFeatures distill_features_from_string(const std::string& s) {
  if (s == "raw") return DistillFeatures::raw;
  if (s == "transformed") return DistillFeatures::transformed;
  throw ParameterError("unknown distillation features '" + s + "'");
}

/// Statistic transform matching the family: log for strictly positive
/// compositions, log1p for counts, identity where log is undefined.
inline Transform default_transform(Family f) {
  switch (f) {
    case Family::dirichlet_multinomial: return Transform::log1p;
    case Family::multivariate_normal:
    case Family::one_hot_factor: return Transform::identity;
    default: return Transform::log;
  }
}

struct DcrtOptions {
  std::optional<Transform> transform;  // default_transform(family) when unset
  DistillFeatures features = DistillFeatures::raw;
  int folds = 5;
  unsigned threads = 0;  // 0: default_threads()
};

struct BasePValue {
  double pvalue = 1.0;
  int exceed = 0;
  int resamples = 0;
  double t_obs = 0.0;
  bool screened = false;  // abandoned after the interim check
  std::optional<std::string> warning;
};

/// (1 + exceed) / (K + 1).
inline double crt_pvalue(int exceed, int K) {
  if (K < 1 || exceed < 0 || exceed > K) throw ContractError("exceed count must lie in [0, K]");
  return (1.0 + exceed) / (static_cast<double>(K) + 1.0);
}

namespace detail {
constexpr std::uint64_t tag_distill = 0x64697374ULL;
constexpr std::uint64_t tag_screen = 0x7363726eULL;
constexpr std::uint64_t tag_pair = 0x70616972ULL;
constexpr std::uint64_t tag_loo = 0x6c6f6fULL;
constexpr std::uint64_t tag_uni = 0x756e69ULL;
}  // namespace detail

class DcrtEngine {
 public:
  DcrtEngine(const DataSet& data, const CovariateModel& model, std::uint64_t seed, DcrtOptions options = {})
      : data_(&data), model_(&model), seed_(seed), options_(options) {
    model.validate();
    p_ = static_cast<int>(data.p());
    if (data.y.size() != data.n()) throw ParameterError("X and y have different row counts");
    if (p_ != model.dim()) throw ParameterError("X has " + std::to_string(p_) + " columns but the model has dimension " +
                                                std::to_string(model.dim()));
    if (auto bad = find_constraint_violation(model, data.X))
      throw DomainError("row " + std::to_string(*bad) + " violates the " + to_string(model.constraint()) + " constraint");
    transform_ = options.transform.value_or(default_transform(model.family));
    transformed_ = apply_transform(transform_, data.X);
    for (Eigen::Index r = 0; r < transformed_.rows(); ++r)
      if (!transformed_.row(r).allFinite())
        throw DomainError("row " + std::to_string(r) + " is not finite under the " + to_string(transform_) +
                          " transform (zero entries need log1p or identity)");
    const Eigen::MatrixXd& features = options.features == DistillFeatures::raw ? data.X : transformed_;
    lasso_ = std::make_unique<GramLasso>(features, data.y, options.folds, stream_key(seed, {detail::tag_distill}));
    const auto slots = static_cast<std::size_t>(p_) * static_cast<std::size_t>(p_);
    residuals_.resize(slots);
    flags_ = std::make_unique<std::once_flag[]>(slots);
  }

  int p() const { return p_; }
  Transform transform() const { return transform_; }
  const DcrtOptions& options() const { return options_; }
  std::uint64_t seed() const { return seed_; }

  /// Centered distilled residual y - d_Y for the fit excluding columns i
  /// and j (i == j excludes a single column). Computed once per set.
  const Eigen::VectorXd& residual(int i, int j) const {
    const int a = std::min(i, j), b = std::max(i, j);
    const auto slot = static_cast<std::size_t>(a) * static_cast<std::size_t>(p_) + static_cast<std::size_t>(b);
    std::call_once(flags_[slot], [&] {
      std::vector<bool> excluded(static_cast<std::size_t>(p_), false);
      excluded[static_cast<std::size_t>(a)] = excluded[static_cast<std::size_t>(b)] = true;
      const LassoFit fit = lasso_->fit_cv(excluded);
      Eigen::VectorXd r = data_->y - fit.fitted_values;
      r.array() -= r.mean();
      residuals_[slot] = std::move(r);
    });
    return residuals_[slot];
  }

  /// Columns with a zero coefficient in one CV lasso of y on the
  /// transformed design.
  std::vector<bool> lasso_zero_columns() const {
    const LassoFit fit = cv_lasso(transformed_, data_->y, options_.folds, stream_key(seed_, {detail::tag_screen}));
    std::vector<bool> zero(static_cast<std::size_t>(p_));
    for (int c = 0; c < p_; ++c) zero[static_cast<std::size_t>(c)] = fit.coefficients[c] == 0.0;
    return zero;
  }

  /// dCRT p-value for H_{i,j}. With `interim` set, the first `interim`
  /// resamples are checked first and the entry is abandoned (p = 1) when
  /// their p-value exceeds tau_p; the continuation reuses the same streams,
  /// so a completed entry equals the full computation.
  BasePValue pair_pvalue(int i, int j, int K, int interim = 0, double tau_p = 1.0) const {
    check_pair(i, j, K);
    const Eigen::VectorXd& r = residual(i, j);
    const Eigen::Index n = data_->n();
    const double r_ss = r.squaredNorm();
    PairSampler sampler(*model_, i, j);

    R2Moments obs;
    for (Eigen::Index row = 0; row < n; ++row) obs.add(transformed_(row, i), transformed_(row, j), r[row]);
    BasePValue out;
    out.t_obs = r2_from_moments(obs, static_cast<double>(n), r_ss);

    std::vector<PairSampler::Row> rows;
    std::vector<Philox> streams;
    rows.reserve(static_cast<std::size_t>(n));
    streams.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index row = 0; row < n; ++row) {
      rows.push_back(sampler.prepare(data_->X.row(row)));
      streams.push_back(make_stream(seed_, {detail::tag_pair, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j),
                                            static_cast<std::uint64_t>(row)}));
    }
    // g1/g2 hold transformed draws laid out resample-major.
    std::vector<double> g1(static_cast<std::size_t>(K) * static_cast<std::size_t>(n));
    std::vector<double> g2(g1.size());
    std::vector<std::pair<double, double>> buf;
    double rate_sum = 0.0;
    int rate_rows = 0;
    auto fill = [&](int k0, int k1) {
      for (Eigen::Index row = 0; row < n; ++row) {
        buf.clear();
        const double rate = sampler.draw(rows[static_cast<std::size_t>(row)], streams[static_cast<std::size_t>(row)],
                                         static_cast<std::size_t>(k1 - k0), buf);
        if (rate >= 0.0) {
          rate_sum += rate;
          ++rate_rows;
        }
        for (int k = k0; k < k1; ++k) {
          const auto idx = static_cast<std::size_t>(k) * static_cast<std::size_t>(n) + static_cast<std::size_t>(row);
          g1[idx] = tf(buf[static_cast<std::size_t>(k - k0)].first);
          g2[idx] = tf(buf[static_cast<std::size_t>(k - k0)].second);
        }
      }
    };
    auto count = [&](int k0, int k1) {
      int e = 0;
      for (int k = k0; k < k1; ++k) {
        R2Moments m;
        const auto base = static_cast<std::size_t>(k) * static_cast<std::size_t>(n);
        for (Eigen::Index row = 0; row < n; ++row)
          m.add(g1[base + static_cast<std::size_t>(row)], g2[base + static_cast<std::size_t>(row)], r[row]);
        if (r2_from_moments(m, static_cast<double>(n), r_ss) >= out.t_obs) ++e;
      }
      return e;
    };

    // The MCMC construction is built for the full K at once; an interim
    // check then looks at its first draws, which stay exchangeable.
    const bool whole = !sampler.iid();
    if (interim > 0 && interim < K) {
      fill(0, whole ? K : interim);
      const int e0 = count(0, interim);
      if (crt_pvalue(e0, interim) > tau_p) {
        out.exceed = e0;
        out.resamples = interim;
        out.pvalue = 1.0;
        out.screened = true;
      } else {
        if (!whole) fill(interim, K);
        out.exceed = e0 + count(interim, K);
        out.resamples = K;
        out.pvalue = crt_pvalue(out.exceed, K);
      }
    } else {
      fill(0, K);
      out.exceed = count(0, K);
      out.resamples = K;
      out.pvalue = crt_pvalue(out.exceed, K);
    }
    if (rate_rows > 0) {
      const double rate = rate_sum / rate_rows;
      if (rate < model_->mcmc.warn_low || rate > model_->mcmc.warn_high)
        out.warning = "pair (" + std::to_string(i) + ", " + std::to_string(j) + "): mean MCMC acceptance rate " +
                      std::to_string(rate) + " outside [" + std::to_string(model_->mcmc.warn_low) + ", " +
                      std::to_string(model_->mcmc.warn_high) + "]";
    }
    return out;
  }

  /// LOO benchmark p-value for covariate i after dropping column `dropped`:
  /// univariate R^2 of the residual on the transformed X_i, resampling X_i
  /// given every column except i and the dropped one.
  BasePValue loo_pvalue(int i, int dropped, int K) const {
    check_pair(i, dropped, K);
    const Eigen::VectorXd& r = residual(i, dropped);
    PairSampler sampler(*model_, i, dropped);
    auto stream_of = [&](Eigen::Index row) {
      return make_stream(seed_, {detail::tag_loo, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(dropped),
                                 static_cast<std::uint64_t>(row)});
    };
    return univariate_test(r, i, K, [&](Eigen::Index row, int k_count, std::vector<double>& draws) {
      Philox rng = stream_of(row);
      std::vector<std::pair<double, double>> buf;
      sampler.draw(sampler.prepare(data_->X.row(row)), rng, static_cast<std::size_t>(k_count), buf);
      for (const auto& d : buf) draws.push_back(d.first);
    });
  }

  /// Univariate dCRT for covariate i given all others (non-compositional
  /// designs only).
  BasePValue univariate_pvalue(int i, int K) const {
    if (model_->sum_constrained())
      throw ParameterError("univariate conditional tests are degenerate for sum-constrained covariates");
    if (i < 0 || i >= p_) throw ParameterError("index out of range");
    if (K < 1) throw ParameterError("K must be at least 1");
    const Eigen::VectorXd& r = residual(i, i);
    GaussianCoordinateSampler sampler(*model_, i);
    return univariate_test(r, i, K, [&](Eigen::Index row, int k_count, std::vector<double>& draws) {
      Philox rng = make_stream(seed_, {detail::tag_uni, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(row)});
      const double mu = sampler.conditional_mean(data_->X.row(row));
      for (int k = 0; k < k_count; ++k) draws.push_back(sampler.draw(mu, rng));
    });
  }

 private:
  void check_pair(int i, int j, int K) const {
    if (i == j) throw ParameterError("pair indices must differ");
    if (i < 0 || j < 0 || i >= p_ || j >= p_) throw ParameterError("pair index out of range");
    if (K < 1) throw ParameterError("K must be at least 1");
  }

  // Resampled values can underflow to zero for tiny concentrations; log
  // then sees the smallest normal double instead of -inf.
  double tf(double v) const {
    if (transform_ == Transform::log) return std::log(std::max(v, std::numeric_limits<double>::min()));
    return apply_transform(transform_, v);
  }

  template <typename Drawer>
  BasePValue univariate_test(const Eigen::VectorXd& r, int i, int K, Drawer&& drawer) const {
    const Eigen::Index n = data_->n();
    const auto nd = static_cast<double>(n);
    const double r_ss = r.squaredNorm();
    auto stat = [&](auto&& value_of) {
      double s1 = 0, s11 = 0, s1r = 0;
      for (Eigen::Index row = 0; row < n; ++row) {
        const double f = value_of(row);
        s1 += f;
        s11 += f * f;
        s1r += f * r[row];
      }
      return r2_univariate(s1, s11, s1r, nd, r_ss);
    };
    BasePValue out;
    out.t_obs = stat([&](Eigen::Index row) { return transformed_(row, i); });
    std::vector<double> g(static_cast<std::size_t>(K) * static_cast<std::size_t>(n));
    std::vector<double> draws;
    for (Eigen::Index row = 0; row < n; ++row) {
      draws.clear();
      drawer(row, K, draws);
      for (int k = 0; k < K; ++k)
        g[static_cast<std::size_t>(k) * static_cast<std::size_t>(n) + static_cast<std::size_t>(row)] =
            tf(draws[static_cast<std::size_t>(k)]);
    }
    for (int k = 0; k < K; ++k) {
      const auto base = static_cast<std::size_t>(k) * static_cast<std::size_t>(n);
      if (stat([&](Eigen::Index row) { return g[base + static_cast<std::size_t>(row)]; }) >= out.t_obs) ++out.exceed;
    }
    out.resamples = K;
    out.pvalue = crt_pvalue(out.exceed, K);
    return out;
  }

  const DataSet* data_;
  const CovariateModel* model_;
  std::uint64_t seed_;
  DcrtOptions options_;
  int p_ = 0;
  Transform transform_ = Transform::log;
  Eigen::MatrixXd transformed_;
  std::unique_ptr<GramLasso> lasso_;
  mutable std::vector<Eigen::VectorXd> residuals_;
  std::unique_ptr<std::once_flag[]> flags_;
};

/// Single dCRT p-value for H_{i,j} without speedups.
inline BasePValue base_pvalue(const DataSet& data, const CovariateModel& model, int i, int j, int K, std::uint64_t seed,
                              DcrtOptions options = {}) {
  return DcrtEngine(data, model, seed, options).pair_pvalue(i, j, K);
}

/// Fill the matrix over `positions` (global covariate indices). With
/// `columns` given, only those matrix columns are computed and the rest
/// stay unset.
inline PValueMatrix compute_matrix(const DcrtEngine& engine, const std::vector<int>& positions, int K,
                                   const SpeedupConfig& speedups, bool symmetrize,
                                   const std::vector<int>& columns = {}) {
  speedups.validate();
  if (K < 1) throw ParameterError("K must be at least 1");
  const int d = static_cast<int>(positions.size());
  if (d < 3) throw ParameterError("need at least three covariates to test");
  for (std::size_t a = 0; a < positions.size(); ++a) {
    if (positions[a] < 0 || positions[a] >= engine.p()) throw ParameterError("covariate index out of range");
    for (std::size_t b = 0; b < a; ++b)
      if (positions[a] == positions[b]) throw ParameterError("duplicate covariate index");
  }
  if (symmetrize && speedups.column_early_stop)
    throw ParameterError("symmetrize cannot be combined with column early stopping (columns would share entries)");

  PValueMatrix out(d);
  out.labels = positions;
  out.seed = engine.seed();
  out.K = K;

  std::vector<bool> zero;
  if (speedups.lasso_screen) zero = engine.lasso_zero_columns();
  auto lasso_screened = [&](int a, int b) {
    return speedups.lasso_screen && zero[static_cast<std::size_t>(positions[static_cast<std::size_t>(a)])] &&
           zero[static_cast<std::size_t>(positions[static_cast<std::size_t>(b)])];
  };
  const int interim = speedups.adaptive_resampling
                          ? std::max(1, static_cast<int>(std::ceil(speedups.initial_fraction * K - 1e-9)))
                          : 0;
  const int c_col = speedups.c_col > 0 ? speedups.c_col : d - d / 2;
  const unsigned threads = engine.options().threads ? engine.options().threads : default_threads();

  std::vector<std::optional<std::string>> warn(static_cast<std::size_t>(d) * static_cast<std::size_t>(d));
  auto compute_entry = [&](int a, int b) {
    if (lasso_screened(a, b)) {
      out.set(a, b, 1.0, EntryStatus::screened, 0);
      return;
    }
    const BasePValue bp = engine.pair_pvalue(positions[static_cast<std::size_t>(a)],
                                             positions[static_cast<std::size_t>(b)], K, interim, speedups.tau_p);
    out.set(a, b, bp.pvalue, bp.screened ? EntryStatus::screened : EntryStatus::computed, bp.resamples);
    warn[static_cast<std::size_t>(a) * static_cast<std::size_t>(d) + static_cast<std::size_t>(b)] = bp.warning;
  };

  std::vector<int> cols = columns;
  if (cols.empty())
    for (int b = 0; b < d; ++b) cols.push_back(b);

  if (speedups.column_early_stop) {
    // Columns in parallel, rows of a column serially in ascending order.
    parallel_for(cols.size(), threads, [&](std::size_t t) {
      const int b = cols[t];
      int large = 0;
      for (int a = 0; a < d; ++a)
        if (a != b && lasso_screened(a, b)) {
          out.set(a, b, 1.0, EntryStatus::screened, 0);
          ++large;
        }
      for (int a = 0; a < d; ++a) {
        if (a == b || lasso_screened(a, b)) continue;
        if (large >= c_col) {
          out.set(a, b, 1.0, EntryStatus::screened, 0);
          continue;
        }
        compute_entry(a, b);
        if (out.values(a, b) > speedups.tau_col) ++large;
      }
    });
  } else {
    std::vector<std::pair<int, int>> tasks;
    std::vector<bool> wanted(static_cast<std::size_t>(d), false);
    for (int b : cols) wanted[static_cast<std::size_t>(b)] = true;
    for (int b = 0; b < d; ++b)
      for (int a = 0; a < d; ++a) {
        if (a == b) continue;
        const bool need = symmetrize ? (a < b && (wanted[static_cast<std::size_t>(a)] || wanted[static_cast<std::size_t>(b)]))
                                     : wanted[static_cast<std::size_t>(b)];
        if (need) tasks.emplace_back(a, b);
      }
    parallel_for(tasks.size(), threads, [&](std::size_t t) { compute_entry(tasks[t].first, tasks[t].second); });
    if (symmetrize)
      for (const auto& [a, b] : tasks)
        out.set(b, a, out.values(a, b), out.status_of(a, b), out.resamples(a, b));
  }
  for (const auto& w : warn)
    if (w) out.warnings.push_back(*w);
  return out;
}

/// Full p x p matrix of base p-values.
inline PValueMatrix pvalue_matrix(const DataSet& data, const CovariateModel& model, int K, std::uint64_t seed,
                                  const SpeedupConfig& speedups = {}, bool symmetrize = false, DcrtOptions options = {}) {
  DcrtEngine engine(data, model, seed, options);
  std::vector<int> all(static_cast<std::size_t>(engine.p()));
  for (int k = 0; k < engine.p(); ++k) all[static_cast<std::size_t>(k)] = k;
  return compute_matrix(engine, all, K, speedups, symmetrize);
}

/// Matrix over the dense subset D only. The conditioning set of every
/// H_{i,j} with i, j in D already contains the complement of D, so the
/// pair tests are unchanged; entries equal those of the full matrix.
inline PValueMatrix condition_on_dense(const DataSet& data, const CovariateModel& model, const std::vector<int>& dense,
                                       int K, std::uint64_t seed, const SpeedupConfig& speedups = {},
                                       DcrtOptions options = {}) {
  if (dense.size() < 3) throw ParameterError("the dense set needs at least three covariates");
  DcrtEngine engine(data, model, seed, options);
  std::vector<int> sorted = dense;
  std::sort(sorted.begin(), sorted.end());
  return compute_matrix(engine, sorted, K, speedups, false);
}

}  // namespace bcp
