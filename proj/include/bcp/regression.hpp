#pragma once

// Cross-validated lasso distillation and the R^2 statistic used by the
// dCRT. The lasso works on Gram matrices so that one precomputation per
// data set serves every "all columns except {i, j}" fit.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "bcp/errors.hpp"
#include "bcp/rng.hpp"

namespace bcp {

enum class Transform { log, log1p, identity };

inline std::string to_string(Transform t) {
  switch (t) {
    case Transform::log: return "log";
    case Transform::log1p: return "log1p";
    case Transform::identity: return "identity";
  }
  return "unknown";
}

inline Transform transform_from_string(const std::string& s) {
  if (s == "log") return Transform::log;
  if (s == "log1p") return Transform::log1p;
  if (s == "identity") return Transform::identity;
  throw ParameterError("unknown transform '" + s + "'");
}

inline double apply_transform(Transform t, double v) {
  switch (t) {
    case Transform::log: return std::log(v);
    case Transform::log1p: return std::log1p(v);
    case Transform::identity: return v;
  }
  return v;
}

inline Eigen::MatrixXd apply_transform(Transform t, const Eigen::MatrixXd& X) {
  switch (t) {
    case Transform::log:
      if (!(X.array() > 0.0).all()) throw DomainError("log transform requires strictly positive entries");
      return X.array().log().matrix();
    case Transform::log1p:
      if (!(X.array() > -1.0).all()) throw DomainError("log1p transform requires entries greater than -1");
      return X.array().log1p().matrix();
    case Transform::identity: return X;
  }
  return X;
}

struct LassoFit {
  Eigen::VectorXd coefficients;
  double intercept = 0.0;
  double lambda_selected = 0.0;
  Eigen::VectorXd fitted_values;
  std::vector<double> lambda_grid;
  std::vector<double> cv_error;  // mean squared held-out error per grid point
  std::size_t selected_index = 0;
};

/// Running sums that determine the R^2 of a (centered) residual regressed on
/// two columns plus an intercept.
struct R2Moments {
  double s1 = 0, s2 = 0, s11 = 0, s22 = 0, s12 = 0, s1r = 0, s2r = 0;

  void add(double f1, double f2, double r) {
    s1 += f1;
    s2 += f2;
    s11 += f1 * f1;
    s22 += f2 * f2;
    s12 += f1 * f2;
    s1r += f1 * r;
    s2r += f2 * r;
  }
};

/// R^2 from moments. `r_ss` is the residual's centered sum of squares and
/// the residual must already be centered. Rank-deficient designs project
/// onto the attainable column space.
inline double r2_from_moments(const R2Moments& m, double n, double r_ss) {
  if (!(r_ss > 0.0)) return 0.0;
  const double a = m.s11 - m.s1 * m.s1 / n;
  const double b = m.s12 - m.s1 * m.s2 / n;
  const double d = m.s22 - m.s2 * m.s2 / n;
  const double u = m.s1r, v = m.s2r;
  const double scale = std::max(std::abs(a) + std::abs(d), 1e-300);
  const double det = a * d - b * b;
  double explained;
  if (det > 1e-12 * scale * scale) {
    explained = (d * u * u - 2.0 * b * u * v + a * v * v) / det;
  } else {
    // Rank <= 1: project on the leading eigenvector of the 2x2 cross-product.
    const double tr = a + d;
    if (tr <= 1e-14 * std::max(1.0, std::abs(m.s11) + std::abs(m.s22))) return 0.0;
    // Eigenvector for eigenvalue tr (the other is ~0): proportional to (a, b) or (b, d).
    double e1, e2;
    if (std::abs(a) >= std::abs(d)) {
      e1 = a;
      e2 = b;
    } else {
      e1 = b;
      e2 = d;
    }
    const double norm2 = e1 * e1 + e2 * e2;
    if (norm2 <= 0.0) return 0.0;
    const double proj = (e1 * u + e2 * v);
    explained = proj * proj / (norm2 * tr);
  }
  return std::clamp(explained / r_ss, 0.0, 1.0);
}

/// Coefficient of determination of the OLS regression of `residual` on the
/// transformed columns of `z` plus an intercept.
inline double r2_statistic(const Eigen::VectorXd& residual, const Eigen::MatrixXd& z, Transform transform) {
  if (z.cols() != 2 || z.rows() != residual.size()) throw ParameterError("r2_statistic expects an n x 2 design");
  const auto n = static_cast<double>(residual.size());
  const Eigen::VectorXd rc = residual.array() - residual.mean();
  const double r_ss = rc.squaredNorm();
  R2Moments m;
  for (Eigen::Index k = 0; k < residual.size(); ++k) {
    const double f1 = apply_transform(transform, z(k, 0));
    const double f2 = apply_transform(transform, z(k, 1));
    if (!std::isfinite(f1) || !std::isfinite(f2)) throw DomainError("transformed design has non-finite entries");
    m.add(f1, f2, rc[k]);
  }
  return r2_from_moments(m, n, r_ss);
}

/// Univariate R^2 (one column plus intercept) from sums.
inline double r2_univariate(double s1, double s11, double s1r, double n, double r_ss) {
  if (!(r_ss > 0.0)) return 0.0;
  const double a = s11 - s1 * s1 / n;
  if (a <= 1e-14 * std::max(1.0, std::abs(s11))) return 0.0;
  return std::clamp(s1r * s1r / (a * r_ss), 0.0, 1.0);
}

/// Lasso on standardized columns with Gram-matrix coordinate descent and
/// K-fold cross-validation. One instance precomputes per-fold Gram
/// matrices for every column; `fit_cv` then fits any column subset.
class GramLasso {
 public:
  static constexpr int grid_size = 100;
  static constexpr double grid_ratio = 1e-3;
  static constexpr double tolerance = 1e-7;
  static constexpr int max_sweeps = 100000;

  GramLasso(Eigen::MatrixXd design, Eigen::VectorXd y, int folds, std::uint64_t seed)
      : design_(std::move(design)), y_(std::move(y)), folds_(folds) {
    const Eigen::Index n = design_.rows();
    if (y_.size() != n) throw ParameterError("design and response lengths differ");
    if (design_.cols() < 1) throw ParameterError("design needs at least one column");
    if (folds < 2 || n < folds) throw ParameterError("need n >= folds >= 2");
    fold_of_ = fold_assignment(n, folds, seed);
    blocks_.resize(static_cast<std::size_t>(folds) + 1);
    for (int f = 0; f <= folds; ++f) build_block(f);
  }

  /// Fold index of every row; depends only on (n, folds, seed).
  static std::vector<int> fold_assignment(Eigen::Index n, int folds, std::uint64_t seed) {
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
    for (Eigen::Index k = 0; k < n; ++k) perm[static_cast<std::size_t>(k)] = k;
    Philox rng = make_stream(seed, {0x666f6c6473ULL, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(folds)});
    shuffle(rng, perm);
    std::vector<int> fold(static_cast<std::size_t>(n));
    for (std::size_t k = 0; k < perm.size(); ++k) fold[static_cast<std::size_t>(perm[k])] = static_cast<int>(k % static_cast<std::size_t>(folds));
    return fold;
  }

  const std::vector<int>& folds() const { return fold_of_; }

  /// CV-selected fit using every column whose `excluded` flag is false.
  LassoFit fit_cv(const std::vector<bool>& excluded = {}) const {
    const std::vector<int> cols = active_columns(excluded);
    const Block& all = blocks_.back();
    LassoFit fit;
    fit.coefficients = Eigen::VectorXd::Zero(design_.cols());
    double lambda_max = 0.0;
    for (int c : cols) lambda_max = std::max(lambda_max, std::abs(all.xty[c]));
    if (cols.empty() || !(lambda_max > 0.0)) return intercept_only(std::move(fit));

    fit.lambda_grid.resize(grid_size);
    for (int k = 0; k < grid_size; ++k)
      fit.lambda_grid[static_cast<std::size_t>(k)] =
          lambda_max * std::pow(grid_ratio, static_cast<double>(k) / static_cast<double>(grid_size - 1));

    std::vector<double> sse(grid_size, 0.0);
    for (int f = 0; f < folds_; ++f) {
      const Block& blk = blocks_[static_cast<std::size_t>(f)];
      std::vector<int> fc;
      for (int c : cols)
        if (blk.sd[c] > 0.0) fc.push_back(c);
      Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(fc.size()));
      Eigen::VectorXd grad(static_cast<Eigen::Index>(fc.size()));
      for (std::size_t r = 0; r < fc.size(); ++r) grad[static_cast<Eigen::Index>(r)] = blk.xty[fc[r]];
      for (int k = 0; k < grid_size; ++k) {
        descend(blk, fc, fit.lambda_grid[static_cast<std::size_t>(k)], b, grad);
        sse[static_cast<std::size_t>(k)] += holdout_sse(blk, fc, b);
      }
    }
    fit.cv_error.resize(grid_size);
    std::size_t best = 0;
    for (std::size_t k = 0; k < sse.size(); ++k) {
      fit.cv_error[k] = sse[k] / static_cast<double>(design_.rows());
      if (fit.cv_error[k] < fit.cv_error[best]) best = k;  // ties keep the larger lambda
    }
    fit.selected_index = best;
    fit.lambda_selected = fit.lambda_grid[best];

    Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cols.size()));
    Eigen::VectorXd grad(static_cast<Eigen::Index>(cols.size()));
    for (std::size_t r = 0; r < cols.size(); ++r) grad[static_cast<Eigen::Index>(r)] = all.xty[cols[r]];
    for (std::size_t k = 0; k <= best; ++k) descend(all, cols, fit.lambda_grid[k], b, grad);
    return finish(std::move(fit), cols, b);
  }

  /// Fit at a single penalty (lambda = 0 gives least squares on the
  /// standardized columns), warm-started along the grid from lambda_max.
  LassoFit fit_at(double lambda, const std::vector<bool>& excluded = {}) const {
    if (lambda < 0.0) throw ParameterError("lambda must be nonnegative");
    const std::vector<int> cols = active_columns(excluded);
    const Block& all = blocks_.back();
    LassoFit fit;
    fit.coefficients = Eigen::VectorXd::Zero(design_.cols());
    double lambda_max = 0.0;
    for (int c : cols) lambda_max = std::max(lambda_max, std::abs(all.xty[c]));
    if (cols.empty() || !(lambda_max > 0.0)) return intercept_only(std::move(fit));
    Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cols.size()));
    Eigen::VectorXd grad(static_cast<Eigen::Index>(cols.size()));
    for (std::size_t r = 0; r < cols.size(); ++r) grad[static_cast<Eigen::Index>(r)] = all.xty[cols[r]];
    for (int k = 0; k < grid_size; ++k) {
      const double lam = lambda_max * std::pow(grid_ratio, static_cast<double>(k) / static_cast<double>(grid_size - 1));
      if (lam <= lambda) break;
      descend(all, cols, lam, b, grad);
    }
    descend(all, cols, lambda, b, grad);
    fit.lambda_grid = {lambda};
    fit.lambda_selected = lambda;
    return finish(std::move(fit), cols, b);
  }

  /// Penalized objective (1/2n)||y - Xb||^2 + lambda ||b||_1 on the
  /// standardized all-data problem, for coefficients on that scale.
  double standardized_objective(const std::vector<int>& cols, const Eigen::VectorXd& b, double lambda) const {
    const Block& all = blocks_.back();
    double quad = 0.0, lin = 0.0;
    for (std::size_t r = 0; r < cols.size(); ++r) {
      lin += b[static_cast<Eigen::Index>(r)] * all.xty[cols[r]];
      for (std::size_t c = 0; c < cols.size(); ++c)
        quad += b[static_cast<Eigen::Index>(r)] * all.gram(cols[r], cols[c]) * b[static_cast<Eigen::Index>(c)];
    }
    return 0.5 * (all.yy - 2.0 * lin + quad) + lambda * b.lpNorm<1>();
  }

  /// Run descent at one lambda from the given start and record the
  /// objective after every sweep (used to check monotone descent).
  std::vector<double> objective_trace(double lambda, const std::vector<bool>& excluded = {}) const {
    const std::vector<int> cols = active_columns(excluded);
    const Block& all = blocks_.back();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cols.size()));
    Eigen::VectorXd grad(static_cast<Eigen::Index>(cols.size()));
    for (std::size_t r = 0; r < cols.size(); ++r) grad[static_cast<Eigen::Index>(r)] = all.xty[cols[r]];
    std::vector<double> trace{standardized_objective(cols, b, lambda)};
    for (int s = 0; s < 1000; ++s) {
      const double change = sweep(all, cols, lambda, b, grad);
      trace.push_back(standardized_objective(cols, b, lambda));
      if (change < tolerance) break;
    }
    return trace;
  }

 private:
  struct Block {
    Eigen::VectorXd mean, sd;    // training column stats
    double y_mean = 0.0;
    Eigen::MatrixXd gram;        // Z^T Z / n_train
    Eigen::VectorXd xty;         // Z^T (y - ybar) / n_train
    double yy = 0.0;             // ||y - ybar||^2 / n_train
    Eigen::MatrixXd hold_gram;   // H^T H (held-out rows, training scaling)
    Eigen::VectorXd hold_xty;    // H^T (y_h - ybar)
    double hold_yy = 0.0;
  };

  std::vector<int> active_columns(const std::vector<bool>& excluded) const {
    std::vector<int> cols;
    const Block& all = blocks_.back();
    for (Eigen::Index c = 0; c < design_.cols(); ++c) {
      const bool ex = !excluded.empty() && excluded[static_cast<std::size_t>(c)];
      if (!ex && all.sd[c] > 0.0) cols.push_back(static_cast<int>(c));
    }
    return cols;
  }

  void build_block(int f) {
    const Eigen::Index n = design_.rows(), q = design_.cols();
    std::vector<Eigen::Index> train, hold;
    for (Eigen::Index r = 0; r < n; ++r) {
      if (f < folds_ && fold_of_[static_cast<std::size_t>(r)] == f)
        hold.push_back(r);
      else
        train.push_back(r);
    }
    Block& blk = blocks_[static_cast<std::size_t>(f)];
    const auto nt = static_cast<double>(train.size());
    Eigen::MatrixXd Z(static_cast<Eigen::Index>(train.size()), q);
    Eigen::VectorXd yt(static_cast<Eigen::Index>(train.size()));
    for (std::size_t r = 0; r < train.size(); ++r) {
      Z.row(static_cast<Eigen::Index>(r)) = design_.row(train[r]);
      yt[static_cast<Eigen::Index>(r)] = y_[train[r]];
    }
    blk.mean = Z.colwise().mean().transpose();
    blk.y_mean = yt.mean();
    Z.rowwise() -= blk.mean.transpose();
    blk.sd = (Z.array().square().colwise().sum() / nt).sqrt().transpose();
    for (Eigen::Index c = 0; c < q; ++c) {
      const double scale = std::max(1.0, std::abs(blk.mean[c]));
      if (blk.sd[c] <= 1e-12 * scale) blk.sd[c] = 0.0;
      Z.col(c) = blk.sd[c] > 0.0 ? Eigen::VectorXd(Z.col(c) / blk.sd[c]) : Eigen::VectorXd::Zero(Z.rows());
    }
    yt.array() -= blk.y_mean;
    blk.gram = Z.transpose() * Z / nt;
    blk.xty = Z.transpose() * yt / nt;
    blk.yy = yt.squaredNorm() / nt;
    if (f < folds_) {
      Eigen::MatrixXd H(static_cast<Eigen::Index>(hold.size()), q);
      Eigen::VectorXd yh(static_cast<Eigen::Index>(hold.size()));
      for (std::size_t r = 0; r < hold.size(); ++r) {
        for (Eigen::Index c = 0; c < q; ++c)
          H(static_cast<Eigen::Index>(r), c) =
              blk.sd[c] > 0.0 ? (design_(hold[r], c) - blk.mean[c]) / blk.sd[c] : 0.0;
        yh[static_cast<Eigen::Index>(r)] = y_[hold[r]] - blk.y_mean;
      }
      blk.hold_gram = H.transpose() * H;
      blk.hold_xty = H.transpose() * yh;
      blk.hold_yy = yh.squaredNorm();
    }
  }

  // One cyclic pass; returns the largest coefficient change.
  static double sweep(const Block& blk, const std::vector<int>& cols, double lambda, Eigen::VectorXd& b,
                      Eigen::VectorXd& grad) {
    double max_change = 0.0;
    const auto a = static_cast<Eigen::Index>(cols.size());
    for (Eigen::Index r = 0; r < a; ++r) {
      const int c = cols[static_cast<std::size_t>(r)];
      const double g = blk.gram(c, c);
      if (g <= 0.0) continue;
      const double z = grad[r] + g * b[r];
      const double next = std::abs(z) > lambda ? (z - std::copysign(lambda, z)) / g : 0.0;
      const double delta = next - b[r];
      if (delta != 0.0) {
        b[r] = next;
        for (Eigen::Index s = 0; s < a; ++s) grad[s] -= delta * blk.gram(cols[static_cast<std::size_t>(s)], c);
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    return max_change;
  }

  static void descend(const Block& blk, const std::vector<int>& cols, double lambda, Eigen::VectorXd& b,
                      Eigen::VectorXd& grad) {
    for (int s = 0; s < max_sweeps; ++s)
      if (sweep(blk, cols, lambda, b, grad) < tolerance) return;
  }

  static double holdout_sse(const Block& blk, const std::vector<int>& cols, const Eigen::VectorXd& b) {
    double lin = 0.0, quad = 0.0;
    for (std::size_t r = 0; r < cols.size(); ++r) {
      const double br = b[static_cast<Eigen::Index>(r)];
      if (br == 0.0) continue;
      lin += br * blk.hold_xty[cols[r]];
      for (std::size_t c = 0; c < cols.size(); ++c) {
        const double bc = b[static_cast<Eigen::Index>(c)];
        if (bc != 0.0) quad += br * blk.hold_gram(cols[r], cols[c]) * bc;
      }
    }
    return blk.hold_yy - 2.0 * lin + quad;
  }

  LassoFit intercept_only(LassoFit fit) const {
    fit.intercept = y_.mean();
    fit.lambda_grid = {0.0};
    fit.cv_error = {};
    fit.lambda_selected = 0.0;
    fit.fitted_values = Eigen::VectorXd::Constant(y_.size(), fit.intercept);
    return fit;
  }

  LassoFit finish(LassoFit fit, const std::vector<int>& cols, const Eigen::VectorXd& b) const {
    const Block& all = blocks_.back();
    double shift = 0.0;
    for (std::size_t r = 0; r < cols.size(); ++r) {
      const int c = cols[r];
      const double beta = b[static_cast<Eigen::Index>(r)] / all.sd[c];
      fit.coefficients[c] = beta;
      shift += beta * all.mean[c];
    }
    fit.intercept = all.y_mean - shift;
    fit.fitted_values = (design_ * fit.coefficients).array() + fit.intercept;
    return fit;
  }

  Eigen::MatrixXd design_;
  Eigen::VectorXd y_;
  int folds_;
  std::vector<int> fold_of_;
  std::vector<Block> blocks_;  // one per fold, then all data
};

/// 5-fold (by default) cross-validated lasso of y on the design.
inline LassoFit cv_lasso(const Eigen::MatrixXd& design, const Eigen::VectorXd& y, int folds, std::uint64_t seed) {
  return GramLasso(design, y, folds, seed).fit_cv();
}

}  // namespace bcp
