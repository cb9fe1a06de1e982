#pragma once

// Compositional covariate models: row sampling, conditional resampling of a
// coordinate pair given the remaining coordinates, and Dirichlet fitting.

#include <Eigen/Dense>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bcp/errors.hpp"
#include "bcp/rng.hpp"

namespace bcp {

enum class Family { dirichlet, logistic_normal, multivariate_normal, dirichlet_multinomial, one_hot_factor };

enum class RowConstraint { sum_one, count_total, none };

inline std::string to_string(Family f) {
  switch (f) {
    case Family::dirichlet: return "dirichlet";
    case Family::logistic_normal: return "logistic-normal";
    case Family::multivariate_normal: return "multivariate-normal";
    case Family::dirichlet_multinomial: return "dirichlet-multinomial";
    case Family::one_hot_factor: return "one-hot-factor";
  }
  return "unknown";
}

inline Family family_from_string(const std::string& s) {
  if (s == "dirichlet") return Family::dirichlet;
  if (s == "logistic-normal") return Family::logistic_normal;
  if (s == "multivariate-normal") return Family::multivariate_normal;
  if (s == "dirichlet-multinomial") return Family::dirichlet_multinomial;
  if (s == "one-hot-factor") return Family::one_hot_factor;
  throw ParameterError("unknown covariate family '" + s + "'");
}

inline std::string to_string(RowConstraint c) {
  switch (c) {
    case RowConstraint::sum_one: return "sum-one";
    case RowConstraint::count_total: return "count-total";
    case RowConstraint::none: return "none";
  }
  return "unknown";
}

/// Random-walk Metropolis settings for the logistic-normal pair sampler.
struct McmcConfig {
  int burn_in = 500;
  int thin = 10;
  double initial_step = 0.5;
  double target_low = 0.2;
  double target_high = 0.4;
  // Acceptance rates outside this band attach a warning to the draw.
  double warn_low = 0.05;
  double warn_high = 0.95;
};

struct CovariateModel {
  Family family = Family::dirichlet;
  Eigen::VectorXd alpha;        // dirichlet, dirichlet-multinomial
  Eigen::VectorXd mean;         // logistic-normal, multivariate-normal
  Eigen::MatrixXd cov;          // logistic-normal, multivariate-normal
  std::int64_t trials = 0;      // dirichlet-multinomial
  Eigen::VectorXd level_probs;  // one-hot-factor
  McmcConfig mcmc;

  static CovariateModel dirichlet(Eigen::VectorXd alpha) {
    CovariateModel m;
    m.family = Family::dirichlet;
    m.alpha = std::move(alpha);
    m.validate();
    return m;
  }
  static CovariateModel logistic_normal(Eigen::VectorXd mean, Eigen::MatrixXd cov) {
    CovariateModel m;
    m.family = Family::logistic_normal;
    m.mean = std::move(mean);
    m.cov = std::move(cov);
    m.validate();
    return m;
  }
  static CovariateModel multivariate_normal(Eigen::VectorXd mean, Eigen::MatrixXd cov) {
    CovariateModel m;
    m.family = Family::multivariate_normal;
    m.mean = std::move(mean);
    m.cov = std::move(cov);
    m.validate();
    return m;
  }
  static CovariateModel dirichlet_multinomial(Eigen::VectorXd alpha, std::int64_t trials) {
    CovariateModel m;
    m.family = Family::dirichlet_multinomial;
    m.alpha = std::move(alpha);
    m.trials = trials;
    m.validate();
    return m;
  }
  static CovariateModel one_hot_factor(Eigen::VectorXd level_probs) {
    CovariateModel m;
    m.family = Family::one_hot_factor;
    m.level_probs = std::move(level_probs);
    m.validate();
    return m;
  }

  int dim() const {
    switch (family) {
      case Family::dirichlet:
      case Family::dirichlet_multinomial: return static_cast<int>(alpha.size());
      case Family::logistic_normal:
      case Family::multivariate_normal: return static_cast<int>(mean.size());
      case Family::one_hot_factor: return static_cast<int>(level_probs.size());
    }
    return 0;
  }

  RowConstraint constraint() const {
    switch (family) {
      case Family::multivariate_normal: return RowConstraint::none;
      case Family::dirichlet_multinomial: return RowConstraint::count_total;
      default: return RowConstraint::sum_one;
    }
  }

  bool sum_constrained() const { return constraint() != RowConstraint::none; }

  void validate() const {
    switch (family) {
      case Family::dirichlet:
      case Family::dirichlet_multinomial:
        if (alpha.size() < 1) throw ParameterError("concentration vector is empty");
        for (Eigen::Index k = 0; k < alpha.size(); ++k)
          if (!(alpha[k] > 0.0) || !std::isfinite(alpha[k]))
            throw ParameterError("concentration entries must be finite and strictly positive");
        if (family == Family::dirichlet_multinomial && trials < 1)
          throw ParameterError("dirichlet-multinomial trial count must be at least 1");
        break;
      case Family::logistic_normal:
      case Family::multivariate_normal: {
        if (mean.size() < 1) throw ParameterError("mean vector is empty");
        if (cov.rows() != mean.size() || cov.cols() != mean.size())
          throw ParameterError("covariance must be p x p with p = length of the mean");
        if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, cov.cwiseAbs().maxCoeff()))
          throw ParameterError("covariance must be symmetric");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -1e-8) throw ParameterError("covariance must be positive semidefinite");
        break;
      }
      case Family::one_hot_factor: {
        if (level_probs.size() < 1) throw ParameterError("level probability vector is empty");
        if (level_probs.minCoeff() < 0.0) throw ParameterError("level probabilities must be nonnegative");
        if (std::abs(level_probs.sum() - 1.0) > 1e-12) throw ParameterError("level probabilities must sum to 1");
        break;
      }
    }
  }
};

struct DataSet {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  RowConstraint constraint = RowConstraint::sum_one;
  std::int64_t total = 1;  // count-total rows sum to this

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index p() const { return X.cols(); }
};

/// First row violating the model's row constraint, or nullopt. Sum-one rows
/// are checked within `tol`, count rows exactly.
inline std::optional<Eigen::Index> find_constraint_violation(const CovariateModel& model, const Eigen::MatrixXd& X,
                                                             double tol = 1e-6) {
  if (X.cols() != model.dim()) return Eigen::Index{0};
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    const auto row = X.row(r);
    switch (model.constraint()) {
      case RowConstraint::sum_one:
        if (row.minCoeff() < 0.0 || std::abs(row.sum() - 1.0) > tol) return r;
        break;
      case RowConstraint::count_total: {
        double s = 0.0;
        for (Eigen::Index k = 0; k < row.size(); ++k) {
          if (row[k] < 0.0 || row[k] != std::floor(row[k])) return r;
          s += row[k];
        }
        if (s != static_cast<double>(model.trials)) return r;
        break;
      }
      case RowConstraint::none:
        if (!row.allFinite()) return r;
        break;
    }
  }
  return std::nullopt;
}

namespace detail {

// Symmetric PSD square root factor: returns L with L L^T = S.
inline Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& S) {
  Eigen::LLT<Eigen::MatrixXd> llt(S);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal();
}

inline double log_sigmoid(double u) { return u >= 0 ? -std::log1p(std::exp(-u)) : u - std::log1p(std::exp(u)); }

// Gaussian conditional of coordinates `a` given coordinates `b`:
// mean(x_b) = mu_a + coef * (x_b - mu_b), covariance cond_cov.
struct GaussianConditional {
  std::vector<int> a, b;
  Eigen::VectorXd mu_a, mu_b;
  Eigen::MatrixXd coef;
  Eigen::MatrixXd cond_cov;

  GaussianConditional() = default;
  GaussianConditional(const Eigen::VectorXd& mu, const Eigen::MatrixXd& S, std::vector<int> keep, std::vector<int> given)
      : a(std::move(keep)), b(std::move(given)) {
    const auto na = static_cast<Eigen::Index>(a.size());
    const auto nb = static_cast<Eigen::Index>(b.size());
    mu_a.resize(na);
    mu_b.resize(nb);
    Eigen::MatrixXd Saa(na, na), Sab(na, nb), Sbb(nb, nb);
    for (Eigen::Index r = 0; r < na; ++r) {
      mu_a[r] = mu[a[r]];
      for (Eigen::Index c = 0; c < na; ++c) Saa(r, c) = S(a[r], a[c]);
      for (Eigen::Index c = 0; c < nb; ++c) Sab(r, c) = S(a[r], b[c]);
    }
    for (Eigen::Index r = 0; r < nb; ++r) {
      mu_b[r] = mu[b[r]];
      for (Eigen::Index c = 0; c < nb; ++c) Sbb(r, c) = S(b[r], b[c]);
    }
    if (nb > 0) {
      Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(Sbb);
      coef = Sab * cod.pseudoInverse();
      cond_cov = Saa - coef * Sab.transpose();
    } else {
      coef = Eigen::MatrixXd::Zero(na, 0);
      cond_cov = Saa;
    }
    cond_cov = 0.5 * (cond_cov + cond_cov.transpose());
  }

  template <typename Getter>
  Eigen::VectorXd mean(Getter&& x_of) const {
    Eigen::VectorXd d(static_cast<Eigen::Index>(b.size()));
    for (std::size_t k = 0; k < b.size(); ++k) d[static_cast<Eigen::Index>(k)] = x_of(b[k]) - mu_b[static_cast<Eigen::Index>(k)];
    return mu_a + coef * d;
  }
};

}  // namespace detail

/// Pair draw plus the sampler diagnostics that go with it.
struct PairDraws {
  std::vector<std::pair<double, double>> pairs;
  bool exchangeable_only = false;  // MCMC: exchangeable with the observation, not independent
  std::vector<std::string> warnings;
};

/// Conditional sampler for (X_i, X_j) given all other coordinates under a
/// fixed model. Construction does the per-pair linear algebra once; rows
/// are then prepared and drawn from cheaply.
class PairSampler {
 public:
  struct Row {
    double a = 0.0, b = 0.0;  // observed pair
    double c = 0.0;           // pair sum (sum-constrained families)
    bool degenerate = false;
    Eigen::Vector2d cond_mean = Eigen::Vector2d::Zero();
    double log_scale = 0.0;  // logistic-normal: log(c / x_ref)
  };

  PairSampler(const CovariateModel& model, int i, int j) : model_(&model), i_(i), j_(j) {
    const int p = model.dim();
    if (i == j) throw ParameterError("pair indices must differ");
    if (i < 0 || j < 0 || i >= p || j >= p) throw ParameterError("pair index out of range");
    if (model.family == Family::multivariate_normal) {
      std::vector<int> rest;
      for (int k = 0; k < p; ++k)
        if (k != i && k != j) rest.push_back(k);
      gauss_ = detail::GaussianConditional(model.mean, model.cov, {i, j}, rest);
      factor_ = detail::psd_factor(gauss_.cond_cov);
    } else if (model.family == Family::logistic_normal) {
      if (p < 3) throw ParameterError("logistic-normal pair resampling needs p >= 3");
      ref_ = 0;
      while (ref_ == i || ref_ == j) ++ref_;
      // Additive log-ratio coordinates w_k = log(x_k / x_ref), k != ref.
      std::vector<int> alr;
      for (int k = 0; k < p; ++k)
        if (k != ref_) alr.push_back(k);
      const auto q = static_cast<Eigen::Index>(alr.size());
      Eigen::MatrixXd W(q, q);
      Eigen::VectorXd m(q);
      for (Eigen::Index r = 0; r < q; ++r) {
        m[r] = model.mean[alr[r]] - model.mean[ref_];
        for (Eigen::Index c = 0; c < q; ++c)
          W(r, c) = model.cov(alr[r], alr[c]) - model.cov(alr[r], ref_) - model.cov(ref_, alr[c]) + model.cov(ref_, ref_);
      }
      std::vector<int> keep, given;
      for (Eigen::Index r = 0; r < q; ++r) {
        if (alr[r] == i || alr[r] == j)
          keep.push_back(static_cast<int>(r));
        else
          given.push_back(static_cast<int>(r));
      }
      // keep is ordered by coordinate; make sure slot 0 is i.
      if (alr[keep[0]] != i) std::swap(keep[0], keep[1]);
      gauss_ = detail::GaussianConditional(m, W, keep, given);
      alr_ = std::move(alr);
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(gauss_.cond_cov.topLeftCorner<2, 2>());
      ln_singular_ = es.eigenvalues().minCoeff() <= 1e-12 * std::max(1.0, es.eigenvalues().maxCoeff());
      if (!ln_singular_) precision_ = gauss_.cond_cov.topLeftCorner<2, 2>().inverse();
    }
  }

  int i() const { return i_; }
  int j() const { return j_; }
  bool iid() const { return model_->family != Family::logistic_normal; }

  template <typename RowVec>
  Row prepare(const RowVec& x) const {
    Row r;
    r.a = x[i_];
    r.b = x[j_];
    r.c = r.a + r.b;
    switch (model_->family) {
      case Family::dirichlet:
      case Family::dirichlet_multinomial:
      case Family::one_hot_factor: r.degenerate = r.c <= 0.0; break;
      case Family::multivariate_normal:
        r.cond_mean = gauss_.mean([&](int k) { return x[k]; });
        break;
      case Family::logistic_normal: {
        r.degenerate = r.c <= 0.0 || ln_singular_;
        if (!r.degenerate) {
          const double log_ref = std::log(x[ref_]);
          r.cond_mean = gauss_.mean([&](int idx) { return std::log(x[alr_[idx]]) - log_ref; });
          r.log_scale = std::log(r.c) - log_ref;
        }
        break;
      }
    }
    return r;
  }

  /// One draw for i.i.d. families.
  std::pair<double, double> draw_one(const Row& r, Philox& rng) const {
    if (r.degenerate) return {r.a, r.b};
    switch (model_->family) {
      case Family::dirichlet: {
        const double B = beta_draw(rng, model_->alpha[i_], model_->alpha[j_]);
        return {B * r.c, (1.0 - B) * r.c};
      }
      case Family::dirichlet_multinomial: {
        const auto trials = static_cast<std::int64_t>(std::llround(r.c));
        const auto a = beta_binomial_draw(rng, trials, model_->alpha[i_], model_->alpha[j_]);
        return {static_cast<double>(a), static_cast<double>(trials - a)};
      }
      case Family::one_hot_factor: {
        const double pi = model_->level_probs[i_], pj = model_->level_probs[j_];
        if (pi + pj <= 0.0) return {r.a, r.b};
        return uniform01(rng) * (pi + pj) < pi ? std::pair{r.c, 0.0} : std::pair{0.0, r.c};
      }
      case Family::multivariate_normal: {
        const Eigen::Vector2d z(standard_normal(rng), standard_normal(rng));
        const Eigen::Vector2d v = r.cond_mean + factor_ * z;
        return {v[0], v[1]};
      }
      case Family::logistic_normal: break;
    }
    throw ContractError("draw_one called on an MCMC family");
  }

  /// Append `count` draws for a prepared row. For the logistic-normal family
  /// this runs a serial exchangeable MCMC construction around the observed
  /// split; the returned acceptance rate (or -1 for i.i.d. families) feeds
  /// the convergence warning.
  double draw(const Row& r, Philox& rng, std::size_t count, std::vector<std::pair<double, double>>& out) const {
    if (iid() || r.degenerate) {
      for (std::size_t k = 0; k < count; ++k) out.push_back(draw_one(r, rng));
      return -1.0;
    }
    return draw_chain(r, rng, count, out);
  }

 private:
  double log_target(const Row& r, double u) const {
    const Eigen::Vector2d w(detail::log_sigmoid(u) + r.log_scale, detail::log_sigmoid(-u) + r.log_scale);
    const Eigen::Vector2d d = w - r.cond_mean;
    return -0.5 * d.dot(precision_ * d);
  }

  double draw_chain(const Row& r, Philox& rng, std::size_t count, std::vector<std::pair<double, double>>& out) const {
    const McmcConfig& cfg = model_->mcmc;
    // Step-size tuning starts from u = 0, a function of the conditioning
    // coordinates only, so the tuned kernel does not depend on the
    // observed split.
    double step = cfg.initial_step;
    double u = 0.0;
    double lt = log_target(r, u);
    int accepted = 0, block = 0;
    for (int s = 0; s < cfg.burn_in; ++s) {
      const double prop = u + step * standard_normal(rng);
      const double lp = log_target(r, prop);
      if (std::log(uniform01(rng)) < lp - lt) {
        u = prop;
        lt = lp;
        ++accepted;
      }
      if (++block == 50) {
        const double rate = accepted / 50.0;
        if (rate < cfg.target_low) step *= 0.7;
        if (rate > cfg.target_high) step *= 1.4;
        accepted = 0;
        block = 0;
      }
    }

    const double u_obs = std::log(r.a) - std::log(r.b);
    const auto backward = static_cast<std::size_t>(uniform_index(rng, count + 1));
    std::size_t moves = 0, accepts = 0;
    auto run = [&](std::size_t outputs) {
      double cur = u_obs;
      double cur_lt = log_target(r, cur);
      for (std::size_t k = 0; k < outputs; ++k) {
        for (int t = 0; t < cfg.thin; ++t) {
          const double prop = cur + step * standard_normal(rng);
          const double lp = log_target(r, prop);
          ++moves;
          if (std::log(uniform01(rng)) < lp - cur_lt) {
            cur = prop;
            cur_lt = lp;
            ++accepts;
          }
        }
        const double t = std::exp(detail::log_sigmoid(cur));
        out.emplace_back(t * r.c, (1.0 - t) * r.c);
      }
    };
    // The kernel is reversible, so the backward leg is simulated forward.
    run(backward);
    run(count - backward);
    return moves ? static_cast<double>(accepts) / static_cast<double>(moves) : -1.0;
  }

  const CovariateModel* model_;
  int i_, j_;
  int ref_ = 0;
  std::vector<int> alr_;
  detail::GaussianConditional gauss_;
  Eigen::MatrixXd factor_;
  Eigen::Matrix2d precision_ = Eigen::Matrix2d::Identity();
  bool ln_singular_ = false;
};

/// Conditional law of a single coordinate given all others under a
/// multivariate normal model (the non-compositional Univariate benchmark).
class GaussianCoordinateSampler {
 public:
  GaussianCoordinateSampler(const CovariateModel& model, int i) : i_(i) {
    if (model.family != Family::multivariate_normal)
      throw ParameterError("univariate conditional sampling is only defined for multivariate-normal covariates");
    std::vector<int> rest;
    for (int k = 0; k < model.dim(); ++k)
      if (k != i) rest.push_back(k);
    gauss_ = detail::GaussianConditional(model.mean, model.cov, {i}, rest);
    sd_ = std::sqrt(std::max(0.0, gauss_.cond_cov(0, 0)));
  }

  template <typename RowVec>
  double conditional_mean(const RowVec& x) const {
    return gauss_.mean([&](int k) { return x[k]; })[0];
  }
  double draw(double cond_mean, Philox& rng) const { return cond_mean + sd_ * standard_normal(rng); }
  int index() const { return i_; }

 private:
  int i_;
  detail::GaussianConditional gauss_;
  double sd_ = 0.0;
};

/// n i.i.d. rows from the model; row r uses its own sub-stream of `seed`.
inline Eigen::MatrixXd sample_rows(const CovariateModel& model, Eigen::Index n, std::uint64_t seed) {
  model.validate();
  if (n < 1) throw ParameterError("row count must be at least 1");
  const int p = model.dim();
  Eigen::MatrixXd X(n, p);
  Eigen::MatrixXd factor;
  if (model.family == Family::logistic_normal || model.family == Family::multivariate_normal)
    factor = detail::psd_factor(model.cov);
  std::vector<double> probs(static_cast<std::size_t>(p));
  for (Eigen::Index r = 0; r < n; ++r) {
    Philox rng = make_stream(seed, {0x726f7773ULL, static_cast<std::uint64_t>(r)});
    switch (model.family) {
      case Family::dirichlet: {
        double total = 0.0;
        for (int k = 0; k < p; ++k) total += (X(r, k) = gamma_draw(rng, model.alpha[k]));
        X.row(r) /= total;
        break;
      }
      case Family::dirichlet_multinomial: {
        double total = 0.0;
        for (int k = 0; k < p; ++k) total += (probs[static_cast<std::size_t>(k)] = gamma_draw(rng, model.alpha[k]));
        for (auto& v : probs) v /= total;
        const auto counts = multinomial_draw(rng, model.trials, probs);
        for (int k = 0; k < p; ++k) X(r, k) = static_cast<double>(counts[static_cast<std::size_t>(k)]);
        break;
      }
      case Family::one_hot_factor: {
        const double u = uniform01(rng);
        double acc = 0.0;
        int level = p - 1;
        for (int k = 0; k < p; ++k) {
          acc += model.level_probs[k];
          if (u < acc && model.level_probs[k] > 0.0) {
            level = k;
            break;
          }
        }
        while (model.level_probs[level] <= 0.0 && level > 0) --level;
        X.row(r).setZero();
        X(r, level) = 1.0;
        break;
      }
      case Family::multivariate_normal:
      case Family::logistic_normal: {
        Eigen::VectorXd z(p);
        for (int k = 0; k < p; ++k) z[k] = standard_normal(rng);
        Eigen::VectorXd g = model.mean + factor * z;
        if (model.family == Family::logistic_normal) {
          g.array() -= g.maxCoeff();
          g = g.array().exp();
          g /= g.sum();
        }
        X.row(r) = g.transpose();
        break;
      }
    }
  }
  return X;
}

/// K conditional draws of (x_i, x_j) given the other coordinates of x_row.
inline PairDraws conditional_pair_sample(const CovariateModel& model, const Eigen::VectorXd& x_row, int i, int j,
                                         std::size_t K, std::uint64_t seed) {
  model.validate();
  if (x_row.size() != model.dim()) throw ParameterError("row length does not match the model dimension");
  Eigen::MatrixXd one = x_row.transpose();
  if (auto bad = find_constraint_violation(model, one, 1e-9))
    throw DomainError("row is inconsistent with the model's " + to_string(model.constraint()) + " constraint");
  PairSampler sampler(model, i, j);
  const auto row = sampler.prepare(x_row);
  Philox rng = make_stream(seed, {0x70616972ULL, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j)});
  PairDraws out;
  out.pairs.reserve(K);
  const double rate = sampler.draw(row, rng, K, out.pairs);
  out.exchangeable_only = !sampler.iid();
  if (rate >= 0.0 && (rate < model.mcmc.warn_low || rate > model.mcmc.warn_high))
    out.warnings.push_back("MCMC acceptance rate " + std::to_string(rate) + " outside the healthy band");
  return out;
}

struct DirichletFit {
  Eigen::VectorXd alpha;
  int iterations = 0;
  bool converged = false;
  std::optional<std::string> warning;
};

namespace detail {

inline double inverse_digamma(double y) {
  double x = y >= -2.22 ? std::exp(y) + 0.5 : -1.0 / (y + 0.5772156649015329);
  for (int it = 0; it < 8; ++it) x -= (boost::math::digamma(x) - y) / boost::math::trigamma(x);
  return x;
}

}  // namespace detail

/// Maximum-likelihood Dirichlet concentration by Minka's fixed-point
/// iteration. Stops when the largest coordinate change drops below 1e-8 or
/// after `max_iterations`.
inline DirichletFit fit_dirichlet(const Eigen::MatrixXd& X, int max_iterations = 1000, double tol = 1e-8) {
  const Eigen::Index n = X.rows(), p = X.cols();
  if (p < 2) throw ParameterError("Dirichlet fitting needs at least two components");
  if (n < 1) throw ParameterError("Dirichlet fitting needs at least one row");
  if (!(X.array() > 0.0).all())
    throw DomainError("Dirichlet fitting requires strictly positive entries; add a pseudo-count and renormalize first");
  for (Eigen::Index r = 0; r < n; ++r)
    if (std::abs(X.row(r).sum() - 1.0) > 1e-6) throw DomainError("row " + std::to_string(r) + " does not sum to 1");

  const Eigen::VectorXd mean_log = X.array().log().colwise().mean().transpose();
  const Eigen::VectorXd m1 = X.colwise().mean().transpose();
  const double m2 = X.col(0).array().square().mean();
  double precision = (m1[0] - m2) / (m2 - m1[0] * m1[0]);
  if (!std::isfinite(precision) || precision <= 0.0) precision = static_cast<double>(p);

  DirichletFit fit;
  fit.alpha = m1 * precision;
  constexpr double blowup = 1e10;
  for (int it = 1; it <= max_iterations; ++it) {
    const double psi_total = boost::math::digamma(fit.alpha.sum());
    Eigen::VectorXd next(p);
    for (Eigen::Index k = 0; k < p; ++k) next[k] = detail::inverse_digamma(psi_total + mean_log[k]);
    const double change = (next - fit.alpha).cwiseAbs().maxCoeff();
    fit.alpha = next;
    fit.iterations = it;
    if (change < tol) {
      fit.converged = true;
      return fit;
    }
    if (!fit.alpha.allFinite() || fit.alpha.maxCoeff() > blowup) break;
  }
  fit.warning = "Dirichlet fixed point did not converge after " + std::to_string(fit.iterations) +
                " iterations (degenerate likelihood?); returning the last iterate";
  return fit;
}

}  // namespace bcp
