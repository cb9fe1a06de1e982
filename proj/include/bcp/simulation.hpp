#pragma once

// Simulation scenarios, benchmark methods and error/power metrics.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bcp/dcrt.hpp"
#include "bcp/errors.hpp"
#include "bcp/models.hpp"
#include "bcp/parallel.hpp"
#include "bcp/pch.hpp"
#include "bcp/rng.hpp"
#include "bcp/selection.hpp"

namespace bcp {

enum class Design {
  selection,  // s non-nulls with N(0, SNR^2) coefficients
  single      // tested column has coefficient SNR, s - 1 nuisance non-nulls N(0, 1)
};

struct SimScenario {
  std::string name = "custom";
  CovariateModel model;
  int n = 100;
  int s = 3;
  Transform response_transform = Transform::log;
  Design design = Design::selection;
  std::vector<double> snr_grid{0.5, 1.0, 2.0};
  int reps = 200;
  int K = 500;
  std::vector<std::string> methods;
  double alpha_selection = 0.1;
  double alpha_single = 0.05;
  std::vector<int> dense;  // nonempty: BCP methods also run conditioned on D, tagged "[D]"
  SpeedupConfig speedups;
  DcrtOptions dcrt;
  bool estimate_model = false;  // resample from fit_dirichlet(X) instead of the truth

  int p() const { return model.dim(); }

  void validate() const {
    model.validate();
    const int p = model.dim();
    if (p < 3) throw ParameterError("scenario needs p >= 3");
    if (n < 2) throw ParameterError("scenario needs n >= 2");
    if (s < 0 || s >= p) throw ParameterError("s must lie in [0, p)");
    if (design == Design::single && s < 1) throw ParameterError("single-test design needs s >= 1");
    if (reps < 1 || K < 1) throw ParameterError("reps and K must be positive");
    if (snr_grid.empty()) throw ParameterError("SNR grid is empty");
    if (!(alpha_selection > 0 && alpha_selection < 1) || !(alpha_single > 0 && alpha_single < 1))
      throw ParameterError("alpha levels must lie in (0, 1)");
    if (estimate_model && model.family != Family::dirichlet)
      throw ParameterError("estimated-model resampling is only available for Dirichlet covariates");
    for (int d : dense)
      if (d < 0 || d >= p) throw ParameterError("dense index out of range");
    speedups.validate();
  }
};

struct Replicate {
  DataSet data;
  IndexSet true_S;
  Eigen::VectorXd beta;
  int tested = -1;  // single design: the column whose coefficient is SNR
};

namespace detail {
constexpr std::uint64_t tag_rep = 0x726570ULL;
constexpr std::uint64_t tag_dcrt = 0x64637274ULL;
constexpr std::uint64_t tag_roles = 0x726f6c65ULL;

inline std::vector<int> sample_without_replacement(Philox& rng, int n, int k, int avoid = -1) {
  std::vector<int> pool;
  for (int v = 0; v < n; ++v)
    if (v != avoid) pool.push_back(v);
  shuffle(rng, pool);
  pool.resize(static_cast<std::size_t>(k));
  std::sort(pool.begin(), pool.end());
  return pool;
}
}  // namespace detail

/// Draw one replicate. X, the non-null positions, the coefficient
/// directions and the noise depend only on (rep, master_seed), so the SNR
/// grid is traversed with common random numbers.
inline Replicate generate_replicate(const SimScenario& sc, int rep, std::uint64_t master_seed, double snr) {
  const int p = sc.p();
  Replicate out;
  const std::uint64_t key = stream_key(master_seed, {detail::tag_rep, static_cast<std::uint64_t>(rep)});
  out.data.X = sample_rows(sc.model, sc.n, key);
  out.data.constraint = sc.model.constraint();
  out.data.total = sc.model.family == Family::dirichlet_multinomial ? sc.model.trials : 1;

  Philox rng = make_stream(key, {0x62657461ULL});
  out.beta = Eigen::VectorXd::Zero(p);
  if (sc.design == Design::selection) {
    const auto support = detail::sample_without_replacement(rng, p, sc.s);
    for (int j : support) out.beta[j] = snr * standard_normal(rng);
  } else {
    out.tested = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(p)));
    out.beta[out.tested] = snr;
    const auto nuisance = detail::sample_without_replacement(rng, p, sc.s - 1, out.tested);
    for (int j : nuisance) out.beta[j] = standard_normal(rng);
  }
  for (int j = 0; j < p; ++j)
    if (out.beta[j] != 0.0) out.true_S.push_back(j);

  Philox noise = make_stream(key, {0x6e6f6973ULL});
  const Eigen::MatrixXd design = apply_transform(sc.response_transform, out.data.X);
  out.data.y = design * out.beta;
  for (Eigen::Index r = 0; r < out.data.y.size(); ++r) out.data.y[r] += standard_normal(noise);
  return out;
}

enum class MethodFamily { bcp, loo, univariate };
enum class MethodKind { single, bh, holm, holm_plain };

struct MethodSpec {
  std::string name;
  MethodFamily family = MethodFamily::bcp;
  MethodKind kind = MethodKind::bh;
  std::string s_bar_rule;  // "p-1", "p/2", "p/4", "s+1", "d-1"
  Combiner combiner = Combiner::simes;
};

inline MethodSpec parse_method(const std::string& name) {
  MethodSpec m;
  m.name = name;
  std::string rest;
  if (name.rfind("BCP(", 0) == 0) {
    const auto close = name.find(')');
    if (close == std::string::npos) throw ParameterError("malformed method '" + name + "'");
    m.family = MethodFamily::bcp;
    m.s_bar_rule = name.substr(4, close - 4);
    static const std::vector<std::string> rules{"p-1", "p/2", "p/4", "s+1", "d-1"};
    if (std::find(rules.begin(), rules.end(), m.s_bar_rule) == rules.end())
      throw ParameterError("unknown s_bar rule '" + m.s_bar_rule + "' in method '" + name + "'");
    rest = name.substr(close + 1);
  } else if (name.rfind("LOO", 0) == 0) {
    m.family = MethodFamily::loo;
    rest = name.substr(3);
  } else if (name.rfind("Univariate", 0) == 0) {
    m.family = MethodFamily::univariate;
    rest = name.substr(10);
  } else {
    throw ParameterError("unknown method '" + name + "'");
  }
  if (rest.empty())
    m.kind = MethodKind::single;
  else if (rest == "-BH")
    m.kind = MethodKind::bh;
  else if (rest == "-Holm")
    m.kind = MethodKind::holm;
  else if (rest == "-Holm-plain" && m.family == MethodFamily::bcp)
    m.kind = MethodKind::holm_plain;
  else if (rest == "-Holm-bonferroni" && m.family == MethodFamily::bcp) {
    m.kind = MethodKind::holm;
    m.combiner = Combiner::bonferroni;
  } else
    throw ParameterError("unknown method suffix in '" + name + "'");
  return m;
}

inline int resolve_s_bar(const std::string& rule, int p, int s, int d) {
  int v = 0;
  if (rule == "p-1") v = p - 1;
  else if (rule == "p/2") v = p / 2;
  else if (rule == "p/4") v = p / 4;
  else if (rule == "s+1") v = s + 1;
  else if (rule == "d-1") v = d - 1;
  return std::clamp(v, 1, d - 1);
}

struct MethodOutcome {
  std::string method;
  bool selection = false;
  IndexSet rejected;
  std::optional<bool> null_rejected;  // single test on a null column
  std::optional<bool> alt_rejected;   // single test on a non-null column
};

namespace detail {

inline IndexSet to_set(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace detail

/// Run every configured method on one replicate.
inline std::vector<MethodOutcome> run_methods(const SimScenario& sc, const Replicate& rep, int rep_index, int snr_index,
                                              std::uint64_t master_seed, unsigned threads = 1) {
  const int p = sc.p();
  const std::uint64_t dseed =
      stream_key(master_seed, {detail::tag_dcrt, static_cast<std::uint64_t>(rep_index), static_cast<std::uint64_t>(snr_index)});
  Philox roles = make_stream(master_seed, {detail::tag_roles, static_cast<std::uint64_t>(rep_index),
                                           static_cast<std::uint64_t>(snr_index)});

  CovariateModel resample_model = sc.model;
  if (sc.estimate_model) resample_model = CovariateModel::dirichlet(fit_dirichlet(rep.data.X).alpha);
  DcrtOptions opt = sc.dcrt;
  opt.threads = threads;
  DcrtEngine engine(rep.data, resample_model, dseed, opt);

  // Columns whose role drives the single-test metrics.
  IndexSet nulls, alts;
  for (int j = 0; j < p; ++j) (rep.beta[j] != 0.0 ? alts : nulls).push_back(j);
  std::optional<int> null_col, alt_col;
  if (!nulls.empty()) null_col = nulls[uniform_index(roles, nulls.size())];
  if (sc.design == Design::single) {
    if (rep.beta[rep.tested] != 0.0) alt_col = rep.tested;
  } else if (!alts.empty()) {
    alt_col = alts[uniform_index(roles, alts.size())];
  }
  const int loo_drop = static_cast<int>(uniform_index(roles, static_cast<std::uint64_t>(p)));
  auto loo_drop_for = [&](int col) {
    // The dropped column is uniform over the columns other than the one tested.
    Philox r = make_stream(master_seed, {detail::tag_roles, static_cast<std::uint64_t>(rep_index),
                                         static_cast<std::uint64_t>(snr_index), static_cast<std::uint64_t>(col) + 1});
    const int k = static_cast<int>(uniform_index(r, static_cast<std::uint64_t>(p - 1)));
    return k >= col ? k + 1 : k;
  };

  std::vector<MethodSpec> specs;
  for (const auto& name : sc.methods) specs.push_back(parse_method(name));

  bool need_full = false, need_dense = !sc.dense.empty();
  IndexSet single_cols;
  for (const auto& m : specs) {
    if (m.family != MethodFamily::bcp) continue;
    if (m.kind == MethodKind::single) {
      if (null_col) single_cols.push_back(*null_col);
      if (alt_col) single_cols.push_back(*alt_col);
    } else {
      need_full = true;
    }
  }
  std::vector<int> all(static_cast<std::size_t>(p));
  for (int k = 0; k < p; ++k) all[static_cast<std::size_t>(k)] = k;
  std::optional<PValueMatrix> full, dense;
  if (need_full)
    full = compute_matrix(engine, all, sc.K, sc.speedups, false);
  else if (!single_cols.empty())
    full = compute_matrix(engine, all, sc.K, sc.speedups, false, detail::to_set(single_cols));
  if (need_dense) {
    IndexSet D = detail::to_set(sc.dense);
    // Entries of the dense matrix coincide with the full one unless columns stop early.
    if (need_full && !sc.speedups.column_early_stop)
      dense = full->submatrix(D);
    else
      dense = compute_matrix(engine, D, sc.K, sc.speedups, false);
  }

  std::vector<MethodOutcome> out;
  auto run_bcp = [&](const MethodSpec& m, const PValueMatrix& mat, const std::string& tag) {
    MethodOutcome o;
    o.method = m.name + tag;
    const int d = mat.size();
    const int s_bar = resolve_s_bar(m.s_bar_rule, p, sc.s, d);
    if (m.kind == MethodKind::single) {
      auto pos_of = [&](int label) {
        const auto it = std::find(mat.labels.begin(), mat.labels.end(), label);
        return it == mat.labels.end() ? -1 : static_cast<int>(it - mat.labels.begin());
      };
      if (null_col && pos_of(*null_col) >= 0)
        o.null_rejected = single_test(mat, pos_of(*null_col), s_bar, m.combiner) <= sc.alpha_single;
      if (alt_col && pos_of(*alt_col) >= 0)
        o.alt_rejected = single_test(mat, pos_of(*alt_col), s_bar, m.combiner) <= sc.alpha_single;
    } else {
      o.selection = true;
      SelectionResult r;
      if (m.kind == MethodKind::bh)
        r = bh_select(mat, s_bar, sc.alpha_selection);
      else if (m.kind == MethodKind::holm)
        r = adaptive_holm(mat, s_bar, sc.alpha_selection, m.combiner);
      else
        r = plain_holm(mat, s_bar, sc.alpha_selection, m.combiner);
      o.rejected = detail::to_set(r.rejected);
    }
    out.push_back(std::move(o));
  };

  for (const auto& m : specs) {
    if (m.family == MethodFamily::bcp) {
      run_bcp(m, *full, "");
      if (dense && m.kind != MethodKind::single) run_bcp(m, *dense, "[D]");
      continue;
    }
    MethodOutcome o;
    o.method = m.name;
    if (m.kind == MethodKind::single) {
      auto test = [&](int col) {
        const BasePValue bp = m.family == MethodFamily::loo ? engine.loo_pvalue(col, loo_drop_for(col), sc.K)
                                                            : engine.univariate_pvalue(col, sc.K);
        return bp.pvalue <= sc.alpha_single;
      };
      if (null_col) o.null_rejected = test(*null_col);
      if (alt_col) o.alt_rejected = test(*alt_col);
    } else {
      o.selection = true;
      std::vector<int> cols;
      for (int j = 0; j < p; ++j)
        if (m.family != MethodFamily::loo || j != loo_drop) cols.push_back(j);
      std::vector<double> pv(cols.size());
      parallel_for(cols.size(), threads, [&](std::size_t k) {
        pv[k] = m.family == MethodFamily::loo ? engine.loo_pvalue(cols[k], loo_drop, sc.K).pvalue
                                              : engine.univariate_pvalue(cols[k], sc.K).pvalue;
      });
      const auto pos = m.kind == MethodKind::bh ? bh_positions(pv, sc.alpha_selection)
                                                : holm_positions(pv, sc.alpha_selection);
      for (int k : pos) o.rejected.push_back(cols[static_cast<std::size_t>(k)]);
      o.rejected = detail::to_set(o.rejected);
    }
    out.push_back(std::move(o));
  }
  return out;
}

struct MetricRow {
  std::string method;
  double snr = 0.0;
  std::string metric;  // type_I_error, power, FDR, FWER, average_power
  double value = 0.0;
  double se = 0.0;
  int reps = 0;
};

namespace detail {

inline MetricRow binary_rate(const std::string& method, double snr, const std::string& metric, const std::vector<bool>& v) {
  MetricRow r{method, snr, metric, 0.0, 0.0, static_cast<int>(v.size())};
  if (v.empty()) return r;
  double c = 0;
  for (bool b : v) c += b;
  r.value = c / static_cast<double>(v.size());
  r.se = std::sqrt(r.value * (1.0 - r.value) / static_cast<double>(v.size()));
  return r;
}

inline MetricRow mean_rate(const std::string& method, double snr, const std::string& metric, const std::vector<double>& v) {
  MetricRow r{method, snr, metric, 0.0, 0.0, static_cast<int>(v.size())};
  if (v.empty()) return r;
  double sum = 0.0;
  for (double x : v) sum += x;
  r.value = sum / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - r.value) * (x - r.value);
    r.se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  }
  return r;
}

}  // namespace detail

/// False discovery proportion |R \ S| / max(|R|, 1).
inline double false_discovery_proportion(const IndexSet& rejected, const IndexSet& S) {
  if (rejected.empty()) return 0.0;
  int false_count = 0;
  for (int r : rejected)
    if (std::find(S.begin(), S.end(), r) == S.end()) ++false_count;
  return static_cast<double>(false_count) / static_cast<double>(rejected.size());
}

/// |R ∩ S| / |S|, or 0 when S is empty.
inline double power_fraction(const IndexSet& rejected, const IndexSet& S) {
  if (S.empty()) return 0.0;
  int hits = 0;
  for (int r : rejected)
    if (std::find(S.begin(), S.end(), r) != S.end()) ++hits;
  return static_cast<double>(hits) / static_cast<double>(S.size());
}

/// Aggregate outcomes of one method at one SNR over replicates.
/// `outcomes[r]` pairs with `truths[r]`.
inline std::vector<MetricRow> compute_metrics(const std::string& method, double snr,
                                              const std::vector<MethodOutcome>& outcomes,
                                              const std::vector<IndexSet>& truths) {
  if (outcomes.size() != truths.size()) throw ParameterError("outcome and truth counts differ");
  std::vector<MetricRow> rows;
  if (outcomes.empty()) return rows;
  if (outcomes.front().selection) {
    std::vector<double> fdp, pow;
    std::vector<bool> fam;
    for (std::size_t r = 0; r < outcomes.size(); ++r) {
      const double f = false_discovery_proportion(outcomes[r].rejected, truths[r]);
      fdp.push_back(f);
      fam.push_back(f > 0.0);
      pow.push_back(power_fraction(outcomes[r].rejected, truths[r]));
    }
    rows.push_back(detail::mean_rate(method, snr, "FDR", fdp));
    rows.push_back(detail::binary_rate(method, snr, "FWER", fam));
    rows.push_back(detail::mean_rate(method, snr, "average_power", pow));
  } else {
    std::vector<bool> t1, pw;
    for (const auto& o : outcomes) {
      if (o.null_rejected) t1.push_back(*o.null_rejected);
      if (o.alt_rejected) pw.push_back(*o.alt_rejected);
    }
    if (!t1.empty()) rows.push_back(detail::binary_rate(method, snr, "type_I_error", t1));
    if (!pw.empty()) rows.push_back(detail::binary_rate(method, snr, "power", pw));
  }
  return rows;
}

struct SimulationOutput {
  std::vector<MetricRow> metrics;
  // outcomes[snr_index][rep] for every method, plus the truths.
  std::vector<std::vector<std::vector<MethodOutcome>>> outcomes;
  std::vector<std::vector<IndexSet>> truths;
};

/// Run the whole scenario. Replicates are independent tasks; results do
/// not depend on the thread count.
inline SimulationOutput run_simulation(const SimScenario& sc, std::uint64_t master_seed, unsigned threads = 0) {
  sc.validate();
  if (threads == 0) threads = default_threads();
  SimulationOutput res;
  res.outcomes.resize(sc.snr_grid.size());
  res.truths.resize(sc.snr_grid.size());
  for (std::size_t g = 0; g < sc.snr_grid.size(); ++g) {
    res.outcomes[g].resize(static_cast<std::size_t>(sc.reps));
    res.truths[g].resize(static_cast<std::size_t>(sc.reps));
  }
  const std::size_t tasks = sc.snr_grid.size() * static_cast<std::size_t>(sc.reps);
  parallel_for(tasks, threads, [&](std::size_t t) {
    const std::size_t g = t / static_cast<std::size_t>(sc.reps);
    const int r = static_cast<int>(t % static_cast<std::size_t>(sc.reps));
    const Replicate rep = generate_replicate(sc, r, master_seed, sc.snr_grid[g]);
    res.truths[g][static_cast<std::size_t>(r)] = rep.true_S;
    res.outcomes[g][static_cast<std::size_t>(r)] = run_methods(sc, rep, r, static_cast<int>(g), master_seed, 1);
  });
  for (std::size_t g = 0; g < sc.snr_grid.size(); ++g) {
    if (res.outcomes[g].empty()) continue;
    const std::size_t methods = res.outcomes[g].front().size();
    for (std::size_t m = 0; m < methods; ++m) {
      std::vector<MethodOutcome> col;
      for (const auto& rep : res.outcomes[g]) col.push_back(rep[m]);
      auto rows = compute_metrics(col.front().method, sc.snr_grid[g], col, res.truths[g]);
      res.metrics.insert(res.metrics.end(), rows.begin(), rows.end());
    }
  }
  return res;
}

// ---------------------------------------------------------------- presets

inline Eigen::MatrixXd toeplitz(int p, double rho) {
  Eigen::MatrixXd S(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) S(i, j) = std::pow(rho, std::abs(i - j));
  return S;
}

/// Concentrations alpha_j = 1 / (1 + exp((100 j / p - 50) / 5)), j = 1..p,
/// which reduces to the sparse 100-column design at p = 100.
inline Eigen::VectorXd sparse_dm_alpha(int p) {
  Eigen::VectorXd a(p);
  for (int j = 1; j <= p; ++j) a[j - 1] = 1.0 / (1.0 + std::exp((100.0 * j / p - 50.0) / 5.0));
  return a;
}

inline std::vector<std::string> preset_names() {
  return {"dirichlet-desk",        "dirichlet-full",     "dirichlet-single",   "dirichlet-single-full",
          "dirichlet-estimated",   "logistic-normal-desk", "logistic-normal-full", "normal-desk",
          "normal-full",           "dm-sparse-desk",     "dm-sparse-full",     "speedups-desk"};
}

inline SimScenario preset(const std::string& name) {
  SimScenario sc;
  sc.name = name;
  const std::vector<std::string> compositional{"BCP(p-1)",    "BCP(p/2)",    "BCP(s+1)",    "BCP(p-1)-BH",
                                               "BCP(p/2)-BH", "BCP(s+1)-BH", "BCP(p-1)-Holm", "BCP(p/2)-Holm",
                                               "BCP(s+1)-Holm", "BCP(p/2)-Holm-plain", "LOO", "LOO-BH", "LOO-Holm"};
  auto desk = [&](CovariateModel m) {
    sc.model = std::move(m);
    sc.n = 100;
    sc.s = 3;
    sc.K = 500;
    sc.reps = 200;
    sc.snr_grid = {0.5, 1.0, 2.0};
  };
  auto full = [&](CovariateModel m) {
    sc.model = std::move(m);
    sc.n = 100;
    sc.s = 10;
    sc.K = 1500;
    sc.reps = 200;
    sc.snr_grid = {0.25, 0.5, 1.0, 2.0, 4.0};
  };
  if (name == "dirichlet-desk" || name == "dirichlet-full" || name == "dirichlet-estimated" || name == "speedups-desk") {
    const int p = name == "dirichlet-full" ? 100 : 20;
    const auto m = CovariateModel::dirichlet(Eigen::VectorXd::Constant(p, 2.0));
    name == "dirichlet-full" ? full(m) : desk(m);
    sc.methods = compositional;
    if (name == "dirichlet-estimated") {
      sc.estimate_model = true;
      sc.methods = {"BCP(p-1)", "BCP(p/2)", "BCP(s+1)", "BCP(p/2)-BH", "BCP(s+1)-BH", "BCP(p/2)-Holm", "BCP(s+1)-Holm"};
    }
    if (name == "speedups-desk") {
      sc.speedups = SpeedupConfig::all();
      sc.snr_grid = {2.0};
      sc.reps = 50;
      sc.methods = {"BCP(p/2)-BH", "BCP(p/2)-Holm"};
    }
  } else if (name == "dirichlet-single" || name == "dirichlet-single-full") {
    const int p = name == "dirichlet-single" ? 20 : 100;
    const auto m = CovariateModel::dirichlet(Eigen::VectorXd::Constant(p, 2.0));
    name == "dirichlet-single" ? desk(m) : full(m);
    sc.design = Design::single;
    sc.snr_grid = {0.0, 1.0, 2.0};
    sc.reps = name == "dirichlet-single" ? 1000 : 200;
    sc.methods = {"BCP(p-1)", "BCP(p/2)", "BCP(s+1)", "LOO"};
  } else if (name == "logistic-normal-desk" || name == "logistic-normal-full") {
    const int p = name == "logistic-normal-desk" ? 20 : 100;
    const auto m = CovariateModel::logistic_normal(Eigen::VectorXd::Zero(p), toeplitz(p, 0.6));
    name == "logistic-normal-desk" ? desk(m) : full(m);
    if (name == "logistic-normal-desk") sc.reps = 100;
    sc.methods = compositional;
  } else if (name == "normal-desk" || name == "normal-full") {
    const int p = name == "normal-desk" ? 20 : 100;
    const auto m = CovariateModel::multivariate_normal(Eigen::VectorXd::Zero(p), toeplitz(p, 0.6));
    name == "normal-desk" ? desk(m) : full(m);
    sc.response_transform = Transform::identity;
    sc.methods = {"BCP(p-1)",      "BCP(p/2)",      "BCP(s+1)",   "BCP(p/2)-BH", "BCP(s+1)-BH",
                  "BCP(p/2)-Holm", "BCP(s+1)-Holm", "Univariate", "Univariate-BH", "Univariate-Holm"};
  } else if (name == "dm-sparse-desk" || name == "dm-sparse-full") {
    const bool small = name == "dm-sparse-desk";
    const int p = small ? 30 : 100;
    sc.model = CovariateModel::dirichlet_multinomial(sparse_dm_alpha(p), small ? 120 : 200);
    sc.n = 100;
    sc.s = small ? 3 : 10;
    sc.K = small ? 500 : 1500;
    sc.reps = small ? 100 : 200;
    sc.snr_grid = small ? std::vector<double>{2.0} : std::vector<double>{1.0};
    sc.response_transform = Transform::log1p;
    const int d = small ? 20 : 70;
    for (int k = 0; k < d; ++k) sc.dense.push_back(k);
    sc.methods = {"BCP(p/4)-BH", "BCP(s+1)-BH", "BCP(p/4)-Holm", "BCP(s+1)-Holm"};
    if (small) {
      sc.speedups.lasso_screen = true;
      sc.speedups.adaptive_resampling = true;
    }
  } else {
    std::string list;
    for (const auto& n : preset_names()) list += (list.empty() ? "" : ", ") + n;
    throw ParameterError("unknown preset '" + name + "'; available presets: " + list);
  }
  return sc;
}

}  // namespace bcp
