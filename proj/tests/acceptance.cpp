// Acceptance run: one PASS/FAIL line per criterion. Optional arguments pick
// criteria by number, e.g. `acceptance 1 2 7`.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "bcp/dcrt.hpp"
#include "bcp/oracle.hpp"
#include "bcp/pch.hpp"
#include "bcp/selection.hpp"
#include "bcp/simulation.hpp"

namespace {

using bcp::Combiner;
using bcp::IndexSet;
using bcp::JointTable;
using bcp::PValueMatrix;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
    }
  }
  void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Lookup of a metric row; null when absent.
const bcp::MetricRow* find_metric(const std::vector<bcp::MetricRow>& rows, const std::string& method, double snr,
                                  const std::string& metric) {
  for (const auto& r : rows)
    if (r.method == method && r.snr == snr && r.metric == metric) return &r;
  return nullptr;
}

void print_metrics(const std::vector<bcp::MetricRow>& rows) {
  for (const auto& r : rows)
    std::printf("    %-22s snr=%-4s %-14s %.4f (se %.4f, n=%d)\n", r.method.c_str(), fmt(r.snr).c_str(),
                r.metric.c_str(), r.value, r.se, r.reps);
}

// ---------------------------------------------------------------- C1

Outcome worked_example() {
  Outcome o;
  const std::vector<double> base{0.2, 0.25, 0.3};
  const double a = bcp::bonferroni_pch(base, 1), b = bcp::bonferroni_pch(base, 2);
  // 3 * 0.2 in binary floating point is the nearest double to 0.6 plus one ulp.
  o.check(a == 3.0 * 0.2, "s_bar=1 equals 3 x 0.2");
  o.check(std::abs(a - 0.6) <= 1e-15, "s_bar=1 within 1e-15 of 0.6");
  o.check(fmt(a, 15) == "0.6", "s_bar=1 prints as 0.6");
  o.check(b == 0.5, "s_bar=2 equals 0.5");
  o.note("s_bar=1 -> " + fmt(a, 15) + ", s_bar=2 -> " + fmt(b, 15));
  return o;
}

// ---------------------------------------------------------------- C2

Outcome pch_super_uniformity() {
  Outcome o;
  const int m = 19, draws = 10000;
  const std::vector<int> s_bars{1, 5, 19};
  const std::vector<double> alphas{0.01, 0.05, 0.1};
  std::map<std::pair<int, int>, std::array<int, 3>> hits;  // (s_bar, combiner) -> count per alpha
  bcp::Philox r = bcp::make_stream(2024, {2});
  std::vector<double> base(m);
  for (int d = 0; d < draws; ++d) {
    for (auto& v : base) v = bcp::uniform01(r);
    for (int sb : s_bars)
      for (int c = 0; c < 2; ++c) {
        const double v = bcp::combine(c ? Combiner::simes : Combiner::bonferroni, base, sb);
        auto& h = hits[{sb, c}];
        for (std::size_t k = 0; k < alphas.size(); ++k) h[k] += v <= alphas[k];
      }
  }
  double worst = -1.0;
  for (const auto& [key, h] : hits)
    for (std::size_t k = 0; k < alphas.size(); ++k) {
      const double a = alphas[k], rate = h[k] / static_cast<double>(draws);
      const double bound = a + 3.0 * std::sqrt(a * (1 - a) / draws);
      worst = std::max(worst, rate - bound);
      o.check(rate <= bound, "s_bar=" + std::to_string(key.first) + (key.second ? " simes" : " bonferroni") +
                                 " alpha=" + fmt(a) + " rate " + fmt(rate));
    }
  o.note("18 cells, largest rate minus bound " + fmt(worst));
  return o;
}

// ---------------------------------------------------------------- C3

Outcome dcrt_null_calibration() {
  Outcome o;
  const int p = 5, n = 100, K = 99, reps = 500;
  const auto model = bcp::CovariateModel::dirichlet(Eigen::VectorXd::Constant(p, 2.0));
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j)
      if (i != j) pairs.emplace_back(i, j);
  int below = 0;
  for (int rep = 0; rep < reps; ++rep) {
    bcp::DataSet d;
    d.X = bcp::sample_rows(model, n, bcp::stream_key(3, {1, static_cast<std::uint64_t>(rep)}));
    d.constraint = model.constraint();
    bcp::Philox r = bcp::make_stream(3, {2, static_cast<std::uint64_t>(rep)});
    d.y.resize(n);
    for (int k = 0; k < n; ++k) d.y[k] = bcp::standard_normal(r);
    // One pair per replicate keeps the replicates independent.
    const auto [i, j] = pairs[static_cast<std::size_t>(rep) % pairs.size()];
    const auto bp = bcp::base_pvalue(d, model, i, j, K, bcp::stream_key(3, {3, static_cast<std::uint64_t>(rep)}));
    below += bp.pvalue <= 0.05;
  }
  const double rate = below / static_cast<double>(reps);
  const double bound = 0.05 + 3.0 * std::sqrt(0.05 * 0.95 / reps);
  o.check(rate <= bound, "rate above bound");
  o.note("P(p <= 0.05) = " + fmt(rate) + " over " + std::to_string(reps) + " replicates, bound " + fmt(bound));
  return o;
}

// ---------------------------------------------------------------- C4, C5

const bcp::SimulationOutput& desk_run() {
  static const bcp::SimulationOutput out = [] {
    bcp::SimScenario sc = bcp::preset("dirichlet-desk");
    sc.methods = {"BCP(p/2)-BH", "BCP(s+1)-BH", "BCP(p/2)-Holm", "BCP(p/2)-Holm-plain"};
    const auto t0 = Clock::now();
    auto res = bcp::run_simulation(sc, 4, 0);
    std::printf("  dirichlet-desk: %d replicates x %zu SNR values in %.0f s\n", sc.reps, sc.snr_grid.size(),
                seconds_since(t0));
    print_metrics(res.metrics);
    return res;
  }();
  return out;
}

Outcome desk_fdr() {
  Outcome o;
  const auto& rows = desk_run().metrics;
  const std::vector<double> snrs{0.5, 1.0, 2.0};
  for (const std::string method : {"BCP(p/2)-BH", "BCP(s+1)-BH"}) {
    double prev = -1.0;
    std::string powers;
    for (double snr : snrs) {
      const auto* fdr = find_metric(rows, method, snr, "FDR");
      const auto* pw = find_metric(rows, method, snr, "average_power");
      if (!fdr || !pw) {
        o.check(false, method + " metrics missing");
        continue;
      }
      o.check(fdr->value <= 0.10 + 2 * fdr->se, method + " FDR " + fmt(fdr->value) + " at SNR " + fmt(snr));
      o.check(pw->value > prev, method + " power not increasing at SNR " + fmt(snr));
      prev = pw->value;
      powers += (powers.empty() ? "" : "/") + fmt(pw->value, 3);
    }
    o.check(prev > 0.1, method + " power at SNR 2 is " + fmt(prev));
    o.note(method + " power " + powers);
  }
  return o;
}

Outcome desk_fwer() {
  Outcome o;
  const auto& rows = desk_run().metrics;
  for (double snr : {0.5, 1.0, 2.0}) {
    const auto* fwer = find_metric(rows, "BCP(p/2)-Holm", snr, "FWER");
    const auto* ad = find_metric(rows, "BCP(p/2)-Holm", snr, "average_power");
    const auto* pl = find_metric(rows, "BCP(p/2)-Holm-plain", snr, "average_power");
    if (!fwer || !ad || !pl) {
      o.check(false, "metrics missing");
      continue;
    }
    o.check(fwer->value <= 0.10 + 2 * fwer->se, "FWER " + fmt(fwer->value) + " at SNR " + fmt(snr));
    o.check(ad->value >= pl->value, "adaptive power below plain at SNR " + fmt(snr));
    o.note("SNR " + fmt(snr) + ": FWER " + fmt(fwer->value, 3) + ", power " + fmt(ad->value, 3) + " vs plain " +
           fmt(pl->value, 3));
  }
  return o;
}

// ---------------------------------------------------------------- C6

Outcome loo_invalidity() {
  Outcome o;
  bcp::SimScenario sc = bcp::preset("dirichlet-single");
  sc.snr_grid = {2.0};
  sc.methods = {"BCP(p-1)", "LOO"};
  const auto t0 = Clock::now();
  const auto res = bcp::run_simulation(sc, 6, 0);
  std::printf("  dirichlet-single: %d replicates in %.0f s\n", sc.reps, seconds_since(t0));
  print_metrics(res.metrics);
  const auto* loo = find_metric(res.metrics, "LOO", 2.0, "type_I_error");
  const auto* bcp_row = find_metric(res.metrics, "BCP(p-1)", 2.0, "type_I_error");
  if (!loo || !bcp_row) {
    o.check(false, "metrics missing");
    return o;
  }
  o.check(loo->value > 0.05 + 2 * loo->se, "LOO type-I error " + fmt(loo->value) + " not above 0.05 + 2 SE");
  o.check(bcp_row->value <= 0.05, "BCP(p-1) type-I error " + fmt(bcp_row->value) + " above 0.05");
  o.note("LOO " + fmt(loo->value) + " (se " + fmt(loo->se, 2) + "), BCP(p-1) " + fmt(bcp_row->value));
  return o;
}

// ---------------------------------------------------------------- C7

JointTable one_hot_table(const std::vector<double>& level_probs, const std::vector<double>& py) {
  JointTable t;
  t.p = static_cast<int>(level_probs.size());
  t.total = 1;
  for (int l = 0; l < t.p; ++l) {
    std::vector<long long> x(static_cast<std::size_t>(t.p), 0);
    x[static_cast<std::size_t>(l)] = 1;
    t.atoms.push_back({x, 1, level_probs[l] * py[l]});
    t.atoms.push_back({x, 0, level_probs[l] * (1 - py[l])});
  }
  return t;
}

// Multinomial counts (total 2) with a response law depending on `dep`.
JointTable count_table(bcp::Philox& r, int p, const IndexSet& dep) {
  std::vector<double> q(static_cast<std::size_t>(p));
  for (auto& v : q) v = 0.2 + bcp::uniform01(r);
  const double qs = std::accumulate(q.begin(), q.end(), 0.0);
  JointTable t;
  t.p = p;
  t.total = 2;
  std::map<std::vector<long long>, std::array<double, 2>> laws;
  for (int a = 0; a < p; ++a)
    for (int b = a; b < p; ++b) {
      std::vector<long long> x(static_cast<std::size_t>(p), 0);
      ++x[static_cast<std::size_t>(a)];
      ++x[static_cast<std::size_t>(b)];
      const double px = (a == b ? 1.0 : 2.0) * q[a] * q[b] / (qs * qs);
      std::vector<long long> key;
      for (int d : dep) key.push_back(x[static_cast<std::size_t>(d)]);
      auto it = laws.find(key);
      if (it == laws.end()) {
        const double u = 0.05 + 0.9 * bcp::uniform01(r);
        it = laws.emplace(key, std::array<double, 2>{1 - u, u}).first;
      }
      t.atoms.push_back({x, 0, px * it->second[0]});
      t.atoms.push_back({x, 1, px * it->second[1]});
    }
  return t;
}

Outcome oracle_exactness() {
  Outcome o;
  {
    const auto t = one_hot_table({1.0 / 3, 1.0 / 3, 1.0 / 3}, {0.9, 0.1, 0.1});
    const auto rep = bcp::enumerate_markov_boundaries(t);
    o.check(rep.S == IndexSet{0}, "one-hot S");
    o.check(rep.nontrivial == std::vector<IndexSet>{{0}} && rep.equals_S, "one-hot boundary");
    const auto d = bcp::compute_S_D(t, {0, 1});
    o.check(!d.conditions_hold && d.S_D == IndexSet({0, 1}), "one-hot S_D with one null in D");
    const auto t4 = one_hot_table({0.25, 0.25, 0.25, 0.25}, {0.9, 0.1, 0.1, 0.1});
    const auto d4 = bcp::compute_S_D(t4, {0, 1, 2});
    o.check(d4.conditions_hold && d4.S_D == IndexSet{0}, "one-hot S_D with two nulls in D");
  }
  {
    const auto t = one_hot_table({0.25, 0.25, 0.25, 0.25}, {0.9, 0.9, 0.1, 0.1});
    const auto rep = bcp::enumerate_markov_boundaries(t);
    o.check(rep.S.empty(), "non-unique table S");
    o.check(rep.nontrivial == std::vector<IndexSet>{{0, 1}, {2, 3}} && !rep.unique_nontrivial, "non-unique boundaries");
    const auto d = bcp::compute_S_D(t, {0, 1, 2, 3});
    o.check(d.S_D.empty(), "non-unique table S_D");
  }
  {
    const auto t = one_hot_table({0.2, 0.3, 0.5}, {0.4, 0.4, 0.4});
    const auto rep = bcp::enumerate_markov_boundaries(t);
    o.check(rep.S.empty() && rep.boundaries == std::vector<IndexSet>{{}} && rep.equals_S, "independent-Y table");
    o.check(bcp::compute_S_D(t, {0, 2}).S_D.empty(), "independent-Y S_D");
  }
  bcp::Philox r = bcp::make_stream(7, {});
  int contained = 0, non_unique = 0;
  for (int k = 0; k < 100; ++k) {
    const int p = 3 + static_cast<int>(bcp::uniform_index(r, 4));
    JointTable t;
    if (k % 2 == 0) {
      std::vector<double> lp(static_cast<std::size_t>(p)), py(static_cast<std::size_t>(p));
      for (auto& v : lp) v = 0.1 + bcp::uniform01(r);
      const double s = std::accumulate(lp.begin(), lp.end(), 0.0);
      for (auto& v : lp) v /= s;
      for (auto& v : py) v = bcp::uniform01(r) < 0.5 ? 0.8 : (bcp::uniform01(r) < 0.5 ? 0.3 : bcp::uniform01(r));
      t = one_hot_table(lp, py);
    } else {
      IndexSet dep;
      for (int j = 0; j < p; ++j)
        if (bcp::uniform01(r) < 0.4) dep.push_back(j);
      t = count_table(r, p, dep);
    }
    const auto rep = bcp::enumerate_markov_boundaries(t);
    contained += rep.contains_S;
    non_unique += rep.nontrivial.size() > 1;
    if (rep.reachable) o.check(rep.equals_S, "reachable complement without a unique boundary equal to S");
  }
  o.check(contained == 100, std::to_string(100 - contained) + " random tables with a boundary missing S");
  o.note("3 canonical tables exact; containment on " + std::to_string(contained) + "/100 random tables (" +
         std::to_string(non_unique) + " with several nontrivial boundaries)");
  return o;
}

// ---------------------------------------------------------------- C8

PValueMatrix random_matrix(bcp::Philox& r, int p) {
  Eigen::MatrixXd v = Eigen::MatrixXd::Ones(p, p);
  for (int j = 0; j < p; ++j) {
    const bool signal = bcp::uniform01(r) < 0.4;
    for (int i = 0; i < p; ++i) {
      if (i == j) continue;
      const double u = bcp::uniform01(r);
      v(i, j) = signal && bcp::uniform01(r) < 0.85 ? 0.02 * u * u * u : u;
      if (bcp::uniform01(r) < 0.05) v(i, j) = 1.0 / (2.0 + static_cast<double>(bcp::uniform_index(r, 3)));
    }
  }
  return PValueMatrix::from_values(v);
}

bool same_values(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a.array() == b.array() || (a.array().isNaN() && b.array().isNaN())).all();
}

Outcome property_suite() {
  Outcome o;
  bcp::Philox r = bcp::make_stream(8, {});
  int simes_le = 0, mono = 0, excl = 0, ident = 0;
  for (int t = 0; t < 10000; ++t) {
    const int m = 2 + static_cast<int>(bcp::uniform_index(r, 30));
    std::vector<double> base(static_cast<std::size_t>(m));
    for (auto& v : base) v = bcp::uniform01(r) < 0.3 ? 0.01 * bcp::uniform01(r) : bcp::uniform01(r);
    const int sb = 1 + static_cast<int>(bcp::uniform_index(r, static_cast<std::uint64_t>(m)));
    simes_le += bcp::simes_pch(base, sb) <= bcp::bonferroni_pch(base, sb);
    // Larger s_bar gives a larger Simes value.
    bool ok = true;
    for (int s = 1; s < m; ++s) ok = ok && bcp::simes_pch(base, s) <= bcp::simes_pch(base, s + 1);
    mono += ok;
    // Removing the smallest values through A never lowers the PCH value.
    if (sb >= 2) {
      std::vector<std::size_t> order(static_cast<std::size_t>(m));
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return base[a] < base[b]; });
      const std::vector<std::size_t> A(order.begin(), order.begin() + 1);
      excl += bcp::simes_pch(base, sb, A) >= bcp::simes_pch(base, sb) &&
              bcp::bonferroni_pch(base, sb, A) >= bcp::bonferroni_pch(base, sb);
    } else {
      ++excl;
    }
    // s_bar = m: both combiners reduce to the largest base value.
    const double mx = *std::max_element(base.begin(), base.end());
    ident += bcp::simes_pch(base, m) == mx && bcp::bonferroni_pch(base, m) == mx;
  }
  o.check(simes_le == 10000, "Simes above Bonferroni");
  o.check(mono == 10000, "Simes not monotone in s_bar");
  o.check(excl == 10000, "exclusion lowered a PCH value");
  o.check(ident == 10000, "s_bar = p - 1 identity");

  int superset = 0;
  for (int t = 0; t < 1000; ++t) {
    const int p = 3 + static_cast<int>(bcp::uniform_index(r, 15));
    const auto mat = random_matrix(r, p);
    const int sb = 1 + static_cast<int>(bcp::uniform_index(r, static_cast<std::uint64_t>(p - 1)));
    const Combiner c = t % 2 ? Combiner::simes : Combiner::bonferroni;
    const auto ad = bcp::adaptive_holm(mat, sb, 0.1, c, bcp::OverflowPolicy::reject_all);
    const auto pl = bcp::plain_holm(mat, sb, 0.1, c);
    const std::set<int> a(ad.rejected.begin(), ad.rejected.end());
    superset += std::all_of(pl.rejected.begin(), pl.rejected.end(), [&](int v) { return a.count(v) > 0; });
  }
  o.check(superset == 1000, "adaptive Holm missed a plain Holm rejection");

  // Screening monotonicity and thread determinism on dCRT matrices.
  const auto model = bcp::CovariateModel::dirichlet(Eigen::VectorXd::Constant(8, 2.0));
  int screen_ok = 0, screen_total = 0, det_ok = 0;
  for (int rep = 0; rep < 3; ++rep) {
    bcp::DataSet d;
    d.X = bcp::sample_rows(model, 60, 80 + rep);
    d.constraint = model.constraint();
    bcp::Philox noise = bcp::make_stream(81, {static_cast<std::uint64_t>(rep)});
    d.y = 2.0 * d.X.col(1).array().log() - 1.5 * d.X.col(5).array().log();
    for (int k = 0; k < 60; ++k) d.y[k] += bcp::standard_normal(noise);
    bcp::DcrtEngine engine(d, model, 90 + rep);
    const std::vector<int> all{0, 1, 2, 3, 4, 5, 6, 7};
    const auto base = bcp::compute_matrix(engine, all, 99, {}, false);
    for (int bits = 1; bits < 8; ++bits) {
      bcp::SpeedupConfig s;
      s.lasso_screen = bits & 1;
      s.column_early_stop = bits & 2;
      s.adaptive_resampling = bits & 4;
      const auto fast = bcp::compute_matrix(engine, all, 99, s, false);
      bool ok = true;
      for (int a = 0; a < 8; ++a)
        for (int b = 0; b < 8; ++b)
          if (a != b) ok = ok && fast.values(a, b) >= base.values(a, b);
      screen_ok += ok;
      ++screen_total;
    }
    bcp::DcrtOptions one, four;
    one.threads = 1;
    four.threads = 4;
    const auto x1 = bcp::pvalue_matrix(d, model, 49, 7 + rep, bcp::SpeedupConfig::all(), false, one);
    const auto x4 = bcp::pvalue_matrix(d, model, 49, 7 + rep, bcp::SpeedupConfig::all(), false, four);
    det_ok += same_values(x1.values, x4.values) && x1.status == x4.status;
  }
  o.check(screen_ok == screen_total, "a speedup lowered a matrix entry");
  o.check(det_ok == 3, "thread count changed a matrix");
  o.note("PCH properties on 10^4 inputs, adaptive >= plain on 10^3 matrices, screening on " +
         std::to_string(screen_total) + " matrices, determinism on 3");
  return o;
}

// ---------------------------------------------------------------- C9

double jaccard(const std::vector<int>& a, const std::vector<int>& b) {
  const std::set<int> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  if (sa.empty() && sb.empty()) return 1.0;
  int inter = 0;
  for (int v : sa) inter += sb.count(v) > 0;
  return inter / static_cast<double>(sa.size() + sb.size() - static_cast<std::size_t>(inter));
}

Outcome speedup_fidelity() {
  Outcome o;
  const bcp::SimScenario sc = bcp::preset("speedups-desk");
  const int p = sc.p(), s_bar = p / 2;
  bcp::DcrtOptions opt;
  opt.threads = 1;
  std::vector<double> ratios, jac;
  for (int rep = 0; rep < sc.reps; ++rep) {
    const auto r = bcp::generate_replicate(sc, rep, 9, sc.snr_grid.front());
    const std::uint64_t seed = bcp::stream_key(9, {5, static_cast<std::uint64_t>(rep)});
    auto t0 = Clock::now();
    const auto slow = bcp::pvalue_matrix(r.data, sc.model, sc.K, seed, bcp::SpeedupConfig::none(), false, opt);
    const double t_slow = seconds_since(t0);
    t0 = Clock::now();
    const auto fast = bcp::pvalue_matrix(r.data, sc.model, sc.K, seed, bcp::SpeedupConfig::all(), false, opt);
    const double t_fast = seconds_since(t0);
    ratios.push_back(t_slow / t_fast);
    jac.push_back(jaccard(bcp::bh_select(slow, s_bar, sc.alpha_selection).rejected,
                          bcp::bh_select(fast, s_bar, sc.alpha_selection).rejected));
  }
  std::sort(ratios.begin(), ratios.end());
  const double median = ratios.size() % 2 ? ratios[ratios.size() / 2]
                                          : 0.5 * (ratios[ratios.size() / 2 - 1] + ratios[ratios.size() / 2]);
  const double mean_j = std::accumulate(jac.begin(), jac.end(), 0.0) / static_cast<double>(jac.size());
  o.check(mean_j >= 0.9, "mean Jaccard " + fmt(mean_j));
  o.check(median >= 3.0, "median speedup " + fmt(median));
  o.note("mean Jaccard " + fmt(mean_j) + ", median speedup " + fmt(median, 3) + "x over " +
         std::to_string(sc.reps) + " replicates");
  return o;
}

// ---------------------------------------------------------------- C10

Outcome conditioning_benefit() {
  Outcome o;
  const bcp::SimScenario sc = bcp::preset("dm-sparse-desk");
  const auto t0 = Clock::now();
  const auto res = bcp::run_simulation(sc, 10, 0);
  std::printf("  dm-sparse-desk: %d replicates in %.0f s\n", sc.reps, seconds_since(t0));
  print_metrics(res.metrics);
  const double snr = sc.snr_grid.front();
  for (const auto& m : sc.methods) {
    const bool fdr = m.find("-BH") != std::string::npos;
    const std::string err = fdr ? "FDR" : "FWER";
    for (const std::string tag : {"", "[D]"}) {
      const auto* e = find_metric(res.metrics, m + tag, snr, err);
      if (!e) {
        o.check(false, m + tag + " metrics missing");
        continue;
      }
      o.check(e->value <= 0.10 + 2 * e->se, m + tag + " " + err + " " + fmt(e->value));
    }
    const auto* all = find_metric(res.metrics, m, snr, "average_power");
    const auto* dense = find_metric(res.metrics, m + "[D]", snr, "average_power");
    if (!all || !dense) continue;
    o.check(dense->value >= all->value, m + " power with D " + fmt(dense->value) + " below " + fmt(all->value));
    o.note(m + " power " + fmt(all->value, 3) + " -> " + fmt(dense->value, 3));
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"worked-example exactness", worked_example},
      {"PCH super-uniformity", pch_super_uniformity},
      {"dCRT null calibration", dcrt_null_calibration},
      {"desk-scale FDR control", desk_fdr},
      {"desk-scale FWER control", desk_fwer},
      {"benchmark invalidity", loo_invalidity},
      {"oracle exactness", oracle_exactness},
      {"property suite", property_suite},
      {"speedup fidelity", speedup_fidelity},
      {"conditioning benefit", conditioning_benefit},
  };
  std::set<int> pick;
  for (int k = 1; k < argc; ++k) pick.insert(std::atoi(argv[k]));
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!pick.empty() && !pick.count(id)) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += !o.pass;
    std::printf("%s C%d %s (%.1f s): %s\n", o.pass ? "PASS" : "FAIL", id, criteria[k].first.c_str(), seconds_since(t0),
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d criteria failed\n", failed);
  return failed ? 1 : 0;
}
