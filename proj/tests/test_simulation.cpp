#include <gtest/gtest.h>

#include <cmath>
#include <string>
#include <vector>

#include "bcp/simulation.hpp"

namespace {

bcp::SimScenario tiny_scenario() {
  bcp::SimScenario sc = bcp::preset("dirichlet-desk");
  sc.model = bcp::CovariateModel::dirichlet(Eigen::VectorXd::Constant(6, 2.0));
  sc.n = 40;
  sc.s = 2;
  sc.K = 19;
  sc.reps = 3;
  sc.snr_grid = {1.0, 3.0};
  sc.methods = {"BCP(p/2)-BH", "BCP(p/2)-Holm", "BCP(p-1)", "LOO", "LOO-BH"};
  return sc;
}

}  // namespace

TEST(Simulation, ParseMethodNames) {
  auto m = bcp::parse_method("BCP(p/2)-BH");
  EXPECT_EQ(m.family, bcp::MethodFamily::bcp);
  EXPECT_EQ(m.kind, bcp::MethodKind::bh);
  EXPECT_EQ(m.s_bar_rule, "p/2");
  m = bcp::parse_method("BCP(s+1)-Holm-bonferroni");
  EXPECT_EQ(m.kind, bcp::MethodKind::holm);
  EXPECT_EQ(m.combiner, bcp::Combiner::bonferroni);
  EXPECT_EQ(bcp::parse_method("BCP(p-1)").kind, bcp::MethodKind::single);
  EXPECT_EQ(bcp::parse_method("BCP(p/2)-Holm-plain").kind, bcp::MethodKind::holm_plain);
  EXPECT_EQ(bcp::parse_method("LOO-Holm").family, bcp::MethodFamily::loo);
  EXPECT_EQ(bcp::parse_method("Univariate").family, bcp::MethodFamily::univariate);
  EXPECT_THROW(bcp::parse_method("BCP(p/3)"), bcp::ParameterError);
  EXPECT_THROW(bcp::parse_method("LOO-Holm-plain"), bcp::ParameterError);
  EXPECT_THROW(bcp::parse_method("Knockoff"), bcp::ParameterError);
}

TEST(Simulation, SBarRules) {
  EXPECT_EQ(bcp::resolve_s_bar("p-1", 20, 3, 20), 19);
  EXPECT_EQ(bcp::resolve_s_bar("p/2", 20, 3, 20), 10);
  EXPECT_EQ(bcp::resolve_s_bar("p/4", 30, 3, 30), 7);
  EXPECT_EQ(bcp::resolve_s_bar("s+1", 20, 3, 20), 4);
  EXPECT_EQ(bcp::resolve_s_bar("d-1", 30, 3, 20), 19);
  // A dense subset smaller than the rule clamps to |D| - 1.
  EXPECT_EQ(bcp::resolve_s_bar("p-1", 30, 3, 20), 19);
}

TEST(Simulation, PresetsValidate) {
  for (const auto& name : bcp::preset_names()) {
    const auto sc = bcp::preset(name);
    EXPECT_NO_THROW(sc.validate()) << name;
    EXPECT_EQ(sc.name, name);
    for (const auto& m : sc.methods) EXPECT_NO_THROW(bcp::parse_method(m)) << name << " " << m;
  }
  try {
    bcp::preset("nope");
    FAIL();
  } catch (const bcp::ParameterError& e) {
    EXPECT_NE(std::string(e.what()).find("dirichlet-desk"), std::string::npos);
  }
  const auto desk = bcp::preset("dirichlet-desk");
  EXPECT_EQ(desk.p(), 20);
  EXPECT_EQ(desk.n, 100);
  EXPECT_EQ(desk.s, 3);
  EXPECT_EQ(desk.K, 500);
  EXPECT_EQ(desk.reps, 200);
}

TEST(Simulation, SparseDmConcentrations) {
  const auto a = bcp::sparse_dm_alpha(100);
  EXPECT_NEAR(a[0], 1.0 / (1.0 + std::exp(-49.0 / 5.0)), 1e-15);
  EXPECT_NEAR(a[49], 0.5, 1e-15);
  for (int k = 1; k < 100; ++k) EXPECT_LT(a[k], a[k - 1]);
}

TEST(Simulation, ReplicatesShareRandomnessAcrossSnr) {
  const auto sc = bcp::preset("dirichlet-desk");
  const auto a = bcp::generate_replicate(sc, 4, 7, 0.5);
  const auto b = bcp::generate_replicate(sc, 4, 7, 2.0);
  EXPECT_EQ(a.data.X, b.data.X);
  EXPECT_EQ(a.true_S, b.true_S);
  EXPECT_EQ(a.true_S.size(), 3u);
  for (int k = 0; k < 20; ++k) EXPECT_NEAR(b.beta[k], 4.0 * a.beta[k], 1e-12);
  const Eigen::VectorXd noise_a = a.data.y - bcp::apply_transform(sc.response_transform, a.data.X) * a.beta;
  const Eigen::VectorXd noise_b = b.data.y - bcp::apply_transform(sc.response_transform, b.data.X) * b.beta;
  EXPECT_LT((noise_a - noise_b).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_NE(bcp::generate_replicate(sc, 5, 7, 0.5).data.X, a.data.X);
}

TEST(Simulation, SingleDesignPlacesSnrOnTestedColumn) {
  const auto sc = bcp::preset("dirichlet-single");
  const auto rep = bcp::generate_replicate(sc, 2, 3, 2.0);
  ASSERT_GE(rep.tested, 0);
  EXPECT_EQ(rep.beta[rep.tested], 2.0);
  EXPECT_EQ(rep.true_S.size(), 3u);
  const auto zero = bcp::generate_replicate(sc, 2, 3, 0.0);
  EXPECT_EQ(zero.beta[zero.tested], 0.0);
  EXPECT_EQ(zero.true_S.size(), 2u);
}

TEST(Simulation, MetricsByHand) {
  EXPECT_DOUBLE_EQ(bcp::false_discovery_proportion({1, 2, 5}, {1, 2, 3}), 1.0 / 3);
  EXPECT_EQ(bcp::false_discovery_proportion({}, {1}), 0.0);
  EXPECT_DOUBLE_EQ(bcp::power_fraction({1, 5}, {1, 2, 3}), 1.0 / 3);
  EXPECT_EQ(bcp::power_fraction({1}, {}), 0.0);

  std::vector<bcp::MethodOutcome> sel(4);
  for (auto& o : sel) {
    o.method = "m";
    o.selection = true;
  }
  sel[0].rejected = {0, 1};
  sel[1].rejected = {0, 9};
  sel[2].rejected = {};
  sel[3].rejected = {9};
  const std::vector<bcp::IndexSet> truth(4, bcp::IndexSet{0, 1});
  const auto rows = bcp::compute_metrics("m", 1.0, sel, truth);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].metric, "FDR");
  EXPECT_DOUBLE_EQ(rows[0].value, (0 + 0.5 + 0 + 1) / 4.0);
  const double sd = std::sqrt(((0 - 0.375) * (0 - 0.375) * 2 + (0.5 - 0.375) * (0.5 - 0.375) + (1 - 0.375) * (1 - 0.375)) / 3);
  EXPECT_NEAR(rows[0].se, sd / 2.0, 1e-12);
  EXPECT_EQ(rows[1].metric, "FWER");
  EXPECT_DOUBLE_EQ(rows[1].value, 0.5);
  EXPECT_DOUBLE_EQ(rows[1].se, std::sqrt(0.25 / 4));
  EXPECT_EQ(rows[2].metric, "average_power");
  EXPECT_DOUBLE_EQ(rows[2].value, (1 + 0.5 + 0 + 0) / 4.0);

  std::vector<bcp::MethodOutcome> single(3);
  single[0].null_rejected = true;
  single[1].null_rejected = false;
  single[2].null_rejected = false;
  single[0].alt_rejected = true;
  const auto srows = bcp::compute_metrics("s", 0.0, single, std::vector<bcp::IndexSet>(3));
  ASSERT_EQ(srows.size(), 2u);
  EXPECT_EQ(srows[0].metric, "type_I_error");
  EXPECT_DOUBLE_EQ(srows[0].value, 1.0 / 3);
  EXPECT_EQ(srows[0].reps, 3);
  EXPECT_EQ(srows[1].metric, "power");
  EXPECT_EQ(srows[1].reps, 1);
}

TEST(Simulation, RunIsThreadCountInvariant) {
  const auto sc = tiny_scenario();
  const auto a = bcp::run_simulation(sc, 5, 1);
  const auto b = bcp::run_simulation(sc, 5, 3);
  ASSERT_EQ(a.metrics.size(), b.metrics.size());
  for (std::size_t k = 0; k < a.metrics.size(); ++k) {
    EXPECT_EQ(a.metrics[k].method, b.metrics[k].method);
    EXPECT_EQ(a.metrics[k].value, b.metrics[k].value);
    EXPECT_EQ(a.metrics[k].se, b.metrics[k].se);
  }
  // Two SNR values; selection methods give three rows, single tests two.
  EXPECT_EQ(a.metrics.size(), 2u * (3 + 3 + 2 + 2 + 3));
  for (const auto& row : a.metrics) {
    EXPECT_GE(row.value, 0.0);
    EXPECT_LE(row.value, 1.0);
  }
}

TEST(Simulation, DenseMethodsAreTagged) {
  auto sc = tiny_scenario();
  sc.methods = {"BCP(p/2)-BH"};
  sc.dense = {0, 1, 2, 3};
  sc.reps = 1;
  sc.snr_grid = {1.0};
  const auto out = bcp::run_simulation(sc, 1, 1);
  ASSERT_EQ(out.outcomes[0][0].size(), 2u);
  EXPECT_EQ(out.outcomes[0][0][1].method, "BCP(p/2)-BH[D]");
  for (int r : out.outcomes[0][0][1].rejected) EXPECT_LT(r, 4);
}

TEST(Simulation, UnivariateNeedsUnconstrainedCovariates) {
  auto sc = tiny_scenario();
  sc.methods = {"Univariate"};
  sc.reps = 1;
  EXPECT_THROW(bcp::run_simulation(sc, 1, 1), bcp::ParameterError);
}

TEST(Simulation, ScenarioValidation) {
  auto sc = tiny_scenario();
  sc.dense = {0, 99};
  EXPECT_THROW(sc.validate(), bcp::ParameterError);
  sc = tiny_scenario();
  sc.estimate_model = true;
  sc.model = bcp::CovariateModel::multivariate_normal(Eigen::VectorXd::Zero(6), Eigen::MatrixXd::Identity(6, 6));
  EXPECT_THROW(sc.validate(), bcp::ParameterError);
}
