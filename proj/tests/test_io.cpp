#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <string>

#include "bcp/io.hpp"

namespace fs = std::filesystem;
using bcp::io::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "bcp_test_io";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(Io, DoubleFormattingRoundTrips) {
  for (double v : {0.1, 1.0 / 3, 3.0 * 0.2, 1e-300, 0.5, 123456.789}) {
    const auto s = bcp::io::format_double(v);
    EXPECT_EQ(bcp::io::parse_double(s, "t"), v) << s;
  }
  EXPECT_EQ(bcp::io::format_double(0.5), "0.5");
  EXPECT_TRUE(std::isnan(bcp::io::parse_double("  ", "t")));
  EXPECT_EQ(bcp::io::parse_double(" +2.5\r", "t"), 2.5);
  EXPECT_THROW(bcp::io::parse_double("1,5", "t"), bcp::io::InputError);
  EXPECT_THROW(bcp::io::parse_double("abc", "t"), bcp::io::InputError);
}

TEST(Io, MatrixCsvParsing) {
  const auto m = bcp::io::parse_matrix_csv("1,2,3\r\n4,5,6\n\n");
  ASSERT_EQ(m.rows(), 2);
  ASSERT_EQ(m.cols(), 3);
  EXPECT_EQ(m(1, 2), 6.0);
  EXPECT_TRUE(std::isnan(bcp::io::parse_matrix_csv(",1\n2,3")(0, 0)));
  try {
    bcp::io::parse_matrix_csv("1,2\n3\n", "x.csv");
    FAIL();
  } catch (const bcp::io::InputError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  EXPECT_THROW(bcp::io::parse_matrix_csv("\n\n"), bcp::io::InputError);
  EXPECT_THROW(bcp::io::read_matrix_csv(scratch("missing.csv").string()), bcp::io::InputError);
}

TEST(Io, VectorCsvAcceptsRowOrColumn) {
  const auto col = scratch("col.csv"), row = scratch("row.csv"), bad = scratch("bad.csv");
  bcp::io::write_file(col.string(), "1\n2\n3\n");
  bcp::io::write_file(row.string(), "1,2,3\n");
  bcp::io::write_file(bad.string(), "1,2\n3,4\n");
  EXPECT_EQ(bcp::io::read_vector_csv(col.string()), bcp::io::read_vector_csv(row.string()));
  EXPECT_THROW(bcp::io::read_vector_csv(bad.string()), bcp::io::InputError);
}

TEST(Io, PValueMatrixRoundTrip) {
  Eigen::MatrixXd v(3, 3);
  v << 1, 0.1, 1.0 / 3, 0.25, 1, 0.7, 1.0, 0.05, 1;
  auto m = bcp::PValueMatrix::from_values(v);
  m.set(2, 0, 1.0, bcp::EntryStatus::screened, 0);
  m.labels = {4, 7, 9};
  m.seed = 11;
  m.K = 99;
  const auto csv = scratch("m.csv"), side = scratch("m.json");
  bcp::io::write_pvalue_matrix(m, csv.string(), side.string());
  EXPECT_EQ(bcp::io::read_file(csv.string()).substr(0, 1), ",");
  const auto back = bcp::io::read_pvalue_matrix(csv.string(), side.string());
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j) EXPECT_EQ(back.values(i, j), m.values(i, j));
  EXPECT_EQ(back.labels, m.labels);
  EXPECT_EQ(back.seed, 11u);
  EXPECT_EQ(back.K, 99);
  EXPECT_EQ(back.status_of(2, 0), bcp::EntryStatus::screened);
  EXPECT_EQ(back.status_of(0, 1), bcp::EntryStatus::computed);
  const auto sidecar = json::parse(bcp::io::read_file(side.string()));
  EXPECT_EQ(sidecar["screened"], 1);
  EXPECT_EQ(sidecar["computed"], 5);

  bcp::io::write_file(csv.string(), ",0.1\n0,\n");
  EXPECT_THROW(bcp::io::read_pvalue_matrix(csv.string()), bcp::io::InputError);
  bcp::io::write_file(csv.string(), ",0.1,0.2\n0.3,\n");
  EXPECT_THROW(bcp::io::read_pvalue_matrix(csv.string()), bcp::io::InputError);
}

TEST(Io, ModelJsonRoundTrip) {
  const std::vector<bcp::CovariateModel> models{
      bcp::CovariateModel::dirichlet(Eigen::Vector3d(1, 2, 3)),
      bcp::CovariateModel::dirichlet_multinomial(Eigen::Vector3d(0.5, 1, 2), 40),
      bcp::CovariateModel::logistic_normal(Eigen::Vector3d(0, 1, 0), bcp::toeplitz(3, 0.5)),
      bcp::CovariateModel::multivariate_normal(Eigen::Vector2d(0, 1), bcp::toeplitz(2, 0.3)),
      bcp::CovariateModel::one_hot_factor(Eigen::Vector3d(0.2, 0.3, 0.5))};
  for (const auto& m : models) {
    const auto back = bcp::io::model_from_json(bcp::io::model_to_json(m));
    EXPECT_EQ(back.family, m.family);
    EXPECT_EQ(bcp::io::model_to_json(back), bcp::io::model_to_json(m));
  }
  const auto sc = bcp::io::model_from_json(json::parse(R"({"family": "dirichlet", "alpha": 2, "p": 4})"));
  EXPECT_EQ(sc.alpha, Eigen::VectorXd::Constant(4, 2.0));
  const auto tp = bcp::io::model_from_json(
      json::parse(R"({"family": "multivariate-normal", "toeplitz": {"p": 5, "rho": 0.6}})"));
  EXPECT_NEAR(tp.cov(0, 2), 0.36, 1e-15);
  EXPECT_THROW(bcp::io::model_from_json(json::parse(R"({"family": "dirichlet"})")), bcp::io::InputError);
  EXPECT_THROW(bcp::io::model_from_json(json::parse(R"({"family": "gamma", "alpha": [1]})")), bcp::ParameterError);
  EXPECT_THROW(bcp::io::model_from_json(json::parse(R"({"family": "dirichlet", "alpha": [1, -1, 2]})")),
               bcp::ParameterError);
}

TEST(Io, MetricsCsvSchema) {
  std::vector<bcp::MetricRow> rows(1);
  rows[0].method = "BCP(p/2)-BH";
  rows[0].snr = 0.5;
  rows[0].metric = "FDR";
  rows[0].value = 0.25;
  rows[0].se = 0.125;
  rows[0].reps = 8;
  EXPECT_EQ(bcp::io::metrics_csv(rows), "method,snr,metric,value,se,reps\nBCP(p/2)-BH,0.5,FDR,0.25,0.125,8\n");
}

TEST(Io, SelectionJson) {
  Eigen::MatrixXd v = Eigen::MatrixXd::Constant(3, 3, 0.001);
  const auto r = bcp::bh_select(bcp::PValueMatrix::from_values(v), 1, 0.1);
  const auto j = bcp::io::selection_to_json(r);
  EXPECT_EQ(j["procedure"], "bh-simes");
  EXPECT_EQ(j["validity"], "PRDS-assumed");
  EXPECT_EQ(j["rejected"].size(), r.rejected.size());
  EXPECT_EQ(bcp::io::rejected_csv(r).size(), 2 * r.rejected.size());
}

TEST(Io, TableJson) {
  const auto t = bcp::io::table_from_json(json::parse(R"({
    "p": 3, "total": 1,
    "atoms": [{"x": [1, 0, 0], "y": 1, "weight": 3}, {"x": [0, 1, 0], "y": 0, "weight": 1},
              {"x": [0, 0, 1], "y": 0, "weight": 1}, {"x": [1, 0, 0], "y": 0, "weight": 1}]})"));
  EXPECT_EQ(t.atoms.size(), 4u);
  EXPECT_DOUBLE_EQ(t.atoms[0].prob, 0.5);
  EXPECT_EQ(bcp::compute_S(t), bcp::IndexSet{0});
  EXPECT_THROW(bcp::io::table_from_json(json::parse(R"({"p": 3})")), bcp::io::InputError);
}
