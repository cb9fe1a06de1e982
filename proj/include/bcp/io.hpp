#pragma once

// Locale-independent CSV and JSON persistence for matrices, models,
// selection results, metrics and joint tables.

#include <Eigen/Dense>
#include "json.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "bcp/errors.hpp"
#include "bcp/models.hpp"
#include "bcp/oracle.hpp"
#include "bcp/pvalue_matrix.hpp"
#include "bcp/selection.hpp"
#include "bcp/simulation.hpp"

namespace bcp::io {

using json = nlohmann::json;

/// Parse or I/O failure on user-supplied input.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

/// Shortest round-trip decimal representation.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s, const std::string& where) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw InputError("cannot parse number '" + std::string(s) + "' at " + where);
  return v;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << content;
  if (!out) throw InputError("failed writing '" + path + "'");
}

/// Headerless comma-separated matrix; empty fields read as NaN.
inline Eigen::MatrixXd parse_matrix_csv(const std::string& text, const std::string& name = "input") {
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 0, start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + start, end - start);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) {
      std::vector<double> row;
      std::size_t f0 = 0;
      for (;;) {
        const std::size_t f1 = line.find(',', f0);
        const auto field = line.substr(f0, f1 == std::string_view::npos ? std::string_view::npos : f1 - f0);
        row.push_back(parse_double(field, name + " line " + std::to_string(line_no)));
        if (f1 == std::string_view::npos) break;
        f0 = f1 + 1;
      }
      if (!rows.empty() && row.size() != rows.front().size())
        throw InputError(name + " line " + std::to_string(line_no) + " has " + std::to_string(row.size()) +
                         " fields, expected " + std::to_string(rows.front().size()));
      rows.push_back(std::move(row));
    }
    if (end == text.size()) break;
    start = end + 1;
  }
  if (rows.empty()) throw InputError(name + " is empty");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return m;
}

inline Eigen::MatrixXd read_matrix_csv(const std::string& path) { return parse_matrix_csv(read_file(path), path); }

/// A single column or a single row of numbers.
inline Eigen::VectorXd read_vector_csv(const std::string& path) {
  const Eigen::MatrixXd m = read_matrix_csv(path);
  if (m.cols() == 1) return m.col(0);
  if (m.rows() == 1) return m.row(0).transpose();
  throw InputError(path + " must hold a single row or column");
}

inline std::string format_matrix_csv(const Eigen::MatrixXd& m, bool blank_diagonal) {
  std::string out;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out += ',';
      if (!(blank_diagonal && r == c)) out += format_double(m(r, c));
    }
    out += '\n';
  }
  return out;
}

inline json matrix_sidecar(const PValueMatrix& m) {
  json st = json::array(), rs = json::array();
  for (int i = 0; i < m.size(); ++i) {
    json srow = json::array(), rrow = json::array();
    for (int j = 0; j < m.size(); ++j) {
      srow.push_back(to_string(m.status_of(i, j)));
      rrow.push_back(m.resamples(i, j));
    }
    st.push_back(srow);
    rs.push_back(rrow);
  }
  return json{{"p", m.size()},
              {"labels", m.labels},
              {"seed", m.seed},
              {"K", m.K},
              {"status", st},
              {"resamples", rs},
              {"computed", m.count(EntryStatus::computed)},
              {"screened", m.count(EntryStatus::screened)},
              {"warnings", m.warnings}};
}

inline void write_pvalue_matrix(const PValueMatrix& m, const std::string& csv_path, const std::string& json_path) {
  write_file(csv_path, format_matrix_csv(m.values, true));
  write_file(json_path, matrix_sidecar(m).dump(2) + "\n");
}

/// Matrix from CSV (diagonal blank) with an optional sidecar restoring
/// statuses and labels.
inline PValueMatrix read_pvalue_matrix(const std::string& csv_path, const std::string& json_path = {}) {
  const Eigen::MatrixXd v = read_matrix_csv(csv_path);
  if (v.rows() != v.cols()) throw InputError(csv_path + " is not square");
  Eigen::MatrixXd filled = v;
  for (Eigen::Index k = 0; k < v.rows(); ++k) filled(k, k) = 1.0;
  for (Eigen::Index i = 0; i < v.rows(); ++i)
    for (Eigen::Index j = 0; j < v.cols(); ++j)
      if (i != j && !(v(i, j) > 0.0 && v(i, j) <= 1.0))
        throw InputError(csv_path + ": entry (" + std::to_string(i) + ", " + std::to_string(j) + ") is not in (0, 1]");
  PValueMatrix m = PValueMatrix::from_values(filled);
  if (!json_path.empty()) {
    const json side = json::parse(read_file(json_path));
    if (side.contains("labels")) m.labels = side.at("labels").get<std::vector<int>>();
    if (side.contains("seed")) m.seed = side.at("seed").get<std::uint64_t>();
    if (side.contains("K")) m.K = side.at("K").get<int>();
    if (side.contains("status"))
      for (int i = 0; i < m.size(); ++i)
        for (int j = 0; j < m.size(); ++j)
          if (i != j && side["status"][static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] == "screened")
            m.at_status(i, j) = EntryStatus::screened;
  }
  return m;
}

namespace detail {

inline Eigen::VectorXd vec_of(const json& j, const std::string& key) {
  if (!j.contains(key)) throw InputError("model config lacks '" + key + "'");
  const auto v = j.at(key).get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline Eigen::MatrixXd mat_of(const json& j, const std::string& key) {
  if (!j.contains(key)) throw InputError("model config lacks '" + key + "'");
  const auto rows = j.at(key).get<std::vector<std::vector<double>>>();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != static_cast<std::size_t>(m.cols())) throw InputError("ragged matrix '" + key + "'");
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  }
  return m;
}

inline json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline json mat_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(vec_json(m.row(r).transpose()));
  return out;
}

}  // namespace detail

/// Covariate model from a JSON section such as
/// {"family": "dirichlet", "alpha": [2, 2, 2]}. A "toeplitz" entry
/// {"p": 20, "rho": 0.6} may replace an explicit covariance, and a scalar
/// "alpha" with "p" expands to a constant vector.
inline CovariateModel model_from_json(const json& j) {
  try {
    CovariateModel m;
    m.family = family_from_string(j.at("family").get<std::string>());
    switch (m.family) {
      case Family::dirichlet:
      case Family::dirichlet_multinomial:
        if (j.contains("alpha") && j.at("alpha").is_number())
          m.alpha = Eigen::VectorXd::Constant(j.at("p").get<int>(), j.at("alpha").get<double>());
        else
          m.alpha = detail::vec_of(j, "alpha");
        if (m.family == Family::dirichlet_multinomial) m.trials = j.at("trials").get<std::int64_t>();
        break;
      case Family::logistic_normal:
      case Family::multivariate_normal:
        if (j.contains("toeplitz")) {
          const int p = j.at("toeplitz").at("p").get<int>();
          m.cov = toeplitz(p, j.at("toeplitz").at("rho").get<double>());
          m.mean = j.contains("mean") ? detail::vec_of(j, "mean") : Eigen::VectorXd::Zero(p);
        } else {
          m.mean = detail::vec_of(j, "mean");
          m.cov = detail::mat_of(j, "cov");
        }
        break;
      case Family::one_hot_factor: m.level_probs = detail::vec_of(j, "level_probs"); break;
    }
    if (j.contains("mcmc")) {
      const json& c = j.at("mcmc");
      m.mcmc.burn_in = c.value("burn_in", m.mcmc.burn_in);
      m.mcmc.thin = c.value("thin", m.mcmc.thin);
      m.mcmc.initial_step = c.value("initial_step", m.mcmc.initial_step);
      if (m.mcmc.burn_in < 0 || m.mcmc.thin < 1 || !(m.mcmc.initial_step > 0))
        throw ParameterError("mcmc settings need burn_in >= 0, thin >= 1, initial_step > 0");
    }
    m.validate();
    return m;
  } catch (const json::exception& e) {
    throw InputError(std::string("model config: ") + e.what());
  }
}

inline json model_to_json(const CovariateModel& m) {
  json j{{"family", to_string(m.family)}};
  switch (m.family) {
    case Family::dirichlet: j["alpha"] = detail::vec_json(m.alpha); break;
    case Family::dirichlet_multinomial:
      j["alpha"] = detail::vec_json(m.alpha);
      j["trials"] = m.trials;
      break;
    case Family::logistic_normal:
    case Family::multivariate_normal:
      j["mean"] = detail::vec_json(m.mean);
      j["cov"] = detail::mat_json(m.cov);
      break;
    case Family::one_hot_factor: j["level_probs"] = detail::vec_json(m.level_probs); break;
  }
  if (m.family == Family::logistic_normal)
    j["mcmc"] = {{"burn_in", m.mcmc.burn_in}, {"thin", m.mcmc.thin}, {"initial_step", m.mcmc.initial_step}};
  return j;
}

inline json selection_to_json(const SelectionResult& r) {
  json trace = json::array();
  for (const auto& t : r.trace) {
    json step{{"step", t.step}, {"threshold", t.threshold}, {"rejected", t.rejected}};
    if (t.candidate >= 0) {
      step["candidate"] = t.candidate;
      step["pch_pvalue"] = t.pvalue;
    }
    if (!t.note.empty()) step["note"] = t.note;
    trace.push_back(step);
  }
  return json{{"procedure", r.procedure}, {"alpha", r.alpha}, {"s_bar", r.s_bar}, {"validity", r.validity},
              {"rejected", r.rejected}, {"pch_pvalues", r.pch_pvalues}, {"trace", trace}};
}

inline std::string rejected_csv(const SelectionResult& r) {
  std::string out;
  for (int v : r.rejected) out += std::to_string(v) + "\n";
  return out;
}

inline std::string metrics_csv(const std::vector<MetricRow>& rows) {
  std::string out = "method,snr,metric,value,se,reps\n";
  for (const auto& r : rows)
    out += r.method + "," + format_double(r.snr) + "," + r.metric + "," + format_double(r.value) + "," +
           format_double(r.se) + "," + std::to_string(r.reps) + "\n";
  return out;
}

/// Joint table from {"p": 3, "total": 1, "atoms": [{"x": [1,0,0], "y": 1,
/// "prob": 0.3}, ...]}. Atoms may give integer "weight" instead of
/// "prob"; weights are normalized.
inline JointTable table_from_json(const json& j) {
  try {
    JointTable t;
    t.p = j.at("p").get<int>();
    if (j.contains("total") && !j.at("total").is_null()) t.total = j.at("total").get<long long>();
    double weight_sum = 0.0;
    bool weighted = false;
    for (const auto& a : j.at("atoms")) {
      Atom at;
      at.x = a.at("x").get<std::vector<long long>>();
      at.y = a.at("y").get<long long>();
      if (a.contains("weight")) {
        weighted = true;
        at.prob = a.at("weight").get<double>();
        weight_sum += at.prob;
      } else {
        at.prob = a.at("prob").get<double>();
      }
      t.atoms.push_back(std::move(at));
    }
    if (weighted) {
      if (!(weight_sum > 0.0)) throw ParameterError("atom weights must have a positive sum");
      for (auto& a : t.atoms) a.prob /= weight_sum;
    }
    t.validate();
    return t;
  } catch (const json::exception& e) {
    throw InputError(std::string("joint table: ") + e.what());
  }
}

}  // namespace bcp::io
