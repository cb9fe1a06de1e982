// bcp: base p-value matrices, Markov-boundary selection, simulations and
// the exact oracle from the command line.
//
// Exit codes: 0 success, 1 internal invariant breach, 2 user error.

#include <CLI11.hpp>

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bcp/dcrt.hpp"
#include "bcp/io.hpp"
#include "bcp/oracle.hpp"
#include "bcp/pch.hpp"
#include "bcp/selection.hpp"
#include "bcp/simulation.hpp"

namespace fs = std::filesystem;
using bcp::io::json;

namespace {

struct UserError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string pretty(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 15);
  return std::string(buf, r.ptr);
}

std::vector<int> parse_index_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    int v = 0;
    const auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (r.ec != std::errc{} || r.ptr != tok.data() + tok.size() || v < 0)
      throw UserError("bad index '" + tok + "' in list '" + s + "'");
    out.push_back(v);
  }
  return out;
}

bcp::SpeedupConfig parse_speedups(const std::string& s) {
  bcp::SpeedupConfig c;
  if (s.empty() || s == "none") return c;
  if (s == "all") return bcp::SpeedupConfig::all();
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok == "lasso")
      c.lasso_screen = true;
    else if (tok == "early-stop")
      c.column_early_stop = true;
    else if (tok == "adaptive")
      c.adaptive_resampling = true;
    else
      throw UserError("unknown speedup '" + tok + "' (expected lasso, early-stop, adaptive, all or none)");
  }
  return c;
}

json speedups_json(const bcp::SpeedupConfig& s) {
  return {{"lasso_screen", s.lasso_screen},
          {"column_early_stop", s.column_early_stop},
          {"tau_col", s.tau_col},
          {"c_col", s.c_col},
          {"adaptive_resampling", s.adaptive_resampling},
          {"initial_fraction", s.initial_fraction},
          {"tau_p", s.tau_p}};
}

// Values from --config fill options the command line left unset.
void apply_config(CLI::App* app, const std::string& path) {
  if (path.empty()) return;
  const json cfg = json::parse(bcp::io::read_file(path));
  if (!cfg.is_object()) throw UserError("config file must hold a JSON object");
  for (auto it = cfg.begin(); it != cfg.end(); ++it) {
    CLI::Option* opt = nullptr;
    try {
      opt = app->get_option("--" + it.key());
    } catch (const CLI::OptionNotFound&) {
      throw UserError("config key '" + it.key() + "' is not an option of '" + app->get_name() + "'");
    }
    if (opt->count() > 0) continue;
    std::string v;
    if (it->is_string())
      v = it->get<std::string>();
    else if (it->is_boolean())
      v = it->get<bool>() ? "true" : "false";
    else if (it->is_array()) {
      for (const auto& e : *it) v += (v.empty() ? "" : ",") + (e.is_string() ? e.get<std::string>() : e.dump());
    } else
      v = it->dump();
    opt->add_result(v);
    opt->run_callback();
  }
}

void prepare_out(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw UserError("cannot create output directory '" + dir + "': " + ec.message());
}

void write_config(const std::string& dir, const json& cfg) { bcp::io::write_file(dir + "/config.json", cfg.dump(2) + "\n"); }

struct DataArgs {
  std::string x, y, model;
  int K = 1500;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::string speedups = "none";
  bool symmetrize = false;
  std::string transform;
  std::string features = "raw";
};

void add_data_options(CLI::App* cmd, DataArgs& a, bool required) {
  auto* x = cmd->add_option("--x", a.x, "Covariate matrix (headerless CSV, n x p)");
  auto* y = cmd->add_option("--y", a.y, "Response vector (CSV, one value per line)");
  auto* m = cmd->add_option("--model", a.model, "Covariate model (JSON)");
  if (required) {
    x->required();
    y->required();
    m->required();
  }
  cmd->add_option("--K", a.K, "Conditional resamples per base p-value")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", a.seed, "Master seed");
  cmd->add_option("--threads", a.threads, "Worker threads (default: BCP_THREADS or hardware concurrency)");
  cmd->add_option("--speedups", a.speedups, "Comma list of lasso, early-stop, adaptive; or all / none");
  cmd->add_flag("--symmetrize", a.symmetrize, "Compute P(i,j) for i < j only and mirror it");
  cmd->add_option("--transform", a.transform, "Statistic transform: log, log1p, identity (default by family)");
  cmd->add_option("--features", a.features, "Distillation features: raw or transformed");
}

struct LoadedData {
  bcp::DataSet data;
  bcp::CovariateModel model;
  bcp::DcrtOptions options;
  bcp::SpeedupConfig speedups;
};

LoadedData load_data(const DataArgs& a) {
  LoadedData d;
  d.model = bcp::io::model_from_json(json::parse(bcp::io::read_file(a.model)));
  d.data.X = bcp::io::read_matrix_csv(a.x);
  d.data.y = bcp::io::read_vector_csv(a.y);
  if (!d.data.X.allFinite() || !d.data.y.allFinite()) throw UserError("X and y must be fully numeric");
  if (d.data.y.size() != d.data.X.rows())
    throw UserError("X has " + std::to_string(d.data.X.rows()) + " rows but y has " + std::to_string(d.data.y.size()));
  if (d.data.X.cols() != d.model.dim())
    throw UserError("X has " + std::to_string(d.data.X.cols()) + " columns but the model has dimension " +
                    std::to_string(d.model.dim()));
  d.data.constraint = d.model.constraint();
  d.data.total = d.model.family == bcp::Family::dirichlet_multinomial ? d.model.trials : 1;
  if (auto bad = bcp::find_constraint_violation(d.model, d.data.X))
    throw UserError("row " + std::to_string(*bad) + " of X violates the " + bcp::to_string(d.model.constraint()) +
                    " constraint");
  if (!a.transform.empty()) d.options.transform = bcp::transform_from_string(a.transform);
  d.options.features = bcp::distill_features_from_string(a.features);
  d.options.threads = a.threads;
  d.speedups = parse_speedups(a.speedups);
  return d;
}

json data_config(const DataArgs& a, const LoadedData& d) {
  return {{"x", a.x},
          {"y", a.y},
          {"model", bcp::io::model_to_json(d.model)},
          {"K", a.K},
          {"seed", a.seed},
          {"speedups", speedups_json(d.speedups)},
          {"symmetrize", a.symmetrize},
          {"transform", bcp::to_string(d.options.transform.value_or(bcp::default_transform(d.model.family)))},
          {"features", bcp::to_string(d.options.features)},
          {"folds", d.options.folds}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Markov-boundary covariate testing and selection for compositional regression"};
  app.require_subcommand(1);

  // pvals ------------------------------------------------------------
  DataArgs pv_args;
  std::string pv_out, pv_config;
  auto* pvals = app.add_subcommand("pvals", "Compute the base p-value matrix");
  add_data_options(pvals, pv_args, false);
  pvals->add_option("--out", pv_out, "Output directory")->required();
  pvals->add_option("--config", pv_config, "JSON file with option defaults (flags override)");

  // select -----------------------------------------------------------
  DataArgs sel_args;
  std::string sel_pvals, sel_meta, sel_procedure = "bh", sel_dense, sel_out, sel_config, sel_overflow = "stop";
  std::string sel_combiner = "simes";
  double sel_alpha = 0.1;
  int sel_s_bar = 0;
  int sel_single = -1;
  bool sel_plain = false;
  auto* select = app.add_subcommand("select", "Select Markov-boundary members (FWER or FDR control)");
  select->add_option("--pvals", sel_pvals, "Precomputed p-value matrix CSV (otherwise --x/--y/--model)");
  select->add_option("--pvals-meta", sel_meta, "Sidecar JSON written next to the matrix by 'pvals'");
  add_data_options(select, sel_args, false);
  select->add_option("--procedure", sel_procedure, "holm-b (Bonferroni-Holm), holm-s (Simes-Holm), bh, or by")
      ->check(CLI::IsMember({"holm-b", "holm-s", "bh", "by"}));
  select->add_option("--alpha", sel_alpha, "Target FWER / FDR level");
  select->add_option("--s-bar", sel_s_bar, "Strict upper bound on the boundary size (default: |D| - 1)");
  select->add_option("--dense", sel_dense, "Comma list of dense covariates D to test (others are conditioned on)");
  select->add_option("--overflow", sel_overflow, "Holm behaviour at step s_bar + 1: stop or reject-all")
      ->check(CLI::IsMember({"stop", "reject-all"}));
  select->add_flag("--plain", sel_plain, "Holm on uncorrected PCH p-values (no exclusion correction)");
  select->add_option("--single-test", sel_single, "Print the PCH p-value of one covariate instead of selecting");
  select->add_option("--combiner", sel_combiner, "Combiner for --single-test: bonferroni or simes")
      ->check(CLI::IsMember({"bonferroni", "simes"}));
  select->add_option("--out", sel_out, "Output directory");
  select->add_option("--config", sel_config, "JSON file with option defaults (flags override)");

  // simulate ---------------------------------------------------------
  std::string sim_scenario, sim_out, sim_config;
  int sim_reps = 0, sim_K = 0;
  std::uint64_t sim_seed = 1;
  unsigned sim_threads = 0;
  auto* simulate = app.add_subcommand("simulate", "Run a simulation preset or scenario file");
  simulate->add_option("--scenario", sim_scenario, "Preset name or scenario JSON file")->required();
  simulate->add_option("--reps", sim_reps, "Override the replicate count");
  simulate->add_option("--K", sim_K, "Override the resample count");
  simulate->add_option("--seed", sim_seed, "Master seed");
  simulate->add_option("--threads", sim_threads, "Worker threads");
  simulate->add_option("--out", sim_out, "Output directory")->required();
  simulate->add_option("--config", sim_config, "JSON file with option defaults (flags override)");

  // oracle -----------------------------------------------------------
  std::string or_table, or_dense, or_out;
  auto* oracle = app.add_subcommand("oracle", "Exact S, S_D and Markov boundaries of a finite joint table");
  oracle->add_option("--table", or_table, "Joint table JSON")->required();
  oracle->add_option("--dense", or_dense, "Comma list D for S_D");
  oracle->add_option("--out", or_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*pvals) {
      apply_config(pvals, pv_config);
      if (pv_args.x.empty() || pv_args.y.empty() || pv_args.model.empty())
        throw UserError("pvals needs --x, --y and --model");
      const LoadedData d = load_data(pv_args);
      prepare_out(pv_out);
      const auto m = bcp::pvalue_matrix(d.data, d.model, pv_args.K, pv_args.seed, d.speedups, pv_args.symmetrize, d.options);
      bcp::io::write_pvalue_matrix(m, pv_out + "/pvalues.csv", pv_out + "/pvalues.json");
      write_config(pv_out, {{"command", "pvals"}, {"data", data_config(pv_args, d)}});
      for (const auto& w : m.warnings) std::cerr << "warning: " << w << "\n";
      std::cout << "wrote " << pv_out << "/pvalues.csv (" << m.count(bcp::EntryStatus::computed) << " computed, "
                << m.count(bcp::EntryStatus::screened) << " screened)\n";
      return 0;
    }

    if (*select) {
      apply_config(select, sel_config);
      bcp::PValueMatrix m;
      json cfg{{"command", "select"}};
      std::vector<int> dense = parse_index_list(sel_dense);
      if (!sel_pvals.empty()) {
        m = bcp::io::read_pvalue_matrix(sel_pvals, sel_meta);
        cfg["pvals"] = sel_pvals;
        if (!dense.empty()) {
          std::vector<int> pos;
          for (int dlab : dense) {
            const auto it = std::find(m.labels.begin(), m.labels.end(), dlab);
            if (it == m.labels.end()) throw UserError("dense index " + std::to_string(dlab) + " is not in the matrix");
            pos.push_back(static_cast<int>(it - m.labels.begin()));
          }
          std::sort(pos.begin(), pos.end());
          m = m.submatrix(pos);
        }
      } else {
        if (sel_args.x.empty() || sel_args.y.empty() || sel_args.model.empty())
          throw UserError("select needs --pvals or all of --x, --y, --model");
        const LoadedData d = load_data(sel_args);
        if (!dense.empty()) {
          if (dense.size() < 3) throw UserError("--dense needs at least three covariates");
          for (int v : dense)
            if (v >= d.model.dim()) throw UserError("dense index " + std::to_string(v) + " out of range");
          m = bcp::condition_on_dense(d.data, d.model, dense, sel_args.K, sel_args.seed, d.speedups, d.options);
        } else {
          m = bcp::pvalue_matrix(d.data, d.model, sel_args.K, sel_args.seed, d.speedups, sel_args.symmetrize, d.options);
        }
        cfg["data"] = data_config(sel_args, d);
      }
      const int size = m.size();
      const int s_bar = sel_s_bar > 0 ? sel_s_bar : size - 1;
      if (s_bar >= size)
        throw UserError("--s-bar must be below the number of tested covariates (" + std::to_string(size) + ")");
      if (!(sel_alpha > 0.0 && sel_alpha < 1.0)) throw UserError("--alpha must lie in (0, 1)");
      cfg["alpha"] = sel_alpha;
      cfg["s_bar"] = s_bar;
      cfg["dense"] = dense;

      if (sel_single >= 0) {
        const auto it = std::find(m.labels.begin(), m.labels.end(), sel_single);
        if (it == m.labels.end()) throw UserError("covariate " + std::to_string(sel_single) + " is not in the matrix");
        const auto comb = sel_combiner == "bonferroni" ? bcp::Combiner::bonferroni : bcp::Combiner::simes;
        const double v = bcp::single_test(m, static_cast<int>(it - m.labels.begin()), s_bar, comb);
        std::cout << pretty(v) << "\n";
        if (!sel_out.empty()) {
          prepare_out(sel_out);
          cfg["single_test"] = {{"covariate", sel_single}, {"combiner", sel_combiner}, {"pvalue", v}};
          write_config(sel_out, cfg);
        }
        return 0;
      }

      bcp::SelectionResult r;
      const auto overflow = sel_overflow == "stop" ? bcp::OverflowPolicy::stop : bcp::OverflowPolicy::reject_all;
      if (sel_procedure == "bh")
        r = bcp::bh_select(m, s_bar, sel_alpha);
      else if (sel_procedure == "by")
        r = bcp::fdr_select(m, s_bar, sel_alpha, bcp::FdrVariant::by_bonferroni);
      else {
        const auto comb = sel_procedure == "holm-b" ? bcp::Combiner::bonferroni : bcp::Combiner::simes;
        r = sel_plain ? bcp::plain_holm(m, s_bar, sel_alpha, comb) : bcp::adaptive_holm(m, s_bar, sel_alpha, comb, overflow);
      }
      cfg["procedure"] = sel_procedure;
      cfg["overflow"] = sel_overflow;
      cfg["plain"] = sel_plain;
      std::cout << "rejected:";
      for (int v : r.rejected) std::cout << " " << v;
      std::cout << "\n";
      if (!sel_out.empty()) {
        prepare_out(sel_out);
        json j = bcp::io::selection_to_json(r);
        j["config"] = cfg;
        bcp::io::write_file(sel_out + "/selection.json", j.dump(2) + "\n");
        bcp::io::write_file(sel_out + "/rejected.csv", bcp::io::rejected_csv(r));
        write_config(sel_out, cfg);
      }
      return 0;
    }

    if (*simulate) {
      apply_config(simulate, sim_config);
      bcp::SimScenario sc;
      const auto names = bcp::preset_names();
      if (std::find(names.begin(), names.end(), sim_scenario) != names.end()) {
        sc = bcp::preset(sim_scenario);
      } else if (fs::exists(sim_scenario)) {
        const json j = json::parse(bcp::io::read_file(sim_scenario));
        sc = j.contains("preset") ? bcp::preset(j.at("preset").get<std::string>()) : bcp::SimScenario{};
        if (j.contains("model")) sc.model = bcp::io::model_from_json(j.at("model"));
        sc.name = j.value("name", sc.name);
        sc.n = j.value("n", sc.n);
        sc.s = j.value("s", sc.s);
        sc.reps = j.value("reps", sc.reps);
        sc.K = j.value("K", sc.K);
        if (j.contains("snr_grid")) sc.snr_grid = j.at("snr_grid").get<std::vector<double>>();
        if (j.contains("methods")) sc.methods = j.at("methods").get<std::vector<std::string>>();
        if (j.contains("dense")) sc.dense = j.at("dense").get<std::vector<int>>();
        if (j.contains("response_transform"))
          sc.response_transform = bcp::transform_from_string(j.at("response_transform").get<std::string>());
        if (j.contains("design")) sc.design = j.at("design") == "single" ? bcp::Design::single : bcp::Design::selection;
        if (j.contains("speedups")) sc.speedups = parse_speedups(j.at("speedups").get<std::string>());
        sc.alpha_selection = j.value("alpha_selection", sc.alpha_selection);
        sc.alpha_single = j.value("alpha_single", sc.alpha_single);
        sc.estimate_model = j.value("estimate_model", sc.estimate_model);
        if (sc.methods.empty()) throw UserError("scenario lists no methods");
      } else {
        std::string list;
        for (const auto& n : names) list += "  " + n + "\n";
        throw UserError("unknown preset '" + sim_scenario + "' (and no such file); available presets:\n" + list);
      }
      if (sim_reps > 0) sc.reps = sim_reps;
      if (sim_K > 0) sc.K = sim_K;
      prepare_out(sim_out);
      const auto res = bcp::run_simulation(sc, sim_seed, sim_threads);
      bcp::io::write_file(sim_out + "/metrics.csv", bcp::io::metrics_csv(res.metrics));
      write_config(sim_out, {{"command", "simulate"},
                             {"scenario", sc.name},
                             {"model", bcp::io::model_to_json(sc.model)},
                             {"n", sc.n},
                             {"s", sc.s},
                             {"design", sc.design == bcp::Design::single ? "single" : "selection"},
                             {"response_transform", bcp::to_string(sc.response_transform)},
                             {"snr_grid", sc.snr_grid},
                             {"reps", sc.reps},
                             {"K", sc.K},
                             {"methods", sc.methods},
                             {"alpha_selection", sc.alpha_selection},
                             {"alpha_single", sc.alpha_single},
                             {"dense", sc.dense},
                             {"speedups", speedups_json(sc.speedups)},
                             {"estimate_model", sc.estimate_model},
                             {"seed", sim_seed}});
      std::cout << "wrote " << sim_out << "/metrics.csv (" << res.metrics.size() << " rows)\n";
      return 0;
    }

    if (*oracle) {
      const bcp::JointTable t = bcp::io::table_from_json(json::parse(bcp::io::read_file(or_table)));
      const auto rep = bcp::enumerate_markov_boundaries(t);
      json j{{"p", t.p},
             {"S", rep.S},
             {"boundaries", rep.boundaries},
             {"trivial", rep.trivial},
             {"nontrivial", rep.nontrivial},
             {"unique_nontrivial", rep.unique_nontrivial},
             {"equals_S", rep.equals_S},
             {"boundaries_contain_S", rep.contains_S},
             {"complement_reachable", rep.reachable}};
      const auto dense = parse_index_list(or_dense);
      if (!dense.empty()) {
        const auto d = bcp::compute_S_D(t, dense);
        j["S_D"] = {{"dense", dense},
                    {"S_D", d.S_D},
                    {"S_cap_D", d.S_cap_D},
                    {"conditions_hold", d.conditions_hold},
                    {"matches", d.matches}};
        if (d.conditions_hold && !d.matches)
          throw bcp::ContractError("S_D differs from S ∩ D although |S^c ∩ D| != 1");
      }
      if (rep.reachable && !rep.equals_S)
        throw bcp::ContractError("S^c is reachable but S is not the unique nontrivial boundary");
      if (!rep.contains_S) throw bcp::ContractError("a nontrivial Markov boundary does not contain S");
      prepare_out(or_out);
      bcp::io::write_file(or_out + "/oracle.json", j.dump(2) + "\n");
      write_config(or_out, {{"command", "oracle"}, {"table", or_table}, {"dense", dense}});
      std::cout << "S = " << json(rep.S).dump() << "\n";
      std::cout << "nontrivial boundaries = " << json(rep.nontrivial).dump() << "\n";
      std::cout << "unique = " << (rep.unique_nontrivial ? "true" : "false") << "\n";
      return 0;
    }
  } catch (const bcp::ContractError& e) {
    std::cerr << "internal invariant violated: " << e.what() << "\n";
    return 1;
  } catch (const UserError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const bcp::ParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const bcp::DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const bcp::io::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "error: malformed JSON: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
