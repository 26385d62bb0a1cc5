// lcrasch: estimation, selection and dimensionality testing for the
// multidimensional latent-class Rasch model.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

#include "lcrasch/data_io.hpp"
#include "lcrasch/dimtest.hpp"
#include "lcrasch/mml.hpp"
#include "lcrasch/normal.hpp"
#include "lcrasch/selection.hpp"
#include "lcrasch/serialize.hpp"

namespace {

using namespace lcrasch;
using ordered_json = nlohmann::ordered_json;

constexpr const char* kVersion = "0.1.0";

struct CommonOpts {
  std::string data_path;
  std::string dims_path;
  std::string rules_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int starts = 20;
  double tol = 1e-8;
  int threads = 0;
  bool pretty = false;
  std::string out_path;
};

void add_fit_options(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--data", opts.data_path, "response file (CSV/TSV)")
      ->required();
  cmd->add_option("--dims", opts.dims_path, "dimension map file")->required();
  cmd->add_option("--rules", opts.rules_path,
                  "dichotomization rules (omit for 0/1 data)");
  cmd->add_option("--starts", opts.starts, "number of random EM starts");
  cmd->add_option("--seed", opts.seed, "RNG seed (fallback: LCRM_SEED)")
      ->each([&](const std::string&) { opts.seed_set = true; });
  cmd->add_option("--tol", opts.tol, "log-likelihood convergence tolerance");
  cmd->add_option("--threads", opts.threads,
                  "worker threads (0 = hardware concurrency)");
  cmd->add_flag("--pretty", opts.pretty, "print human-readable tables");
  cmd->add_option("--out", opts.out_path, "output file (default: stdout)");
}

std::uint64_t resolve_seed(const CommonOpts& opts) {
  if (opts.seed_set) return opts.seed;
  if (const char* env = std::getenv("LCRM_SEED"))
    return std::strtoull(env, nullptr, 10);
  return opts.seed;
}

FitConfig make_config(const CommonOpts& opts) {
  FitConfig cfg;
  cfg.seed = resolve_seed(opts);
  cfg.n_random_starts = opts.starts;
  cfg.loglik_tolerance = opts.tol;
  cfg.threads = opts.threads;
  return cfg;
}

struct LoadedData {
  PatternCounts data;
  DimensionMap dmap;
};

// Shared ingestion: read the table, keep the mapped columns in map order,
// validate against the rules, dichotomize, compress.
LoadedData load_data(const CommonOpts& opts) {
  const RawTable full = load_responses(opts.data_path);
  const DimensionMapConfig config = parse_dimension_map_file(opts.dims_path);
  std::vector<std::string> wanted;
  for (const auto& dim : config.items)
    wanted.insert(wanted.end(), dim.begin(), dim.end());
  const RawTable raw = select_columns(full, wanted);

  RuleSet rules = opts.rules_path.empty() ? binary_rules(raw.labels)
                                          : load_rules(opts.rules_path);
  TableSchema schema = schema_from_rules(rules, /*allow_missing=*/true);
  TableSchema subset_schema;
  for (const auto& label : raw.labels) {
    const ItemSchema* item = schema.find(label);
    if (!item)
      throw ValidationError("no dichotomization rule for item " + label);
    subset_schema.items.push_back(*item);
  }
  validate_table(raw, subset_schema);

  LoadedData out;
  out.data = dichotomize(raw, rules);
  out.dmap = resolve_dimension_map(config, raw.labels);
  return out;
}

RunManifest make_manifest(const std::string& command, const CommonOpts& opts,
                          std::map<std::string, std::string> extra_config = {}) {
  RunManifest m;
  m.command = command;
  if (!opts.data_path.empty()) m.inputs["data"] = opts.data_path;
  if (!opts.dims_path.empty()) m.inputs["dims"] = opts.dims_path;
  if (!opts.rules_path.empty()) m.inputs["rules"] = opts.rules_path;
  m.config["seed"] = std::to_string(resolve_seed(opts));
  m.config["starts"] = std::to_string(opts.starts);
  m.config["tol"] = std::to_string(opts.tol);
  m.config["threads"] = std::to_string(opts.threads);
  for (auto& [key, value] : extra_config) m.config[key] = value;
  m.artifact_version = kVersion;
  m.timestamp = current_timestamp();
  return m;
}

void emit(const std::string& text, const CommonOpts& opts) {
  if (opts.out_path.empty()) {
    if (!opts.pretty) std::cout << text;
  } else {
    std::ofstream out(opts.out_path, std::ios::binary);
    if (!out) throw ValidationError("cannot write file: " + opts.out_path);
    out << text;
  }
}

std::string format_double(double v, int precision = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return buf;
}

void print_model_tables(const FittedModel& model, long long n) {
  const int C = model.latent.class_count();
  const int D = model.dmap.dimension_count;
  std::cout << "Estimated support points and class probabilities\n";
  std::cout << "  dimension";
  for (int c = 1; c <= C; ++c) std::cout << "\tclass " << c;
  std::cout << "\n";
  for (int d = 0; d < D; ++d) {
    std::cout << "  " << model.dmap.dim_names[d];
    for (int c = 0; c < C; ++c)
      std::cout << '\t' << format_double(model.latent.supports[c][d], 2);
    std::cout << "\n";
  }
  std::cout << "  probability";
  for (int c = 0; c < C; ++c)
    std::cout << '\t' << format_double(model.latent.weights[c], 3);
  std::cout << "\n\nEstimated item difficulties\n";
  for (int i = 0; i < model.dmap.item_count; ++i) {
    const int d = model.dmap.assignment[i];
    const bool ref = model.beta.reference_items[d] == i;
    std::cout << "  " << model.dmap.item_labels[i] << " ("
              << model.dmap.dim_names[d] << ")\t"
              << format_double(model.beta.difficulties[i], 3)
              << (ref ? " *" : "") << "\n";
  }
  std::cout << "  (* reference item, fixed at 0)\n\n";
  std::cout << "loglik = " << format_double(model.loglik, 2)
            << "  g = " << model.n_parameters << "  BIC = "
            << format_double(bic(model.loglik, model.n_parameters, n), 1)
            << (model.converged ? "" : "  [not converged]") << "\n";
}

int cmd_fit(CommonOpts& opts, int classes) {
  auto [data, dmap] = load_data(opts);
  FitConfig cfg = make_config(opts);
  FittedModel model = fit_mml(data, ModelSpec{classes, dmap}, cfg);
  const RunManifest manifest =
      make_manifest("fit", opts, {{"classes", std::to_string(classes)}});
  emit(model_to_json(model, manifest, data.total, &data), opts);
  if (opts.pretty) print_model_tables(model, data.total);
  for (const auto& w : model.warnings) std::cerr << "warning: " << w << "\n";
  return model.converged ? 0 : 2;
}

int cmd_select(CommonOpts& opts, const std::string& range) {
  auto [data, dmap] = load_data(opts);
  const auto colon = range.find(':');
  if (colon == std::string::npos)
    throw ValidationError("--class-range expects LO:HI, e.g. 1:7");
  const int lo = std::stoi(range.substr(0, colon));
  const int hi = std::stoi(range.substr(colon + 1));
  if (lo < 1 || hi < lo) throw ValidationError("--class-range out of order");
  std::vector<int> counts;
  for (int c = lo; c <= hi; ++c) counts.push_back(c);

  FitConfig cfg = make_config(opts);
  ClassSweepResult sweep = select_class_count(data, dmap, counts, cfg);
  const SelectionReport& report = sweep.report;

  ordered_json j;
  j["format"] = "lcrasch/selection";
  j["version"] = 1;
  const RunManifest manifest =
      make_manifest("select", opts, {{"class_range", range}});
  j["manifest"] = ordered_json::parse(manifest_to_json(manifest));
  ordered_json rows = ordered_json::array();
  for (const auto& row : report.rows) {
    ordered_json r;
    r["label"] = row.label;
    r["class_count"] = row.class_count;
    if (row.error.empty()) {
      r["loglik"] = row.loglik;
      r["g"] = row.g;
      r["bic"] = row.bic;
      r["converged"] = row.converged;
    } else {
      r["error"] = row.error;
    }
    rows.push_back(r);
  }
  j["candidates"] = rows;
  j["chosen_class_count"] =
      report.chosen >= 0 ? ordered_json(report.rows[report.chosen].class_count)
                         : ordered_json(nullptr);
  j["n_observations"] = data.total;
  j["notes"] = report.notes;
  emit(j.dump(2) + "\n", opts);

  if (opts.pretty) {
    std::cout << "  C\tloglik\tg\tBIC\n";
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
      const auto& row = report.rows[i];
      if (!row.error.empty()) {
        std::cout << "  " << row.class_count << "\t[failed: " << row.error
                  << "]\n";
        continue;
      }
      std::cout << "  " << row.class_count << '\t'
                << format_double(row.loglik, 1) << '\t' << row.g << '\t'
                << format_double(row.bic, 1)
                << (static_cast<int>(i) == report.chosen ? " *" : "") << "\n";
    }
  }
  if (report.chosen < 0) {
    std::cerr << "error: every candidate fit failed\n";
    return 2;
  }
  return 0;
}

ordered_json test_result_json(const TestResult& res) {
  ordered_json r;
  r["method"] = res.method == TestMethod::mml_lr ? "mml" : "martinlof";
  r["statistic"] = res.statistic;
  r["df"] = res.df;
  r["p_value"] = res.p_value;
  r["loglik_general"] = res.loglik_general;
  r["loglik_restricted"] = res.loglik_restricted;
  r["warnings"] = res.warnings;
  return r;
}

int cmd_test(CommonOpts& opts, const std::string& method,
             const std::string& pair, bool all_pairs, int classes) {
  if (method != "mml" && method != "martinlof" && method != "both")
    throw ValidationError("--method must be mml, martinlof or both");
  const bool want_mml = method != "martinlof";
  const bool want_ml = method != "mml";
  if (want_mml && classes < 2)
    throw ValidationError("--classes (>= 2) is required for the mml method");

  auto [data, dmap] = load_data(opts);
  std::vector<std::pair<int, int>> pairs;
  if (all_pairs) {
    for (int d1 = 0; d1 < dmap.dimension_count; ++d1)
      for (int d2 = d1 + 1; d2 < dmap.dimension_count; ++d2)
        pairs.emplace_back(d1, d2);
  } else {
    const auto comma = pair.find(',');
    if (comma == std::string::npos)
      throw ValidationError("--pair expects two dimension names, e.g. BP,SF");
    const std::string n1 = pair.substr(0, comma);
    const std::string n2 = pair.substr(comma + 1);
    int d1 = -1, d2 = -1;
    for (int d = 0; d < dmap.dimension_count; ++d) {
      if (dmap.dim_names[d] == n1) d1 = d;
      if (dmap.dim_names[d] == n2) d2 = d;
    }
    if (d1 < 0 || d2 < 0 || d1 == d2)
      throw ValidationError(
          "--pair must name two distinct dimensions from the map");
    pairs.emplace_back(d1, d2);
  }

  FitConfig cfg = make_config(opts);
  ordered_json out_pairs = ordered_json::array();
  int failures = 0;
  for (auto [d1, d2] : pairs) {
    ordered_json p;
    p["d1"] = dmap.dim_names[d1];
    p["d2"] = dmap.dim_names[d2];
    ordered_json results = ordered_json::array();
    std::string error;
    if (want_mml) {
      try {
        results.push_back(test_result_json(
            lr_mml_test(data, ModelSpec{classes, dmap}, d1, d2, cfg)));
      } catch (const std::exception& e) {
        error = e.what();
      }
    }
    if (want_ml) {
      try {
        const MartinLofResult ml = martin_lof_test(data, dmap, d1, d2);
        ordered_json r = test_result_json(ml.result);
        ordered_json parts;
        parts["cml_d1"] = ml.cml_d1;
        parts["cml_d2"] = ml.cml_d2;
        parts["multinomial_joint"] = ml.multinomial_joint;
        parts["cml_pooled"] = ml.cml_pooled;
        parts["multinomial_marginal"] = ml.multinomial_marginal;
        r["components"] = parts;
        results.push_back(r);
      } catch (const std::exception& e) {
        if (!error.empty()) error += "; ";
        error += e.what();
      }
    }
    p["results"] = results;
    if (!error.empty()) p["error"] = error;
    if (results.empty()) ++failures;
    out_pairs.push_back(p);
  }

  ordered_json j;
  j["format"] = "lcrasch/tests";
  j["version"] = 1;
  const RunManifest manifest = make_manifest(
      "test", opts, {{"method", method}, {"classes", std::to_string(classes)}});
  j["manifest"] = ordered_json::parse(manifest_to_json(manifest));
  j["pairs"] = out_pairs;
  emit(j.dump(2) + "\n", opts);

  if (opts.pretty) {
    for (const std::string& m : {std::string("mml"), std::string("martinlof")}) {
      if ((m == "mml" && !want_mml) || (m == "martinlof" && !want_ml)) continue;
      std::cout << "method " << m << "\n";
      for (const auto& p : out_pairs) {
        std::string cell = "failed";
        for (const auto& r : p["results"])
          if (r["method"] == m)
            cell = format_double(r["statistic"].get<double>(), 1) + " (" +
                   format_double(r["p_value"].get<double>(), 3) + ")";
        std::cout << "  " << p["d1"].get<std::string>() << " x "
                  << p["d2"].get<std::string>() << "\t" << cell << "\n";
      }
    }
  }
  if (failures == static_cast<int>(pairs.size()) && failures > 0) {
    std::cerr << "error: every tested pair failed\n";
    return 2;
  }
  return 0;
}

int cmd_simulate(CommonOpts& opts, const std::string& model_path, long long n,
                 const std::string& classes_path, const std::string& dims_out) {
  const LoadedModel loaded = load_model_file(model_path);
  const FittedModel& model = loaded.model;
  const std::uint64_t seed = resolve_seed(opts);
  const SimulatedData sim =
      simulate_responses(model.latent, model.beta, model.dmap, n, seed);

  if (opts.out_path.empty())
    throw ValidationError("simulate requires --out for the response file");
  write_responses(opts.out_path, model.dmap.item_labels, sim.rows);

  RunManifest manifest =
      make_manifest("simulate", opts, {{"n", std::to_string(n)}});
  manifest.inputs["model"] = model_path;
  std::ofstream mf(opts.out_path + ".manifest.json", std::ios::binary);
  mf << manifest_to_json(manifest);

  if (!classes_path.empty()) {
    std::ofstream cf(classes_path, std::ios::binary);
    if (!cf) throw ValidationError("cannot write file: " + classes_path);
    cf << "class\n";
    for (int c : sim.true_class) cf << (c + 1) << "\n";
  }
  if (!dims_out.empty()) {
    std::ofstream df(dims_out, std::ios::binary);
    if (!df) throw ValidationError("cannot write file: " + dims_out);
    const auto by_dim = model.dmap.items_by_dimension();
    for (int d = 0; d < model.dmap.dimension_count; ++d) {
      df << model.dmap.dim_names[d] << ":";
      for (std::size_t j = 0; j < by_dim[d].size(); ++j)
        df << (j ? ", " : " ") << model.dmap.item_labels[by_dim[d][j]];
      df << "\n";
    }
  }
  if (opts.pretty)
    std::cout << "wrote " << n << " subjects x " << model.dmap.item_count
              << " items to " << opts.out_path << "\n";
  return 0;
}

int cmd_correlate(CommonOpts& opts, const std::string& model_path) {
  const LoadedModel loaded = load_model_file(model_path);
  const CorrelationMatrix corr = correlation_matrix(loaded.model);
  const DimensionMap& dmap = loaded.model.dmap;

  ordered_json j;
  j["format"] = "lcrasch/correlation";
  j["version"] = 1;
  RunManifest manifest = make_manifest("correlate", opts, {});
  manifest.inputs["model"] = model_path;
  j["manifest"] = ordered_json::parse(manifest_to_json(manifest));
  j["dimensions"] = dmap.dim_names;
  j["rho"] = corr.rho;
  j["standardized_supports"] = corr.standardized_supports;
  emit(j.dump(2) + "\n", opts);

  if (opts.pretty) {
    std::cout << "Estimated correlation matrix between latent traits\n  ";
    for (const auto& name : dmap.dim_names) std::cout << '\t' << name;
    std::cout << "\n";
    for (int d1 = 0; d1 < dmap.dimension_count; ++d1) {
      std::cout << "  " << dmap.dim_names[d1];
      for (int d2 = 0; d2 < dmap.dimension_count; ++d2)
        std::cout << '\t' << format_double(corr.rho[d1][d2], 3);
      std::cout << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multidimensional latent-class Rasch model toolkit"};
  app.require_subcommand(1);

  CommonOpts fit_opts, select_opts, test_opts, sim_opts, corr_opts;
  int fit_classes = 0;
  std::string select_range;
  std::string test_method = "both", test_pair;
  bool test_all_pairs = false;
  int test_classes = 0;
  std::string sim_model, sim_classes_path, sim_dims_out;
  long long sim_n = 0;
  std::string corr_model;

  CLI::App* fit = app.add_subcommand("fit", "fit the model by discrete MML");
  add_fit_options(fit, fit_opts);
  fit->add_option("--classes", fit_classes, "number of latent classes")
      ->required();

  CLI::App* select =
      app.add_subcommand("select", "sweep the class count and choose by BIC");
  add_fit_options(select, select_opts);
  select->add_option("--class-range", select_range, "candidate range LO:HI")
      ->required();

  CLI::App* test =
      app.add_subcommand("test", "dimensionality tests for dimension pairs");
  add_fit_options(test, test_opts);
  test->add_option("--method", test_method, "mml, martinlof or both");
  test->add_option("--pair", test_pair, "two dimension names, e.g. BP,SF");
  test->add_flag("--all-pairs", test_all_pairs, "test every dimension pair");
  test->add_option("--classes", test_classes,
                   "latent classes for the mml method");

  CLI::App* simulate =
      app.add_subcommand("simulate", "draw responses from a model file");
  simulate->add_option("--model", sim_model, "generating model (JSON)")
      ->required();
  simulate->add_option("--n", sim_n, "number of subjects")->required();
  simulate->add_option("--seed", sim_opts.seed, "RNG seed (fallback: LCRM_SEED)")
      ->each([&](const std::string&) { sim_opts.seed_set = true; });
  simulate->add_option("--out", sim_opts.out_path, "response file to write")
      ->required();
  simulate->add_option("--out-classes", sim_classes_path,
                       "also write the true class per subject");
  simulate->add_option("--out-dims", sim_dims_out,
                       "also write the matching dimension map");
  simulate->add_flag("--pretty", sim_opts.pretty, "print a summary");

  CLI::App* correlate = app.add_subcommand(
      "correlate", "latent-trait correlation matrix of a fitted model");
  correlate->add_option("--model", corr_model, "fitted model file (JSON)")
      ->required();
  correlate->add_flag("--pretty", corr_opts.pretty, "print the matrix");
  correlate->add_option("--out", corr_opts.out_path,
                        "output file (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (fit->parsed()) return cmd_fit(fit_opts, fit_classes);
    if (select->parsed()) return cmd_select(select_opts, select_range);
    if (test->parsed())
      return cmd_test(test_opts, test_method, test_pair, test_all_pairs,
                      test_classes);
    if (simulate->parsed())
      return cmd_simulate(sim_opts, sim_model, sim_n, sim_classes_path,
                          sim_dims_out);
    if (correlate->parsed()) return cmd_correlate(corr_opts, corr_model);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
