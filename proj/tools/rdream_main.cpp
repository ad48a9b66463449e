#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rdream/baselines.hpp"
#include "rdream/chi_square.hpp"
#include "rdream/csv.hpp"
#include "rdream/data_model.hpp"
#include "rdream/simulation.hpp"

namespace {

using nlohmann::ordered_json;
using namespace rdream;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitDegenerate = 3;
constexpr int kExitInternal = 4;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

TestMethod parse_method_flag(const std::string& s) {
  if (s == "opg") return TestMethod::Opg;
  if (s == "dee") return TestMethod::Dee;
  if (s == "wq") return TestMethod::Wq;
  if (s == "gwz") return TestMethod::Gwz;
  throw Error("unknown method: " + s + " (expected opg|dee|wq|gwz)");
}

LinkSpec load_link(const std::string& spec) {
  if (spec == "linear") return LinkSpec::linear();
  std::ifstream in(spec);
  if (!in) throw FileNotFoundError(spec);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error("cannot parse link file " + spec + ": " + e.what());
  }
  const std::string family = j.at("family").get<std::string>();
  if (family == "linear") return LinkSpec::linear();
  if (family == "scaled_exp") {
    return LinkSpec::scaled_exp(j.at("c1").get<double>(),
                                j.at("c2").get<double>());
  }
  if (family == "exp_theta") return LinkSpec::exp_theta();
  throw Error("unknown link family in " + spec + ": " + family);
}

int resolve_threads(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("RDREAM_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open output file: " + path);
  out << text;
  if (!out) throw Error("failed while writing output file: " + path);
}

struct TestConfig {
  std::string data_path;
  std::string response;
  std::vector<std::string> covariates;
  std::string link = "linear";
  std::string method = "opg";
  double alpha = 0.05;
  std::optional<double> bandwidth;
  std::optional<int> q_override;
  std::uint64_t seed = 0;
  std::string output = "-";
  std::string output_format = "json";
  bool no_preprocess = false;
};

ordered_json config_json(const TestConfig& cfg, const std::string& command) {
  ordered_json c;
  c["command"] = command;
  c["data"] = cfg.data_path;
  c["response"] = cfg.response;
  c["covariates"] = cfg.covariates;
  c["link"] = cfg.link;
  c["method"] = cfg.method;
  c["alpha"] = cfg.alpha;
  if (cfg.bandwidth) {
    c["bandwidth_override"] = *cfg.bandwidth;
  } else {
    c["bandwidth_override"] = nullptr;
  }
  if (cfg.q_override) {
    c["q_override"] = *cfg.q_override;
  } else {
    c["q_override"] = nullptr;
  }
  c["seed"] = cfg.seed;
  c["output"] = cfg.output;
  c["output_format"] = cfg.output_format;
  c["preprocess"] = !cfg.no_preprocess;
  return c;
}

ordered_json report_json(const TestReport& r, double alpha) {
  ordered_json j;
  j["method"] = to_string(r.method);
  j["n"] = r.n;
  j["p"] = r.p;
  j["v_n"] = r.v_n;
  j["var_hat"] = r.var_hat;
  if (r.degenerate) {
    j["s_n"] = nullptr;
    j["s_n_adj"] = nullptr;
    j["p_value"] = nullptr;
    j["reject"] = nullptr;
  } else {
    j["s_n"] = r.s_n;
    j["s_n_adj"] = r.s_n_adj;
    j["p_value"] = *r.p_value;
    j["reject"] =
        r.s_n_adj * r.s_n_adj >= chi_square_quantile(1.0 - alpha);
  }
  j["alpha"] = alpha;
  j["degenerate"] = r.degenerate;
  j["diagnostic"] = r.diagnostic;
  j["q_hat"] = r.q_hat;
  j["h"] = r.h;
  ordered_json b = ordered_json::array();
  for (Index i = 0; i < r.b_hat.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Index k = 0; k < r.b_hat.cols(); ++k) row.push_back(r.b_hat(i, k));
    b.push_back(std::move(row));
  }
  j["b_hat"] = std::move(b);
  ordered_json beta = ordered_json::array();
  for (Index i = 0; i < r.beta.size(); ++i) beta.push_back(r.beta[i]);
  j["beta"] = std::move(beta);
  ordered_json theta = ordered_json::array();
  for (Index i = 0; i < r.theta.size(); ++i) theta.push_back(r.theta[i]);
  j["theta"] = std::move(theta);
  j["intercept"] = r.intercept;
  j["fit_converged"] = r.fit_converged;
  j["fit_iterations"] = r.fit_iterations;
  j["scores_hash"] = r.scores_hash;
  j["bandwidth_rate_constant"] = r.bandwidth_rate_constant;
  j["h_overridden"] = r.h_overridden;
  j["q_overridden"] = r.q_overridden;
  j["rre_c"] = r.rre_c;
  j["sdr_prefit_h"] = r.sdr_prefit_h;
  return j;
}

// Flattens a JSON document into "dotted.key,value" CSV lines.
void flatten_json(const ordered_json& j, const std::string& prefix,
                  std::string& out) {
  if (j.is_object()) {
    for (const auto& item : j.items()) {
      flatten_json(item.value(),
                   prefix.empty() ? item.key() : prefix + "." + item.key(),
                   out);
    }
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) {
      flatten_json(j[i], prefix + "." + std::to_string(i), out);
    }
  } else if (j.is_number_float()) {
    out += prefix + "," + format_double(j.get<double>()) + "\n";
  } else {
    out += prefix + "," + j.dump() + "\n";
  }
}

std::string render_report(const ordered_json& doc, const std::string& format) {
  if (format == "json") return doc.dump(2) + "\n";
  std::string out = "key,value\n";
  flatten_json(doc, "", out);
  return out;
}

int run_test_command(const TestConfig& cfg) {
  const CsvIngestResult ingest =
      ingest_csv(cfg.data_path, cfg.response, cfg.covariates);
  Dataset data = ingest.data;

  if (!cfg.no_preprocess) {
    data = standardize_covariates(data).first;
    data.y.array() -= data.y.mean();
  }

  TestOverrides overrides;
  overrides.h = cfg.bandwidth;
  overrides.q_hat = cfg.q_override;
  const TestReport report = run_lack_of_fit_test(
      data, load_link(cfg.link), parse_method_flag(cfg.method), overrides);

  ordered_json doc;
  doc["config"] = config_json(cfg, "test");
  doc["ingest"] = {{"rows_used", ingest.data.n},
                   {"rows_dropped", ingest.dropped_rows},
                   {"covariates", ingest.covariate_names}};
  doc["result"] = report_json(report, cfg.alpha);
  write_text(cfg.output, render_report(doc, cfg.output_format));
  return report.degenerate ? kExitDegenerate : kExitOk;
}

struct SensitivityConfig {
  TestConfig base;
  Index index = 0;
  double y_min = 0.0;
  double y_max = 0.0;
  Index y_count = 21;
  std::vector<double> y_grid;
};

int run_sensitivity_command(const SensitivityConfig& cfg) {
  const CsvIngestResult ingest =
      ingest_csv(cfg.base.data_path, cfg.base.response, cfg.base.covariates);
  const Dataset& raw = ingest.data;
  if (cfg.index < 0 || cfg.index >= raw.n) {
    throw Error("--index out of range, dataset has " + std::to_string(raw.n) +
                " rows");
  }

  Vector grid;
  if (!cfg.y_grid.empty()) {
    grid = Eigen::Map<const Vector>(cfg.y_grid.data(),
                                    static_cast<Index>(cfg.y_grid.size()));
  } else {
    if (cfg.y_count < 2) throw Error("--y-count must be at least 2");
    grid = Vector::LinSpaced(cfg.y_count, cfg.y_min, cfg.y_max);
  }

  // perturb the raw response, then apply the same preprocessing as `test`
  const LinkSpec link = load_link(cfg.base.link);
  const TestMethod method = parse_method_flag(cfg.base.method);
  Vector curve(grid.size());
  Dataset perturbed = raw;
  for (Index k = 0; k < grid.size(); ++k) {
    perturbed.y = raw.y;
    perturbed.y[cfg.index] = grid[k];
    Dataset data = perturbed;
    if (!cfg.base.no_preprocess) {
      data = standardize_covariates(data).first;
      data.y.array() -= data.y.mean();
    }
    curve[k] = run_lack_of_fit_test(data, link, method).s_n_adj;
  }

  std::string out;
  if (cfg.base.output_format == "json") {
    ordered_json doc;
    doc["config"] = config_json(cfg.base, "sensitivity");
    doc["config"]["index"] = cfg.index;
    ordered_json rows = ordered_json::array();
    for (Index k = 0; k < grid.size(); ++k) {
      rows.push_back({{"y0", grid[k]}, {"s_n_adj", curve[k]}});
    }
    doc["curve"] = std::move(rows);
    out = doc.dump(2) + "\n";
  } else {
    out = "y0,s_n_adj\n";
    for (Index k = 0; k < grid.size(); ++k) {
      out += format_double(grid[k]) + "," + format_double(curve[k]) + "\n";
    }
  }
  write_text(cfg.base.output, out);
  return kExitOk;
}

struct SimulateConfig {
  std::vector<std::string> families;
  std::vector<double> a_values{0.0};
  std::vector<Index> n_values{100};
  std::vector<int> p_values{0};
  std::vector<std::string> errors{"normal"};
  std::vector<std::string> methods{"opg", "dee"};
  std::string contamination = "default";
  std::vector<double> rho_values;
  double lognormal_var = 0.0625;
  int reps = 500;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  int threads = 0;
  std::string output;
  std::string format = "csv";
};

ContaminationSpec resolve_contamination(const std::string& flag, Family family,
                                        std::optional<double> rho) {
  ContaminationSpec spec;
  if (flag == "default") {
    spec = default_contamination(family);
  } else if (flag == "none") {
    spec = ContaminationSpec::none();
  } else {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : flag + ":") {
      if (c == ':') {
        parts.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    if (parts.size() == 3 && parts[0] == "add") {
      spec = ContaminationSpec::add_constant(std::stod(parts[1]),
                                             std::stod(parts[2]));
    } else if (parts.size() == 3 && parts[0] == "replace") {
      ReplacementModel model;
      if (parts[1] == "cos") {
        model = ReplacementModel::CosineRidge;
      } else if (parts[1] == "expv") {
        model = ReplacementModel::ExpValley;
      } else {
        throw Error("unknown replacement model token: " + parts[1]);
      }
      spec = ContaminationSpec::replace_by_model(model, std::stod(parts[2]));
    } else {
      throw Error("cannot parse --contamination value: " + flag);
    }
  }
  if (rho) {
    if (spec.kind == ContaminationSpec::Kind::None) {
      // a rho sweep over a clean default means the family's replacement model
      spec = ContaminationSpec::replace_by_model(ReplacementModel::ExpValley,
                                                 *rho);
    } else {
      spec.rate = *rho;
    }
  }
  if (spec.rate < 0.0 || spec.rate > 0.5) {
    throw Error("contamination rate must lie in [0, 0.5], got " +
                format_double(spec.rate));
  }
  return spec;
}

int run_simulate_command(const SimulateConfig& cfg) {
  if (cfg.output.empty()) throw Error("--output is required for simulate");
  std::vector<TestMethod> methods;
  methods.reserve(cfg.methods.size());
  for (const std::string& m : cfg.methods) methods.push_back(parse_method_flag(m));

  std::vector<ScenarioSpec> grid;
  std::vector<std::optional<double>> rhos;
  if (cfg.rho_values.empty()) {
    rhos.push_back(std::nullopt);
  } else {
    for (double r : cfg.rho_values) rhos.emplace_back(r);
  }
  for (const std::string& fname : cfg.families) {
    const Family family = parse_family(fname);
    for (int p : cfg.p_values) {
      for (const std::string& err : cfg.errors) {
        for (double a : cfg.a_values) {
          for (Index n : cfg.n_values) {
            for (const auto& rho : rhos) {
              ScenarioSpec spec;
              spec.family = family;
              spec.a = a;
              spec.n = n;
              spec.p = p;
              spec.error = parse_error(err);
              spec.contamination =
                  resolve_contamination(cfg.contamination, family, rho);
              spec.lognormal_sigma2 = cfg.lognormal_var;
              grid.push_back(spec);
            }
          }
        }
      }
    }
  }

  const PowerTable table =
      run_monte_carlo(grid, methods, cfg.reps, cfg.alpha, cfg.seed,
                      resolve_threads(cfg.threads));
  emit_report(table,
              cfg.format == "json" ? ReportFormat::Json : ReportFormat::Csv,
              cfg.output);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust dimension-reduction lack-of-fit tests for "
               "parametric single-index regression"};
  app.require_subcommand(1);

  TestConfig test_cfg;
  CLI::App* test = app.add_subcommand(
      "test", "Run a lack-of-fit test on a CSV dataset");
  test->add_option("--data", test_cfg.data_path, "CSV file")->required();
  test->add_option("--response", test_cfg.response, "response column name")
      ->required();
  test->add_option("--covariates", test_cfg.covariates,
                   "covariate column names (default: all other columns)")
      ->delimiter(',');
  test->add_option("--link", test_cfg.link,
                   "'linear' or a JSON link-spec file");
  test->add_option("--method", test_cfg.method, "opg|dee|wq|gwz");
  test->add_option("--alpha", test_cfg.alpha, "significance level")
      ->check(CLI::Range(1e-12, 1.0 - 1e-12));
  double bw = 0.0;
  CLI::Option* bw_opt =
      test->add_option("--bandwidth", bw, "fixed bandwidth override");
  int qov = 0;
  CLI::Option* q_opt =
      test->add_option("--q", qov, "fixed structural dimension override");
  test->add_option("--seed", test_cfg.seed, "echoed into the report");
  test->add_option("--output", test_cfg.output, "output path or '-'");
  test->add_option("--output-format", test_cfg.output_format, "json|csv")
      ->check(CLI::IsMember({"json", "csv"}));
  test->add_flag("--no-preprocess", test_cfg.no_preprocess,
                 "skip covariate standardization and response centering");

  SensitivityConfig sens_cfg;
  sens_cfg.base.output_format = "csv";
  CLI::App* sens = app.add_subcommand(
      "sensitivity",
      "Adjusted statistic as one response sweeps a grid of values");
  sens->add_option("--data", sens_cfg.base.data_path, "CSV file")->required();
  sens->add_option("--response", sens_cfg.base.response, "response column")
      ->required();
  sens->add_option("--covariates", sens_cfg.base.covariates,
                   "covariate column names")
      ->delimiter(',');
  sens->add_option("--link", sens_cfg.base.link, "'linear' or JSON file");
  sens->add_option("--method", sens_cfg.base.method, "opg|dee|wq|gwz");
  sens->add_option("--index", sens_cfg.index, "observation to perturb")
      ->required();
  sens->add_option("--y-min", sens_cfg.y_min, "grid start");
  sens->add_option("--y-max", sens_cfg.y_max, "grid end");
  sens->add_option("--y-count", sens_cfg.y_count, "grid size");
  sens->add_option("--y-grid", sens_cfg.y_grid, "explicit grid values")
      ->delimiter(',');
  sens->add_option("--output", sens_cfg.base.output, "output path or '-'");
  sens->add_option("--output-format", sens_cfg.base.output_format,
                   "json|csv")
      ->check(CLI::IsMember({"json", "csv"}));
  sens->add_flag("--no-preprocess", sens_cfg.base.no_preprocess,
                 "skip preprocessing");

  SimulateConfig sim_cfg;
  CLI::App* sim = app.add_subcommand(
      "simulate", "Monte Carlo size/power study over a scenario grid");
  sim->add_option("--family", sim_cfg.families,
                  "scenario families (H11..H14,H21..H23,H31)")
      ->required()
      ->delimiter(',');
  sim->add_option("--a", sim_cfg.a_values, "departure values")->delimiter(',');
  sim->add_option("--n", sim_cfg.n_values, "sample sizes")->delimiter(',');
  sim->add_option("--p", sim_cfg.p_values,
                  "covariate dimensions (0 = family default)")
      ->delimiter(',');
  sim->add_option("--error", sim_cfg.errors, "normal|lognormal")
      ->delimiter(',');
  sim->add_option("--method", sim_cfg.methods, "opg|dee|wq|gwz")
      ->delimiter(',');
  sim->add_option("--contamination", sim_cfg.contamination,
                  "default|none|add:VALUE:RATE|replace:cos|expv:RATE");
  sim->add_option("--rho", sim_cfg.rho_values,
                  "contamination-rate sweep (one grid cell per value)")
      ->delimiter(',');
  sim->add_option("--lognormal-var", sim_cfg.lognormal_var,
                  "ln-scale variance of the lognormal error");
  sim->add_option("--reps", sim_cfg.reps, "replications per cell")
      ->check(CLI::PositiveNumber);
  sim->add_option("--alpha", sim_cfg.alpha, "significance level");
  sim->add_option("--seed", sim_cfg.seed, "seed base");
  sim->add_option("--threads", sim_cfg.threads,
                  "worker threads (0 = RDREAM_THREADS or hardware)");
  sim->add_option("--output", sim_cfg.output, "report file")->required();
  sim->add_option("--format", sim_cfg.format, "csv|json")
      ->check(CLI::IsMember({"csv", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitInput;
  }

  try {
    if (test->parsed()) {
      if (*bw_opt) test_cfg.bandwidth = bw;
      if (*q_opt) test_cfg.q_override = qov;
      return run_test_command(test_cfg);
    }
    if (sens->parsed()) return run_sensitivity_command(sens_cfg);
    return run_simulate_command(sim_cfg);
  } catch (const FileNotFoundError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const MissingColumnError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const AllRowsDroppedError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const NonFiniteError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const TooFewObservationsError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const EmptyCovariatesError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const ShapeMismatchError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const SingularCovarianceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const RankDeficientDesignError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const DegenerateVarianceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDegenerate;
  } catch (const DegenerateBandwidthError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDegenerate;
  } catch (const SingularLocalFitError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDegenerate;
  } catch (const EigenFailureError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDegenerate;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}
