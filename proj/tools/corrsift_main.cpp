// corrsift: selection, selective testing, and simulation for groups of
// Gaussian variables picked by correlation thresholding.
//
// Machine-readable payloads go to stdout; logs go to stderr.
// Exit codes: 0 success, 2 usage/input, 3 dimensional precondition,
// 4 selection mismatch, 5 Monte Carlo exhaustion.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "corrsift/io.hpp"
#include "corrsift/selection.hpp"

namespace {

using namespace corrsift;

constexpr int kExitUsage = 2;
constexpr int kExitDimension = 3;
constexpr int kExitMismatch = 4;
constexpr int kExitMcExhausted = 5;

std::uint64_t resolve_seed(bool seed_given, std::uint64_t seed) {
  if (seed_given) return seed;
  if (const char* env = std::getenv("CORRSIFT_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw ArgumentError("CORRSIFT_SEED is not a valid unsigned integer");
    }
  }
  return seed;
}

std::string json_string(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += ch;
    }
  }
  out += '"';
  return out;
}

std::string json_groups(const std::vector<IndexSet>& groups) {
  std::string out = "[";
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (g) out += ',';
    out += '[';
    for (std::size_t i = 0; i < groups[g].size(); ++i) {
      if (i) out += ',';
      out += std::to_string(groups[g][i] + 1);  // 1-based on the wire
    }
    out += ']';
  }
  out += ']';
  return out;
}

CsvTable load_table(const std::string& path, const std::string& delimiter) {
  if (delimiter.empty()) return read_csv_file(path);
  if (delimiter.size() != 1) {
    throw ArgumentError("--delimiter must be a single character");
  }
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open file: " + path);
  std::stringstream patched;
  patched << in.rdbuf();
  CsvTable table;
  // Honor the explicit delimiter by replacing it with a comma up front
  // unless it already is one of the auto-detected characters.
  std::string content = patched.str();
  const char d = delimiter[0];
  if (d != ',') {
    for (char& ch : content) {
      if (ch == d) ch = ',';
    }
  }
  std::istringstream again(content);
  return read_csv(again);
}

int cmd_select(const std::string& input, double threshold, bool ordered,
               bool require_inference, const std::string& delimiter) {
  const CsvTable table = load_table(input, delimiter);
  const DataMatrix data(table.values);
  if (require_inference) data.require_inference_shape();
  const CovarianceMatrix s = sample_covariance(data);
  const Partition partition = select_components(s, threshold, ordered);
  std::cerr << "selected " << partition.groups.size() << " groups from "
            << data.n() << " x " << data.p() << " input\n";
  std::cout << "{\"groups\":" << json_groups(partition.groups)
            << ",\"threshold\":" << format_double(threshold)
            << ",\"ordered\":" << (ordered ? "true" : "false") << "}\n";
  return 0;
}

int cmd_test(const std::string& input, double threshold,
             std::vector<int> group_wire, const std::string& method, long B,
             bool seed_given, std::uint64_t seed, bool ordered,
             double rel_tol, int max_subdivisions,
             const std::string& delimiter) {
  const CsvTable table = load_table(input, delimiter);
  const DataMatrix data(table.values);
  data.require_inference_shape();
  const CovarianceMatrix s = sample_covariance(data);

  IndexSet group;
  for (int idx : group_wire) {
    if (idx < 1 || idx > data.p()) {
      throw ArgumentError("--group indices must lie in 1.." +
                          std::to_string(data.p()));
    }
    group.push_back(idx - 1);
  }
  std::sort(group.begin(), group.end());
  group.erase(std::unique(group.begin(), group.end()), group.end());

  MethodPolicy policy = MethodPolicy::automatic;
  if (method == "closed") policy = MethodPolicy::closed;
  else if (method == "integrate") policy = MethodPolicy::integrate;
  else if (method == "mc") policy = MethodPolicy::mc;
  else if (method != "auto") throw ArgumentError("unknown --method: " + method);

  const std::uint64_t used_seed = resolve_seed(seed_given, seed);
  RngStream rng(used_seed, 0);
  const PValueResult sel =
      selective_p_value(s, data.n(), group, threshold, policy, B, rng,
                        ordered, rel_tol, max_subdivisions);
  const CcaDecomposition cca = cca_decompose(s, group);
  const NullSpec spec(data.n(), data.p(), cca.r());
  const ClassicalPValue cls = classical_p_value(cca.lambdas, spec, B, rng);

  std::string lambdas = "[";
  for (int i = 0; i < cca.r(); ++i) {
    if (i) lambdas += ',';
    lambdas += format_double(cca.lambdas(i));
  }
  lambdas += ']';

  std::string group_json = "[";
  for (std::size_t i = 0; i < group.size(); ++i) {
    if (i) group_json += ',';
    group_json += std::to_string(group[i] + 1);
  }
  group_json += ']';

  std::ostringstream diag;
  diag << "{\"B_used\":" << sel.diagnostics.B_used
       << ",\"acceptance_count\":" << sel.diagnostics.acceptance_count
       << ",\"integration_converged\":"
       << (sel.diagnostics.integration_converged ? "true" : "false")
       << ",\"fallback_reason\":"
       << (sel.diagnostics.fallback_reason
               ? json_string(*sel.diagnostics.fallback_reason)
               : "null")
       << ",\"classical_method\":"
       << json_string(cls.exact ? "classical_exact" : "classical_mc")
       << ",\"classical_B_used\":" << cls.b_used << "}";

  std::cerr << "tested group of " << group.size() << " variables, r = "
            << cca.r() << ", method = " << to_string(sel.method) << "\n";
  std::cout << "{\"group\":" << group_json << ",\"r\":" << cca.r()
            << ",\"lambdas_hat\":" << lambdas
            << ",\"p_selective\":" << format_double(sel.p)
            << ",\"p_classical\":" << format_double(cls.p)
            << ",\"method\":" << json_string(to_string(sel.method))
            << ",\"diagnostics\":" << diag.str() << ",\"inputs_echo\":{\"n\":"
            << data.n() << ",\"p\":" << data.p()
            << ",\"c\":" << format_double(threshold) << ",\"seed\":"
            << used_seed << "}}\n";
  return 0;
}

int cmd_simulate_type1(const SimConfig& config, const std::string& out_prefix) {
  const Type1Result result = run_type1_experiment(config);
  const std::string records_path = out_prefix + "_records.csv";
  std::ofstream records(records_path);
  if (!records) throw ArgumentError("cannot write " + records_path);
  write_type1_csv(records, result);
  std::cerr << "type1: " << result.records.size() << " records, "
            << result.skipped << " skipped\n";
  std::cout << "{\"experiment\":\"type1\",\"p\":" << config.p
            << ",\"n\":" << config.n() << ",\"reps\":" << config.reps
            << ",\"threshold\":"
            << (config.threshold ? format_double(*config.threshold)
                                 : std::string("\"adaptive\""))
            << ",\"alpha\":" << format_double(config.alpha)
            << ",\"seed\":" << config.seed << ",\"cap_mode\":"
            << json_string(config.cap_mode == CapMode::min ? "min"
                                                           : "paper_max")
            << ",\"records\":" << result.records.size()
            << ",\"skipped\":" << result.skipped
            << ",\"ks_selective\":{\"statistic\":"
            << format_double(result.ks_selective.statistic)
            << ",\"p_value\":" << format_double(result.ks_selective.p_value)
            << "},\"ks_classical\":{\"statistic\":"
            << format_double(result.ks_classical.statistic)
            << ",\"p_value\":" << format_double(result.ks_classical.p_value)
            << "},\"records_file\":" << json_string(records_path) << "}\n";
  return 0;
}

int cmd_simulate_power(const SimConfig& config, const std::string& out_prefix) {
  const PowerResult result = run_power_experiment(config);
  const std::string records_path = out_prefix + "_records.csv";
  const std::string bins_path = out_prefix + "_bins.csv";
  std::ofstream records(records_path);
  if (!records) throw ArgumentError("cannot write " + records_path);
  write_power_csv(records, result);
  std::ofstream bins(bins_path);
  if (!bins) throw ArgumentError("cannot write " + bins_path);
  write_power_bins_csv(bins, result);
  std::cerr << "power: " << result.records.size() << " records, "
            << result.skipped << " skipped, " << result.bins.size()
            << " populated bins\n";
  std::cout << "{\"experiment\":\"power\",\"p\":" << config.p
            << ",\"n\":" << config.n() << ",\"reps\":" << config.reps
            << ",\"threshold\":"
            << (config.threshold ? format_double(*config.threshold)
                                 : std::string("\"adaptive\""))
            << ",\"alpha\":" << format_double(config.alpha)
            << ",\"seed\":" << config.seed << ",\"cap_mode\":"
            << json_string(config.cap_mode == CapMode::min ? "min"
                                                           : "paper_max")
            << ",\"records\":" << result.records.size()
            << ",\"skipped\":" << result.skipped
            << ",\"populated_bins\":" << result.bins.size()
            << ",\"records_file\":" << json_string(records_path)
            << ",\"bins_file\":" << json_string(bins_path) << "}\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"selective inference for correlation-thresholded groups"};
  app.require_subcommand(1);

  // select ---------------------------------------------------------------
  auto* select = app.add_subcommand("select", "partition variables");
  std::string sel_input, sel_delim;
  double sel_threshold = 0.0;
  bool sel_ordered = false, sel_require_inference = false;
  select->add_option("--input", sel_input, "CSV/TSV data file")->required();
  select->add_option("--threshold", sel_threshold, "correlation threshold c")
      ->required();
  select->add_flag("--ordered", sel_ordered, "keep only consecutive groups");
  select->add_flag("--require-inference", sel_require_inference,
                   "require n > p");
  select->add_option("--delimiter", sel_delim, "explicit field delimiter");

  // test -----------------------------------------------------------------
  auto* test = app.add_subcommand("test", "selective p-value for a group");
  std::string test_input, test_delim, test_method = "auto";
  double test_threshold = 0.0, test_rel_tol = 1e-6;
  std::vector<int> test_group;
  long test_B = 1000;
  std::uint64_t test_seed = 0;
  int test_max_subdiv = 10000;
  bool test_ordered = false;
  test->add_option("--input", test_input, "CSV/TSV data file")->required();
  test->add_option("--threshold", test_threshold, "correlation threshold c")
      ->required();
  test->add_option("--group", test_group,
                   "1-based variable indices of the selected group")
      ->required()
      ->delimiter(',');
  test->add_option("--method", test_method, "auto|closed|integrate|mc");
  test->add_option("--B", test_B, "Monte Carlo budget");
  auto* test_seed_opt = test->add_option("--seed", test_seed, "RNG seed");
  test->add_flag("--ordered", test_ordered, "ordered-mode selection");
  test->add_option("--rel-tol", test_rel_tol, "integration tolerance");
  test->add_option("--max-subdivisions", test_max_subdiv,
                   "integration subdivision cap");
  test->add_option("--delimiter", test_delim, "explicit field delimiter");

  // simulate ---------------------------------------------------------------
  auto* simulate = app.add_subcommand("simulate", "run an experiment");
  simulate->require_subcommand(1);
  SimConfig config;
  double threshold_flag = -1.0;
  std::string cap_mode = "min", out_prefix;
  std::uint64_t sim_seed = 0;
  bool threshold_set = false;
  auto add_sim_flags = [&](CLI::App* sub) {
    sub->add_option("--p", config.p, "number of variables");
    sub->add_option("--n-factor", config.n_factor, "n = round(n_factor * p)");
    sub->add_option("--reps", config.reps, "replicates");
    sub->add_option("--threshold", threshold_flag,
                    "fixed c (adaptive when omitted)")
        ->each([&](const std::string&) { threshold_set = true; });
    sub->add_option("--alpha", config.alpha, "rejection level");
    sub->add_option("--cap-mode", cap_mode, "min|paper_max threshold cap");
    sub->add_option("--mc-budget", config.mc_budget, "per-test MC budget");
    sub->add_option("--threads", config.threads, "worker thread cap");
    sub->add_option("--out", out_prefix, "output file prefix");
    return sub->add_option("--seed", sim_seed, "RNG seed");
  };
  auto* type1 = simulate->add_subcommand("type1", "null calibration run");
  auto* type1_seed_opt = add_sim_flags(type1);
  auto* power = simulate->add_subcommand("power", "power comparison run");
  auto* power_seed_opt = add_sim_flags(power);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (select->parsed()) {
      return cmd_select(sel_input, sel_threshold, sel_ordered,
                        sel_require_inference, sel_delim);
    }
    if (test->parsed()) {
      return cmd_test(test_input, test_threshold, test_group, test_method,
                      test_B, test_seed_opt->count() > 0, test_seed,
                      test_ordered, test_rel_tol, test_max_subdiv, test_delim);
    }
    if (threshold_set) config.threshold = threshold_flag;
    if (cap_mode == "min") {
      config.cap_mode = CapMode::min;
    } else if (cap_mode == "paper_max") {
      config.cap_mode = CapMode::paper_max;
    } else {
      throw ArgumentError("unknown --cap-mode: " + cap_mode);
    }
    if (type1->parsed()) {
      config.seed = resolve_seed(type1_seed_opt->count() > 0, sim_seed);
      return cmd_simulate_type1(config,
                                out_prefix.empty() ? "type1" : out_prefix);
    }
    if (power->parsed()) {
      config.seed = resolve_seed(power_seed_opt->count() > 0, sim_seed);
      return cmd_simulate_power(config,
                                out_prefix.empty() ? "power" : out_prefix);
    }
    std::cerr << "error: no subcommand\n";
    return kExitUsage;
  } catch (const SelectionMismatchError& e) {
    std::cerr << "error: selection mismatch: " << e.what() << "\n";
    return kExitMismatch;
  } catch (const InsufficientAcceptanceError& e) {
    std::cerr << "error: Monte Carlo exhaustion: " << e.what() << "\n";
    return kExitMcExhausted;
  } catch (const DimensionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDimension;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}
