#include "bartcs/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bartcs/diagnostics.hpp"
#include "bartcs/estimands.hpp"
#include "bartcs/io.hpp"
#include "bartcs/simulation.hpp"

namespace bartcs {

namespace fs = std::filesystem;

namespace {

struct FitArgs {
  std::string input;
  std::string outcome;
  std::string exposure;
  std::vector<std::string> covariates;
  std::string scheme = "marginal";
  std::string exposure_kind = "binary";
  long iters = 25000;
  long burn_in = -1;
  long thin = 10;
  std::uint64_t seed = 1;
  int chains = 1;
  std::string out = ".";
  std::string c_offset = "n0";
  Hyperparams hp;
};

struct SimulateArgs {
  std::string scenario;
  int reps = 1;
  std::uint64_t seed = 1;
  std::string scheme = "marginal";
  long iters = 5000;
  long burn_in = -1;
  long thin = 5;
  std::string out = ".";
  Hyperparams hp;
};

struct ReportArgs {
  std::string dir;
  std::vector<double> grid;
  int grid_size = 0;
  std::vector<std::string> cap;
  std::vector<std::string> star;
  bool sets_given = false;
  std::string selector = "outcome";
  std::string input;
};

void add_hyperparams(CLI::App* app, Hyperparams& hp) {
  app->add_option("--trees", hp.num_trees, "Trees per forest")->capture_default_str();
  app->add_option("--beta1", hp.beta1, "Tree depth prior base")->capture_default_str();
  app->add_option("--beta2", hp.beta2, "Tree depth prior power")->capture_default_str();
  app->add_option("--a-sigma", hp.a_sigma, "Inverse-gamma shape of the variances")->capture_default_str();
  app->add_option("--b-sigma", hp.b_sigma, "Inverse-gamma rate of the variances")->capture_default_str();
  app->add_option("--a0", hp.a0, "Beta prior on alpha/(alpha+P), first shape")->capture_default_str();
  app->add_option("--b0", hp.b0, "Beta prior on alpha/(alpha+P), second shape")->capture_default_str();
  app->add_option("--alpha-init", hp.alpha_init, "Initial Dirichlet concentration")->capture_default_str();
  app->add_option("--alpha-step", hp.alpha_log_step, "Random-walk sd on log(alpha)")->capture_default_str();
}

COffset parse_c_offset(const std::string& text) {
  COffset c;
  if (text == "n0") {
    c.mode = COffset::Mode::EqualToN0;
  } else if (text == "zero" || text == "0") {
    c.mode = COffset::Mode::Zero;
  } else {
    c.mode = COffset::Mode::Fixed;
    try {
      std::size_t used = 0;
      c.value = std::stod(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidConfig, "c offset must be n0, zero or a number, got '" + text + "'");
    }
  }
  return c;
}

ChainConfig make_chain_config(long iters, long burn_in, long thin, std::uint64_t seed, const std::string& scheme,
                              int chains) {
  ChainConfig cfg;
  cfg.n_iter = iters;
  cfg.burn_in = burn_in < 0 ? iters / 2 : burn_in;
  cfg.thin = thin;
  cfg.seed = seed;
  cfg.scheme = parse_scheme(scheme);
  cfg.n_chains = chains;
  cfg.validate();
  return cfg;
}

double quantile_of(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

SummaryRow summary_row(const std::string& name, const std::vector<EffectSummary>& per_chain) {
  std::vector<double> pooled;
  std::vector<std::vector<double>> chains;
  for (const EffectSummary& e : per_chain) {
    pooled.insert(pooled.end(), e.draws.begin(), e.draws.end());
    chains.push_back(e.draws);
  }
  SummaryRow row;
  row.estimand = name;
  row.effect = summarize_draws(std::move(pooled));
  row.chains = per_chain.size();
  if (chains.size() >= 2) row.rhat = gelman_rubin(chains);
  return row;
}

int cmd_fit(const FitArgs& args, std::ostream& out) {
  Hyperparams hp = args.hp;
  hp.c_offset = parse_c_offset(args.c_offset);
  hp.validate();
  const ChainConfig cfg =
      make_chain_config(args.iters, args.burn_in, args.thin, args.seed, args.scheme, args.chains);
  const ExposureKind kind = parse_exposure_kind(args.exposure_kind);
  const ColumnRoles roles{args.outcome, args.exposure, args.covariates};
  const Dataset data = ingest_csv(args.input, roles, kind);

  const std::vector<Trace> traces = run_chains(data, hp, cfg);

  const fs::path dir(args.out);
  fs::create_directories(dir);
  TraceHeader header{fs::absolute(args.input).lexically_normal().string(), roles};
  for (const Trace& t : traces) write_trace(dir / ("trace_" + std::to_string(t.chain) + ".jsonl"), t, header);

  std::vector<EffectSummary> per_chain;
  std::string estimand;
  if (kind == ExposureKind::Binary) {
    estimand = "ate";
    for (const Trace& t : traces) per_chain.push_back(cfg.scheme == Scheme::Separate ? ate_separate(t) : ate_marginal(t));
  } else {
    const double hi = quantile_of(data.a(), 0.75);
    const double lo = quantile_of(data.a(), 0.25);
    estimand = "contrast_q75_q25";
    for (const Trace& t : traces) per_chain.push_back(contrast_continuous(t, data.x(), hi, lo));
  }
  const SummaryRow row = summary_row(estimand, per_chain);
  const std::string summary = summary_csv({row});
  write_file_atomic(dir / "summary.csv", summary);

  const Trace merged = merge_traces(traces);
  write_file_atomic(dir / "pip.csv", pip_csv(pip(merged), args.exposure));
  out << summary;
  return 0;
}

int cmd_simulate(const SimulateArgs& args, std::ostream& out) {
  args.hp.validate();
  const ChainConfig cfg = make_chain_config(args.iters, args.burn_in, args.thin, args.seed, args.scheme, 1);
  const ScenarioSpec spec = default_spec(parse_scenario(args.scenario), args.seed);
  const SimulationResult result = run_replicates(spec, args.reps, cfg, bart_estimator(args.hp));
  const fs::path dir(args.out);
  fs::create_directories(dir);
  const std::string csv = metrics_csv(result);
  write_file_atomic(dir / "metrics.csv", csv);
  out << csv.substr(0, csv.find('\n', csv.find('\n') + 1) + 1);
  return 0;
}

std::vector<int> resolve_names(const std::vector<std::string>& wanted, const std::vector<std::string>& names) {
  std::vector<int> out;
  for (const std::string& w : wanted) {
    const auto it = std::find(names.begin(), names.end(), w);
    if (it == names.end()) throw Error(ErrorCode::MissingColumn, "variable '" + w + "' is not in the trace");
    out.push_back(static_cast<int>(it - names.begin()));
  }
  return out;
}

int cmd_report(const ReportArgs& args, std::ostream& out) {
  const fs::path dir(args.dir);
  std::vector<Trace> traces;
  TraceHeader header;
  for (const fs::path& p : find_traces(dir)) {
    LoadedTrace lt = read_trace(p);
    header = lt.header;
    traces.push_back(std::move(lt.trace));
  }
  const Trace merged = merge_traces(traces);
  const bool wants_grid = !args.grid.empty() || args.grid_size > 0;

  if (merged.exposure_kind == ExposureKind::Binary && wants_grid) {
    throw Error(ErrorCode::UnsupportedForBinary, "exposure-response grids need a continuous exposure");
  }

  if (args.sets_given) {
    const std::vector<int> cap = resolve_names(args.cap, merged.names);
    const std::vector<int> star = resolve_names(args.star, merged.names);
    const ClassDecomposition cd = class_decomposition(merged, cap, star);
    const std::string csv = "fraction_R_cap,fraction_R_star\n" + format_summary(cd.fraction_R_cap) + ',' +
                            format_summary(cd.fraction_R_star) + '\n';
    write_file_atomic(dir / "class_decomposition.csv", csv);
    out << csv;
  }

  const PipSelector selector = parse_pip_selector(args.selector);
  const InclusionReport report = pip(merged);
  std::string chart = "variable,pip\n";
  const std::vector<double>& chosen = report.select(selector);
  for (std::size_t j = 0; j < report.names.size(); ++j) chart += report.names[j] + ',' + format_summary(chosen[j]) + '\n';
  write_file_atomic(dir / "pip_chart.csv", chart);

  if (merged.exposure_kind == ExposureKind::Continuous) {
    std::vector<double> grid = args.grid;
    if (grid.empty()) {
      const int size = args.grid_size > 0 ? args.grid_size : 20;
      for (int k = 0; k < size; ++k) {
        const double frac = size == 1 ? 0.5 : static_cast<double>(k) / (size - 1);
        grid.push_back(k == size - 1 && size > 1
                           ? merged.exposure_max
                           : merged.exposure_min + frac * (merged.exposure_max - merged.exposure_min));
      }
    }
    const std::string input = args.input.empty() ? header.input : args.input;
    const Dataset data = ingest_csv(input, header.roles, ExposureKind::Continuous);
    const std::vector<EffectSummary> curve = exposure_response(merged, data.x(), grid);
    const std::string csv = exposure_response_csv(grid, curve);
    write_file_atomic(dir / "exposure_response.csv", csv);
    out << csv;
  }
  return 0;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool has_flag(const std::vector<std::string>& args, const std::string& flag) {
  return std::any_of(args.begin(), args.end(),
                     [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
}

// Replaces `--config <file>` with the file's `key = value` lines turned into
// flags; a flag given on the command line wins over the file.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t k = 0; k < args.size(); ++k) {
    if (args[k] == "--config" && k + 1 < args.size()) {
      path = args[k + 1];
      args.erase(args.begin() + static_cast<long>(k), args.begin() + static_cast<long>(k) + 2);
      break;
    }
    if (args[k].rfind("--config=", 0) == 0) {
      path = args[k].substr(9);
      args.erase(args.begin() + static_cast<long>(k));
      break;
    }
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config file " + path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::ParseError, path + " line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    std::replace(key.begin(), key.end(), '_', '-');
    const std::string flag = "--" + key;
    if (!has_flag(args, flag)) {
      args.push_back(flag);
      args.push_back(trim(line.substr(eq + 1)));
    }
  }
  return args;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bayesian additive regression trees for causal effects with confounder selection", "bartcs"};
  app.require_subcommand(1);

  FitArgs fit;
  CLI::App* fit_cmd = app.add_subcommand("fit", "Fit a model to a CSV file and write traces, summary and PIP");
  std::string config_path;
  fit_cmd->add_option("--config", config_path, "Flat key = value configuration file");
  fit_cmd->add_option("--input", fit.input, "Input CSV")->required();
  fit_cmd->add_option("--outcome", fit.outcome, "Outcome column")->required();
  fit_cmd->add_option("--exposure", fit.exposure, "Exposure column")->required();
  fit_cmd->add_option("--covariates", fit.covariates, "Covariate columns (default: all others)")->delimiter(',');
  fit_cmd->add_option("--scheme", fit.scheme, "marginal or separate")
      ->check(CLI::IsMember({"marginal", "separate"}))
      ->capture_default_str();
  fit_cmd->add_option("--exposure-kind", fit.exposure_kind, "binary or continuous")
      ->check(CLI::IsMember({"binary", "continuous"}))
      ->capture_default_str();
  fit_cmd->add_option("--iters", fit.iters, "MCMC iterations")->capture_default_str();
  fit_cmd->add_option("--burn-in", fit.burn_in, "Burn-in iterations (default: half)");
  fit_cmd->add_option("--thin", fit.thin, "Thinning interval")->capture_default_str();
  fit_cmd->add_option("--seed", fit.seed, "Master seed")->capture_default_str();
  fit_cmd->add_option("--chains", fit.chains, "Independent chains")->capture_default_str();
  fit_cmd->add_option("--out", fit.out, "Output directory")->capture_default_str();
  fit_cmd->add_option("--c-offset", fit.c_offset, "Exposure offset of the marginal proposal: n0, zero or a number")
      ->capture_default_str();
  add_hyperparams(fit_cmd, fit.hp);

  SimulateArgs sim;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "Run simulation replicates and write metrics.csv");
  sim_cmd->add_option("--scenario", sim.scenario, "Scenario id")
      ->required()
      ->check(CLI::IsMember({"S1", "S2", "S3", "S4", "S5", "S6", "S_PgtN", "S_Targeted"}));
  sim_cmd->add_option("--reps", sim.reps, "Replicates")->check(CLI::Range(1, 1 << 30))->capture_default_str();
  sim_cmd->add_option("--seed", sim.seed, "Master seed")->capture_default_str();
  sim_cmd->add_option("--scheme", sim.scheme, "marginal or separate")
      ->check(CLI::IsMember({"marginal", "separate"}))
      ->capture_default_str();
  sim_cmd->add_option("--iters", sim.iters, "MCMC iterations per replicate")->capture_default_str();
  sim_cmd->add_option("--burn-in", sim.burn_in, "Burn-in iterations (default: half)");
  sim_cmd->add_option("--thin", sim.thin, "Thinning interval")->capture_default_str();
  sim_cmd->add_option("--out", sim.out, "Output directory")->capture_default_str();
  add_hyperparams(sim_cmd, sim.hp);

  ReportArgs rep;
  CLI::App* rep_cmd = app.add_subcommand("report", "Post-process the traces of a fit");
  rep_cmd->add_option("--dir", rep.dir, "Directory holding trace_<k>.jsonl")->required();
  auto* grid_opt = rep_cmd->add_option("--grid", rep.grid, "Exposure grid points")->delimiter(',');
  rep_cmd->add_option("--grid-size", rep.grid_size, "Evenly spaced grid over the observed exposure range")
      ->excludes(grid_opt);
  auto* cap_opt = rep_cmd->add_option("--cap", rep.cap, "Variables required in every draw of R_cap")->delimiter(',');
  auto* star_opt = rep_cmd->add_option("--star", rep.star, "Variables required in every draw of R_star")->delimiter(',');
  rep_cmd->add_option("--selector", rep.selector, "PIP model selector: outcome, exposure or any")
      ->check(CLI::IsMember({"outcome", "exposure", "any"}))
      ->capture_default_str();
  rep_cmd->add_option("--input", rep.input, "Override the input CSV recorded in the trace");

  std::vector<std::string> args;
  try {
    args = expand_config(std::vector<std::string>(argv + 1, argv + argc));
  } catch (const Error& e) {
    err << "ERROR " << error_code_name(e.code()) << ": " << e.what() << '\n';
    return 1;
  }
  std::reverse(args.begin(), args.end());

  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "ERROR usage: " << e.what() << '\n';
    return 2;
  }

  try {
    if (fit_cmd->parsed()) return cmd_fit(fit, out);
    if (sim_cmd->parsed()) return cmd_simulate(sim, out);
    rep.sets_given = cap_opt->count() > 0 || star_opt->count() > 0;
    return cmd_report(rep, out);
  } catch (const Error& e) {
    err << "ERROR " << error_code_name(e.code()) << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "ERROR Io: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace bartcs
