// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails. Pass criterion numbers as arguments to
// run a subset.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "bartcs/backfit.hpp"
#include "bartcs/cli.hpp"
#include "bartcs/diagnostics.hpp"
#include "bartcs/io.hpp"
#include "bartcs/moves.hpp"
#include "bartcs/priors.hpp"
#include "bartcs/simulation.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace bartcs;
namespace fs = std::filesystem;

namespace {

constexpr double kTruthS1 = -2.5656;
constexpr double kTruthS2 = -1.3989;
constexpr std::uint64_t kMaster = 20240601;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

ChainConfig desk_schedule(Scheme scheme) {
  ChainConfig cfg;
  cfg.n_iter = 5000;
  cfg.burn_in = 2500;
  cfg.thin = 5;
  cfg.scheme = scheme;
  cfg.n_chains = 1;
  return cfg;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

double round4(double v) { return std::round(v * 1e4) / 1e4; }

Outcome true_effects() {
  const double s1 = true_effect(ScenarioId::S1);
  const double s2 = true_effect(ScenarioId::S2);
  const double s3 = true_effect(ScenarioId::S3);
  const bool ok = round4(s1) == kTruthS1 && round4(s2) == kTruthS2 && round4(s3) == kTruthS2;
  return {ok, "S1 " + fmt(s1, 6) + ", S2 " + fmt(s2, 6) + ", S3 " + fmt(s3, 6)};
}

// Marginal S2 replicates, shared by criteria 2 and 5.
const SimulationResult& s2_marginal() {
  static const SimulationResult result = [] {
    return run_replicates(default_spec(ScenarioId::S2, kMaster), 20, desk_schedule(Scheme::Marginal),
                          bart_estimator(Hyperparams{}));
  }();
  return result;
}

Outcome s2_bias_mse() {
  const auto& r = s2_marginal();
  const bool ok = std::abs(r.bias) <= 0.15 && r.mse <= 0.08;
  return {ok, "m=" + std::to_string(r.m) + " bias " + fmt(r.bias) + " (<= 0.15), mse " + fmt(r.mse) +
                  " (<= 0.08), coverage " + fmt(r.coverage, 2)};
}

struct S3Runs {
  std::vector<InclusionReport> pips;
  std::vector<ClassDecomposition> classes;
};

const S3Runs& s3_runs() {
  static const S3Runs runs = [] {
    S3Runs out;
    const std::vector<int> cap{0, 1, 2, 3, 4};
    Estimator est = [&out, &cap](const Dataset& data, const ChainConfig& cfg) {
      const std::vector<Trace> traces = run_chains(data, Hyperparams{}, cfg);
      const Trace merged = merge_traces(traces);
      out.pips.push_back(pip(merged));
      out.classes.push_back(class_decomposition(merged, cap, cap));
      return ate(traces);
    };
    run_replicates(default_spec(ScenarioId::S3, kMaster + 3), 10, desk_schedule(Scheme::Marginal), est);
    return out;
  }();
  return runs;
}

Outcome s3_instruments() {
  const auto& runs = s3_runs();
  const double m = static_cast<double>(runs.pips.size());
  std::vector<double> mean(7, 0.0);
  for (const auto& r : runs.pips) {
    for (std::size_t j = 0; j < 7; ++j) mean[j] += r.outcome[j] / m;
  }
  bool ok = mean[5] < 0.5 && mean[6] < 0.5;
  std::string detail = "outcome PIP";
  for (std::size_t j = 0; j < 7; ++j) {
    if (j < 5) ok = ok && mean[j] >= 0.9;
    detail += " X" + std::to_string(j + 1) + "=" + fmt(mean[j], 3);
  }
  return {ok, detail + " (X1-X5 >= 0.9, X6/X7 < 0.5)"};
}

Outcome s3_class_decomposition() {
  const auto& runs = s3_runs();
  double mean = 0.0, low = 1.0;
  for (const auto& c : runs.classes) {
    mean += c.fraction_R_cap / static_cast<double>(runs.classes.size());
    low = std::min(low, c.fraction_R_cap);
  }
  return {mean >= 0.9, "mean fraction_R_cap " + fmt(mean, 3) + " (>= 0.9), lowest replicate " + fmt(low, 3)};
}

Outcome scheme_agreement() {
  const auto& marginal = s2_marginal();
  const SimulationResult separate =
      run_replicates(default_spec(ScenarioId::S2, kMaster), marginal.m, desk_schedule(Scheme::Separate),
                     bart_estimator(Hyperparams{}));
  double mean_m = 0.0, mean_s = 0.0;
  for (int r = 0; r < marginal.m; ++r) {
    mean_m += marginal.replicates[static_cast<std::size_t>(r)].estimate / marginal.m;
    mean_s += separate.replicates[static_cast<std::size_t>(r)].estimate / separate.m;
  }
  const bool ok = std::abs(mean_m - kTruthS2) <= 0.3 && std::abs(mean_s - kTruthS2) <= 0.3 &&
                  std::abs(mean_m - mean_s) <= 0.2;
  return {ok, "mean posterior ATE over " + std::to_string(marginal.m) + " replicates: marginal " + fmt(mean_m) +
                  ", separate " + fmt(mean_s) + ", gap " + fmt(std::abs(mean_m - mean_s))};
}

Outcome reciprocity() {
  Hyperparams hp;
  Rng rng(kMaster + 6);
  int checked = 0, failed = 0;
  double worst = 0.0;
  while (checked < 10000) {
    const std::size_t p = 1 + rng.index(6);
    const auto x = testing::random_matrix(20 + rng.index(60), p, rng, rng.uniform() < 0.5);
    std::vector<double> sel(p);
    double total = 0.0;
    for (double& v : sel) total += (v = 0.05 + rng.uniform());
    for (double& v : sel) v /= total;
    Tree t = testing::random_tree(x, rng, static_cast<int>(rng.index(8)));
    auto g = propose_grow(t, x, sel, rng);
    if (!g) continue;
    std::vector<double> r(x.rows());
    for (double& v : r) v = rng.normal(0.0, 3.0);
    const double s2 = 0.05 + 2 * rng.uniform(), sm2 = 0.01 + rng.uniform();
    const double forward = log_accept_grow(*g, s2, sm2, r, hp);
    apply_move(t, *g, x);
    const double reverse = log_accept_prune(make_prune_proposal(t, x, g->node), s2, sm2, r, hp);
    const double gap = std::abs(forward + reverse);
    worst = std::max(worst, gap);
    if (!(gap <= 1e-10)) ++failed;
    ++checked;
  }
  return {failed == 0, std::to_string(checked) + " grow proposals, worst |grow + prune| " + sci(worst) +
                           " (<= 1e-10), failures " + std::to_string(failed)};
}

Outcome conjugate_update() {
  Rng config_rng(kMaster + 7);
  Rng rng(kMaster + 70);
  const int draws = 100000;
  int failures = 0, compared = 0;
  double worst = 0.0;
  for (int config = 0; config < 5; ++config) {
    const std::size_t p = 2 + config_rng.index(7);
    SplitCounts counts;
    counts.exposure.resize(p);
    counts.outcome.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
      counts.exposure[j] = static_cast<int>(config_rng.index(8));
      counts.outcome[j] = static_cast<int>(config_rng.index(12));
    }
    const double alpha = 0.2 + 3 * config_rng.uniform();
    // Closed form: Dir(alpha/P + m_j + n_j).
    std::vector<double> conc(p);
    double total = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      total += (conc[j] = alpha / static_cast<double>(p) + counts.exposure[j] + counts.outcome[j]);
    }
    std::vector<double> s1(p, 0.0), s2(p, 0.0), s3(p, 0.0), s4(p, 0.0);
    for (int k = 0; k < draws; ++k) {
      const auto s = update_s_separate(counts, alpha, rng);
      for (std::size_t j = 0; j < p; ++j) {
        const double v = s.probs[j];
        s1[j] += v;
        s2[j] += v * v;
        s3[j] += v * v * v;
        s4[j] += v * v * v * v;
      }
    }
    const double n = draws;
    for (std::size_t j = 0; j < p; ++j) {
      const double mean = conc[j] / total;
      const double var = conc[j] * (total - conc[j]) / (total * total * (total + 1));
      const double m1 = s1[j] / n, m2 = s2[j] / n, m3 = s3[j] / n, m4 = s4[j] / n;
      const double sample_var = (m2 - m1 * m1) * n / (n - 1);
      const double c4 = m4 - 4 * m3 * m1 + 6 * m2 * m1 * m1 - 3 * m1 * m1 * m1 * m1;
      const double se_mean = std::sqrt(var / n);
      const double se_var = std::sqrt(std::max(c4 - sample_var * sample_var, 0.0) / n);
      const double z_mean = std::abs(m1 - mean) / se_mean;
      const double z_var = std::abs(sample_var - var) / se_var;
      worst = std::max({worst, z_mean, z_var});
      failures += (z_mean >= 3.0) + (z_var >= 3.0);
      compared += 2;
    }
  }
  return {failures == 0, std::to_string(compared) + " moment checks over 5 configurations, largest |z| " +
                             fmt(worst, 2) + " (< 3), failures " + std::to_string(failures)};
}

Outcome marginal_equilibrium() {
  const testing::SimplexTarget target{3, 4, 1, 2, 3, 1.0};
  const SplitCounts counts{{static_cast<int>(target.m1), static_cast<int>(target.m2)},
                           {static_cast<int>(target.n1), static_cast<int>(target.n2)},
                           static_cast<int>(target.n0)};
  const int bins = 10;
  const auto expected = testing::simplex_bin_masses(target, bins, 20);
  bool ok = true;
  std::string detail;
  for (double c : {0.0, target.n0}) {
    Rng rng(kMaster + 8 + static_cast<std::uint64_t>(c));
    auto s = SplitProbVector::uniform(3);
    std::vector<double> hist(expected.size(), 0.0);
    const int draws = 1000000;
    int accepted = 0;
    for (int k = 0; k < draws; ++k) {
      const auto u = update_s_marginal(counts, target.alpha, c, s, rng);
      accepted += u.accepted;
      s = u.s;
      hist[static_cast<std::size_t>(testing::simplex_bin(s.probs[0], s.probs[1], bins))] += 1.0 / draws;
    }
    const double tv = testing::total_variation(hist, expected);
    ok = ok && tv < 0.05;
    detail += (detail.empty() ? "" : ", ") + std::string("c=") + fmt(c, 0) + " TV " + fmt(tv) + " (acceptance " +
              fmt(static_cast<double>(accepted) / draws, 3) + ")";
  }
  return {ok, detail + " (< 0.05)"};
}

Outcome probit_augmentation() {
  Rng rng(kMaster + 9);
  const int n = 100000;
  std::vector<double> a(n, 1.0), fitted(n, 0.0), z(n);
  probit_latent_update(a, fitted, z, rng);
  double sum = 0.0;
  for (double v : z) sum += v;
  const double mean = sum / n;
  bool ok = std::abs(mean - 0.7979) <= 0.01;

  const std::size_t rows = 200;
  Matrix x(rows, 2);
  std::vector<double> arm(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    x(i, 0) = rng.normal();
    x(i, 1) = rng.normal();
    arm[i] = rng.uniform() < normal_cdf(x(i, 0) - 0.5 * x(i, 1)) ? 1.0 : 0.0;
  }
  Hyperparams hp;
  auto state = make_model_state(ModelRole::Exposure, x, std::vector<double>(rows, 0.0),
                                calibrate_leaf_prior(-3.0, 3.0, hp.num_trees), 1.0, true);
  const std::vector<double> sel{0.5, 0.5};
  const int sweeps = 500;
  int violations = 0;
  for (int k = 0; k < sweeps; ++k) {
    probit_sweep(state, arm, sel, hp, rng);
    for (std::size_t i = 0; i < rows; ++i) {
      if (arm[i] == 1.0 ? !(state.response[i] > 0.0) : !(state.response[i] <= 0.0)) ++violations;
    }
  }
  ok = ok && violations == 0;
  return {ok, "half-normal mean " + fmt(mean) + " (0.7979 +- 0.01), sign violations " + std::to_string(violations) +
                  " over " + std::to_string(sweeps) + " sweeps"};
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "bartcs");
  std::vector<const char*> argv;
  for (const auto& s : args) argv.push_back(s.c_str());
  std::ostringstream out, err;
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "bartcs_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  ScenarioSpec spec = default_spec(ScenarioId::S2, kMaster + 10);
  spec.n = 120;
  spec.p = 10;
  const Dataset data = gen_scenario(spec).data;
  {
    std::ofstream csv(dir / "d.csv");
    csv << "y,a";
    for (const auto& name : data.names()) csv << ',' << name;
    csv << '\n';
    for (std::size_t i = 0; i < data.n(); ++i) {
      csv << format_real(data.y()[i]) << ',' << format_real(data.a()[i]);
      for (std::size_t j = 0; j < data.p(); ++j) csv << ',' << format_real(data.x()(i, j));
      csv << '\n';
    }
  }
  bool ok = true;
  int compared = 0;
  for (const std::string scheme : {"marginal", "separate"}) {
    std::vector<fs::path> outs;
    for (int run = 0; run < 2; ++run) {
      outs.push_back(dir / (scheme + std::to_string(run)));
      const int code = cli({"fit", "--input", (dir / "d.csv").string(), "--outcome", "y", "--exposure", "a",
                            "--scheme", scheme, "--iters", "400", "--chains", "2", "--seed", "7", "--out",
                            outs.back().string()});
      ok = ok && code == 0;
    }
    for (const std::string file : {"trace_0.jsonl", "trace_1.jsonl", "summary.csv", "pip.csv"}) {
      const std::string first = read_text(outs[0] / file);
      ok = ok && !first.empty() && first == read_text(outs[1] / file);
      ++compared;
    }
  }
  fs::remove_all(dir);
  return {ok, std::to_string(compared) + " artifact pairs from repeated fit runs compared byte for byte"};
}

Outcome p_greater_than_n() {
  try {
    const auto r = run_replicates(default_spec(ScenarioId::S_PgtN, kMaster + 11), 5, desk_schedule(Scheme::Marginal),
                                  bart_estimator(Hyperparams{}));
    return {std::abs(r.bias) <= 1.5, "n=60, P=100, m=5: bias " + fmt(r.bias) + " (<= 1.5), mse " + fmt(r.mse)};
  } catch (const std::exception& e) {
    return {false, std::string("sampler failed: ") + e.what()};
  }
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"true effects", true_effects},
      {"S2 bias and MSE", s2_bias_mse},
      {"S3 instrument inclusion", s3_instruments},
      {"S3 class decomposition", s3_class_decomposition},
      {"separate vs marginal on S2", scheme_agreement},
      {"grow/prune reversibility", reciprocity},
      {"conjugate simplex update", conjugate_update},
      {"marginal simplex equilibrium", marginal_equilibrium},
      {"probit augmentation", probit_augmentation},
      {"determinism", determinism},
      {"P > N smoke test", p_greater_than_n},
  };
  std::set<int> selected;
  for (int k = 1; k < argc; ++k) selected.insert(std::stoi(argv[k]));

  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << criteria[k].first << "): " << o.detail
              << " [" << fmt(secs, 1) << " s]" << std::endl;
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
