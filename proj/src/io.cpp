#include "bartcs/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>

#include "json.hpp"

namespace bartcs {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string cell_ref(std::size_t row, std::size_t col) {
  return "row " + std::to_string(row) + ", column " + std::to_string(col);
}

}  // namespace

Dataset ingest_csv(const fs::path& path, const ColumnRoles& roles, ExposureKind kind) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, "missing header row in " + path.string());
  const std::vector<std::string> header = split_csv_line(line);

  auto column_of = [&](const std::string& name) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error(ErrorCode::MissingColumn, "column '" + name + "' not found");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t y_col = column_of(roles.outcome);
  const std::size_t a_col = column_of(roles.exposure);
  if (y_col == a_col) throw Error(ErrorCode::InvalidConfig, "outcome and exposure must be different columns");

  std::vector<std::string> names;
  std::vector<std::size_t> x_cols;
  if (roles.covariates.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c != y_col && c != a_col) {
        names.push_back(header[c]);
        x_cols.push_back(c);
      }
    }
  } else {
    for (const std::string& name : roles.covariates) {
      const std::size_t c = column_of(name);
      if (c == y_col || c == a_col) {
        throw Error(ErrorCode::InvalidConfig, "column '" + name + "' cannot be both a covariate and a role");
      }
      names.push_back(name);
      x_cols.push_back(c);
    }
  }

  std::vector<std::vector<double>> rows;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw Error(ErrorCode::ParseError, "row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                                             " cells, header has " + std::to_string(header.size()));
    }
    std::vector<double> values(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::string& cell = cells[c];
      if (cell.empty() || cell == "NA") throw Error(ErrorCode::MissingValue, "missing value at " + cell_ref(row, c + 1));
      const char* first = cell.data();
      const char* last = cell.data() + cell.size();
      if (*first == '+') ++first;
      const auto [ptr, ec] = std::from_chars(first, last, values[c]);
      if (ec != std::errc() || ptr != last || !std::isfinite(values[c])) {
        throw Error(ErrorCode::ParseError, "cannot parse '" + cell + "' at " + cell_ref(row, c + 1));
      }
    }
    if (kind == ExposureKind::Binary && values[a_col] != 0.0 && values[a_col] != 1.0) {
      throw Error(ErrorCode::ExposureDomainError,
                  "binary exposure holds " + cells[a_col] + " at " + cell_ref(row, a_col + 1));
    }
    rows.push_back(std::move(values));
  }

  Matrix x(rows.size(), x_cols.size());
  std::vector<double> y(rows.size());
  std::vector<double> a(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    y[i] = rows[i][y_col];
    a[i] = rows[i][a_col];
    for (std::size_t j = 0; j < x_cols.size(); ++j) x(i, j) = rows[i][x_cols[j]];
  }
  return Dataset(std::move(y), std::move(a), std::move(x), std::move(names), kind);
}

std::string format_real(double v) {
  if (std::isnan(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_summary(double v) {
  if (std::isnan(v)) return "NA";
  if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

namespace {

std::string json_string(const std::string& s) { return nlohmann::json(s).dump(); }

template <class T>
std::string json_array(const std::vector<T>& values) {
  std::string out = "[";
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k) out += ',';
    if constexpr (std::is_floating_point_v<T>) {
      out += format_real(values[k]);
    } else {
      out += std::to_string(values[k]);
    }
  }
  return out + "]";
}

std::string json_forest(const std::vector<CompactTree>& forest) {
  // Each node: [left, right, var, cut, mu].
  std::string out = "[";
  for (std::size_t t = 0; t < forest.size(); ++t) {
    if (t) out += ',';
    out += '[';
    for (std::size_t k = 0; k < forest[t].nodes.size(); ++k) {
      const TreeNode& n = forest[t].nodes[k];
      if (k) out += ',';
      out += '[' + std::to_string(n.left) + ',' + std::to_string(n.right) + ',' + std::to_string(n.rule.var) +
             ',' + format_real(n.rule.cut) + ',' + format_real(n.mu) + ']';
    }
    out += ']';
  }
  return out + "]";
}

double json_real(const nlohmann::json& v) {
  return v.is_null() ? kAbsent : v.get<double>();
}

}  // namespace

std::string trace_to_jsonl(const Trace& trace, const TraceHeader& header) {
  std::string out;
  out += "{\"type\":\"header\",\"scheme\":" + json_string(to_string(trace.scheme)) +
         ",\"exposure_kind\":" + json_string(to_string(trace.exposure_kind)) + ",\"names\":[";
  for (std::size_t j = 0; j < trace.names.size(); ++j) {
    if (j) out += ',';
    out += json_string(trace.names[j]);
  }
  out += "],\"n\":" + std::to_string(trace.n) + ",\"exposure_min\":" + format_real(trace.exposure_min) +
         ",\"exposure_max\":" + format_real(trace.exposure_max) + ",\"chain\":" + std::to_string(trace.chain) +
         ",\"seed\":" + std::to_string(trace.seed) + ",\"input\":" + json_string(header.input) +
         ",\"outcome\":" + json_string(header.roles.outcome) + ",\"exposure\":" + json_string(header.roles.exposure) +
         ",\"moves_proposed\":" + json_array(std::vector<long>(trace.moves.proposed.begin(), trace.moves.proposed.end())) +
         ",\"moves_accepted\":" + json_array(std::vector<long>(trace.moves.accepted.begin(), trace.moves.accepted.end())) +
         ",\"s_proposed\":" + std::to_string(trace.s_proposed) + ",\"s_accepted\":" + std::to_string(trace.s_accepted) +
         "}\n";
  for (const TraceRecord& r : trace.records) {
    out += "{\"iteration\":" + std::to_string(r.iteration) + ",\"sigma2\":" + format_real(r.sigma2) +
           ",\"sigma2_0\":" + format_real(r.sigma2_0) + ",\"sigma2_1\":" + format_real(r.sigma2_1) +
           ",\"tau2\":" + format_real(r.tau2) + ",\"alpha\":" + format_real(r.alpha) + ",\"s\":" + json_array(r.s) +
           ",\"exposure_counts\":" + json_array(r.exposure_counts);
    if (trace.scheme == Scheme::Marginal) {
      out += ",\"outcome_counts\":" + json_array(r.outcome_counts);
    } else {
      out += ",\"outcome0_counts\":" + json_array(r.outcome0_counts) +
             ",\"outcome1_counts\":" + json_array(r.outcome1_counts);
    }
    out += ",\"ate\":" + format_real(r.ate);
    if (!r.forest.empty()) out += ",\"forest\":" + json_forest(r.forest);
    out += "}\n";
  }
  return out;
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
    out << content;
    if (!out) throw Error(ErrorCode::Io, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot rename " + tmp.string() + ": " + ec.message());
}

void write_trace(const fs::path& path, const Trace& trace, const TraceHeader& header) {
  write_file_atomic(path, trace_to_jsonl(trace, header));
}

LoadedTrace read_trace(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingArtifact, "cannot open trace " + path.string());
  LoadedTrace out;
  Trace& t = out.trace;
  std::string line;
  std::size_t line_no = 0;
  try {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const nlohmann::json j = nlohmann::json::parse(line);
      if (line_no == 1) {
        if (j.value("type", "") != "header") throw Error(ErrorCode::ParseError, "trace lacks a header line");
        t.scheme = parse_scheme(j.at("scheme").get<std::string>());
        t.exposure_kind = parse_exposure_kind(j.at("exposure_kind").get<std::string>());
        t.names = j.at("names").get<std::vector<std::string>>();
        t.n = j.at("n").get<std::size_t>();
        t.exposure_min = j.at("exposure_min").get<double>();
        t.exposure_max = j.at("exposure_max").get<double>();
        t.chain = j.at("chain").get<int>();
        t.seed = j.at("seed").get<std::uint64_t>();
        const auto proposed = j.at("moves_proposed").get<std::vector<long>>();
        const auto accepted = j.at("moves_accepted").get<std::vector<long>>();
        for (std::size_t k = 0; k < 3 && k < proposed.size(); ++k) {
          t.moves.proposed[k] = proposed[k];
          t.moves.accepted[k] = accepted[k];
        }
        t.s_proposed = j.at("s_proposed").get<long>();
        t.s_accepted = j.at("s_accepted").get<long>();
        out.header.input = j.at("input").get<std::string>();
        out.header.roles.outcome = j.at("outcome").get<std::string>();
        out.header.roles.exposure = j.at("exposure").get<std::string>();
        out.header.roles.covariates = t.names;
        continue;
      }
      TraceRecord r;
      r.iteration = j.at("iteration").get<long>();
      r.sigma2 = json_real(j.at("sigma2"));
      r.sigma2_0 = json_real(j.at("sigma2_0"));
      r.sigma2_1 = json_real(j.at("sigma2_1"));
      r.tau2 = json_real(j.at("tau2"));
      r.alpha = j.at("alpha").get<double>();
      r.s = j.at("s").get<std::vector<double>>();
      r.exposure_counts = j.at("exposure_counts").get<std::vector<long>>();
      if (j.contains("outcome_counts")) r.outcome_counts = j["outcome_counts"].get<std::vector<long>>();
      if (j.contains("outcome0_counts")) r.outcome0_counts = j["outcome0_counts"].get<std::vector<long>>();
      if (j.contains("outcome1_counts")) r.outcome1_counts = j["outcome1_counts"].get<std::vector<long>>();
      r.ate = json_real(j.at("ate"));
      if (j.contains("forest")) {
        for (const auto& tree : j["forest"]) {
          CompactTree ct;
          for (const auto& node : tree) {
            TreeNode n;
            n.left = node.at(0).get<int>();
            n.right = node.at(1).get<int>();
            n.rule.var = node.at(2).get<int>();
            n.rule.cut = node.at(3).get<double>();
            n.mu = node.at(4).get<double>();
            ct.nodes.push_back(n);
          }
          r.forest.push_back(std::move(ct));
        }
      }
      t.records.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + " line " + std::to_string(line_no) + ": " + e.what());
  }
  if (line_no == 0) throw Error(ErrorCode::MissingArtifact, "trace " + path.string() + " is empty");
  return out;
}

std::vector<fs::path> find_traces(const fs::path& dir) {
  std::map<int, fs::path> found;
  static const std::regex pattern(R"(trace_(\d+)\.jsonl)");
  std::error_code ec;
  if (fs::is_directory(dir, ec)) {
    for (const auto& entry : fs::directory_iterator(dir)) {
      std::smatch m;
      const std::string name = entry.path().filename().string();
      if (std::regex_match(name, m, pattern)) found[std::stoi(m[1].str())] = entry.path();
    }
  }
  if (found.empty()) throw Error(ErrorCode::MissingArtifact, "no trace_<k>.jsonl files in " + dir.string());
  std::vector<fs::path> out;
  for (auto& [k, p] : found) out.push_back(p);
  return out;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::string out = "estimand,mean,ci_low,ci_high,rhat,draws,chains\n";
  for (const SummaryRow& r : rows) {
    out += r.estimand + ',' + format_summary(r.effect.mean) + ',' + format_summary(r.effect.ci_low) + ',' +
           format_summary(r.effect.ci_high) + ',' + format_summary(r.rhat) + ',' +
           std::to_string(r.effect.draws.size()) + ',' + std::to_string(r.chains) + '\n';
  }
  return out;
}

std::string pip_csv(const InclusionReport& report, const std::string& exposure_name) {
  std::string out = "variable,pip_exposure,pip_outcome,pip_any\n";
  if (!std::isnan(report.exposure_variable)) {
    out += exposure_name + ",NA," + format_summary(report.exposure_variable) + ',' +
           format_summary(report.exposure_variable) + '\n';
  }
  for (std::size_t j = 0; j < report.names.size(); ++j) {
    out += report.names[j] + ',' + format_summary(report.exposure[j]) + ',' + format_summary(report.outcome[j]) +
           ',' + format_summary(report.any[j]) + '\n';
  }
  return out;
}

std::string metrics_csv(const SimulationResult& result) {
  const std::string scenario = to_string(result.scenario);
  const std::string scheme = to_string(result.scheme);
  std::string out = "scenario,scheme,m,replicate,bias,mse,coverage,wall_time_s\n";
  out += scenario + ',' + scheme + ',' + std::to_string(result.m) + ",all," + format_summary(result.bias) + ',' +
         format_summary(result.mse) + ',' + format_summary(result.coverage) + ',' +
         format_summary(result.wall_time_s) + '\n';
  for (const ReplicateMetrics& r : result.replicates) {
    out += scenario + ',' + scheme + ",1," + std::to_string(r.replicate) + ',' + format_summary(r.error) + ',' +
           format_summary(r.sq_error) + ',' + format_summary(r.covered ? 1.0 : 0.0) + ',' +
           format_summary(r.wall_time_s) + '\n';
  }
  return out;
}

std::string exposure_response_csv(std::span<const double> grid, const std::vector<EffectSummary>& curve) {
  std::string out = "grid_point,mean,ci_low,ci_high\n";
  for (std::size_t k = 0; k < grid.size(); ++k) {
    out += format_summary(grid[k]) + ',' + format_summary(curve[k].mean) + ',' + format_summary(curve[k].ci_low) +
           ',' + format_summary(curve[k].ci_high) + '\n';
  }
  return out;
}

}  // namespace bartcs
