#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bartcs/chain.hpp"
#include "bartcs/core_data.hpp"
#include "bartcs/diagnostics.hpp"
#include "bartcs/estimands.hpp"
#include "bartcs/simulation.hpp"

namespace bartcs {

struct ColumnRoles {
  std::string outcome;
  std::string exposure;
  std::vector<std::string> covariates;  // empty: every remaining column
};

// Reads a header-led numeric CSV. Errors carry 1-based data row and column
// numbers: MissingColumn, ParseError, MissingValue, ExposureDomainError.
Dataset ingest_csv(const std::filesystem::path& path, const ColumnRoles& roles, ExposureKind kind);

// Where a trace came from, written as the first line of every trace file.
struct TraceHeader {
  std::string input;
  ColumnRoles roles;
};

// %.17g, or "null" for NaN.
std::string format_real(double v);
// %.4f, or "NA" for NaN.
std::string format_summary(double v);

// One JSON object per line: a header object, then one object per record.
std::string trace_to_jsonl(const Trace& trace, const TraceHeader& header);
void write_trace(const std::filesystem::path& path, const Trace& trace, const TraceHeader& header);

struct LoadedTrace {
  Trace trace;
  TraceHeader header;
};

LoadedTrace read_trace(const std::filesystem::path& path);

// trace_<k>.jsonl files of a run directory, in chain order. Throws
// MissingArtifact when there are none.
std::vector<std::filesystem::path> find_traces(const std::filesystem::path& dir);

// Writes `content` to a sibling temp file, then renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

struct SummaryRow {
  std::string estimand;
  EffectSummary effect;
  double rhat = kAbsent;
  std::size_t chains = 0;
};

std::string summary_csv(const std::vector<SummaryRow>& rows);
std::string pip_csv(const InclusionReport& report, const std::string& exposure_name);
std::string metrics_csv(const SimulationResult& result);
std::string exposure_response_csv(std::span<const double> grid, const std::vector<EffectSummary>& curve);

}  // namespace bartcs
