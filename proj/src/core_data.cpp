#include "bartcs/core_data.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace bartcs {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConstantOutcome: return "ConstantOutcome";
    case ErrorCode::NotBinary: return "NotBinary";
    case ErrorCode::EmptyArm: return "EmptyArm";
    case ErrorCode::InvalidDataset: return "InvalidDataset";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::DegenerateSimplex: return "DegenerateSimplex";
    case ErrorCode::SchemeMismatch: return "SchemeMismatch";
    case ErrorCode::OutOfSupport: return "OutOfSupport";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::EmptyTrace: return "EmptyTrace";
    case ErrorCode::SetNesting: return "SetNesting";
    case ErrorCode::ChainLengthMismatch: return "ChainLengthMismatch";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::MissingValue: return "MissingValue";
    case ErrorCode::ExposureDomainError: return "ExposureDomainError";
    case ErrorCode::MissingArtifact: return "MissingArtifact";
    case ErrorCode::UnsupportedForBinary: return "UnsupportedForBinary";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

Matrix Matrix::select_rows(std::span<const std::size_t> rows) const {
  Matrix out(rows.size(), cols_);
  for (std::size_t c = 0; c < cols_; ++c) {
    auto src = col(c);
    auto dst = out.col(c);
    for (std::size_t i = 0; i < rows.size(); ++i) dst[i] = src[rows[i]];
  }
  return out;
}

Matrix Matrix::prepend_column(std::span<const double> column) const {
  Matrix out(rows_, cols_ + 1);
  std::copy(column.begin(), column.end(), out.col(0).begin());
  for (std::size_t c = 0; c < cols_; ++c) {
    auto src = col(c);
    std::copy(src.begin(), src.end(), out.col(c + 1).begin());
  }
  return out;
}

std::string to_string(ExposureKind kind) {
  return kind == ExposureKind::Binary ? "binary" : "continuous";
}

std::string to_string(Scheme scheme) {
  return scheme == Scheme::Separate ? "separate" : "marginal";
}

ExposureKind parse_exposure_kind(std::string_view text) {
  if (text == "binary") return ExposureKind::Binary;
  if (text == "continuous") return ExposureKind::Continuous;
  throw Error(ErrorCode::InvalidConfig, "unknown exposure kind '" + std::string(text) + "'");
}

Scheme parse_scheme(std::string_view text) {
  if (text == "separate") return Scheme::Separate;
  if (text == "marginal") return Scheme::Marginal;
  throw Error(ErrorCode::InvalidConfig, "unknown scheme '" + std::string(text) + "'");
}

Dataset::Dataset(std::vector<double> y, std::vector<double> a, Matrix x,
                 std::vector<std::string> names, ExposureKind exposure_kind)
    : y_(std::move(y)),
      a_(std::move(a)),
      x_(std::move(x)),
      names_(std::move(names)),
      exposure_kind_(exposure_kind) {
  const std::size_t n = y_.size();
  if (n < 2) throw Error(ErrorCode::InvalidDataset, "dataset needs at least 2 rows");
  if (x_.cols() < 1) throw Error(ErrorCode::InvalidDataset, "dataset needs at least 1 covariate");
  if (a_.size() != n || x_.rows() != n) {
    throw Error(ErrorCode::InvalidDataset, "outcome, exposure and covariates differ in length");
  }
  if (names_.size() != x_.cols()) {
    throw Error(ErrorCode::InvalidDataset, "covariate label count does not match column count");
  }
  if (std::set<std::string>(names_.begin(), names_.end()).size() != names_.size()) {
    throw Error(ErrorCode::InvalidDataset, "covariate labels must be unique");
  }
  auto finite = [](double v) { return std::isfinite(v); };
  bool ok = std::all_of(y_.begin(), y_.end(), finite) && std::all_of(a_.begin(), a_.end(), finite);
  for (std::size_t c = 0; ok && c < x_.cols(); ++c) {
    auto column = x_.col(c);
    ok = std::all_of(column.begin(), column.end(), finite);
  }
  if (!ok) throw Error(ErrorCode::InvalidDataset, "dataset contains missing or non-finite values");
  if (exposure_kind_ == ExposureKind::Binary) partition_arms(a_);
}

StandardizedOutcome standardize_outcome(std::span<const double> y) {
  if (y.empty()) throw Error(ErrorCode::ConstantOutcome, "outcome vector is empty");
  auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  if (!(*hi > *lo)) throw Error(ErrorCode::ConstantOutcome, "outcome is constant");
  OutcomeRange range{*lo, *hi, 0.5 * (*lo + *hi)};
  return {std::vector<double>(y.begin(), y.end()), range};
}

ArmIndices partition_arms(std::span<const double> a) {
  ArmIndices arms;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) {
      arms.control.push_back(i);
    } else if (a[i] == 1.0) {
      arms.treated.push_back(i);
    } else {
      throw Error(ErrorCode::NotBinary,
                  "exposure value at row " + std::to_string(i) + " is not 0 or 1");
    }
  }
  if (arms.control.empty() || arms.treated.empty()) {
    throw Error(ErrorCode::EmptyArm, "both exposure arms must be non-empty");
  }
  return arms;
}

ArmIndices arm_indices(const Dataset& data) {
  if (data.exposure_kind() != ExposureKind::Binary) {
    throw Error(ErrorCode::NotBinary, "arm indices require a binary exposure");
  }
  return partition_arms(data.a());
}

double COffset::resolve(long n0) const {
  switch (mode) {
    case Mode::Zero: return 0.0;
    case Mode::EqualToN0: return static_cast<double>(n0);
    case Mode::Fixed: return value;
  }
  return 0.0;
}

void Hyperparams::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); };
  if (num_trees < 1) fail("number of trees must be >= 1");
  if (!(beta1 > 0.0 && beta1 < 1.0)) fail("beta1 must lie in (0, 1)");
  if (!(beta2 >= 0.0)) fail("beta2 must be >= 0");
  if (!(a_sigma > 0.0 && b_sigma > 0.0)) fail("a_sigma and b_sigma must be positive");
  if (!(a0 > 0.0 && b0 > 0.0)) fail("a0 and b0 must be positive");
  if (!(p_grow > 0.0 && p_prune > 0.0 && p_change > 0.0)) fail("move probabilities must be positive");
  if (std::abs(p_grow + p_prune + p_change - 1.0) > 1e-12) fail("move probabilities must sum to 1");
  if (!(k_leaf > 0.0)) fail("k_leaf must be positive");
  if (c_offset.mode == COffset::Mode::Fixed && !(c_offset.value >= 0.0)) fail("c offset must be >= 0");
  if (!(alpha_init > 0.0)) fail("initial alpha must be positive");
  if (!(alpha_log_step >= 0.0)) fail("alpha step must be >= 0");
}

void ChainConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); };
  if (n_iter < 1) fail("iteration count must be positive");
  if (burn_in < 0 || burn_in >= n_iter) fail("burn-in must lie in [0, iterations)");
  if (thin < 1) fail("thin must be >= 1");
  if (retained() < 1) fail("schedule retains no draws");
  if (n_chains < 1) fail("chain count must be >= 1");
}

}  // namespace bartcs
