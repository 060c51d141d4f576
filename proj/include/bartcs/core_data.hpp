#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bartcs/error.hpp"

namespace bartcs {

// Dense column-major matrix. Columns are contiguous because split proposals
// scan one covariate over the rows of a node.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[c * rows_ + r]; }
  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[c * rows_ + r]; }

  std::span<const double> col(std::size_t c) const noexcept {
    return {data_.data() + c * rows_, rows_};
  }
  std::span<double> col(std::size_t c) noexcept { return {data_.data() + c * rows_, rows_}; }

  // Copy of the listed rows, in the given order.
  Matrix select_rows(std::span<const std::size_t> rows) const;

  // A new matrix with `column` prepended as column 0.
  Matrix prepend_column(std::span<const double> column) const;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

enum class ExposureKind { Binary, Continuous };
enum class Scheme { Separate, Marginal };

std::string to_string(ExposureKind kind);
std::string to_string(Scheme scheme);
ExposureKind parse_exposure_kind(std::string_view text);
Scheme parse_scheme(std::string_view text);

// Outcome, exposure and covariates of one study. Immutable once constructed;
// the constructor enforces every invariant so chains can share it freely.
class Dataset {
 public:
  Dataset(std::vector<double> y, std::vector<double> a, Matrix x, std::vector<std::string> names,
          ExposureKind exposure_kind);

  std::size_t n() const noexcept { return y_.size(); }
  std::size_t p() const noexcept { return x_.cols(); }

  const std::vector<double>& y() const noexcept { return y_; }
  const std::vector<double>& a() const noexcept { return a_; }
  const Matrix& x() const noexcept { return x_; }
  const std::vector<std::string>& names() const noexcept { return names_; }
  ExposureKind exposure_kind() const noexcept { return exposure_kind_; }

  bool operator==(const Dataset&) const = default;

 private:
  std::vector<double> y_;
  std::vector<double> a_;
  Matrix x_;
  std::vector<std::string> names_;
  ExposureKind exposure_kind_;
};

struct OutcomeRange {
  double min = 0.0;
  double max = 0.0;
  double center = 0.0;
};

struct StandardizedOutcome {
  std::vector<double> values;
  OutcomeRange range;
};

// Outcomes stay on their native scale; only the range is recorded for the
// leaf-prior calibration. Throws ConstantOutcome when max == min.
StandardizedOutcome standardize_outcome(std::span<const double> y);

struct ArmIndices {
  std::vector<std::size_t> control;  // a_i = 0
  std::vector<std::size_t> treated;  // a_i = 1
};

ArmIndices arm_indices(const Dataset& data);
// Partition of a 0/1 vector; throws NotBinary on other values, EmptyArm when a
// side is empty.
ArmIndices partition_arms(std::span<const double> a);

// Offset added to the exposure coordinate of the marginal-scheme proposal.
struct COffset {
  enum class Mode { Zero, EqualToN0, Fixed };
  Mode mode = Mode::EqualToN0;
  double value = 0.0;

  double resolve(long n0) const;
};

struct Hyperparams {
  int num_trees = 50;
  double beta1 = 0.95;
  double beta2 = 2.0;
  double a_sigma = 3.0;
  double b_sigma = 3.0;
  double a0 = 0.5;
  double b0 = 1.0;
  double p_grow = 0.28;
  double p_prune = 0.28;
  double p_change = 0.44;
  double k_leaf = 2.0;
  COffset c_offset;
  double alpha_init = 1.0;
  // Standard deviation of the Gaussian random walk on log(alpha).
  double alpha_log_step = 0.3;

  void validate() const;
};

struct ChainConfig {
  long n_iter = 25000;
  long burn_in = 12500;
  long thin = 10;
  std::uint64_t seed = 1;
  Scheme scheme = Scheme::Marginal;
  int n_chains = 1;

  long retained() const noexcept { return n_iter > burn_in ? (n_iter - burn_in) / thin : 0; }
  void validate() const;
};

}  // namespace bartcs
