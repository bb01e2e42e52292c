#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "newsclick/matrix.hpp"
#include "newsclick/regressor.hpp"

namespace newsclick {

inline constexpr double kDefaultRidgeEpsilon = 1e-8;

struct LinearModel {
  std::vector<double> coefficients;
  double intercept = 0.0;
  double ridge_epsilon = 0.0;

  double predict(std::span<const double> x) const;
};

/// Minimises sum (y - Xw - b)^2 + ridge_epsilon * |w|^2 (intercept not
/// penalised). A rank-deficient system with ridge_epsilon = 0 is refit with
/// kDefaultRidgeEpsilon and a warning.
LinearModel fit_linear(const Matrix& X, std::span<const double> y, double ridge_epsilon);

/// Regressor wrapper around a LinearModel.
class LinearRegressor final : public Regressor {
 public:
  explicit LinearRegressor(LinearModel model) : model_(std::move(model)) {}

  std::size_t width() const override { return model_.coefficients.size(); }
  double predict(std::span<const double> x) const override;
  void write(std::ostream& out) const override;

  const LinearModel& model() const { return model_; }

 private:
  LinearModel model_;
};

/// Linear model over a subset of columns. An empty attribute list is a
/// constant model.
struct SparseLinearModel {
  std::vector<std::size_t> attributes;
  std::vector<double> weights;
  double intercept = 0.0;

  double predict(std::span<const double> x) const {
    double s = intercept;
    for (std::size_t i = 0; i < attributes.size(); ++i) s += weights[i] * x[attributes[i]];
    return s;
  }
  std::size_t parameter_count() const { return attributes.size() + 1; }

  bool operator==(const SparseLinearModel&) const = default;
};

namespace detail {

/// Column-major view used by the tree learners.
struct ColumnData {
  std::vector<std::vector<double>> columns;
  std::size_t rows = 0;

  static ColumnData from(const Matrix& X);
};

/// Centered first and second moments of a row set over every column.
struct Moments {
  std::size_t n = 0;
  Eigen::VectorXd mean_x;
  double mean_y = 0.0;
  Eigen::MatrixXd cxx;  // sum of (x - mean_x)(x - mean_x)'
  Eigen::VectorXd cxy;  // sum of (x - mean_x)(y - mean_y)

  static Moments of(const ColumnData& data, std::span<const double> y, std::span<const std::size_t> rows);
  /// Moments of the union of two disjoint row sets (pairwise update).
  static Moments combine(const Moments& a, const Moments& b);
};

/// Ridge fit from precomputed moments, restricted to `attributes`.
SparseLinearModel fit_sparse_linear(const Moments& m, std::span<const std::size_t> attributes, double ridge_epsilon);

/// Ridge least squares on `rows` restricted to `attributes`, silently using
/// `ridge_epsilon` (no fallback, no warning).
SparseLinearModel fit_sparse_linear(const ColumnData& data, std::span<const double> y,
                                    std::span<const std::size_t> rows, std::span<const std::size_t> attributes,
                                    double ridge_epsilon);

}  // namespace detail

}  // namespace newsclick
