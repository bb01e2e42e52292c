#include "newsclick/linear.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <ostream>

#include "newsclick/error.hpp"
#include "newsclick/io.hpp"
#include "newsclick/log.hpp"

namespace newsclick {
namespace {

// Solves (G + eps I) w = rhs for a centered Gram matrix G. Returns nullopt
// when eps == 0 and G is numerically singular.
std::optional<Eigen::VectorXd> solve_gram(Eigen::MatrixXd gram, const Eigen::VectorXd& rhs, double eps) {
  if (eps > 0) gram.diagonal().array() += eps;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  if (ldlt.info() != Eigen::Success) return std::nullopt;
  const auto pivots = ldlt.vectorD().cwiseAbs();
  const double largest = pivots.maxCoeff();
  if (eps == 0 && (largest == 0 || pivots.minCoeff() <= 1e-12 * largest)) return std::nullopt;
  Eigen::VectorXd w = ldlt.solve(rhs);
  if (!w.allFinite()) return std::nullopt;
  return w;
}

std::optional<Eigen::VectorXd> solve_centered(const Eigen::MatrixXd& Xc, const Eigen::VectorXd& yc, double eps) {
  return solve_gram(Xc.transpose() * Xc, Xc.transpose() * yc, eps);
}

}  // namespace

double LinearModel::predict(std::span<const double> x) const {
  double s = intercept;
  for (std::size_t i = 0; i < coefficients.size(); ++i) s += coefficients[i] * x[i];
  return s;
}

LinearModel fit_linear(const Matrix& X, std::span<const double> y, double ridge_epsilon) {
  const auto n = X.rows();
  const auto d = X.cols();
  if (n == 0 || y.size() != n) throw ContractViolation("fit_linear needs rows(X) == len(y) >= 1");
  if (!(ridge_epsilon >= 0)) throw ContractViolation("ridge_epsilon must be >= 0");

  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> xm(X.data().data(),
                                                                                              static_cast<Eigen::Index>(n),
                                                                                              static_cast<Eigen::Index>(d));
  Eigen::Map<const Eigen::VectorXd> ym(y.data(), static_cast<Eigen::Index>(n));
  const Eigen::RowVectorXd x_mean = xm.colwise().mean();
  const double y_mean = ym.mean();

  LinearModel m;
  m.ridge_epsilon = ridge_epsilon;
  m.coefficients.assign(d, 0.0);
  m.intercept = y_mean;
  if (d == 0) return m;

  const Eigen::MatrixXd Xc = xm.rowwise() - x_mean;
  const Eigen::VectorXd yc = ym.array() - y_mean;
  auto w = solve_centered(Xc, yc, ridge_epsilon);
  if (!w) {
    warn("fit_linear: rank-deficient design, refitting with ridge epsilon " + format_double(kDefaultRidgeEpsilon));
    m.ridge_epsilon = kDefaultRidgeEpsilon;
    w = solve_centered(Xc, yc, kDefaultRidgeEpsilon);
    if (!w) w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
  }
  for (std::size_t j = 0; j < d; ++j) m.coefficients[j] = (*w)(static_cast<Eigen::Index>(j));
  m.intercept = y_mean - x_mean.dot(*w);
  return m;
}

double LinearRegressor::predict(std::span<const double> x) const {
  check_width(x);
  return model_.predict(x);
}

void LinearRegressor::write(std::ostream& out) const {
  out << "linear " << model_.coefficients.size() << ' ' << format_double(model_.ridge_epsilon) << ' '
      << format_double(model_.intercept);
  for (double c : model_.coefficients) out << ' ' << format_double(c);
  out << '\n';
}

namespace detail {

ColumnData ColumnData::from(const Matrix& X) {
  ColumnData c;
  c.rows = X.rows();
  c.columns.assign(X.cols(), std::vector<double>(X.rows()));
  for (std::size_t r = 0; r < X.rows(); ++r) {
    const auto row = X.row(r);
    for (std::size_t j = 0; j < X.cols(); ++j) c.columns[j][r] = row[j];
  }
  return c;
}

SparseLinearModel fit_sparse_linear(const ColumnData& data, std::span<const double> y,
                                    std::span<const std::size_t> rows, std::span<const std::size_t> attributes,
                                    double ridge_epsilon) {
  SparseLinearModel m;
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto d = static_cast<Eigen::Index>(attributes.size());
  double y_mean = 0;
  for (auto r : rows) y_mean += y[r];
  y_mean /= static_cast<double>(rows.size());
  m.intercept = y_mean;
  if (d == 0) return m;

  Eigen::MatrixXd Xc(n, d);
  Eigen::VectorXd yc(n);
  Eigen::VectorXd means(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const auto& col = data.columns[attributes[static_cast<std::size_t>(j)]];
    double mean = 0;
    for (auto r : rows) mean += col[r];
    mean /= static_cast<double>(rows.size());
    means(j) = mean;
    for (Eigen::Index i = 0; i < n; ++i) Xc(i, j) = col[rows[static_cast<std::size_t>(i)]] - mean;
  }
  for (Eigen::Index i = 0; i < n; ++i) yc(i) = y[rows[static_cast<std::size_t>(i)]] - y_mean;
  auto w = solve_centered(Xc, yc, ridge_epsilon);
  if (!w) return m;
  m.attributes.assign(attributes.begin(), attributes.end());
  m.weights.resize(attributes.size());
  for (Eigen::Index j = 0; j < d; ++j) m.weights[static_cast<std::size_t>(j)] = (*w)(j);
  m.intercept = y_mean - means.dot(*w);
  return m;
}

Moments Moments::of(const ColumnData& data, std::span<const double> y, std::span<const std::size_t> rows) {
  Moments m;
  m.n = rows.size();
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto d = static_cast<Eigen::Index>(data.columns.size());
  m.mean_x = Eigen::VectorXd::Zero(d);
  m.cxx = Eigen::MatrixXd::Zero(d, d);
  m.cxy = Eigen::VectorXd::Zero(d);
  if (n == 0) return m;
  for (auto r : rows) m.mean_y += y[r];
  m.mean_y /= static_cast<double>(n);
  Eigen::MatrixXd Xc(n, d);
  Eigen::VectorXd yc(n);
  for (Eigen::Index j = 0; j < d; ++j) {
    const auto& col = data.columns[static_cast<std::size_t>(j)];
    double mean = 0;
    for (auto r : rows) mean += col[r];
    mean /= static_cast<double>(n);
    m.mean_x(j) = mean;
    for (Eigen::Index i = 0; i < n; ++i) Xc(i, j) = col[rows[static_cast<std::size_t>(i)]] - mean;
  }
  for (Eigen::Index i = 0; i < n; ++i) yc(i) = y[rows[static_cast<std::size_t>(i)]] - m.mean_y;
  m.cxx.selfadjointView<Eigen::Lower>().rankUpdate(Xc.transpose());
  m.cxx.triangularView<Eigen::StrictlyUpper>() = m.cxx.transpose();
  m.cxy.noalias() = Xc.transpose() * yc;
  return m;
}

Moments Moments::combine(const Moments& a, const Moments& b) {
  if (a.n == 0) return b;
  if (b.n == 0) return a;
  Moments m;
  m.n = a.n + b.n;
  const double na = static_cast<double>(a.n);
  const double nb = static_cast<double>(b.n);
  const double n = static_cast<double>(m.n);
  const Eigen::VectorXd dx = b.mean_x - a.mean_x;
  const double dy = b.mean_y - a.mean_y;
  const double w = na * nb / n;
  m.mean_x = a.mean_x + dx * (nb / n);
  m.mean_y = a.mean_y + dy * (nb / n);
  m.cxx = a.cxx + b.cxx;
  m.cxx.noalias() += w * dx * dx.transpose();
  m.cxy = a.cxy + b.cxy + w * dy * dx;
  return m;
}

SparseLinearModel fit_sparse_linear(const Moments& mo, std::span<const std::size_t> attributes, double ridge_epsilon) {
  SparseLinearModel m;
  m.intercept = mo.mean_y;
  const auto d = static_cast<Eigen::Index>(attributes.size());
  if (d == 0 || mo.n == 0) return m;
  Eigen::MatrixXd gram(d, d);
  Eigen::VectorXd rhs(d);
  Eigen::VectorXd means(d);
  for (Eigen::Index a = 0; a < d; ++a) {
    const auto ia = static_cast<Eigen::Index>(attributes[static_cast<std::size_t>(a)]);
    rhs(a) = mo.cxy(ia);
    means(a) = mo.mean_x(ia);
    for (Eigen::Index b = 0; b < d; ++b) gram(a, b) = mo.cxx(ia, static_cast<Eigen::Index>(attributes[static_cast<std::size_t>(b)]));
  }
  auto w = solve_gram(std::move(gram), rhs, ridge_epsilon);
  if (!w) return m;
  m.attributes.assign(attributes.begin(), attributes.end());
  m.weights.resize(attributes.size());
  for (Eigen::Index j = 0; j < d; ++j) m.weights[static_cast<std::size_t>(j)] = (*w)(j);
  m.intercept = mo.mean_y - means.dot(*w);
  return m;
}

}  // namespace detail

}  // namespace newsclick
