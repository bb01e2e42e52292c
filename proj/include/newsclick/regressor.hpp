#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "newsclick/matrix.hpp"

namespace newsclick {

/// A trained, immutable predictor. Safe to share across threads.
class Regressor {
 public:
  virtual ~Regressor() = default;

  /// Feature width seen at training time.
  virtual std::size_t width() const = 0;
  /// Throws ContractViolation when x.size() != width().
  virtual double predict(std::span<const double> x) const = 0;
  /// Writes the model body (no file header); see save_model.
  virtual void write(std::ostream& out) const = 0;

  std::vector<double> predict_rows(const Matrix& X) const;

 protected:
  void check_width(std::span<const double> x) const;
};

using ModelPtr = std::shared_ptr<const Regressor>;

/// Versioned text serialization. Reals are written with 17 significant
/// digits, so load_model(save_model(m)) predicts bit-identically to m.
void save_model(const Regressor& model, std::ostream& out);
ModelPtr load_model(std::istream& in);

}  // namespace newsclick
