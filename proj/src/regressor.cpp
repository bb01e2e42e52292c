#include "newsclick/regressor.hpp"

#include <istream>
#include <ostream>
#include <string>

#include "newsclick/ensembles.hpp"
#include "newsclick/error.hpp"
#include "newsclick/io.hpp"
#include "newsclick/linear.hpp"
#include "newsclick/tree.hpp"

namespace newsclick {
namespace {

constexpr std::string_view kModelMagic = "newsclick-model";
constexpr int kModelVersion = 1;

class TokenReader {
 public:
  explicit TokenReader(std::istream& in) : in_(in) {}

  std::string word() {
    std::string t;
    if (!(in_ >> t)) throw ParseError("model file ended unexpectedly");
    return t;
  }
  void expect(std::string_view keyword) {
    const auto t = word();
    if (t != keyword) throw ParseError("model file: expected '" + std::string(keyword) + "', found '" + t + "'");
  }
  double real() { return parse_double(word()); }
  std::int64_t integer() { return parse_int(word()); }
  std::size_t count() {
    const auto v = integer();
    if (v < 0) throw ParseError("model file: negative count");
    return static_cast<std::size_t>(v);
  }
  std::uint64_t u64() {
    const auto t = word();
    std::uint64_t v = 0;
    for (char c : t) {
      if (c < '0' || c > '9') throw ParseError("model file: '" + t + "' is not an unsigned integer");
      v = v * 10 + static_cast<std::uint64_t>(c - '0');
    }
    return v;
  }

 private:
  std::istream& in_;
};

ModelPtr read_body(TokenReader& in) {
  const auto kind = in.word();
  if (kind == "linear") {
    LinearModel m;
    const auto w = in.count();
    m.ridge_epsilon = in.real();
    m.intercept = in.real();
    m.coefficients.resize(w);
    for (auto& c : m.coefficients) c = in.real();
    return std::make_shared<const LinearRegressor>(std::move(m));
  }
  if (kind == "tree") {
    const auto sub = in.word();
    if (sub != "m5p" && sub != "reptree") throw ParseError("model file: unknown tree kind '" + sub + "'");
    const auto width = in.count();
    const bool smoothing = in.integer() != 0;
    const double k = in.real();
    std::vector<TreeNode> nodes(in.count());
    for (auto& n : nodes) {
      in.expect("node");
      n.feature = static_cast<std::int32_t>(in.integer());
      n.threshold = in.real();
      n.left = static_cast<std::int32_t>(in.integer());
      n.right = static_cast<std::int32_t>(in.integer());
      n.n_training = in.count();
      n.training_sd = in.real();
      n.model.intercept = in.real();
      const auto attrs = in.count();
      n.model.attributes.resize(attrs);
      n.model.weights.resize(attrs);
      for (std::size_t i = 0; i < attrs; ++i) {
        n.model.attributes[i] = in.count();
        n.model.weights[i] = in.real();
      }
    }
    return std::make_shared<const RegressionTree>(sub == "m5p" ? TreeKind::kM5p : TreeKind::kRepTree, width,
                                                  std::move(nodes), smoothing, k);
  }
  if (kind == "bagging") {
    const auto width = in.count();
    const auto rounds = in.count();
    const auto seed = in.u64();
    std::vector<ModelPtr> members;
    for (std::size_t r = 0; r < rounds; ++r) members.push_back(read_body(in));
    auto m = std::make_shared<const BaggedModel>(std::move(members), seed);
    if (m->width() != width) throw ParseError("model file: bagged width mismatch");
    return m;
  }
  if (kind == "additive") {
    const auto width = in.count();
    const double initial = in.real();
    const double f = in.real();
    const auto seed = in.u64();
    const auto count = in.count();
    std::vector<AdditiveStage> stages;
    for (std::size_t i = 0; i < count; ++i) {
      in.expect("stage");
      const double beta = in.real();
      stages.push_back({read_body(in), beta});
    }
    return std::make_shared<const AdditiveModel>(width, initial, std::move(stages), f, seed);
  }
  throw ParseError("model file: unknown model kind '" + kind + "'");
}

}  // namespace

std::vector<double> Regressor::predict_rows(const Matrix& X) const {
  std::vector<double> out(X.rows());
  for (std::size_t r = 0; r < X.rows(); ++r) out[r] = predict(X.row(r));
  return out;
}

void Regressor::check_width(std::span<const double> x) const {
  if (x.size() != width()) {
    throw ContractViolation("feature width " + std::to_string(x.size()) + " does not match model width " +
                            std::to_string(width()));
  }
}

void save_model(const Regressor& model, std::ostream& out) {
  out << kModelMagic << ' ' << kModelVersion << '\n';
  model.write(out);
  if (!out) throw IoError("failed writing model");
}

ModelPtr load_model(std::istream& in) {
  TokenReader reader(in);
  reader.expect(kModelMagic);
  const auto version = reader.integer();
  if (version != kModelVersion) throw ParseError("unsupported model version " + std::to_string(version));
  try {
    return read_body(reader);
  } catch (const ValidationError& err) {
    throw ParseError(std::string("model file: ") + err.what());
  }
}

}  // namespace newsclick
