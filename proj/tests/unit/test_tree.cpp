#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "newsclick/error.hpp"
#include "newsclick/linear.hpp"
#include "newsclick/tree.hpp"
#include "oracles/split_oracle.hpp"
#include "unit/support.hpp"

using namespace newsclick;

namespace {

std::vector<std::size_t> iota_n(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

double training_mae(const Regressor& m, const Matrix& X, const std::vector<double>& y) {
  double s = 0;
  for (std::size_t r = 0; r < X.rows(); ++r) s += std::abs(m.predict(X.row(r)) - y[r]);
  return s / static_cast<double>(X.rows());
}

ModelPtr round_trip(const Regressor& m) {
  std::stringstream s;
  save_model(m, s);
  return load_model(s);
}

}  // namespace

TEST_CASE("sdr of a perfect separation") {
  const std::vector<double> y{1, 1, 1, 9, 9, 9};
  const std::vector<std::size_t> l{0, 1, 2}, r{3, 4, 5};
  CHECK(sdr(y, l, r) == 4.0);
  const std::vector<double> c(6, 2.5);
  CHECK(sdr(c, l, r) == 0.0);
  CHECK_THROWS_AS(sdr(y, {}, r), ContractViolation);
}

TEST_CASE("best split examples") {
  Matrix X(6, 1, {1, 2, 3, 4, 5, 6});
  const std::vector<double> y{1, 1, 1, 9, 9, 9};
  const std::vector<std::size_t> f0{0};
  const auto s = best_split(X, y, f0, 1);
  REQUIRE(s);
  CHECK(s->feature == 0u);
  CHECK(s->threshold == 3.5);
  CHECK(s->score == doctest::Approx(4.0).epsilon(1e-12));

  const std::vector<double> flat(6, 3.0);
  CHECK_FALSE(best_split(X, flat, f0, 1).has_value());

  Matrix twin(6, 2, {1, 1, 2, 2, 3, 3, 4, 4, 5, 5, 6, 6});
  const std::vector<std::size_t> both{0, 1};
  const auto t = best_split(twin, y, both, 1);
  REQUIRE(t);
  CHECK(t->feature == 0u);
  const std::vector<std::size_t> reversed{1, 0};
  CHECK(best_split(twin, y, reversed, 1)->feature == 0u);
  const std::vector<std::size_t> only1{1};
  CHECK(best_split(twin, y, only1, 1)->feature == 1u);

  CHECK_THROWS_AS(best_split(X, y, f0, 4), ContractViolation);
}

TEST_CASE("best split agrees with exhaustive search") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 4 + rng() % 47, d = 1 + rng() % 4;
    const int levels = trial % 3 == 0 ? 4 : 0;
    const auto X = testing::random_matrix(rng, n, d, levels);
    std::vector<double> y(n);
    std::normal_distribution<double> g;
    for (auto& v : y) v = trial % 5 == 0 ? std::round(g(rng)) : g(rng);
    const std::size_t min_leaf = 1 + rng() % std::max<std::size_t>(1, n / 4);
    const auto all = iota_n(d);
    const auto got = best_split(X, y, all, min_leaf);
    const auto want = oracle::brute_force_split(X, y, min_leaf);
    REQUIRE(got.has_value() == want.has_value());
    if (!got) continue;
    CHECK(got->feature == want->feature);
    CHECK(std::abs(got->threshold - want->threshold) <= 1e-9);
    CHECK(std::abs(got->score - want->sdr) <= 1e-9);
  }
}

TEST_CASE("m5p degenerate inputs give a single leaf") {
  std::mt19937_64 rng(1);
  const auto X = testing::random_matrix(rng, 40, 3);
  const std::vector<double> c(40, 4.25);
  const auto t = fit_m5p(X, c, {});
  CHECK(t.nodes().size() == 1u);
  for (std::size_t r = 0; r < 40; ++r) CHECK(t.predict(X.row(r)) == 4.25);

  const auto small = testing::random_matrix(rng, 3, 2);
  const std::vector<double> y3{1, 5, 9};
  CHECK(fit_m5p(small, y3, {}).nodes().size() == 1u);
}

TEST_CASE("m5p captures a breakpoint better than a line") {
  Matrix X(200, 1);
  std::vector<double> y(200);
  for (std::size_t i = 0; i < 200; ++i) {
    const double x = -5.0 + 10.0 * static_cast<double>(i) / 199.0;
    X(i, 0) = x;
    y[i] = x < 0 ? 2 * x : -3 * x;
  }
  const auto tree = fit_m5p(X, y, {});
  const LinearRegressor line(fit_linear(X, y, 0.0));
  CHECK(training_mae(tree, X, y) < training_mae(line, X, y));
  CHECK(tree.leaf_count() >= 2u);
}

TEST_CASE("m5p without smoothing returns the leaf model") {
  std::mt19937_64 rng(8);
  const auto X = testing::random_matrix(rng, 300, 3);
  std::vector<double> y(300);
  for (std::size_t r = 0; r < 300; ++r) y[r] = (X(r, 0) > 0 ? 5.0 : -1.0) + X(r, 1) + 0.1 * X(r, 2);
  M5Params p;
  p.use_smoothing = false;
  const auto t = fit_m5p(X, y, p);
  REQUIRE(t.leaf_count() >= 2u);
  for (std::size_t r = 0; r < 300; ++r) {
    const auto& leaf = t.nodes()[t.leaf_for(X.row(r))];
    CHECK(t.predict(X.row(r)) == leaf.model.predict(X.row(r)));
  }
  p.use_smoothing = true;
  const auto s = fit_m5p(X, y, p);
  bool differs = false;
  for (std::size_t r = 0; r < 300; ++r)
    differs = differs || s.predict(X.row(r)) != s.nodes()[s.leaf_for(X.row(r))].model.predict(X.row(r));
  CHECK(differs);
}

TEST_CASE("m5p leaves respect the minimum instance count") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 20 + rng() % 200;
    const auto X = testing::random_matrix(rng, n, 4, trial % 2 ? 6 : 0);
    std::vector<double> y(n);
    std::normal_distribution<double> g;
    for (std::size_t r = 0; r < n; ++r) y[r] = X(r, 0) * X(r, 1) + g(rng);
    M5Params p;
    p.prune = trial % 3 != 0;
    p.min_leaf_instances = 2 + trial % 4;
    const auto t = fit_m5p(X, y, p);
    for (const auto& node : t.nodes()) {
      if (node.is_leaf()) CHECK(node.n_training >= std::min(n, p.min_leaf_instances));
      else {
        CHECK(node.left >= 0);
        CHECK(node.right >= 0);
      }
    }
    const auto again = fit_m5p(X, y, p);
    CHECK(again.nodes() == t.nodes());
  }
}

TEST_CASE("m5p node models never have as many parameters as rows") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 30 + rng() % 300;
    const auto X = testing::random_matrix(rng, n, 6, trial % 2 ? 3 : 0);
    std::vector<double> y(n);
    std::normal_distribution<double> g;
    for (std::size_t r = 0; r < n; ++r) y[r] = X(r, 0) * X(r, 1) - X(r, 2) + 0.2 * g(rng);
    M5Params p;
    p.prune = trial % 2 == 0;
    p.min_leaf_instances = 2 + trial % 3;
    const auto t = fit_m5p(X, y, p);
    for (const auto& node : t.nodes())
      if (!node.model.attributes.empty()) CHECK(node.model.parameter_count() < node.n_training);
  }
}

TEST_CASE("pruning shrinks noisy m5p trees") {
  std::mt19937_64 rng(13);
  const auto X = testing::random_matrix(rng, 400, 3);
  std::vector<double> y(400);
  std::normal_distribution<double> g;
  for (auto& v : y) v = g(rng);
  M5Params p;
  p.prune = false;
  const auto grown = fit_m5p(X, y, p);
  p.prune = true;
  const auto pruned = fit_m5p(X, y, p);
  CHECK(pruned.nodes().size() < grown.nodes().size());
}

TEST_CASE("attribute elimination keeps models no wider") {
  std::mt19937_64 rng(14);
  const auto X = testing::random_matrix(rng, 300, 5);
  std::vector<double> y(300);
  std::normal_distribution<double> g;
  for (std::size_t r = 0; r < 300; ++r) y[r] = (X(r, 0) > 0 ? 3 * X(r, 1) : -X(r, 2)) + 0.2 * g(rng);
  M5Params p;
  const auto plain = fit_m5p(X, y, p);
  p.eliminate_attributes = true;
  const auto lean = fit_m5p(X, y, p);
  std::size_t wa = 0, wb = 0;
  for (const auto& nd : plain.nodes()) wa += nd.model.attributes.size();
  for (const auto& nd : lean.nodes()) wb += nd.model.attributes.size();
  CHECK(wb <= wa);
}

TEST_CASE("reptree on constant and step data") {
  std::mt19937_64 rng(2);
  const auto X = testing::random_matrix(rng, 30, 2);
  const std::vector<double> c(30, -2.0);
  const auto t = fit_reptree(X, c, {});
  CHECK(t.nodes().size() == 1u);
  CHECK(t.predict(X.row(0)) == -2.0);

  Matrix S(100, 1);
  std::vector<double> y(100);
  for (std::size_t i = 0; i < 100; ++i) {
    S(i, 0) = static_cast<double>(i) / 10.0;
    y[i] = S(i, 0) < 5 ? 0.0 : 10.0;
  }
  const auto step = fit_reptree(S, y, {});
  std::size_t internal = 0;
  for (const auto& nd : step.nodes())
    if (!nd.is_leaf()) {
      ++internal;
      CHECK(nd.threshold > 4.0);
      CHECK(nd.threshold < 6.0);
    }
  CHECK(internal == 1u);
  const std::vector<double> lo{2.0}, hi{7.5};
  CHECK(step.predict(lo) < 1.0);
  CHECK(step.predict(hi) > 9.0);
}

TEST_CASE("reduced-error pruning never hurts the prune set") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 30 + rng() % 300;
    const auto X = testing::random_matrix(rng, n, 1 + rng() % 4);
    std::vector<double> y(n);
    std::normal_distribution<double> g;
    for (std::size_t r = 0; r < n; ++r) y[r] = (X(r, 0) > 0.3 ? 2.0 : 0.0) + g(rng);
    REPTreeParams p;
    p.seed = rng();
    RepTreeDiagnostics diag;
    fit_reptree(X, y, p, &diag);
    CHECK(diag.prune_sse_after <= diag.prune_sse_before);
    CHECK(diag.nodes_after_pruning <= diag.nodes_before_pruning);
    CHECK(diag.grow_rows + diag.prune_rows == n);
  }
}

TEST_CASE("prediction width is checked") {
  Matrix X(10, 2);
  std::vector<double> y(10);
  for (std::size_t i = 0; i < 10; ++i) {
    X(i, 0) = static_cast<double>(i);
    y[i] = static_cast<double>(i % 3);
  }
  const auto t = fit_m5p(X, y, {});
  const std::vector<double> narrow{1.0};
  CHECK_THROWS_AS(t.predict(narrow), ContractViolation);
}

TEST_CASE("tree serialization is lossless") {
  std::mt19937_64 rng(17);
  const auto X = testing::random_matrix(rng, 250, 4);
  std::vector<double> y(250);
  std::normal_distribution<double> g;
  for (std::size_t r = 0; r < 250; ++r) y[r] = std::sin(X(r, 0)) * 3 + X(r, 1) * X(r, 2) + 0.1 * g(rng);
  const auto m5 = fit_m5p(X, y, {});
  const auto rep = fit_reptree(X, y, {});
  for (const Regressor* m : {static_cast<const Regressor*>(&m5), static_cast<const Regressor*>(&rep)}) {
    const auto back = round_trip(*m);
    const auto probe = testing::random_matrix(rng, 200, 4);
    for (std::size_t r = 0; r < probe.rows(); ++r) CHECK(back->predict(probe.row(r)) == m->predict(probe.row(r)));
    std::stringstream a, b;
    save_model(*m, a);
    save_model(*back, b);
    CHECK(a.str() == b.str());
  }
  std::stringstream broken("newsclick-model 1\ntree m5p\n");
  CHECK_THROWS_AS(load_model(broken), ParseError);
}
