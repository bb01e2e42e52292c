#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "doctest.h"
#include "newsclick/error.hpp"
#include "newsclick/evaluation.hpp"
#include "newsclick/io.hpp"
#include "oracles/metrics_fixture.hpp"

using namespace newsclick;

TEST_CASE("forward transform") {
  CHECK(forward_target(100, TargetScale::kLog10) == 2.0);
  CHECK(forward_target(1, TargetScale::kLn) == 0.0);
  CHECK(forward_target(7, TargetScale::kIdentity) == 7.0);
  // log10(401) = 2 + log10(4.01); 4.01 from a printed table: 0.603144372620182...
  CHECK(std::abs(forward_target(401, TargetScale::kLog10) - 2.6031443726201822) < 1e-9);
  CHECK_THROWS_AS(forward_target(0.5, TargetScale::kLog10), ContractViolation);
  CHECK_THROWS_AS(forward_target(0.0, TargetScale::kIdentity), ContractViolation);
}

TEST_CASE("inverse transform") {
  CHECK(inverse_target(2, TargetScale::kLog10).value == doctest::Approx(100.0).epsilon(1e-15));
  CHECK(inverse_target(0, TargetScale::kLn).value == 1.0);
  CHECK(inverse_target(-0.3, TargetScale::kIdentity).value == -0.3);
  const auto big = inverse_target(400, TargetScale::kLog10);
  CHECK(big.clamped);
  CHECK(big.value == kMaxPrediction);
  CHECK_FALSE(inverse_target(300, TargetScale::kLog10).clamped);
  for (double y : {1.0, 2.0, 401.0, 1e6}) {
    for (auto s : {TargetScale::kIdentity, TargetScale::kLog10, TargetScale::kLn}) {
      const double back = inverse_target(forward_target(y, s), s).value;
      CHECK(std::abs(back - y) / y <= 1e-9);
    }
  }
}

TEST_CASE("transform names") {
  CHECK(parse_target_scale("log10") == TargetScale::kLog10);
  CHECK(target_scale_name(TargetScale::kLn) == "ln");
  CHECK_THROWS_AS(parse_target_scale("log2"), ParseError);
  CHECK(parse_outlier_kind(outlier_kind_name(OutlierKind::kNegativeToOnePositiveToMax)) ==
        OutlierKind::kNegativeToOnePositiveToMax);
}

TEST_CASE("outlier clipping") {
  const OutlierPolicy all{OutlierKind::kAllToOne, 1000};
  const OutlierPolicy split{OutlierKind::kNegativeToOnePositiveToMax, 1000};
  const OutlierPolicy none{OutlierKind::kNone, 1000};
  CHECK(clip_outliers(-5, all) == 1.0);
  CHECK(clip_outliers(5000, all) == 1.0);
  CHECK(clip_outliers(-5, split) == 1.0);
  CHECK(clip_outliers(5000, split) == 1000.0);
  for (const auto& p : {all, split, none}) CHECK(clip_outliers(50, p) == 50.0);
  CHECK(clip_outliers(1000, all) == 1000.0);
  CHECK(clip_outliers(1, all) == 1.0);
  CHECK(clip_outliers(-5, none) == -5.0);
  CHECK(clip_outliers(std::nan(""), all) == 1.0);
  CHECK_THROWS_AS(clip_outliers(3, OutlierPolicy{OutlierKind::kAllToOne, 0.0}), ContractViolation);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e4, 1e4);
  for (int i = 0; i < 1000; ++i) {
    const double p = u(rng);
    for (const auto& pol : {all, split}) {
      const double c = clip_outliers(p, pol);
      CHECK(c >= 1.0);
      CHECK(c <= 1000.0);
    }
  }
}

TEST_CASE("metrics on small examples") {
  const std::vector<double> t401{401};
  const auto zero = compute_metrics(t401, t401);
  CHECK(zero.mae == 0.0);
  CHECK(zero.mre == 0.0);
  const std::vector<double> p500{500}, t400{400};
  const auto one = compute_metrics(p500, t400);
  CHECK(one.ae[0] == 100.0);
  CHECK(one.re[0] == 0.25);
  CHECK(one.mae == 100.0);
  CHECK(one.mre == 0.25);
  const std::vector<double> p{2, 3}, t{1, 3};
  const auto two = compute_metrics(p, t);
  CHECK(two.cae == 1.0);
  CHECK(two.cre == 1.0);
  CHECK(two.mae == 0.5);
  CHECK(two.mre == 0.5);
  CHECK_THROWS(compute_metrics(p, t400));
  const std::vector<double> bad{0.5, 3};
  CHECK_THROWS(compute_metrics(p, bad));
  CHECK_THROWS(compute_metrics(std::vector<double>{}, std::vector<double>{}));
}

TEST_CASE("metrics on the hand fixture") {
  const oracle::MetricsFixture fx;
  const auto r = compute_metrics(fx.predictions, fx.truths);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(std::abs(r.ae[i] - fx.ae[i]) <= 1e-12);
    CHECK(std::abs(r.re[i] - fx.re[i]) <= 1e-12);
  }
  CHECK(std::abs(r.cae - fx.cae) <= 1e-12);
  CHECK(std::abs(r.cre - fx.cre) <= 1e-12);
  CHECK(std::abs(r.mae - fx.mae) <= 1e-12);
  CHECK(std::abs(r.mre - fx.mre) <= 1e-12);
  const auto text = r.machine_readable();
  CHECK(text.find("n=5\n") != std::string::npos);
  CHECK(text.find("mae=" + format_double(r.mae) + "\n") != std::string::npos);
  CHECK(text.find("cae=" + format_double(r.cae) + "\n") != std::string::npos);
}

TEST_CASE("metric identities and scale invariance") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(1, 1000), c(0.01, 100);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 50;
    std::vector<double> p(n), t(n), ps(n), ts(n);
    const double k = c(rng);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = u(rng) - 100;
      t[i] = u(rng);
      ps[i] = p[i] * k;
      ts[i] = t[i] * k;
    }
    const auto r = compute_metrics(p, t);
    CHECK(r.cae == r.mae * static_cast<double>(r.n));
    CHECK(r.cre == r.mre * static_cast<double>(r.n));
    if (k >= 1) {
      const auto s = compute_metrics(ps, ts);
      for (std::size_t i = 0; i < n; ++i) CHECK(s.re[i] == doctest::Approx(r.re[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("k-fold splits") {
  const auto ten = kfold_split(10, 10, 1);
  CHECK(ten.size() == 10u);
  for (const auto& f : ten) CHECK(f.size() == 1u);
  const auto three = kfold_split(10, 3, 1);
  CHECK(three[0].size() == 4u);
  CHECK(three[1].size() == 3u);
  CHECK(three[2].size() == 3u);
  CHECK_THROWS(kfold_split(3, 4, 1));
  CHECK_THROWS(kfold_split(10, 1, 1));
  CHECK(kfold_split(50, 7, 9) == kfold_split(50, 7, 9));
  CHECK(kfold_split(50, 7, 9) != kfold_split(50, 7, 10));
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng() % 200;
    const std::size_t k = 2 + rng() % (n - 1);
    const auto folds = kfold_split(n, k, rng());
    REQUIRE(folds.size() == k);
    std::set<std::size_t> seen;
    std::size_t total = 0;
    for (const auto& f : folds) {
      CHECK((f.size() == n / k || f.size() == (n + k - 1) / k));
      total += f.size();
      seen.insert(f.begin(), f.end());
    }
    CHECK(total == n);
    CHECK(seen.size() == n);
    CHECK(*seen.rbegin() == n - 1);
  }
}

TEST_CASE("inverse transform preserves ranking") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(1.5, 1.0);
  std::vector<double> out(1000);
  for (auto& v : out) v = g(rng);
  for (auto s : {TargetScale::kLog10, TargetScale::kLn, TargetScale::kIdentity}) {
    std::vector<double> inv(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) inv[i] = inverse_target(out[i], s).value;
    std::vector<std::size_t> a(out.size()), b(out.size());
    std::iota(a.begin(), a.end(), std::size_t{0});
    std::iota(b.begin(), b.end(), std::size_t{0});
    std::stable_sort(a.begin(), a.end(), [&](auto i, auto j) { return out[i] < out[j]; });
    std::stable_sort(b.begin(), b.end(), [&](auto i, auto j) { return inv[i] < inv[j]; });
    CHECK(a == b);
  }
}
