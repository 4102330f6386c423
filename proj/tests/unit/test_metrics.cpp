#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include <amgan/error.hpp>
#include <amgan/metrics.hpp>
#include <amgan/rng.hpp>

#include "oracles.hpp"

using namespace amgan;

namespace {

std::vector<std::vector<double>> random_rows(RandomStream& rng, std::size_t n, std::size_t k,
                                             double scale) {
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> l(k);
    for (double& v : l) v = scale * rng.normal();
    rows.push_back(oracle::softmax(l));
  }
  return rows;
}

ClassifierBatch to_batch(const std::vector<std::vector<double>>& rows) {
  std::vector<double> flat;
  for (const auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
  return ClassifierBatch(rows.front().size(), flat);
}

std::vector<double> column_mean(const std::vector<std::vector<double>>& rows) {
  std::vector<double> m(rows.front().size(), 0.0);
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < r.size(); ++k) m[k] += r[k] / static_cast<double>(rows.size());
  }
  return m;
}

// Expected weighted log-score over all drop sets of size `dropped`.
double exhaustive_mode_drop_mean(std::size_t n, std::size_t dropped,
                                 const std::vector<double>& density) {
  double total = 0.0;
  std::size_t count = 0;
  oracle::for_each_subset(n, n - dropped, [&](const std::vector<std::size_t>& kept) {
    double z = 0.0;
    for (std::size_t c : kept) z += density[c];
    // One-hot rows: KL(v(c) || mean) = -log(w_c / z).
    double s = 0.0;
    for (std::size_t c : kept) s -= density[c] / z * std::log(density[c] / z);
    total += s;
    ++count;
  });
  return total / static_cast<double>(count);
}

}  // namespace

TEST(ClassifierBatch, Validation) {
  EXPECT_THROW(ClassifierBatch(3, {}), EmptyBatch);
  EXPECT_THROW(ClassifierBatch(3, {0.5, 0.5}), ShapeError);
  EXPECT_THROW(ClassifierBatch(2, {0.5, 0.6}), InvalidInput);
  EXPECT_THROW(ClassifierBatch(std::vector<ProbVector>{}), EmptyBatch);
  const ClassifierBatch b(2, {0.25, 0.75, 0.75, 0.25});
  EXPECT_EQ(b.rows(), 2u);
  EXPECT_EQ(b.mean()[0], 0.5);
}

TEST(InceptionScore, Examples) {
  // Identical rows score exactly one.
  const std::vector<double> row{0.1, 0.6, 0.3};
  std::vector<double> flat;
  for (int i = 0; i < 50; ++i) flat.insert(flat.end(), row.begin(), row.end());
  EXPECT_EQ(inception_score(ClassifierBatch(3, flat)).inception_score, 1.0);

  // One one-hot row per class.
  for (std::size_t n : {2u, 5u, 10u}) {
    std::vector<double> f(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) f[i * n + i] = 1.0;
    EXPECT_NEAR(inception_score(ClassifierBatch(n, f)).inception_score, static_cast<double>(n),
                1e-12);
  }
}

TEST(InceptionScore, MatchesPerRowOracleAndDecomposes) {
  for (std::uint64_t i = 0; i < 300; ++i) {
    RandomStream rng(11, "test-inception", i);
    const std::size_t k = 2 + rng.below(19);
    const std::size_t n = 1 + rng.below(200);
    const auto rows = random_rows(rng, n, k, 3.0 * rng.uniform());
    const auto mean = column_mean(rows);
    double kl = 0.0, h = 0.0;
    for (const auto& r : rows) {
      kl += oracle::kl(r, mean) / static_cast<double>(n);
      h += oracle::entropy(r) / static_cast<double>(n);
    }
    const auto rep = inception_score(to_batch(rows));
    EXPECT_NEAR(rep.inception_score, std::exp(std::max(0.0, kl)), 1e-9 * rep.inception_score);
    EXPECT_GE(rep.inception_score, 1.0);
    EXPECT_NEAR(rep.mean_conditional_entropy, h, 1e-12);
    EXPECT_NEAR(rep.marginal_entropy, oracle::entropy(mean), 1e-12);
    EXPECT_LT(decomposition_residual(rep), 1e-9);
  }
}

TEST(InceptionScore, RowOrderInvariance) {
  RandomStream rng(11, "test-order");
  auto rows = random_rows(rng, 64, 6, 2.0);
  const ProbVector train({0.1, 0.2, 0.3, 0.1, 0.2, 0.1});
  const auto a = score_report(to_batch(rows), train);
  std::shuffle(rows.begin(), rows.end(), rng);
  const auto b = score_report(to_batch(rows), train);
  EXPECT_NEAR(a.inception_score, b.inception_score, 1e-12);
  EXPECT_NEAR(*a.mode_score, *b.mode_score, 1e-12);
  EXPECT_NEAR(*a.am_score, *b.am_score, 1e-12);
}

TEST(ModeScore, EqualsInceptionScore) {
  for (std::uint64_t i = 0; i < 1000; ++i) {
    RandomStream rng(11, "test-mode-score", i);
    const std::size_t k = 2 + rng.below(19);
    const std::size_t n = 1 + rng.below(256);
    const auto rows = random_rows(rng, n, k, 3.0);
    const auto train = random_rows(rng, 1, k, 1.0).front();
    const auto batch = to_batch(rows);
    const double is = inception_score(batch).inception_score;
    bool clamped = true;
    EXPECT_NEAR(mode_score(batch, ProbVector(train), &clamped), is, 1e-9);
    EXPECT_FALSE(clamped);
  }
  // Single row.
  EXPECT_NEAR(mode_score(ClassifierBatch(3, {0.2, 0.3, 0.5}), ProbVector::uniform(3)), 1.0,
              1e-15);
  bool clamped = false;
  mode_score(ClassifierBatch(2, {0.2, 0.8}), ProbVector({1.0, 0.0}), &clamped);
  EXPECT_TRUE(clamped);
  EXPECT_THROW(mode_score(ClassifierBatch(2, {0.2, 0.8}), ProbVector::uniform(3)), ShapeError);
}

TEST(AmScore, Examples) {
  // Perfect batch: one-hot rows with class frequencies equal to train_dist.
  std::vector<double> flat;
  for (std::size_t c : {0u, 1u, 1u, 2u}) {
    std::vector<double> r(3, 0.0);
    r[c] = 1.0;
    flat.insert(flat.end(), r.begin(), r.end());
  }
  EXPECT_NEAR(*am_score(ClassifierBatch(3, flat), ProbVector({0.25, 0.5, 0.25})).am_score, 0.0,
              1e-10);

  std::vector<double> uni;
  for (int i = 0; i < 7; ++i) uni.insert(uni.end(), 4, 0.25);
  const auto rep = am_score(ClassifierBatch(4, uni), ProbVector::uniform(4));
  EXPECT_NEAR(*rep.am_score, std::log(4.0), 1e-14);
  EXPECT_NEAR(*rep.am_kl_term, 0.0, 1e-15);
}

TEST(AmScore, MatchesTwoTermOracle) {
  for (std::uint64_t i = 0; i < 300; ++i) {
    RandomStream rng(11, "test-am", i);
    const std::size_t k = 2 + rng.below(12);
    const auto rows = random_rows(rng, 1 + rng.below(100), k, 2.0);
    const auto train = random_rows(rng, 1, k, 1.0).front();
    double h = 0.0;
    for (const auto& r : rows) h += oracle::entropy(r) / static_cast<double>(rows.size());
    const double expect = oracle::kl(train, column_mean(rows)) + h;
    const auto rep = am_score(to_batch(rows), ProbVector(train));
    EXPECT_NEAR(*rep.am_score, expect, 1e-12);
    EXPECT_NEAR(*rep.am_score, *rep.am_kl_term + *rep.am_entropy_term, 1e-12);
    EXPECT_GE(*rep.am_score, 0.0);
  }
}

TEST(ModeDrop, ConfigValidation) {
  ModeDropConfig c;
  c.n_points = 1;
  EXPECT_THROW(c.validate(), ConfigError);
  c.n_points = 5;
  c.trials = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c.trials = 3;
  c.density = ClassDensity::Gaussian;
  c.sigma = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c.sigma.reset();
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.resolved_mu(), 2.5);
  EXPECT_EQ(c.resolved_sigma(), 1.25);
  EXPECT_THROW(mode_drop_trials(c, 5), ConfigError);
}

TEST(ModeDrop, UniformDensityGivesLogKept) {
  for (std::size_t n : {10u, 100u}) {
    ModeDropConfig c;
    c.n_points = n;
    c.trials = n == 10 ? 200 : 10;
    const auto series = mode_drop_simulation(c);
    ASSERT_EQ(series.size(), n);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_EQ(series[i].kept, i + 1);
      const double expect = std::log(static_cast<double>(i + 1));
      EXPECT_NEAR(series[i].mean, expect, 1e-9);
      EXPECT_NEAR(series[i].min, expect, 1e-9);
      EXPECT_NEAR(series[i].max, expect, 1e-9);
      if (i > 0) {
        EXPECT_GT(series[i].mean, series[i - 1].mean);
      }
    }
  }
}

TEST(ModeDrop, KeptOneScoresZero) {
  ModeDropConfig c;
  c.density = ClassDensity::Gaussian;
  c.trials = 50;
  EXPECT_EQ(mode_drop_simulation(c).front().mean, 0.0);
}

TEST(ModeDrop, GaussianMeanMatchesExhaustiveEnumeration) {
  ModeDropConfig c;
  c.n_points = 8;
  c.density = ClassDensity::Gaussian;
  c.trials = 1000;
  c.seed = 4;
  const auto weights = c.class_weights();
  const auto series = mode_drop_simulation(c);
  for (const auto& p : series) {
    const double exact = exhaustive_mode_drop_mean(c.n_points, c.n_points - p.kept, weights);
    // 4 standard errors keeps the false-alarm rate of this fixed-seed check
    // negligible across points.
    EXPECT_LE(std::abs(p.mean - exact), 4.0 * p.std_error + 1e-12) << "kept " << p.kept;
  }
}

TEST(ModeDrop, Deterministic) {
  ModeDropConfig c;
  c.density = ClassDensity::Gaussian;
  c.trials = 30;
  c.seed = 9;
  const auto a = mode_drop_simulation(c);
  const auto b = mode_drop_simulation(c);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].mean, b[i].mean);
  const auto t1 = mode_drop_trials(c, 3);
  const auto t2 = mode_drop_trials(c, 3);
  EXPECT_EQ(t1, t2);
}
