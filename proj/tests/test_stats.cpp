#include <gtest/gtest.h>

#include <cmath>

#include "fastecpp/stats.hpp"

using namespace fastecpp;

// Reference values from 30-digit evaluation of the closed forms.
constexpr double kInvExpGamma = 0.561459483566885169824143214791;
constexpr double kDensityAt2 = 0.172285425533855768725618379516;
constexpr double kP2 = 0.344570851067711537451236759033;
constexpr double kPgtE = 0.0352543719710212893492544997541;
constexpr double kOneMinusQ = 0.0939696653654032927246200261765;
constexpr double kGain89 = 0.584500627497715375745629665049;

TEST(Density, Examples) {
  EXPECT_NEAR(stats::density(0.5), kInvExpGamma, 1e-15);
  EXPECT_NEAR(stats::density(1), kInvExpGamma, 1e-15);
  EXPECT_NEAR(stats::density(2), kDensityAt2, 1e-15);
  EXPECT_THROW(stats::density(2.0001), stats::Unsupported);
  EXPECT_THROW(stats::density(0), std::invalid_argument);
}

TEST(Density, ContinuousAtOne) {
  EXPECT_NEAR(stats::density(1 - 1e-12), stats::density(1 + 1e-12), 1e-11);
}

TEST(Density, CumulativeIntegratesDensity) {
  // Midpoint rule against the closed-form cumulative on (0, 2].
  double acc = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double a = 2.0 * (i + 0.5) / n;
    acc += stats::density(a) * 2.0 / n;
    if ((i + 1) % 20000 == 0) {
      EXPECT_NEAR(acc, stats::cumulative(2.0 * (i + 1) / n), 1e-8);
    }
  }
  EXPECT_FALSE(stats::cumulative_is_bound(2));
  EXPECT_TRUE(stats::cumulative_is_bound(2.5));
  // The bound is increasing on (2, e] and below 1.
  double prev = stats::cumulative(2);
  for (double x = 2.05; x <= std::exp(1.0); x += 0.05) {
    EXPECT_GT(stats::cumulative(x), prev);
    EXPECT_LT(stats::cumulative(x), 1);
    prev = stats::cumulative(x);
  }
}

TEST(Buckets, Constants) {
  const auto b = stats::bucket_probabilities();
  EXPECT_NEAR(b.p1, kInvExpGamma, 1e-15);
  EXPECT_NEAR(b.p2, kP2, 1e-15);
  EXPECT_NEAR(b.p_gt_e_bound, kPgtE, 1e-15);
  EXPECT_LE(b.p_gt_e_bound, 0.036);
  EXPECT_NEAR(b.p_tail_bound, kOneMinusQ, 1e-15);
  EXPECT_NEAR(b.p1 + b.p2 + b.p_tail_bound, 1.0, 1e-12);
  EXPECT_NEAR(stats::exp_gamma(), 1 / kInvExpGamma, 1e-15);
}

TEST(MaxStatistics, Examples) {
  EXPECT_NEAR(stats::max_statistics_gain(kOneMinusQ, 8.9), kGain89, 1e-12);
  EXPECT_EQ(stats::max_statistics_gain(0.3, 0), 0);
  EXPECT_NEAR(stats::max_statistics_gain(kOneMinusQ, 1), kOneMinusQ, 1e-15);
  EXPECT_THROW(stats::max_statistics_gain(0, 1), std::invalid_argument);
  EXPECT_THROW(stats::max_statistics_gain(1, 1), std::invalid_argument);
  EXPECT_THROW(stats::max_statistics_gain(0.5, -1), std::invalid_argument);
  // Monotone in n.
  for (double n = 0; n < 20; n += 0.5)
    EXPECT_LT(stats::max_statistics_gain(0.1, n), stats::max_statistics_gain(0.1, n + 0.5));
}

TEST(Sample, BucketsPartitionTheConditionedSamples) {
  const auto r = stats::sample(64, 1024, 20000, 5, 2u);
  EXPECT_EQ(r.n_total, 20000u);
  EXPECT_GT(r.n_prime_conditioned, 0u);
  EXPECT_EQ(r.c1 + r.c2 + r.c_tail, r.n_prime_conditioned);
  EXPECT_LE(r.c_gt_e, r.c_tail);
  EXPECT_NEAR(r.p1() + r.p2() + r.p_tail(), 1.0, 1e-12);
  std::uint64_t hist = 0;
  for (auto h : r.histogram) hist += h;
  EXPECT_EQ(hist, r.n_prime_conditioned);
}

TEST(Sample, DeterministicAndWorkerIndependent) {
  const auto a = stats::sample(128, 1u << 14, 10000, 77, 1u);
  const auto b = stats::sample(128, 1u << 14, 10000, 77, 6u);
  EXPECT_EQ(a.n_prime_conditioned, b.n_prime_conditioned);
  EXPECT_EQ(a.histogram, b.histogram);
  EXPECT_EQ(a.c1, b.c1);
  const auto c = stats::sample(128, 1u << 14, 10000, 78, 1u);
  EXPECT_NE(a.histogram, c.histogram);
}

TEST(Sample, ConvergesTowardTheAnalyticBucket) {
  // |empirical - analytic| shrinks across 10^3, 10^4, 10^5 samples, one
  // inversion allowed.
  const double target = stats::bucket_probabilities().p1;
  std::vector<double> err;
  WorkerPool pool(4);
  for (std::uint64_t n : {1000ull, 10000ull, 100000ull}) err.push_back(std::abs(stats::sample(256, 1u << 20, n, 11, pool).p1() - target));
  int inversions = 0;
  for (std::size_t i = 1; i < err.size(); ++i) inversions += err[i] > err[i - 1];
  EXPECT_LE(inversions, 1);
  EXPECT_LT(err.back(), 0.02);
}

TEST(Sample, RejectsTinyParameters) {
  EXPECT_THROW(stats::sample(4, 1024, 10, 1, 1u), std::invalid_argument);
  EXPECT_THROW(stats::sample(64, 2, 10, 1, 1u), std::invalid_argument);
}

TEST(Format, TableLabelsTheBoundRows) {
  const auto r = stats::sample(64, 1024, 5000, 5, 1u);
  const auto t = stats::format_table(r);
  EXPECT_NE(t.find("BOUND"), std::string::npos);
  EXPECT_NE(t.find("alpha<=1"), std::string::npos);
  const auto kv = stats::format_kv(r);
  EXPECT_NE(kv.find("\np1="), std::string::npos);
  EXPECT_NE(kv.find("analytic.p_gt_e_bound="), std::string::npos);
  const auto csv = stats::format_histogram_csv(r);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "alpha_lo,alpha_hi,count,density");
}
