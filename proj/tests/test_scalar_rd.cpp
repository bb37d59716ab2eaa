#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gwbounds/oracle/allocation_grid.hpp"
#include "gwbounds/scalar_rd.hpp"
#include "random_profiles.hpp"

using namespace gwbounds;

TEST(RdLower, Examples) {
  EXPECT_NEAR(rd_lower(1.0, 0.25), 0.5 * std::log(4.0), 1e-15);
  EXPECT_EQ(rd_lower(0.5, 0.5), 0.0);
  EXPECT_EQ(rd_lower(0.5, 0.9), 0.0);
  EXPECT_THROW(rd_lower(0.0, 0.5), Error);
  EXPECT_THROW(rd_lower(1.0, -0.1), Error);
}

TEST(RdUpper, Examples) {
  EXPECT_NEAR(rd_upper(1.0, 0.25), 0.6931471805599453, 1e-15);
  EXPECT_EQ(rd_upper(1.0, 1.0), 0.0);
  EXPECT_NEAR(rd_upper(2.0, 0.5), 0.5 * std::log(4.0), 1e-15);
}

TEST(CondRdLower, Examples) {
  EXPECT_NEAR(cond_rd_lower(1.0 - 0.36, 0.16), 0.5 * std::log(4.0), 1e-15);
  EXPECT_EQ(cond_rd_lower(0.3, 0.3), 0.0);
  EXPECT_NEAR(cond_rd_lower(0.5, 0.125), 0.5 * std::log(4.0), 1e-15);
}

TEST(Allocate, OneClampedLetter) {
  const ConditionalVarianceProfile p(std::vector<double>{0.5, 0.5}, std::vector<double>{0.2, 1.0});
  const auto a = allocate_distortion(p, 0.5);
  EXPECT_NEAR(a.per_letter_delta[0], 0.2, 1e-15);
  EXPECT_NEAR(a.per_letter_delta[1], 0.8, 1e-15);
  EXPECT_NEAR(a.gamma, 0.8, 1e-15);
  EXPECT_EQ(a.clamp_count, 1u);
  EXPECT_NEAR(a.achieved_rate, 0.25 * std::log(1.0 / 0.8), 1e-15);
}

TEST(Allocate, EqualVariancesNoClamp) {
  const ConditionalVarianceProfile p(std::vector<double>{0.5, 0.5}, std::vector<double>{1.0, 1.0});
  const auto a = allocate_distortion(p, 0.4);
  EXPECT_NEAR(a.per_letter_delta[0], 0.4, 1e-15);
  EXPECT_NEAR(a.per_letter_delta[1], 0.4, 1e-15);
  EXPECT_NEAR(a.gamma, 0.4, 1e-15);
  EXPECT_EQ(a.clamp_count, 0u);
}

TEST(Allocate, ZeroRateBoundary) {
  const ConditionalVarianceProfile p(std::vector<double>{0.2, 0.3, 0.5}, std::vector<double>{0.4, 0.9, 1.3});
  const auto a = allocate_distortion(p, p.mean_variance());
  EXPECT_EQ(a.achieved_rate, 0.0);
  EXPECT_EQ(a.clamp_count, 3u);
  EXPECT_FALSE(a.surplus);
  const auto s = allocate_distortion(p, p.mean_variance() + 0.1);
  EXPECT_TRUE(s.surplus);
  EXPECT_NEAR(s.surplus_amount, 0.1, 1e-15);
}

TEST(Profile, ValidationErrors) {
  EXPECT_THROW(ConditionalVarianceProfile(std::vector<double>{}, std::vector<double>{}), Error);
  EXPECT_THROW(ConditionalVarianceProfile(std::vector<double>{0.5, 0.6}, std::vector<double>{1.0, 1.0}), Error);
  EXPECT_THROW(ConditionalVarianceProfile(std::vector<double>{-0.5, 1.5}, std::vector<double>{1.0, 1.0}), Error);
  const ConditionalVarianceProfile p(std::vector<double>{1.0}, std::vector<double>{1.0});
  EXPECT_THROW(allocate_distortion(p, 0.0), Error);
}

TEST(CondRdUpper, Examples) {
  const ConditionalVarianceProfile p(std::vector<double>{0.5, 0.5}, std::vector<double>{0.2, 1.0});
  const auto u = cond_rd_upper(p, 0.5);
  EXPECT_NEAR(u.bound, 0.5 * std::log(0.6 / 0.5), 1e-15);
  EXPECT_NEAR(u.intermediate, 0.25 * std::log(1.0 / 0.8), 1e-15);
  EXPECT_LE(u.intermediate, u.bound);

  const ConditionalVarianceProfile one(std::vector<double>{1.0}, std::vector<double>{1.0});
  EXPECT_NEAR(cond_rd_upper(one, 0.25).bound, 0.6931471805599453, 1e-15);
  EXPECT_EQ(cond_rd_upper(p, 0.6).bound, 0.0);
}

TEST(TestChannel, Examples) {
  const auto a = build_test_channel(1.0, 0.2);
  EXPECT_NEAR(a.alpha, 0.8, 1e-15);
  EXPECT_NEAR(a.noise_variance, 0.25, 1e-15);
  EXPECT_NEAR(a.distortion(), 0.2, 1e-15);
  const auto b = build_test_channel(2.0, 1.0);
  EXPECT_NEAR(b.alpha, 0.5, 1e-15);
  EXPECT_NEAR(b.noise_variance, 2.0, 1e-15);
  EXPECT_NEAR(b.mutual_information(), 0.5 * std::log(2.0), 1e-15);
  EXPECT_THROW(build_test_channel(1.0, 1.0), Error);
  EXPECT_THROW(build_test_channel(1.0, 0.0), Error);
}

TEST(AllocateProperty, DistortionBudgetAndClamps) {
  for (const auto& rp : random_profiles(300, 11)) {
    const ConditionalVarianceProfile p(rp.weights, rp.variances);
    const auto a = allocate_distortion(p, rp.delta);
    const auto e = p.entries();
    double used = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) {
      used += e[i].weight * a.per_letter_delta[i];
      EXPECT_LE(a.per_letter_delta[i], e[i].variance + 1e-12);
      if (i >= a.clamp_count) EXPECT_EQ(a.per_letter_delta[i], a.gamma);
    }
    EXPECT_NEAR(used, rp.delta, 1e-10);
  }
}

TEST(AllocateProperty, PermutationInvariant) {
  for (const auto& rp : random_profiles(200, 12)) {
    std::vector<std::size_t> order(rp.weights.size());
    std::iota(order.begin(), order.end(), 0);
    std::reverse(order.begin(), order.end());
    std::vector<double> w, v;
    for (auto i : order) {
      w.push_back(rp.weights[i]);
      v.push_back(rp.variances[i]);
    }
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < w.size(); ++i) total += w[i];
    w.back() = 1.0 - total;
    const auto a = allocate_distortion(ConditionalVarianceProfile(rp.weights, rp.variances), rp.delta);
    const auto b = allocate_distortion(ConditionalVarianceProfile(w, v), rp.delta);
    EXPECT_NEAR(a.achieved_rate, b.achieved_rate, 1e-12);
    EXPECT_NEAR(a.gamma, b.gamma, 1e-12);
  }
}

TEST(AllocateProperty, WaterLevelMonotoneAndRateConvex) {
  for (const auto& rp : random_profiles(50, 13)) {
    const ConditionalVarianceProfile p(rp.weights, rp.variances);
    const double top = p.mean_variance();
    std::vector<double> gamma, rate;
    constexpr int kSteps = 200;
    for (int k = 1; k <= kSteps; ++k) {
      const auto a = allocate_distortion(p, top * k / kSteps);
      gamma.push_back(a.gamma);
      rate.push_back(a.achieved_rate);
    }
    for (std::size_t i = 1; i < gamma.size(); ++i) {
      EXPECT_GE(gamma[i], gamma[i - 1] - 1e-12);
      EXPECT_LE(rate[i], rate[i - 1] + 1e-12);
    }
    for (std::size_t i = 1; i + 1 < rate.size(); ++i) {
      EXPECT_GE(rate[i + 1] - 2.0 * rate[i] + rate[i - 1], -1e-9);
    }
  }
}

TEST(AllocateProperty, UpperBoundChain) {
  for (const auto& rp : random_profiles(300, 14)) {
    const ConditionalVarianceProfile p(rp.weights, rp.variances);
    const auto u = cond_rd_upper(p, rp.delta);
    const double lower = cond_rd_lower(std::max(p.gaussian_entropy_power(), 1e-300), rp.delta);
    EXPECT_LE(lower, u.intermediate + 1e-12);
    EXPECT_LE(u.intermediate, u.bound + 1e-12);
  }
}

TEST(AllocationGrid, MatchesLoopOnExample) {
  const ConditionalVarianceProfile p(std::vector<double>{0.5, 0.5}, std::vector<double>{0.2, 1.0});
  const auto g = oracle::allocation_grid_oracle(p, 0.5, 1e-3);
  EXPECT_NEAR(g.rate, 0.25 * std::log(1.0 / 0.8), 1e-6 + g.resolution);
}

TEST(AllocationGrid, SymmetricAndBoundary) {
  const ConditionalVarianceProfile eq(std::vector<double>{0.25, 0.25, 0.5}, std::vector<double>{0.7, 0.7, 0.7});
  const auto g = oracle::allocation_grid_oracle(eq, 0.35, 1e-3);
  EXPECT_NEAR(g.rate, 0.5 * std::log(2.0), 1e-6 + g.resolution);
  const ConditionalVarianceProfile p(std::vector<double>{0.5, 0.5}, std::vector<double>{0.2, 1.0});
  EXPECT_NEAR(oracle::allocation_grid_oracle(p, 0.6 - 1e-9, 1e-3).rate, 0.0, 1e-6);
}

TEST(AllocationGrid, HeaviestLetterWithZeroVariance) {
  const ConditionalVarianceProfile p(std::vector<double>{0.6, 0.4}, std::vector<double>{0.0, 1.0});
  const auto g = oracle::allocation_grid_oracle(p, 0.2, 1e-3);
  EXPECT_NEAR(g.rate, 0.2 * std::log(2.0), 1e-6 + g.resolution);
  EXPECT_NEAR(allocate_distortion(p, 0.2).achieved_rate, g.rate, 1e-6 + g.resolution);
}

TEST(AllocationGrid, Errors) {
  const ConditionalVarianceProfile p(std::vector<double>{0.5, 0.5}, std::vector<double>{0.2, 1.0});
  EXPECT_THROW(oracle::allocation_grid_oracle(p, 0.5, 1e-2), Error);
  const ConditionalVarianceProfile big(std::vector<double>{0.2, 0.2, 0.2, 0.2, 0.2},
                                       std::vector<double>{1.0, 1.0, 1.0, 1.0, 1.0});
  EXPECT_THROW(oracle::allocation_grid_oracle(big, 0.5, 1e-3), Error);
}
