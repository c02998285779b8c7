#include "signvote/bounds.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "signvote/snr.hpp"

namespace signvote {
namespace {

using namespace signvote::bounds;

TEST(gauss_tail, branches_meet_at_critical_ratio) {
  // Derived by evaluating both branch formulas at k/tau = 2/sqrt(3):
  //   (4/9)(3/4) = 1/3 and 1 - (2/sqrt(3))/sqrt(3) = 1 - 2/3 = 1/3.
  const double high = (4.0 / 9.0) / (kCriticalSnr * kCriticalSnr);
  const double low = 1.0 - kCriticalSnr / std::sqrt(3.0);
  EXPECT_NEAR(high, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(low, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(gauss_tail(kCriticalSnr, 1.0), 1.0 / 3.0, 1e-12);
}

TEST(gauss_tail, reference_values) {
  EXPECT_NEAR(gauss_tail(2.0, 1.0), 1.0 / 9.0, 1e-15);  // (4/9)/4
  EXPECT_NEAR(gauss_tail(1e-9, 1.0), 1.0, 1e-6);        // vacuous as k -> 0
  EXPECT_THROW(gauss_tail(0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(gauss_tail(1.0, 0.0), std::invalid_argument);
}

TEST(gauss_tail, continuous_and_monotone) {
  double prev = gauss_tail(1e-3, 1.0);
  for (double k = 2e-3; k < 10.0; k += 1e-3) {
    const double cur = gauss_tail(k, 1.0);
    EXPECT_LE(cur, prev + 1e-12);
    EXPECT_LT(std::abs(cur - prev), 2e-3);  // no jump at the breakpoint
    prev = cur;
  }
}

TEST(lemma1_bound, reference_values) {
  EXPECT_DOUBLE_EQ(lemma1_bound(0.0), 0.5);
  EXPECT_NEAR(lemma1_bound(kCriticalSnr), 1.0 / 6.0, 1e-12);
  EXPECT_NEAR(lemma1_bound(2.0), 1.0 / 18.0, 1e-15);  // (2/9)/4
  EXPECT_THROW(lemma1_bound(-0.1), std::invalid_argument);
}

TEST(lemma1_bound, both_branches_give_one_sixth_at_critical) {
  const double high = (2.0 / 9.0) / (kCriticalSnr * kCriticalSnr);
  const double low = 0.5 - kCriticalSnr / (2.0 * std::sqrt(3.0));
  EXPECT_NEAR(high, 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(low, 1.0 / 6.0, 1e-15);
}

TEST(lemma1_bound, never_above_half_and_monotone) {
  double prev = lemma1_bound(0.0);
  EXPECT_LE(prev, 0.5);
  for (double s = 0.01; s < 20.0; s += 0.01) {
    const double cur = lemma1_bound(s);
    EXPECT_LE(cur, 0.5);
    EXPECT_LE(cur, prev + 1e-12);
    EXPECT_LT(std::abs(cur - prev), 0.02);
    prev = cur;
  }
}

TEST(cantelli, reference_values) {
  EXPECT_DOUBLE_EQ(cantelli(1.0, 1.0), 0.5);
  EXPECT_DOUBLE_EQ(cantelli(0.0, 2.0), 1.0);
  EXPECT_DOUBLE_EQ(cantelli(3.0, 1.0), 0.1);  // 1/(1+9)
  EXPECT_THROW(cantelli(1.0, 0.0), std::invalid_argument);
}

TEST(vote_failure_bound, reference_values) {
  EXPECT_NEAR(vote_failure_bound(27, 0.0, 1.0), 1.0 / std::sqrt(27.0), 1e-15);
  EXPECT_THROW(vote_failure_bound(27, 0.5, 1.0), std::invalid_argument);
  EXPECT_THROW(vote_failure_bound(27, 0.6, 1.0), std::invalid_argument);
  EXPECT_THROW(vote_failure_bound(0, 0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(vote_failure_bound(3, 0.0, 0.0), std::invalid_argument);
}

TEST(vote_failure_bound, pole_as_alpha_approaches_half) {
  const double near = vote_failure_bound(27, 0.49999, 5.0);
  EXPECT_TRUE(bound_vacuous(near));
  EXPECT_GT(near, 1e3);
}

TEST(vote_failure_bound, single_worker_consistent_with_lemma1) {
  // At M=1, alpha=0 the exact failure probability is lemma1_bound(S); the
  // closed-form 1/S must sit above it everywhere.
  for (double s = 0.05; s < 50.0; s *= 1.17)
    EXPECT_LE(lemma1_bound(s), vote_failure_bound(1, 0.0, s));
}

TEST(epsilon_lower_bound, breakpoint_and_edges) {
  const double high = 0.5 - (2.0 / 9.0) / (kCriticalSnr * kCriticalSnr);
  const double low = kCriticalSnr / (2.0 * std::sqrt(3.0));
  EXPECT_NEAR(high, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(low, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(epsilon_lower_bound(kCriticalSnr), 1.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(epsilon_lower_bound(0.0), 0.0);
  EXPECT_THROW(epsilon_lower_bound(-1.0), std::invalid_argument);
}

TEST(epsilon_lower_bound, chain_inequality_on_log_grid) {
  for (double e = -3.0; e <= 3.0; e += 0.02)
    EXPECT_TRUE(epsilon_chain_holds(std::pow(10.0, e))) << "S=10^" << e;
}

TEST(theorem1_rhs, reference_values) {
  EXPECT_DOUBLE_EQ(theorem1_rhs(1.0, 1.0, 9.0), 1.0);
  EXPECT_DOUBLE_EQ(theorem1_rhs(1.0, 1.0, 400.0), 2.0 * theorem1_rhs(1.0, 1.0, 1600.0));
  EXPECT_NEAR(theorem1_rhs_tight(1.0, 1.0, 9.0), 3.0 * std::sqrt(3.0) / 2.0 / 3.0, 1e-15);
  EXPECT_LT(theorem1_rhs_tight(2.0, 3.0, 7.0), theorem1_rhs(2.0, 3.0, 7.0));
  EXPECT_THROW(theorem1_rhs(0.0, 1.0, 1.0), std::invalid_argument);
}

TEST(theorem1_rhs, well_conditioned_reduction) {
  // With sigma_i^2 = sigma^2/d and L_i = L, the weighted-l2 statement
  // (sqrt(d)/sigma) E||g||^2 <= 3 sqrt(dL f_gap / N) collapses to
  // E||g||^2 <= 3 sigma sqrt(L f_gap / N): no dimension factor survives.
  const double L = 2.0, f_gap = 5.0, sigma = 3.0;
  for (double d : {10.0, 100.0, 1000.0}) {
    const double n = 1e4;
    const double lhs_scale = theorem1_rhs(L * d, f_gap, n) * sigma / std::sqrt(d);
    EXPECT_NEAR(lhs_scale, 3.0 * sigma * std::sqrt(L * f_gap / n), 1e-9);
  }
}

TEST(theorem2_rhs, reference_values) {
  // alpha = 0 reduces to the adversary-free rate.
  const double plain = theorem2_rhs(1.0, 1.0, 2.0, 4, 0.0, 100.0);
  EXPECT_NEAR(plain, 4.0 / 10.0 * std::pow(2.0 / 2.0 + 1.0, 2.0), 1e-12);

  // noiseless: (4/sqrt(N)) L1 f_gap
  EXPECT_NEAR(theorem2_rhs(3.0, 2.0, 0.0, 9, 0.25, 16.0), 4.0 / 4.0 * 3.0 * 2.0, 1e-12);

  EXPECT_THROW(theorem2_rhs(1.0, 1.0, 1.0, 4, 0.5, 100.0), std::invalid_argument);
}

TEST(theorem2_rhs, quadrupling_workers_halves_noise_term) {
  const double l1 = 1.0, gap = 1.0, sl1 = 8.0, n = 100.0;
  const double alpha = 0.0;
  // extract the bracket by sqrt(rhs * sqrt(n) / 4)
  const double b_m = std::sqrt(theorem2_rhs(l1, gap, sl1, 4, alpha, n) * std::sqrt(n) / 4.0);
  const double b_4m = std::sqrt(theorem2_rhs(l1, gap, sl1, 16, alpha, n) * std::sqrt(n) / 4.0);
  const double noise_m = b_m - std::sqrt(l1 * gap);
  const double noise_4m = b_4m - std::sqrt(l1 * gap);
  EXPECT_NEAR(noise_m, 2.0 * noise_4m, 1e-9);
}

TEST(snr_profile, membership_rules) {
  const std::vector<double> g{2.0, kCriticalSnr, 0.0, 1.0};
  const std::vector<double> sigma{1.0, 1.0, 1.0, 0.0};
  const SnrProfile p = snr_profile(g, sigma);
  EXPECT_DOUBLE_EQ(p.snr[0], 2.0);
  EXPECT_TRUE(p.high[0]);                     // 2 > 2/sqrt(3)
  EXPECT_FALSE(p.high[1]);                    // exactly critical: strict inequality
  EXPECT_DOUBLE_EQ(p.snr[2], 0.0);
  EXPECT_FALSE(p.high[2]);
  EXPECT_TRUE(std::isinf(p.snr[3]));          // sigma = 0, g != 0
  EXPECT_TRUE(p.high[3]);
  EXPECT_EQ(p.high_count, 2u);
}

TEST(snr_profile, zero_gradient_empty_h) {
  const std::vector<double> g(4, 0.0);
  const std::vector<double> sigma(4, 1.0);
  const SnrProfile p = snr_profile(g, sigma);
  EXPECT_EQ(p.high_count, 0u);
  for (double s : p.snr) EXPECT_DOUBLE_EQ(s, 0.0);
}

TEST(mixed_norm, reference_values) {
  // all coordinates high SNR -> plain l1
  const std::vector<double> g{3.0, -4.0};
  const std::vector<double> sigma{0.1, 0.1};
  EXPECT_DOUBLE_EQ(mixed_norm(g, sigma), 7.0);

  // zero gradient -> 0
  EXPECT_DOUBLE_EQ(mixed_norm(std::vector<double>(3, 0.0), std::vector<double>(3, 1.0)), 0.0);

  // single low-SNR coordinate: S = 0.5 < critical, so g^2/sigma = 1/2
  EXPECT_DOUBLE_EQ(mixed_norm(std::vector<double>{1.0}, std::vector<double>{2.0}), 0.5);
}

TEST(mixed_norm, sigma_zero_outside_h_is_an_error) {
  // force a low-SNR coordinate with invalid sigma
  EXPECT_THROW(mixed_norm(std::vector<double>{1.0}, std::vector<double>{-1.0}),
               std::invalid_argument);
}

}  // namespace
}  // namespace signvote
