#include "signvote/qsgd.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "signvote/rng.hpp"

namespace signvote {
namespace {

TEST(l2_qsgd, expected_nonzeros_on_3_4) {
  // keep probabilities are 3/5 and 4/5, so E[#nonzeros] = 1.4 <= sqrt(2)
  CounterRng rng(1);
  const std::vector<double> g{3.0, 4.0};
  const int trials = 40000;
  long nz = 0;
  for (int t = 0; t < trials; ++t) nz += static_cast<long>(l2_qsgd_quantize(g, rng).entries.size());
  const double mean = static_cast<double>(nz) / trials;
  EXPECT_NEAR(mean, 1.4, 0.02);
  EXPECT_LE(mean, std::sqrt(2.0));
}

TEST(l2_qsgd, one_hot_kept_deterministically) {
  CounterRng rng(2);
  const std::vector<double> g{0.0, 0.0, -5.0, 0.0};
  for (int t = 0; t < 50; ++t) {
    const QuantizedVector q = l2_qsgd_quantize(g, rng);
    ASSERT_EQ(q.entries.size(), 1u);
    EXPECT_EQ(q.entries[0].first, 2u);
    EXPECT_EQ(q.entries[0].second, -1);
  }
}

TEST(l2_qsgd, zero_vector_empty) {
  CounterRng rng(3);
  const QuantizedVector q = l2_qsgd_quantize(std::vector<double>(8, 0.0), rng);
  EXPECT_TRUE(q.entries.empty());
  EXPECT_EQ(dequantize(q), std::vector<std::int8_t>(8, 0));
}

TEST(l2_qsgd, sparsity_bound_on_gaussian_vectors) {
  CounterRng rng(4);
  const std::uint32_t dim = 1024;
  const int trials = 1000;
  std::vector<double> g(dim);
  long nz = 0;
  for (int t = 0; t < trials; ++t) {
    double l1 = 0.0, l2 = 0.0;
    for (double& x : g) {
      x = rng.next_gaussian();
      l1 += std::abs(x);
      l2 += x * x;
    }
    EXPECT_LE(l1 / std::sqrt(l2), std::sqrt(static_cast<double>(dim)));  // analytic bound
    nz += static_cast<long>(l2_qsgd_quantize(g, rng).entries.size());
  }
  const double mean = static_cast<double>(nz) / trials;
  EXPECT_LE(mean, std::sqrt(1024.0) * (1.0 + 5.0 / std::sqrt(static_cast<double>(trials))));
}

TEST(l2_qsgd, rescaled_dequantization_is_unbiased) {
  CounterRng rng(5);
  const std::vector<double> g{1.0, -2.0, 0.5, 3.0};
  double norm = 0.0;
  for (double v : g) norm += v * v;
  norm = std::sqrt(norm);
  const int trials = 60000;
  std::vector<double> sum(4, 0.0), sum2(4, 0.0);
  for (int t = 0; t < trials; ++t) {
    const auto dense = dequantize(l2_qsgd_quantize(g, rng));
    for (int i = 0; i < 4; ++i) {
      const double est = norm * dense[i];
      sum[i] += est;
      sum2[i] += est * est;
    }
  }
  for (int i = 0; i < 4; ++i) {
    const double mean = sum[i] / trials;
    const double var = sum2[i] / trials - mean * mean;
    const double se = std::sqrt(var / trials);
    EXPECT_NEAR(mean, g[i], 4.0 * se) << "coordinate " << i;
  }
}

TEST(max_qsgd, sign_vectors_pass_through_unchanged) {
  CounterRng rng(6);
  std::vector<double> g(64);
  for (double& x : g) x = (rng.next_u64() & 1) ? 1.0 : -1.0;
  for (int t = 0; t < 20; ++t) {
    const QuantizedVector q = max_qsgd_quantize(g, rng);
    ASSERT_EQ(q.entries.size(), g.size());  // every coordinate kept, deterministically
    const auto dense = dequantize(q);
    for (std::size_t i = 0; i < g.size(); ++i)
      EXPECT_EQ(static_cast<double>(dense[i]), g[i]);
  }
}

TEST(max_qsgd, keep_probability_is_ratio_to_max) {
  CounterRng rng(7);
  const std::vector<double> g{2.0, 1.0};
  const int trials = 40000;
  int kept0 = 0, kept1 = 0;
  for (int t = 0; t < trials; ++t) {
    const auto dense = dequantize(max_qsgd_quantize(g, rng));
    if (dense[0] != 0) ++kept0;
    if (dense[1] != 0) ++kept1;
  }
  EXPECT_EQ(kept0, trials);  // |g_0| / ||g||_inf = 1
  EXPECT_NEAR(static_cast<double>(kept1) / trials, 0.5, 0.01);
}

TEST(max_qsgd, single_nonzero_costs_log_d_bits) {
  CounterRng rng(8);
  std::vector<double> g(256, 0.0);
  g[17] = -3.0;
  const QuantizedVector q = max_qsgd_quantize(g, rng);
  ASSERT_EQ(q.entries.size(), 1u);
  EXPECT_EQ(q.entries[0].first, 17u);
  // index cost for the lone nonzero: log2(256) = 8 bits
  EXPECT_EQ(std::ceil(std::log2(256.0)), 8.0);
}

TEST(dequantize, ternary_aggregation_stays_in_range) {
  CounterRng rng(9);
  const int m = 7;
  const std::uint32_t dim = 32;
  std::vector<int> total(dim, 0);
  std::vector<double> g(dim);
  for (int w = 0; w < m; ++w) {
    for (double& x : g) x = rng.next_gaussian();
    const auto dense = dequantize(max_qsgd_quantize(g, rng));
    for (std::uint32_t i = 0; i < dim; ++i) total[i] += dense[i];
  }
  for (int v : total) {
    EXPECT_LE(v, m);
    EXPECT_GE(v, -m);
  }
}

TEST(dequantize, rejects_malformed_entries) {
  QuantizedVector q;
  q.dim = 4;
  q.entries = {{2, 1}, {1, -1}};  // not increasing
  EXPECT_THROW(dequantize(q), std::invalid_argument);
  q.entries = {{9, 1}};
  EXPECT_THROW(dequantize(q), std::invalid_argument);
}

TEST(bit_cost, reference_values) {
  EXPECT_EQ(bit_cost(BitScheme::MajorityVote, 7, 1000).bits_per_iteration, 14000u);
  // M(M-1) sqrt(d) (1 + ceil(log2 d)) = 3*2*32*11 = 2112
  EXPECT_EQ(bit_cost(BitScheme::L2Qsgd1Bit, 3, 1024).bits_per_iteration, 2112u);
  EXPECT_EQ(bit_cost(BitScheme::MaxQsgd1Bit, 3, 1024).bits_per_iteration, 2ull * 3 * 1024);

  const BitCostReport lone = bit_cost(BitScheme::L2Qsgd1Bit, 1, 1024);
  EXPECT_EQ(lone.bits_per_iteration, 0u);
  EXPECT_TRUE(lone.degenerate);
  EXPECT_FALSE(bit_cost(BitScheme::L2Qsgd1Bit, 2, 1024).degenerate);

  EXPECT_THROW(bit_cost(BitScheme::MajorityVote, 0, 10), std::invalid_argument);
}

TEST(bit_cost, crossover_matches_closed_form) {
  for (std::uint32_t m : {2u, 3u, 5u, 7u, 9u, 15u, 27u})
    for (std::uint64_t d : {64ull, 1024ull, 100000ull, 25000000ull}) {
      const auto mv = bit_cost(BitScheme::MajorityVote, m, d);
      const auto l2 = bit_cost(BitScheme::L2Qsgd1Bit, m, d);
      const double rhs = static_cast<double>(m) * (m - 1) *
                         std::ceil(std::sqrt(static_cast<double>(d)) *
                                   (1.0 + std::ceil(std::log2(static_cast<double>(d)))));
      EXPECT_EQ(mv.bits_per_iteration < l2.bits_per_iteration,
                2.0 * m * d < rhs);
    }
  // concrete ordering at d=1024: L2 wins at M=3, majority vote wins at M=7
  EXPECT_GT(bit_cost(BitScheme::MajorityVote, 3, 1024).bits_per_iteration,
            bit_cost(BitScheme::L2Qsgd1Bit, 3, 1024).bits_per_iteration);
  EXPECT_LT(bit_cost(BitScheme::MajorityVote, 7, 1024).bits_per_iteration,
            bit_cost(BitScheme::L2Qsgd1Bit, 7, 1024).bits_per_iteration);
}

}  // namespace
}  // namespace signvote
