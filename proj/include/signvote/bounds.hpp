#pragma once

#include <cmath>
#include <span>
#include <stdexcept>

#include "signvote/snr.hpp"

namespace signvote::bounds {

// Gauss tail bound for a unimodal random variable with mode nu and expected
// squared deviation tau^2 from the mode:
//   P[|X - nu| > k] <= (4/9)(tau/k)^2   if k/tau > 2/sqrt(3)
//                      1 - k/(sqrt(3) tau) otherwise.
// Both branches meet at k/tau = 2/sqrt(3) with value 1/3.
inline double gauss_tail(double k, double tau) {
  if (!(k > 0.0) || !(tau > 0.0))
    throw std::invalid_argument("gauss_tail: k and tau must be positive");
  const double r = k / tau;
  if (r > kCriticalSnr) return (4.0 / 9.0) / (r * r);
  return 1.0 - r / std::sqrt(3.0);
}

// Bound on P[sign(g~_i) != sign(g_i)] for unimodal symmetric noise at
// signal-to-noise ratio S. Nonincreasing in S, continuous at the critical
// SNR (value 1/6 there), and never above 1/2.
inline double lemma1_bound(double s) {
  if (s < 0.0) throw std::invalid_argument("lemma1_bound: negative SNR");
  if (s > kCriticalSnr) return (2.0 / 9.0) / (s * s);
  return 0.5 - s / (2.0 * std::sqrt(3.0));
}

// One-sided Chebyshev: P[mu - X >= |lambda|] <= 1/(1 + lambda^2/sigma^2).
inline double cantelli(double lambda, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("cantelli: sigma must be positive");
  const double r = lambda / sigma;
  return 1.0 / (1.0 + r * r);
}

// Majority-vote failure bound for one coordinate at SNR s with a fraction
// alpha < 1/2 of blind multiplicative adversaries among M workers:
//   P[Z <= M/2] <= 1 / ((1 - 2 alpha) sqrt(M) s).
// The value is returned unclamped; anything >= 1 is vacuous (see
// bound_vacuous) but still meaningful in soundness comparisons.
inline double vote_failure_bound(int workers, double alpha, double s) {
  if (workers < 1) throw std::invalid_argument("vote_failure_bound: need M >= 1");
  if (!(alpha >= 0.0 && alpha < 0.5))
    throw std::invalid_argument("vote_failure_bound: alpha must be in [0, 1/2)");
  if (!(s > 0.0)) throw std::invalid_argument("vote_failure_bound: SNR must be positive");
  return 1.0 / ((1.0 - 2.0 * alpha) * std::sqrt(static_cast<double>(workers)) * s);
}

inline bool bound_vacuous(double p) { return p >= 1.0; }

// Lower bound on epsilon = p - 1/2, the edge of an honest worker's sign bit:
//   epsilon >= 1/2 - (2/9)/S^2  if S > 2/sqrt(3),  S/(2 sqrt(3)) otherwise.
inline double epsilon_lower_bound(double s) {
  if (s < 0.0) throw std::invalid_argument("epsilon_lower_bound: negative SNR");
  if (s > kCriticalSnr) return 0.5 - (2.0 / 9.0) / (s * s);
  return s / (2.0 * std::sqrt(3.0));
}

// The algebraic step 1/(4 eps^2) - 1 < 4/S^2 used between Cantelli and the
// vote failure bound, with eps = epsilon_lower_bound(S). Holds for all S > 0.
inline bool epsilon_chain_holds(double s) {
  if (!(s > 0.0)) throw std::invalid_argument("epsilon_chain_holds: SNR must be positive");
  const double eps = epsilon_lower_bound(s);
  return 1.0 / (4.0 * eps * eps) - 1.0 < 4.0 / (s * s);
}

// Right-hand side of the mixed-norm rate: 3 sqrt(L1 (f0 - f*) / N).
inline double theorem1_rhs(double l1, double f_gap, double n_samples) {
  if (!(l1 > 0.0) || !(f_gap > 0.0) || !(n_samples > 0.0))
    throw std::invalid_argument("theorem1_rhs: inputs must be positive");
  return 3.0 * std::sqrt(l1 * f_gap / n_samples);
}

// Same rate with the sharper constant 3 sqrt(3)/2 that the proof actually
// yields before rounding up to 3.
inline double theorem1_rhs_tight(double l1, double f_gap, double n_samples) {
  return theorem1_rhs(l1, f_gap, n_samples) * std::sqrt(3.0) / 2.0;
}

// Right-hand side of the robustness rate; N is the total number of
// stochastic gradient calls per worker (N = K^2 under the n = K schedule):
//   (4/sqrt(N)) [ sigma_l1 / ((1-2 alpha) sqrt(M)) + sqrt(L1 (f0 - f*)) ]^2.
inline double theorem2_rhs(double l1, double f_gap, double sigma_l1, int workers,
                           double alpha, double n_samples) {
  if (!(l1 > 0.0) || !(f_gap > 0.0) || !(n_samples > 0.0) || sigma_l1 < 0.0 || workers < 1)
    throw std::invalid_argument("theorem2_rhs: bad inputs");
  if (!(alpha >= 0.0 && alpha < 0.5))
    throw std::invalid_argument("theorem2_rhs: alpha must be in [0, 1/2)");
  const double noise_term =
      sigma_l1 / ((1.0 - 2.0 * alpha) * std::sqrt(static_cast<double>(workers)));
  const double curvature_term = std::sqrt(l1 * f_gap);
  const double bracket = noise_term + curvature_term;
  return 4.0 / std::sqrt(n_samples) * bracket * bracket;
}

// Progress measure of the mixed-norm rate: l1 norm over high-SNR coordinates,
// variance-weighted l2 over the rest. A coordinate with g_i = 0 contributes
// nothing; sigma_i = 0 with g_i != 0 is infinite-SNR and contributes |g_i|.
inline double mixed_norm(std::span<const double> g, std::span<const double> sigma) {
  const SnrProfile prof = snr_profile(g, sigma);
  double total = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (prof.high[i]) {
      total += std::abs(g[i]);
    } else if (g[i] != 0.0) {
      if (!(sigma[i] > 0.0))
        throw std::invalid_argument("mixed_norm: sigma must be positive outside H");
      total += g[i] * g[i] / sigma[i];
    }
  }
  return total;
}

}  // namespace signvote::bounds
