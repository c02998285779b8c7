#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "signvote/sign_codec.hpp"

namespace signvote {

struct OptimizerConfig {
  double eta = 0.0;        // learning rate, > 0
  double beta = 0.0;       // momentum constant in [0, 1); 0 is plain signSGD
  double lambda = 0.0;     // weight decay, >= 0
  std::uint32_t batch_size = 1;

  void validate() const {
    if (!(eta > 0.0)) throw std::invalid_argument("OptimizerConfig: eta must be positive");
    if (!(beta >= 0.0 && beta < 1.0))
      throw std::invalid_argument("OptimizerConfig: beta must be in [0, 1)");
    if (lambda < 0.0) throw std::invalid_argument("OptimizerConfig: lambda must be >= 0");
    if (batch_size < 1) throw std::invalid_argument("OptimizerConfig: batch_size must be >= 1");
  }
};

// Parameters and momentum of one worker. x is replicated across all workers;
// v is local and starts at zero.
struct WorkerState {
  std::vector<double> x;
  std::vector<double> v;
  std::uint64_t rng_seed = 0;

  static WorkerState init(std::span<const double> x0, std::uint64_t rng_seed) {
    WorkerState s;
    s.x.assign(x0.begin(), x0.end());
    s.v.assign(x0.size(), 0.0);
    s.rng_seed = rng_seed;
    return s;
  }
};

// v <- (1 - beta) g~ + beta v. beta = 0 reduces to signSGD.
inline void worker_momentum_update(std::span<double> v, std::span<const double> g_tilde,
                                   double beta) {
  if (v.size() != g_tilde.size())
    throw std::invalid_argument("worker_momentum_update: dimension mismatch");
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (std::isnan(g_tilde[i]))
      throw std::invalid_argument("worker_momentum_update: NaN gradient at coordinate " +
                                  std::to_string(i));
    v[i] = (1.0 - beta) * g_tilde[i] + beta * v[i];
  }
}

// x <- x - eta (sign(V) + lambda x), the broadcast applied with weight decay
// inside the signed update.
inline void apply_vote(std::span<double> x, const SignVector& vote, double eta, double lambda) {
  if (x.size() != vote.dim) throw std::invalid_argument("apply_vote: dimension mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double s = vote.get(static_cast<std::uint32_t>(i)) ? 1.0 : -1.0;
    x[i] -= eta * (s + lambda * x[i]);
  }
}

// Separately coded single-node signSGD step, kept independent of the worker
// path so the two can be checked against each other.
inline void plain_signsgd_step(std::span<double> x, std::span<const double> g_tilde,
                               double eta) {
  if (x.size() != g_tilde.size())
    throw std::invalid_argument("plain_signsgd_step: dimension mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (std::isnan(g_tilde[i]))
      throw std::invalid_argument("plain_signsgd_step: NaN gradient");
    x[i] -= g_tilde[i] < 0.0 ? -eta : eta;
  }
}

// eta = sqrt((f0 - f*) / (||L||_1 K)), paired with n = 1.
inline double theorem1_eta(double f_gap, double l1, std::uint64_t horizon) {
  if (!(f_gap > 0.0) || !(l1 > 0.0) || horizon == 0)
    throw std::invalid_argument("theorem1_eta: inputs must be positive");
  return std::sqrt(f_gap / (l1 * static_cast<double>(horizon)));
}

// Same eta, paired with the growing batch n = K.
inline std::pair<double, std::uint32_t> theorem2_schedule(double f_gap, double l1,
                                                          std::uint32_t horizon) {
  return {theorem1_eta(f_gap, l1, horizon), horizon};
}

struct Schedule {
  enum class Kind : std::uint8_t { Constant, Theorem1, Theorem2 } kind = Kind::Constant;
  std::uint32_t horizon = 1;  // K
  double f_gap = 0.0;         // f0 - f*, required by the theorem schedules
  double l1 = 0.0;            // ||L||_1, required by the theorem schedules

  // Resolve (eta, batch_size), starting from the configured values for
  // kind = Constant.
  std::pair<double, std::uint32_t> resolve(double constant_eta,
                                           std::uint32_t constant_batch) const {
    switch (kind) {
      case Kind::Constant:
        return {constant_eta, constant_batch};
      case Kind::Theorem1:
        return {theorem1_eta(f_gap, l1, horizon), 1};
      case Kind::Theorem2:
        return theorem2_schedule(f_gap, l1, horizon);
    }
    return {constant_eta, constant_batch};
  }
};

}  // namespace signvote
