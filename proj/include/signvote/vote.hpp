#pragma once

#include <cmath>
#include <cstdint>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "signvote/sign_codec.hpp"

namespace signvote {

struct ProtocolError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Parameter-server vote state for bulk-synchronous rounds. Keeps a running
// integer tally plus a worker-id bitmap, so memory is O(d + M) no matter how
// many votes pass through. submit() is internally serialized; the broadcast
// decision happens atomically with the M-th insertion.
//
// Late or stale votes are protocol violations, never merged into another
// round.
class VoteCollector {
 public:
  VoteCollector(std::uint32_t expected_workers, std::uint32_t dim)
      : workers_(expected_workers), dim_(dim), seen_(expected_workers, 0) {
    if (expected_workers == 0) throw std::invalid_argument("VoteCollector: M >= 1 required");
    if (dim == 0) throw std::invalid_argument("VoteCollector: dim >= 1 required");
    tally_.dim = dim;
    tally_.counts.assign(dim, 0);
  }

  // Stores one vote. Returns the majority-vote broadcast when this was the
  // M-th (and last) submission of the round, otherwise nullopt.
  std::optional<SignVector> submit(std::uint32_t worker_id, std::uint32_t round,
                                   const SignVector& sv) {
    std::lock_guard<std::mutex> lock(mu_);
    if (worker_id >= workers_)
      throw ProtocolError("submit: unknown worker id " + std::to_string(worker_id));
    if (round != round_)
      throw ProtocolError("submit: vote for round " + std::to_string(round) +
                          (round < round_ ? " is stale" : " is from the future") +
                          " (server at round " + std::to_string(round_) + ")");
    if (seen_[worker_id])
      throw ProtocolError("submit: duplicate vote from worker " + std::to_string(worker_id) +
                          " in round " + std::to_string(round));
    if (sv.dim != dim_)
      throw ProtocolError("submit: dim " + std::to_string(sv.dim) + " != expected " +
                          std::to_string(dim_));
    validate(sv);

    accumulate_vote(tally_, sv);
    seen_[worker_id] = 1;
    if (++received_ < workers_) return std::nullopt;

    SignVector broadcast = tally_sign(tally_);
    std::fill(tally_.counts.begin(), tally_.counts.end(), 0);
    std::fill(seen_.begin(), seen_.end(), 0);
    received_ = 0;
    ++round_;
    return broadcast;
  }

  std::uint32_t round() const {
    std::lock_guard<std::mutex> lock(mu_);
    return round_;
  }
  std::uint32_t expected_workers() const { return workers_; }
  std::uint32_t dim() const { return dim_; }
  std::uint32_t pending() const {
    std::lock_guard<std::mutex> lock(mu_);
    return received_;
  }

 private:
  std::uint32_t workers_;
  std::uint32_t dim_;
  std::uint32_t round_ = 0;
  std::uint32_t received_ = 0;
  VoteTally tally_;
  std::vector<std::uint8_t> seen_;
  mutable std::mutex mu_;
};

namespace detail {
// Convolve `dist` with n iid Bernoulli(p) contributions.
inline void fold_binomial(std::vector<double>& dist, int n, double p) {
  for (int t = 0; t < n; ++t) {
    std::vector<double> next(dist.size() + 1, 0.0);
    for (std::size_t k = 0; k < dist.size(); ++k) {
      next[k] += dist[k] * (1.0 - p);
      next[k + 1] += dist[k] * p;
    }
    dist = std::move(next);
  }
}
}  // namespace detail

// Exact failure probability of the coordinate-wise majority vote when each of
// the (1-alpha)M honest workers is correct with probability p_honest and each
// of the alpha*M adversarial workers is correct with probability p_adversary.
// Z = G + B with G ~ Binomial((1-alpha)M, p_honest) and
// B ~ Binomial(alpha M, p_adversary); failure is the event Z <= M/2, so a tie
// under even M counts as failure.
inline double vote_outcome_distribution(int workers, double alpha, double p_honest,
                                        double p_adversary) {
  if (workers < 1) throw std::invalid_argument("vote_outcome_distribution: M >= 1 required");
  if (!(p_honest >= 0.0 && p_honest <= 1.0) || !(p_adversary >= 0.0 && p_adversary <= 1.0))
    throw std::invalid_argument("vote_outcome_distribution: probabilities must be in [0,1]");
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw std::invalid_argument("vote_outcome_distribution: alpha must be in [0,1]");
  const double exact_bad = alpha * workers;
  const int bad = static_cast<int>(std::llround(exact_bad));
  if (std::abs(exact_bad - bad) > 1e-9)
    throw std::invalid_argument("vote_outcome_distribution: alpha*M must be integral, got " +
                                std::to_string(exact_bad));
  const int good = workers - bad;

  std::vector<double> dist{1.0};
  detail::fold_binomial(dist, good, p_honest);
  detail::fold_binomial(dist, bad, p_adversary);

  // Z <= M/2, inclusive: the integer threshold is floor(M/2) for both
  // parities.
  const int threshold = workers / 2;
  double failure = 0.0;
  for (int k = 0; k <= threshold; ++k) failure += dist[static_cast<std::size_t>(k)];
  return failure;
}

// The worst-case form: adversaries invert, so they are correct with
// probability 1 - p.
inline double vote_outcome_distribution(int workers, double alpha, double p) {
  return vote_outcome_distribution(workers, alpha, p, 1.0 - p);
}

}  // namespace signvote
