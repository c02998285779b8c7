#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "signvote/adversary.hpp"
#include "signvote/bounds.hpp"
#include "signvote/optimizer.hpp"
#include "signvote/oracles.hpp"
#include "signvote/rng.hpp"
#include "signvote/sign_codec.hpp"
#include "signvote/vote.hpp"

namespace signvote {

// Per-iteration telemetry. f, gradient norms and SNR stats are evaluated at
// the pre-update iterate; bits is the on-the-wire payload total 2 M d.
struct RoundRecord {
  std::uint32_t round = 0;
  double f = 0.0;
  double grad_l1 = 0.0;
  double mixed_norm = 0.0;
  std::uint32_t high_snr_count = 0;
  std::uint32_t disagreement = 0;  // coordinates where the broadcast opposes sign(g)
  std::uint64_t bits = 0;

  bool operator==(const RoundRecord&) const = default;
};

// One vote-casting participant: local momentum, local rng stream, optional
// adversary wrapper. Parameters are replicated; nothing here is shared
// between workers, so rounds may execute them in any order.
class Worker {
 public:
  Worker(std::uint32_t id, const Objective& objective, const OptimizerConfig& config,
         const AdversarySpec& adversary, std::span<const double> x0, std::uint64_t base_seed)
      : id_(id),
        objective_(&objective),
        config_(config),
        adversary_(adversary),
        state_(WorkerState::init(x0, base_seed)),
        rng_(CounterRng::for_worker(base_seed, id)),
        g_batch_(x0.size()),
        draw_(x0.size()) {
    config_.validate();
    if (objective.dim() != x0.size())
      throw std::invalid_argument("Worker: x0 does not match objective dim");
  }

  // Mini-batch gradient, adversary corruption, momentum update, sign.
  SignVector compute_vote(std::uint32_t round) {
    const std::size_t d = state_.x.size();
    std::fill(g_batch_.begin(), g_batch_.end(), 0.0);
    for (std::uint32_t b = 0; b < config_.batch_size; ++b) {
      objective_->sample_gradient(state_.x, rng_, draw_);
      for (std::size_t i = 0; i < d; ++i) g_batch_[i] += draw_[i];
    }
    const double inv_n = 1.0 / static_cast<double>(config_.batch_size);
    for (std::size_t i = 0; i < d; ++i) g_batch_[i] *= inv_n;

    if (adversary_.kind != AdversaryKind::None) {
      const std::vector<double> mult =
          adversary_multiplier(adversary_, round, static_cast<std::uint32_t>(d));
      corrupt_in_place(g_batch_, mult);
    }

    worker_momentum_update(state_.v, g_batch_, config_.beta);
    return pack(take_sign(state_.v));
  }

  void apply_broadcast(const SignVector& vote) {
    apply_vote(state_.x, vote, config_.eta, config_.lambda);
  }

  std::uint32_t id() const { return id_; }
  const std::vector<double>& x() const { return state_.x; }
  const std::vector<double>& v() const { return state_.v; }
  const OptimizerConfig& config() const { return config_; }
  const AdversarySpec& adversary() const { return adversary_; }

 private:
  std::uint32_t id_;
  const Objective* objective_;
  OptimizerConfig config_;
  AdversarySpec adversary_;
  WorkerState state_;
  CounterRng rng_;
  std::vector<double> g_batch_;
  std::vector<double> draw_;
};

// Telemetry for the iterate x (pre-update) against the broadcast decision.
// sigma_eff is the per-coordinate noise scale of the batch-mean gradient.
inline RoundRecord make_round_record(std::uint32_t round, std::span<const double> x,
                                     const SignVector& broadcast, const Objective& objective,
                                     std::span<const double> sigma_eff, std::uint32_t workers) {
  RoundRecord rec;
  rec.round = round;
  rec.f = objective.value(x);
  std::vector<double> g(x.size());
  objective.gradient(x, g);
  for (double v : g) rec.grad_l1 += std::abs(v);
  const SnrProfile prof = snr_profile(g, sigma_eff);
  rec.high_snr_count = prof.high_count;
  rec.mixed_norm = bounds::mixed_norm(g, sigma_eff);
  for (std::uint32_t i = 0; i < broadcast.dim; ++i) {
    const double s = broadcast.get(i) ? 1.0 : -1.0;
    const double true_sign = g[i] < 0.0 ? -1.0 : 1.0;
    if (s != true_sign) ++rec.disagreement;
  }
  rec.bits = 2ULL * workers * broadcast.dim;
  return rec;
}

// One bulk-synchronous iteration, in process: every worker votes, the
// collector broadcasts once the last vote lands, every worker applies the
// identical update. `order` permutes the submission sequence; the outcome is
// order-invariant.
inline RoundRecord run_round(std::span<Worker> workers, VoteCollector& collector,
                             const Objective& objective, std::span<const double> sigma_eff,
                             std::span<const std::uint32_t> order = {}) {
  if (workers.empty()) throw std::invalid_argument("run_round: no workers");
  const std::uint32_t round = collector.round();
  std::vector<std::uint32_t> natural;
  if (order.empty()) {
    natural.resize(workers.size());
    std::iota(natural.begin(), natural.end(), 0u);
    order = natural;
  }

  std::vector<SignVector> votes(workers.size());
  for (std::uint32_t w : order) votes[w] = workers[w].compute_vote(round);

  SignVector broadcast;
  bool ready = false;
  for (std::uint32_t w : order) {
    if (auto b = collector.submit(workers[w].id(), round, votes[w])) {
      broadcast = std::move(*b);
      ready = true;
    }
  }
  if (!ready) throw ProtocolError("run_round: collector did not broadcast at round " +
                                  std::to_string(round));

  RoundRecord rec = make_round_record(round, workers[0].x(), broadcast, objective, sigma_eff,
                                      static_cast<std::uint32_t>(workers.size()));
  for (Worker& w : workers) w.apply_broadcast(broadcast);
  return rec;
}

}  // namespace signvote
