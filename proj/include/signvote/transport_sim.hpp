#pragma once

#include <cstdint>
#include <numeric>
#include <optional>
#include <vector>

#include "signvote/frame.hpp"
#include "signvote/round.hpp"
#include "signvote/vote.hpp"

namespace signvote {

// In-process stand-in for the TCP deployment. Single-threaded deterministic
// event loop: the scheduler seed only permutes the per-round submission
// order, which the vote outcome is invariant to, so any seed yields the same
// parameter trajectory as the TCP path.
struct SimOptions {
  std::uint64_t scheduler_seed = 0;
  bool record_frames = true;
  bool record_rounds = true;
  // Lose worker `drop_worker`'s vote at round `drop_round`; the server then
  // aborts the run at that round.
  std::optional<std::pair<std::uint32_t, std::uint32_t>> drop;  // (round, worker)
};

struct SimResult {
  std::vector<Frame> trace;
  std::vector<RoundRecord> records;
  bool aborted = false;
  std::uint32_t rounds_completed = 0;

  int status() const { return aborted ? 1 : 0; }
};

inline SimResult sim_network(std::span<Worker> workers, VoteCollector& collector,
                             const Objective& objective, std::span<const double> sigma_eff,
                             std::uint32_t rounds, const SimOptions& options = {}) {
  SimResult result;
  const std::uint32_t workers_n = static_cast<std::uint32_t>(workers.size());
  CounterRng scheduler = CounterRng::derive(options.scheduler_seed, 0x5EDC0DEULL);

  if (options.record_frames)
    for (const Worker& w : workers)
      result.trace.push_back(Frame::hello(static_cast<std::uint16_t>(w.id()), collector.dim()));

  std::vector<std::uint32_t> order(workers_n);
  std::iota(order.begin(), order.end(), 0u);

  for (std::uint32_t r = 0; r < rounds; ++r) {
    // Fisher-Yates with the scheduler stream; deterministic per (seed, round).
    for (std::uint32_t i = workers_n - 1; i > 0; --i) {
      const std::uint32_t j = static_cast<std::uint32_t>(scheduler.next_u64() % (i + 1));
      std::swap(order[i], order[j]);
    }

    std::optional<SignVector> broadcast;
    bool dropped = false;
    for (std::uint32_t w : order) {
      SignVector sv = workers[w].compute_vote(r);
      if (options.drop && options.drop->first == r && options.drop->second == w) {
        dropped = true;  // vote lost in transit; server never sees it
        continue;
      }
      if (options.record_frames)
        result.trace.push_back(Frame::vote(static_cast<std::uint16_t>(workers[w].id()), r, sv));
      if (auto b = collector.submit(workers[w].id(), r, sv)) broadcast = std::move(*b);
    }

    if (dropped || !broadcast) {
      for (std::uint32_t i = 0; i < workers_n && options.record_frames; ++i)
        result.trace.push_back(Frame::abort_frame(r));
      result.aborted = true;
      return result;
    }

    if (options.record_frames)
      for (std::uint32_t i = 0; i < workers_n; ++i)
        result.trace.push_back(Frame::broadcast(r, *broadcast));
    if (options.record_rounds)
      result.records.push_back(
          make_round_record(r, workers[0].x(), *broadcast, objective, sigma_eff, workers_n));
    for (Worker& w : workers) w.apply_broadcast(*broadcast);
    ++result.rounds_completed;
  }
  return result;
}

}  // namespace signvote
