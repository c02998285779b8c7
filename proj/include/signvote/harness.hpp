#pragma once

#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <memory>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "signvote/config.hpp"
#include "signvote/qsgd.hpp"
#include "signvote/round.hpp"
#include "signvote/transport_sim.hpp"
#include "signvote/transport_tcp.hpp"

namespace signvote {

struct RunSummary {
  std::uint32_t rounds = 0;
  double alpha = 0.0;
  double eta = 0.0;
  std::uint32_t batch_size = 0;
  double f0 = 0.0;
  double final_f = 0.0;
  double mean_mixed_norm = 0.0;
  double mean_grad_l1 = 0.0;
  std::uint64_t total_bits = 0;
  // RHS of the matching rate when a theorem schedule is active, else NaN.
  double theorem_rhs = std::numeric_limits<double>::quiet_NaN();
  bool aborted = false;
  std::string abort_reason;
};

struct RunResult {
  std::vector<RoundRecord> records;
  RunSummary summary;
  std::vector<double> final_x;

  int status() const { return summary.aborted ? 1 : 0; }
};

inline std::unique_ptr<Objective> make_objective(const ExperimentConfig& cfg) {
  switch (cfg.objective) {
    case ExperimentConfig::ObjectiveKind::Quadratic:
      return std::make_unique<QuadraticObjective>(cfg.dim, cfg.noise);
    case ExperimentConfig::ObjectiveKind::Logistic:
      return std::make_unique<LogisticObjective>(
          LogisticDataset::generate(cfg.data_seed, cfg.examples, cfg.dim, cfg.flip_rate));
  }
  throw ConfigError("make_objective: unreachable");
}

namespace detail {

struct ResolvedRun {
  std::unique_ptr<Objective> objective;
  ObjectiveSpec spec;
  std::vector<double> x0;
  OptimizerConfig optimizer;
  std::vector<double> sigma_eff;  // per-coordinate noise of the batch mean
};

inline ResolvedRun resolve(const ExperimentConfig& cfg) {
  cfg.validate();
  ResolvedRun run;
  run.objective = make_objective(cfg);
  run.x0 = cfg.make_x0();
  run.spec = run.objective->describe(run.x0);
  run.optimizer = cfg.optimizer;
  if (cfg.schedule != Schedule::Kind::Constant) {
    Schedule sched{cfg.schedule, cfg.rounds, run.spec.f_gap(), run.spec.smoothness_l1()};
    const auto [eta, batch] = sched.resolve(cfg.optimizer.eta, cfg.optimizer.batch_size);
    run.optimizer.eta = eta;
    run.optimizer.batch_size = batch;
  }
  run.sigma_eff = run.spec.noise_sigma;
  const double scale = 1.0 / std::sqrt(static_cast<double>(run.optimizer.batch_size));
  for (double& s : run.sigma_eff) s *= scale;
  return run;
}

inline std::vector<Worker> build_workers(const ExperimentConfig& cfg, const ResolvedRun& run) {
  std::vector<Worker> workers;
  workers.reserve(cfg.workers);
  for (std::uint32_t id = 0; id < cfg.workers; ++id)
    workers.emplace_back(id, *run.objective, run.optimizer, cfg.adversary_for(id), run.x0,
                         cfg.seed);
  return workers;
}

inline void finish_summary(const ExperimentConfig& cfg, const ResolvedRun& run,
                           RunResult& result) {
  RunSummary& s = result.summary;
  s.rounds = static_cast<std::uint32_t>(result.records.size());
  s.alpha = cfg.alpha();
  s.eta = run.optimizer.eta;
  s.batch_size = run.optimizer.batch_size;
  s.f0 = run.spec.f0;
  if (!result.final_x.empty()) s.final_f = run.objective->value(result.final_x);
  for (const RoundRecord& r : result.records) {
    s.mean_mixed_norm += r.mixed_norm;
    s.mean_grad_l1 += r.grad_l1;
    s.total_bits += r.bits;
  }
  if (s.rounds > 0) {
    s.mean_mixed_norm /= s.rounds;
    s.mean_grad_l1 /= s.rounds;
  }
  if (cfg.schedule == Schedule::Kind::Theorem1) {
    s.theorem_rhs = bounds::theorem1_rhs(run.spec.smoothness_l1(), run.spec.f_gap(),
                                         static_cast<double>(cfg.rounds));
  } else if (cfg.schedule == Schedule::Kind::Theorem2) {
    const double n_calls = static_cast<double>(cfg.rounds) * static_cast<double>(cfg.rounds);
    s.theorem_rhs = bounds::theorem2_rhs(run.spec.smoothness_l1(), run.spec.f_gap(),
                                         run.spec.sigma_l1(), static_cast<int>(cfg.workers),
                                         cfg.alpha(), n_calls);
  }
}

inline RunResult run_sim(const ExperimentConfig& cfg, const ResolvedRun& run) {
  std::vector<Worker> workers = build_workers(cfg, run);
  VoteCollector collector(cfg.workers, cfg.dim);
  SimOptions options;
  options.scheduler_seed = cfg.seed;
  options.record_frames = false;
  RunResult result;
  const SimResult sim = sim_network(workers, collector, *run.objective, run.sigma_eff,
                                    cfg.rounds, options);
  result.records = std::move(sim.records);
  result.summary.aborted = sim.aborted;
  if (sim.aborted) result.summary.abort_reason = "transport abort";
  result.final_x = workers[0].x();
  return result;
}

// TCP mode: the harness binds the server, forks one worker process per
// worker id, and mirrors the parameter vector from the broadcast stream to
// produce the same telemetry as the simulator.
inline RunResult run_tcp(const ExperimentConfig& cfg, const ResolvedRun& run) {
  TcpServerConfig server_cfg;
  server_cfg.host = cfg.host;
  server_cfg.port = cfg.port;
  server_cfg.workers = cfg.workers;
  server_cfg.dim = cfg.dim;
  server_cfg.rounds = cfg.rounds;
  server_cfg.round_timeout_ms = cfg.timeout_ms;
  server_cfg.accept_timeout_ms = cfg.timeout_ms;
  TcpServer server(server_cfg);

  std::vector<pid_t> children;
  children.reserve(cfg.workers);
  for (std::uint32_t id = 0; id < cfg.workers; ++id) {
    const pid_t pid = ::fork();
    if (pid < 0) throw TransportError("fork failed");
    if (pid == 0) {
      Worker worker(id, *run.objective, run.optimizer, cfg.adversary_for(id), run.x0, cfg.seed);
      const TcpWorkerResult wr =
          run_tcp_worker(cfg.host, server.port(), worker, cfg.rounds, cfg.timeout_ms);
      std::_Exit(wr.status());
    }
    children.push_back(pid);
  }

  RunResult result;
  std::vector<double> mirror = run.x0;
  const TcpServerStats stats = server.run([&](std::uint32_t round, const SignVector& broadcast) {
    result.records.push_back(make_round_record(round, mirror, broadcast, *run.objective,
                                               run.sigma_eff, cfg.workers));
    apply_vote(mirror, broadcast, run.optimizer.eta, run.optimizer.lambda);
  });

  bool child_failed = false;
  for (pid_t pid : children) {
    int wstatus = 0;
    ::waitpid(pid, &wstatus, 0);
    if (!WIFEXITED(wstatus) || WEXITSTATUS(wstatus) != 0) child_failed = true;
  }
  result.summary.aborted = stats.aborted || child_failed;
  if (stats.aborted) result.summary.abort_reason = stats.abort_reason;
  else if (child_failed) result.summary.abort_reason = "worker process failed";
  result.final_x = std::move(mirror);
  return result;
}

}  // namespace detail

// Run a full experiment end to end and return per-round telemetry plus a
// summary with the applicable theorem right-hand side for side-by-side
// reporting.
inline RunResult run_experiment(const ExperimentConfig& cfg) {
  const detail::ResolvedRun run = detail::resolve(cfg);
  RunResult result = cfg.transport == ExperimentConfig::Transport::Tcp
                         ? detail::run_tcp(cfg, run)
                         : detail::run_sim(cfg, run);
  for (const RoundRecord& r : result.records)
    if (!std::isfinite(r.f)) {
      result.summary.aborted = true;
      result.summary.abort_reason = "objective is not finite at round " + std::to_string(r.round);
      break;
    }
  detail::finish_summary(cfg, run, result);
  return result;
}

// ---- output ----------------------------------------------------------

inline constexpr const char* kCsvHeader = "round,f,grad_l1,mixed_norm,high_snr,disagreement,bits";

namespace detail {
inline std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace detail

inline void emit_csv(std::span<const RoundRecord> records, std::ostream& out) {
  out << kCsvHeader << '\n';
  for (const RoundRecord& r : records)
    out << r.round << ',' << detail::fmt_double(r.f) << ',' << detail::fmt_double(r.grad_l1)
        << ',' << detail::fmt_double(r.mixed_norm) << ',' << r.high_snr_count << ','
        << r.disagreement << ',' << r.bits << '\n';
}

inline void emit_csv(std::span<const RoundRecord> records, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("emit_csv: cannot open " + path);
  emit_csv(records, out);
  if (!out) throw std::runtime_error("emit_csv: write failed for " + path);
}

inline void to_json(nlohmann::json& j, const RoundRecord& r) {
  j = nlohmann::json{{"round", r.round},
                     {"f", r.f},
                     {"grad_l1", r.grad_l1},
                     {"mixed_norm", r.mixed_norm},
                     {"high_snr", r.high_snr_count},
                     {"disagreement", r.disagreement},
                     {"bits", r.bits}};
}

inline void from_json(const nlohmann::json& j, RoundRecord& r) {
  j.at("round").get_to(r.round);
  j.at("f").get_to(r.f);
  j.at("grad_l1").get_to(r.grad_l1);
  j.at("mixed_norm").get_to(r.mixed_norm);
  j.at("high_snr").get_to(r.high_snr_count);
  j.at("disagreement").get_to(r.disagreement);
  j.at("bits").get_to(r.bits);
}

inline void to_json(nlohmann::json& j, const RunSummary& s) {
  j = nlohmann::json{{"rounds", s.rounds},
                     {"alpha", s.alpha},
                     {"eta", s.eta},
                     {"batch_size", s.batch_size},
                     {"f0", s.f0},
                     {"final_f", s.final_f},
                     {"mean_mixed_norm", s.mean_mixed_norm},
                     {"mean_grad_l1", s.mean_grad_l1},
                     {"total_bits", s.total_bits},
                     {"aborted", s.aborted}};
  if (!std::isnan(s.theorem_rhs)) j["theorem_rhs"] = s.theorem_rhs;
  if (s.aborted) j["abort_reason"] = s.abort_reason;
}

inline void emit_json(std::span<const RoundRecord> records, const RunSummary& summary,
                      const std::string& path) {
  nlohmann::json j;
  j["records"] = records;
  j["summary"] = summary;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("emit_json: cannot open " + path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("emit_json: write failed for " + path);
}

// ---- baseline contrast -------------------------------------------------

// What happens to mean-aggregated SGD under the same adversary class: one
// rescale adversary can blow up the averaged gradient, while the sign path
// never sees more than +/-1 per coordinate. Returns final f.
inline double mean_sgd_contrast(std::uint32_t dim, std::uint32_t workers, double rescale_factor,
                                double eta, std::uint32_t rounds, std::uint64_t seed) {
  QuadraticObjective objective(dim, NoiseModel::gaussian(1.0));
  std::vector<double> x(dim, 1.0);
  std::vector<CounterRng> rngs;
  for (std::uint32_t m = 0; m < workers; ++m) rngs.push_back(CounterRng::for_worker(seed, m));
  std::vector<double> g(dim), mean(dim);
  for (std::uint32_t r = 0; r < rounds; ++r) {
    std::fill(mean.begin(), mean.end(), 0.0);
    for (std::uint32_t m = 0; m < workers; ++m) {
      objective.sample_gradient(x, rngs[m], g);
      const double scale = (m == workers - 1 ? rescale_factor : 1.0) / workers;
      for (std::uint32_t i = 0; i < dim; ++i) mean[i] += scale * g[i];
    }
    for (std::uint32_t i = 0; i < dim; ++i) x[i] -= eta * mean[i];
  }
  return objective.value(x);
}

}  // namespace signvote
