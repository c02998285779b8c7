#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "signvote/bounds.hpp"
#include "signvote/harness.hpp"
#include "signvote/oracles.hpp"
#include "signvote/rng.hpp"
#include "signvote/vote.hpp"

namespace signvote::verify {

// Standard normal CDF.
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

struct VerifyEntry {
  std::string name;
  double observed = 0.0;
  double reference = 0.0;       // the bound or expected value compared against
  bool expected_violation = false;  // entry passes when observed BREAKS the bound
  bool pass = false;
  std::string note;
};

struct VerifyReport {
  std::string suite;
  std::vector<VerifyEntry> entries;

  bool ok() const {
    for (const auto& e : entries)
      if (!e.pass) return false;
    return true;
  }
};

inline void to_json(nlohmann::json& j, const VerifyEntry& e) {
  j = nlohmann::json{{"name", e.name},
                     {"observed", e.observed},
                     {"reference", e.reference},
                     {"expected_violation", e.expected_violation},
                     {"pass", e.pass}};
  if (!e.note.empty()) j["note"] = e.note;
}

inline void to_json(nlohmann::json& j, const VerifyReport& r) {
  j = nlohmann::json{{"suite", r.suite}, {"ok", r.ok()}, {"entries", r.entries}};
}

inline const std::vector<double>& lemma1_snr_grid() {
  static const std::vector<double> grid{0.1, 0.5, 1.0, kCriticalSnr, 2.0, 5.0};
  return grid;
}

// Empirical flip rate of sign(S + noise) for a unit-variance noise model.
inline double empirical_flip_rate(const NoiseModel& noise, double snr, std::uint64_t draws,
                                  CounterRng& rng) {
  std::uint64_t flips = 0;
  for (std::uint64_t i = 0; i < draws; ++i)
    if (snr + noise.sample(rng) < 0.0) ++flips;
  return static_cast<double>(flips) / static_cast<double>(draws);
}

// Monte Carlo check of the sign-bit failure bound for the unimodal symmetric
// noise families, plus the bimodal counterexample that is supposed to break
// it.
inline VerifyReport verify_lemma1(std::uint64_t draws = 1000000, std::uint64_t seed = 2024,
                                  std::uint64_t bimodal_draws = 100000) {
  VerifyReport report{"lemma1", {}};
  CounterRng rng = CounterRng::derive(seed, 0x1E77A1ULL);

  for (const NoiseModel& noise : {NoiseModel::gaussian(1.0), NoiseModel::uniform(1.0)}) {
    const char* kind = noise.kind == NoiseModel::Kind::Gaussian ? "gaussian" : "uniform";
    for (double s : lemma1_snr_grid()) {
      const double emp = empirical_flip_rate(noise, s, draws, rng);
      const double bound = bounds::lemma1_bound(s);
      const double se = std::sqrt(emp * (1.0 - emp) / static_cast<double>(draws));
      VerifyEntry e;
      e.name = std::string("lemma1/") + kind + " S=" + std::to_string(s);
      e.observed = emp;
      e.reference = bound;
      e.pass = emp <= bound + 4.0 * se;
      report.entries.push_back(e);

      if (noise.kind == NoiseModel::Kind::Gaussian) {
        const double phi = normal_cdf(-s);
        const double se_phi = std::sqrt(phi * (1.0 - phi) / static_cast<double>(draws));
        VerifyEntry g;
        g.name = std::string("lemma1/gaussian-exact S=") + std::to_string(s);
        g.observed = emp;
        g.reference = phi;
        g.pass = std::abs(emp - phi) <= 4.0 * se_phi;
        g.note = "empirical flip rate should track Phi(-S)";
        report.entries.push_back(g);
      }
    }
  }

  // Bimodal counterexample: flip rate 0.9 +- 0.004 and a sign-flip-bound violation.
  {
    std::uint64_t flips = 0;
    for (std::uint64_t i = 0; i < bimodal_draws; ++i)
      if (bimodal_oracle(rng) < 0.0) ++flips;
    const double emp = static_cast<double>(flips) / static_cast<double>(bimodal_draws);
    VerifyEntry rate;
    rate.name = "bimodal/flip-rate";
    rate.observed = emp;
    rate.reference = kBimodalFlipProbability;
    rate.pass = std::abs(emp - kBimodalFlipProbability) <= 0.004;
    report.entries.push_back(rate);

    const double s_bimodal = kBimodalTrueGradient / NoiseModel::kBimodalSigma;
    VerifyEntry viol;
    viol.name = "bimodal/violates-lemma1";
    viol.observed = emp;
    viol.reference = bounds::lemma1_bound(s_bimodal);
    viol.expected_violation = true;
    viol.pass = emp > viol.reference;
    viol.note = "the unimodal-symmetric noise condition is necessary: bimodal noise breaks the bound";
    report.entries.push_back(viol);
  }

  // 1-D signSGD against the bimodal oracle walks uphill most of the time.
  {
    const std::uint32_t steps = 10000;
    std::uint32_t wrong = 0;
    double x = 0.0;
    const double eta = 0.01;
    for (std::uint32_t k = 0; k < steps; ++k) {
      const double draw = bimodal_oracle(rng);
      const double step_sign = draw < 0.0 ? -1.0 : 1.0;
      x -= eta * step_sign;
      if (step_sign < 0.0) ++wrong;  // true gradient is +4.1; a -1 vote moves x up
    }
    VerifyEntry e;
    e.name = "bimodal/wrong-direction";
    e.observed = static_cast<double>(wrong) / steps;
    e.reference = 0.85;
    e.pass = e.observed >= 0.85 && x > 0.0;
    e.note = "fraction of steps moving against the true gradient";
    report.entries.push_back(e);
  }
  return report;
}

struct StarGridPoint {
  int workers;
  double alpha;
  double snr;
};

inline std::vector<StarGridPoint> star_grid() {
  std::vector<StarGridPoint> grid;
  for (int m : {1, 3, 9, 27})
    for (double alpha : {0.0, 1.0 / 9.0, 1.0 / 3.0}) {
      const double bad = alpha * m;
      if (std::abs(bad - std::llround(bad)) > 1e-9) continue;  // alpha*M must be integral
      for (double s : {0.5, 1.0, 2.0}) grid.push_back({m, alpha, s});
    }
  return grid;
}

// Exact-vs-closed-form soundness of the vote failure bound: the binomial
// convolution with p = 1 - lemma1_bound(S) and inverting adversaries must sit
// below 1/((1-2a) sqrt(M) S) at every grid point, with no tolerance.
inline VerifyReport verify_star() {
  VerifyReport report{"star", {}};
  for (const StarGridPoint& pt : star_grid()) {
    const double p = 1.0 - bounds::lemma1_bound(pt.snr);
    VerifyEntry e;
    e.name = "star/M=" + std::to_string(pt.workers) + " alpha=" + std::to_string(pt.alpha) +
             " S=" + std::to_string(pt.snr);
    e.observed = vote_outcome_distribution(pt.workers, pt.alpha, p);
    e.reference = bounds::vote_failure_bound(pt.workers, pt.alpha, pt.snr);
    e.pass = e.observed <= e.reference;
    if (bounds::bound_vacuous(e.reference)) e.note = "bound vacuous (>= 1)";
    report.entries.push_back(e);
  }

  // The inequality chain 1/(4 eps^2) - 1 < 4/S^2 on a log grid.
  {
    bool all = true;
    for (int i = 0; i <= 120; ++i) {
      const double s = std::pow(10.0, -3.0 + i * 0.05);
      if (!bounds::epsilon_chain_holds(s)) all = false;
    }
    VerifyEntry e;
    e.name = "star/epsilon-chain";
    e.observed = all ? 1.0 : 0.0;
    e.reference = 1.0;
    e.pass = all;
    e.note = "1/(4 eps^2) - 1 < 4/S^2 over S in [1e-3, 1e3]";
    report.entries.push_back(e);
  }
  return report;
}

// Seed-averaged mixed-norm trajectory of single-worker signSGD under the
// theorem-1 schedule on the noisy quadratic, against the closed-form rate.
inline VerifyReport verify_theorem1(std::uint32_t dim = 100, std::uint32_t rounds = 10000,
                                    std::uint32_t seeds = 30, double sigma = 1.0,
                                    std::uint64_t seed0 = 100) {
  VerifyReport report{"theorem1", {}};
  ExperimentConfig cfg;
  cfg.objective = ExperimentConfig::ObjectiveKind::Quadratic;
  cfg.dim = dim;
  cfg.noise = NoiseModel::gaussian(sigma);
  cfg.workers = 1;
  cfg.schedule = Schedule::Kind::Theorem1;
  cfg.rounds = rounds;
  cfg.transport = ExperimentConfig::Transport::Sim;
  cfg.optimizer = OptimizerConfig{1.0, 0.0, 0.0, 1};  // eta replaced by the schedule

  double mean_lhs = 0.0;
  double rhs = 0.0;
  for (std::uint32_t s = 0; s < seeds; ++s) {
    cfg.seed = seed0 + s;
    const RunResult run = run_experiment(cfg);
    mean_lhs += run.summary.mean_mixed_norm / seeds;
    rhs = run.summary.theorem_rhs;
  }
  VerifyEntry e;
  e.name = "theorem1/mixed-norm dim=" + std::to_string(dim) + " K=" + std::to_string(rounds);
  e.observed = mean_lhs;
  e.reference = rhs;
  e.pass = mean_lhs <= rhs;
  e.note = std::to_string(seeds) + "-seed average";
  report.entries.push_back(e);
  return report;
}

// Majority vote with inverting adversaries under the theorem-2 schedule
// (beta = lambda = 0, n = K): squared seed-averaged l1 gradient against the
// robustness rate, at desk scale.
inline VerifyReport verify_theorem2(std::uint32_t dim = 10, std::uint32_t workers = 9,
                                    std::uint32_t rounds = 30, std::uint32_t seeds = 10,
                                    std::uint64_t seed0 = 300) {
  VerifyReport report{"theorem2", {}};
  for (std::uint32_t bad : {0u, 3u}) {
    ExperimentConfig cfg;
    cfg.objective = ExperimentConfig::ObjectiveKind::Quadratic;
    cfg.dim = dim;
    cfg.noise = NoiseModel::gaussian(1.0);
    cfg.workers = workers;
    if (bad > 0) cfg.adversaries.push_back({bad, AdversarySpec::invert()});
    cfg.schedule = Schedule::Kind::Theorem2;
    cfg.rounds = rounds;
    cfg.transport = ExperimentConfig::Transport::Sim;
    cfg.optimizer = OptimizerConfig{1.0, 0.0, 0.0, 1};  // schedule sets eta and n = K

    double mean_l1 = 0.0;
    double rhs = 0.0;
    for (std::uint32_t s = 0; s < seeds; ++s) {
      cfg.seed = seed0 + s;
      const RunResult run = run_experiment(cfg);
      mean_l1 += run.summary.mean_grad_l1 / seeds;
      rhs = run.summary.theorem_rhs;
    }
    VerifyEntry e;
    e.name = "theorem2/alpha=" + std::to_string(cfg.alpha());
    e.observed = mean_l1 * mean_l1;
    e.reference = rhs;
    e.pass = e.observed <= rhs;
    e.note = "squared " + std::to_string(seeds) + "-seed average of mean ||g||_1";
    report.entries.push_back(e);
  }
  return report;
}

inline VerifyReport verify_bounds(const std::string& suite) {
  if (suite == "lemma1") return verify_lemma1();
  if (suite == "star") return verify_star();
  if (suite == "theorem1") return verify_theorem1();
  if (suite == "theorem2") return verify_theorem2();
  throw std::invalid_argument("verify_bounds: unknown suite '" + suite +
                              "' (expected lemma1|star|theorem1|theorem2)");
}

}  // namespace signvote::verify
