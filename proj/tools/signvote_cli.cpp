// Command-line driver: experiment runs, bound verification, bound/bit-cost
// tables, and the TCP server/worker roles.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "signvote/bounds.hpp"
#include "signvote/harness.hpp"
#include "signvote/qsgd.hpp"
#include "signvote/transport_tcp.hpp"
#include "signvote/verify.hpp"

namespace {

using namespace signvote;

std::vector<double> parse_grid(const std::string& text) {
  // "a:b:step" or a comma-separated list
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    double a = 0, b = 0, step = 0;
    if (std::sscanf(text.c_str(), "%lf:%lf:%lf", &a, &b, &step) != 3 || step <= 0)
      throw CLI::ValidationError("grid must be start:stop:step or a comma list");
    for (double v = a; v <= b + 1e-12; v += step) out.push_back(v);
  } else {
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  }
  return out;
}

std::vector<std::uint64_t> parse_int_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoull(item));
  return out;
}

std::ostream& open_out(std::ofstream& file, const std::string& path) {
  if (path.empty()) return std::cout;
  file.open(path, std::ios::binary);
  if (!file) throw CLI::ValidationError("cannot open output file " + path);
  return file;
}

ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  ExperimentConfig cfg =
      path.empty() ? ExperimentConfig{} : ExperimentConfig::parse_file(path);
  for (const std::string& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw CLI::ValidationError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return cfg;
}

int cmd_run(const std::string& config_path, std::vector<std::string> overrides,
            const std::string& seed, const std::string& transport, const std::string& csv_path,
            const std::string& json_path, bool quiet) {
  if (!seed.empty()) overrides.push_back("seed=" + seed);
  if (!transport.empty()) overrides.push_back("transport=" + transport);
  const ExperimentConfig cfg = load_config(config_path, overrides);
  const RunResult result = run_experiment(cfg);
  if (!csv_path.empty()) emit_csv(result.records, csv_path);
  if (!json_path.empty()) emit_json(result.records, result.summary, json_path);
  if (!quiet) {
    const RunSummary& s = result.summary;
    std::printf("rounds=%u alpha=%.6g eta=%.6g n=%u f0=%.6g final_f=%.6g\n", s.rounds, s.alpha,
                s.eta, s.batch_size, s.f0, s.final_f);
    std::printf("mean_mixed_norm=%.6g mean_grad_l1=%.6g total_bits=%llu\n", s.mean_mixed_norm,
                s.mean_grad_l1, static_cast<unsigned long long>(s.total_bits));
    if (!std::isnan(s.theorem_rhs)) std::printf("theorem_rhs=%.6g\n", s.theorem_rhs);
    if (s.aborted) std::printf("ABORT: %s\n", s.abort_reason.c_str());
  }
  return result.status();
}

int cmd_verify(const std::string& suite, const std::string& json_path) {
  const verify::VerifyReport report = verify::verify_bounds(suite);
  for (const auto& e : report.entries)
    std::printf("[%s] %s observed=%.6g reference=%.6g%s\n", e.pass ? "PASS" : "FAIL",
                e.name.c_str(), e.observed, e.reference,
                e.expected_violation ? " (expected violation)" : "");
  if (!json_path.empty()) {
    nlohmann::json j;
    verify::to_json(j, report);
    std::ofstream out(json_path, std::ios::binary);
    out << j.dump(2) << '\n';
  }
  std::printf("suite %s: %s\n", report.suite.c_str(), report.ok() ? "ok" : "FAILED");
  return report.ok() ? 0 : 1;
}

int cmd_bounds(const std::string& bound, const std::string& grid_text,
               const std::string& workers_text, const std::string& alphas_text, double l1,
               double f_gap, double sigma_l1, const std::string& out_path) {
  std::ofstream file;
  std::ostream& out = open_out(file, out_path);
  const std::vector<double> grid = parse_grid(grid_text);

  if (bound == "lemma1") {
    out << "snr,bound\n";
    for (double s : grid) out << s << ',' << bounds::lemma1_bound(s) << '\n';
  } else if (bound == "gauss_tail") {
    out << "k_over_tau,bound\n";
    for (double r : grid) out << r << ',' << bounds::gauss_tail(r, 1.0) << '\n';
  } else if (bound == "cantelli") {
    out << "lambda_over_sigma,bound\n";
    for (double r : grid) out << r << ',' << bounds::cantelli(r, 1.0) << '\n';
  } else if (bound == "epsilon") {
    out << "snr,epsilon_lower_bound\n";
    for (double s : grid) out << s << ',' << bounds::epsilon_lower_bound(s) << '\n';
  } else if (bound == "star") {
    out << "workers,alpha,snr,exact_failure,bound,vacuous\n";
    for (std::uint64_t m : parse_int_list(workers_text))
      for (double alpha : parse_grid(alphas_text)) {
        const double bad = alpha * static_cast<double>(m);
        if (std::abs(bad - std::llround(bad)) > 1e-9) continue;
        for (double s : grid) {
          const double p = 1.0 - bounds::lemma1_bound(s);
          const double exact = vote_outcome_distribution(static_cast<int>(m), alpha, p);
          const double star = bounds::vote_failure_bound(static_cast<int>(m), alpha, s);
          out << m << ',' << alpha << ',' << s << ',' << exact << ',' << star << ','
              << (bounds::bound_vacuous(star) ? 1 : 0) << '\n';
        }
      }
  } else if (bound == "theorem1_rhs") {
    out << "n_samples,bound,bound_tight\n";
    for (double n : grid)
      out << n << ',' << bounds::theorem1_rhs(l1, f_gap, n) << ','
          << bounds::theorem1_rhs_tight(l1, f_gap, n) << '\n';
  } else if (bound == "theorem2_rhs") {
    out << "workers,alpha,n_samples,bound\n";
    for (std::uint64_t m : parse_int_list(workers_text))
      for (double alpha : parse_grid(alphas_text))
        for (double n : grid)
          out << m << ',' << alpha << ',' << n << ','
              << bounds::theorem2_rhs(l1, f_gap, sigma_l1, static_cast<int>(m), alpha, n)
              << '\n';
  } else {
    throw CLI::ValidationError("unknown bound '" + bound + "'");
  }
  return 0;
}

int cmd_bitcost(const std::string& workers_text, const std::string& dims_text,
                const std::string& out_path) {
  std::ofstream file;
  std::ostream& out = open_out(file, out_path);
  out << "workers,dim,scheme,bits_per_iteration,degenerate\n";
  for (std::uint64_t m : parse_int_list(workers_text))
    for (std::uint64_t d : parse_int_list(dims_text))
      for (BitScheme scheme :
           {BitScheme::MajorityVote, BitScheme::L2Qsgd1Bit, BitScheme::MaxQsgd1Bit}) {
        const BitCostReport r = bit_cost(scheme, static_cast<std::uint32_t>(m), d);
        out << m << ',' << d << ',' << bit_scheme_name(scheme) << ',' << r.bits_per_iteration
            << ',' << (r.degenerate ? 1 : 0) << '\n';
      }
  return 0;
}

int cmd_serve(const std::string& host, std::uint16_t port, std::uint32_t workers,
              std::uint32_t dim, std::uint32_t rounds, int timeout_ms) {
  TcpServerConfig cfg;
  cfg.host = host;
  cfg.port = port;
  cfg.workers = workers;
  cfg.dim = dim;
  cfg.rounds = rounds;
  cfg.round_timeout_ms = timeout_ms;
  cfg.accept_timeout_ms = timeout_ms;
  TcpServer server(cfg);
  std::printf("serving on %s:%u for %u workers, dim %u, %u rounds\n", host.c_str(),
              server.port(), workers, dim, rounds);
  std::fflush(stdout);
  const TcpServerStats stats = server.run();
  std::printf("rounds_completed=%u vote_bytes=%llu broadcast_bytes=%llu\n",
              stats.rounds_completed, static_cast<unsigned long long>(stats.vote_payload_bytes),
              static_cast<unsigned long long>(stats.broadcast_payload_bytes));
  if (stats.aborted) std::printf("ABORT: %s\n", stats.abort_reason.c_str());
  return stats.status();
}

int cmd_work(const std::string& config_path, const std::vector<std::string>& overrides,
             std::uint32_t id, const std::string& server_host, std::uint16_t server_port) {
  const ExperimentConfig cfg = load_config(config_path, overrides);
  cfg.validate();
  if (id >= cfg.workers) {
    std::fprintf(stderr, "worker id %u out of range (workers = %u)\n", id, cfg.workers);
    return 2;
  }
  const auto objective = make_objective(cfg);
  const std::vector<double> x0 = cfg.make_x0();
  OptimizerConfig opt = cfg.optimizer;
  if (cfg.schedule != Schedule::Kind::Constant) {
    const ObjectiveSpec spec = objective->describe(x0);
    Schedule sched{cfg.schedule, cfg.rounds, spec.f_gap(), spec.smoothness_l1()};
    const auto [eta, batch] = sched.resolve(opt.eta, opt.batch_size);
    opt.eta = eta;
    opt.batch_size = batch;
  }
  Worker worker(id, *objective, opt, cfg.adversary_for(id), x0, cfg.seed);
  const TcpWorkerResult result =
      run_tcp_worker(server_host, server_port, worker, cfg.rounds, cfg.timeout_ms);
  std::printf("worker %u: rounds=%u%s%s\n", id, result.rounds_completed,
              result.aborted ? " ABORT: " : "", result.abort_reason.c_str());
  return result.status();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sign-gradient optimization with majority-vote aggregation"};
  app.require_subcommand(1);

  // run
  std::string config_path, csv_path, json_path, run_seed, run_transport;
  std::vector<std::string> overrides;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "run an experiment end to end");
  run->add_option("--config", config_path, "experiment config file");
  run->add_option("--set", overrides, "override a config key, e.g. --set eta=0.05");
  run->add_option("--seed", run_seed, "override the master seed");
  run->add_option("--transport", run_transport, "override the transport: sim|tcp");
  run->add_option("--out", csv_path, "write per-round CSV here");
  run->add_option("--json", json_path, "write records + summary as JSON here");
  run->add_flag("--quiet", quiet, "suppress the summary line");

  // verify
  std::string suite;
  std::string verify_json;
  auto* verify_cmd = app.add_subcommand("verify", "run a bound-verification suite");
  verify_cmd->add_option("--suite", suite, "lemma1|star|theorem1|theorem2")->required();
  verify_cmd->add_option("--json", verify_json, "write the machine-readable report here");

  // bounds
  std::string bound = "lemma1", grid = "0:5:0.1", workers_list = "1,3,9,27",
              alphas = "0,0.1111111111111111,0.3333333333333333";
  double l1 = 1.0, f_gap = 1.0, sigma_l1 = 1.0;
  std::string bounds_out;
  auto* bounds_cmd = app.add_subcommand("bounds", "tabulate a closed-form bound as CSV");
  bounds_cmd->add_option("--bound", bound,
                         "lemma1|gauss_tail|cantelli|epsilon|star|theorem1_rhs|theorem2_rhs");
  bounds_cmd->add_option("--grid", grid, "start:stop:step or comma list");
  bounds_cmd->add_option("--workers", workers_list, "comma list of M (star/theorem2_rhs)");
  bounds_cmd->add_option("--alphas", alphas, "comma list of adversarial fractions");
  bounds_cmd->add_option("--l1", l1, "||L||_1 for the theorem bounds");
  bounds_cmd->add_option("--f-gap", f_gap, "f0 - f* for the theorem bounds");
  bounds_cmd->add_option("--sigma-l1", sigma_l1, "||sigma||_1 for theorem2_rhs");
  bounds_cmd->add_option("--out", bounds_out, "output file (default stdout)");

  // bitcost
  std::string bc_workers = "1,3,7,15,27", bc_dims = "1024,100000,25000000", bitcost_out;
  auto* bitcost_cmd = app.add_subcommand("bitcost", "per-iteration communication cost table");
  bitcost_cmd->add_option("--workers", bc_workers, "comma list of M");
  bitcost_cmd->add_option("--dims", bc_dims, "comma list of d");
  bitcost_cmd->add_option("--out", bitcost_out, "output file (default stdout)");

  // serve
  std::string serve_host = "127.0.0.1";
  std::uint16_t serve_port = 7077;
  std::uint32_t serve_workers = 3, serve_dim = 1000, serve_rounds = 100;
  int serve_timeout = 30000;
  auto* serve_cmd = app.add_subcommand("serve", "run the TCP parameter server");
  serve_cmd->add_option("--host", serve_host, "bind address");
  serve_cmd->add_option("--port", serve_port, "bind port (0 = ephemeral)");
  serve_cmd->add_option("--workers", serve_workers, "expected worker count")->required();
  serve_cmd->add_option("--dim", serve_dim, "model dimension")->required();
  serve_cmd->add_option("--rounds", serve_rounds, "rounds to run")->required();
  serve_cmd->add_option("--timeout-ms", serve_timeout, "accept/round timeout");

  // work
  std::string work_config;
  std::vector<std::string> work_overrides;
  std::uint32_t work_id = 0;
  std::string work_host = "127.0.0.1";
  std::uint16_t work_port = 7077;
  auto* work_cmd = app.add_subcommand("work", "run one TCP worker");
  work_cmd->add_option("--config", work_config, "experiment config file")->required();
  work_cmd->add_option("--set", work_overrides, "override a config key");
  work_cmd->add_option("--id", work_id, "worker id in [0, workers)")->required();
  work_cmd->add_option("--host", work_host, "server address");
  work_cmd->add_option("--port", work_port, "server port")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed())
      return cmd_run(config_path, overrides, run_seed, run_transport, csv_path, json_path, quiet);
    if (verify_cmd->parsed()) return cmd_verify(suite, verify_json);
    if (bounds_cmd->parsed())
      return cmd_bounds(bound, grid, workers_list, alphas, l1, f_gap, sigma_l1, bounds_out);
    if (bitcost_cmd->parsed()) return cmd_bitcost(bc_workers, bc_dims, bitcost_out);
    if (serve_cmd->parsed())
      return cmd_serve(serve_host, serve_port, serve_workers, serve_dim, serve_rounds,
                       serve_timeout);
    if (work_cmd->parsed())
      return cmd_work(work_config, work_overrides, work_id, work_host, work_port);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
