#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "signvote/adversary.hpp"
#include "signvote/optimizer.hpp"
#include "signvote/oracles.hpp"

namespace signvote {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One adversary group: `count` workers running the same behavior.
struct AdversaryGroup {
  std::uint32_t count = 0;
  AdversarySpec spec;
};

// Declarative description of a full run. Parsed from `key = value` lines
// ('#' starts a comment); any key can also be overridden from the command
// line. Adversary groups occupy the highest worker ids, so worker 0 is
// always honest when alpha < 1.
struct ExperimentConfig {
  enum class ObjectiveKind : std::uint8_t { Quadratic, Logistic } objective =
      ObjectiveKind::Quadratic;
  std::uint32_t dim = 1000;
  NoiseModel noise = NoiseModel::gaussian(1.0);
  std::uint32_t workers = 27;
  std::vector<AdversaryGroup> adversaries;
  OptimizerConfig optimizer{0.02, 0.0, 0.0, 1};
  Schedule::Kind schedule = Schedule::Kind::Constant;
  std::uint32_t rounds = 1000;
  std::uint64_t seed = 1;
  enum class Transport : std::uint8_t { Sim, Tcp } transport = Transport::Sim;
  enum class InitKind : std::uint8_t { Ones, Zeros, Constant } x0_kind = InitKind::Ones;
  double x0_value = 1.0;

  // logistic objective
  std::uint32_t examples = 256;
  double flip_rate = 0.05;
  std::uint64_t data_seed = 7;

  // tcp transport
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
  int timeout_ms = 30000;

  std::uint32_t adversary_count() const {
    std::uint32_t n = 0;
    for (const auto& g : adversaries) n += g.count;
    return n;
  }
  double alpha() const {
    return static_cast<double>(adversary_count()) / static_cast<double>(workers);
  }

  void validate() const {
    if (workers == 0) throw ConfigError("config: workers must be >= 1");
    if (rounds == 0) throw ConfigError("config: rounds must be >= 1");
    if (dim == 0) throw ConfigError("config: dim must be >= 1");
    if (adversary_count() > workers)
      throw ConfigError("config: adversary count exceeds worker count");
    optimizer.validate();
  }

  std::vector<double> make_x0() const {
    switch (x0_kind) {
      case InitKind::Ones: return std::vector<double>(dim, 1.0);
      case InitKind::Zeros: return std::vector<double>(dim, 0.0);
      case InitKind::Constant: return std::vector<double>(dim, x0_value);
    }
    return std::vector<double>(dim, 1.0);
  }

  // Adversary spec for a given worker id; honest ids come first.
  AdversarySpec adversary_for(std::uint32_t worker_id) const {
    std::uint32_t boundary = workers - adversary_count();
    if (worker_id < boundary) return AdversarySpec::none();
    for (const auto& g : adversaries) {
      if (worker_id < boundary + g.count) {
        AdversarySpec spec = g.spec;
        if ((spec.kind == AdversaryKind::SignRandomize ||
             spec.kind == AdversaryKind::CustomMask) &&
            spec.seed == 0)
          spec.seed = mix64(seed ^ mix64(worker_id + 0xADULL));
        return spec;
      }
      boundary += g.count;
    }
    return AdversarySpec::none();
  }

  static ExperimentConfig parse_file(const std::string& path);
  static ExperimentConfig parse(std::istream& in);
  void set(const std::string& key, const std::string& value);
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) parts.push_back(trim(cur));
  return parts;
}

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: bad number for " + key + ": '" + v + "'");
  }
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConfigError("config: bad integer for " + key + ": '" + v + "'");
  return out;
}

inline AdversaryGroup parse_adversary_group(const std::string& text) {
  // count:kind[:param], e.g. "13:invert", "2:rescale:1e9", "1:sign_randomize:42"
  const auto parts = split(text, ':');
  if (parts.size() < 2) throw ConfigError("config: bad adversary group '" + text + "'");
  AdversaryGroup g;
  g.count = static_cast<std::uint32_t>(parse_u64("adversaries", parts[0]));
  const std::string& kind = parts[1];
  const bool has_param = parts.size() > 2;
  if (kind == "invert") {
    g.spec = AdversarySpec::invert();
  } else if (kind == "rescale") {
    g.spec = AdversarySpec::rescale(has_param ? parse_double("rescale", parts[2]) : 2.0);
  } else if (kind == "sign_randomize") {
    g.spec = AdversarySpec::sign_randomize(has_param ? parse_u64("sign_randomize", parts[2]) : 0);
  } else if (kind == "custom_mask") {
    g.spec = AdversarySpec::custom_mask(has_param ? parse_u64("custom_mask", parts[2]) : 0);
  } else if (kind == "none") {
    g.spec = AdversarySpec::none();
  } else {
    throw ConfigError("config: unknown adversary kind '" + kind + "'");
  }
  return g;
}

}  // namespace detail

inline void ExperimentConfig::set(const std::string& key, const std::string& value) {
  using detail::parse_double;
  using detail::parse_u64;
  if (key == "objective") {
    if (value == "quadratic") objective = ObjectiveKind::Quadratic;
    else if (value == "logistic") objective = ObjectiveKind::Logistic;
    else throw ConfigError("config: unknown objective '" + value + "'");
  } else if (key == "dim") {
    dim = static_cast<std::uint32_t>(parse_u64(key, value));
  } else if (key == "noise") {
    if (value == "none") noise = NoiseModel::none();
    else if (value == "gaussian") noise = NoiseModel::gaussian(noise.sigma > 0 ? noise.sigma : 1.0);
    else if (value == "uniform") noise = NoiseModel::uniform(noise.sigma > 0 ? noise.sigma : 1.0);
    else if (value == "bimodal") noise = NoiseModel::bimodal();
    else throw ConfigError("config: unknown noise '" + value + "'");
  } else if (key == "sigma") {
    const double s = parse_double(key, value);
    if (noise.kind == NoiseModel::Kind::Gaussian) noise = NoiseModel::gaussian(s);
    else if (noise.kind == NoiseModel::Kind::Uniform) noise = NoiseModel::uniform(s);
    else throw ConfigError("config: sigma only applies to gaussian/uniform noise");
  } else if (key == "workers") {
    workers = static_cast<std::uint32_t>(parse_u64(key, value));
  } else if (key == "adversaries") {
    adversaries.clear();
    if (detail::trim(value) != "none")
      for (const auto& part : detail::split(value, ','))
        if (!part.empty()) adversaries.push_back(detail::parse_adversary_group(part));
  } else if (key == "eta") {
    optimizer.eta = parse_double(key, value);
  } else if (key == "beta") {
    optimizer.beta = parse_double(key, value);
  } else if (key == "lambda") {
    optimizer.lambda = parse_double(key, value);
  } else if (key == "batch_size") {
    optimizer.batch_size = static_cast<std::uint32_t>(parse_u64(key, value));
  } else if (key == "schedule") {
    if (value == "constant") schedule = Schedule::Kind::Constant;
    else if (value == "theorem1") schedule = Schedule::Kind::Theorem1;
    else if (value == "theorem2") schedule = Schedule::Kind::Theorem2;
    else throw ConfigError("config: unknown schedule '" + value + "'");
  } else if (key == "rounds") {
    rounds = static_cast<std::uint32_t>(parse_u64(key, value));
  } else if (key == "seed") {
    seed = parse_u64(key, value);
  } else if (key == "transport") {
    if (value == "sim") transport = Transport::Sim;
    else if (value == "tcp") transport = Transport::Tcp;
    else throw ConfigError("config: unknown transport '" + value + "'");
  } else if (key == "x0") {
    if (value == "ones") x0_kind = InitKind::Ones;
    else if (value == "zeros") x0_kind = InitKind::Zeros;
    else if (value.rfind("const:", 0) == 0) {
      x0_kind = InitKind::Constant;
      x0_value = parse_double(key, value.substr(6));
    } else {
      throw ConfigError("config: x0 must be ones, zeros or const:<value>");
    }
  } else if (key == "examples") {
    examples = static_cast<std::uint32_t>(parse_u64(key, value));
  } else if (key == "flip_rate") {
    flip_rate = parse_double(key, value);
  } else if (key == "data_seed") {
    data_seed = parse_u64(key, value);
  } else if (key == "host") {
    host = value;
  } else if (key == "port") {
    port = static_cast<std::uint16_t>(parse_u64(key, value));
  } else if (key == "timeout_ms") {
    timeout_ms = static_cast<int>(parse_u64(key, value));
  } else {
    throw ConfigError("config: unknown key '" + key + "'");
  }
}

inline ExperimentConfig ExperimentConfig::parse(std::istream& in) {
  ExperimentConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(lineno) + " is not key = value");
    cfg.set(detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
  }
  return cfg;
}

inline ExperimentConfig ExperimentConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  return parse(in);
}

}  // namespace signvote
