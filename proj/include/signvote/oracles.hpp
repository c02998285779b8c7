#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "signvote/rng.hpp"
#include "signvote/snr.hpp"

namespace signvote {

// Objective metadata used by schedules and telemetry: lower bound f*, value
// at the start point, and per-coordinate smoothness/noise constants.
struct ObjectiveSpec {
  std::uint32_t dim = 0;
  double f_star = 0.0;
  double f0 = 0.0;
  std::vector<double> smoothness;   // L_1..L_d
  std::vector<double> noise_sigma;  // sigma_1..sigma_d, per single gradient call

  double smoothness_l1() const {
    double s = 0.0;
    for (double v : smoothness) s += v;
    return s;
  }
  double sigma_l1() const {
    double s = 0.0;
    for (double v : noise_sigma) s += v;
    return s;
  }
  double f_gap() const { return f0 - f_star; }
};

// Per-coordinate additive noise families. gaussian and uniform are unimodal
// and symmetric; bimodal is the two-point counterexample distribution
// {+45.9 w.p. 0.1, -5.1 w.p. 0.9} (mean 0, sd 15.3) that breaks the symmetry
// assumption on purpose.
struct NoiseModel {
  enum class Kind : std::uint8_t { None, Gaussian, Uniform, Bimodal } kind = Kind::None;
  double sigma = 0.0;  // per-coordinate scale for gaussian/uniform

  static NoiseModel none() { return {Kind::None, 0.0}; }
  static NoiseModel gaussian(double sigma) { return {Kind::Gaussian, check(sigma)}; }
  static NoiseModel uniform(double sigma) { return {Kind::Uniform, check(sigma)}; }
  static NoiseModel bimodal() { return {Kind::Bimodal, kBimodalSigma}; }

  static constexpr double kBimodalHigh = 45.9;
  static constexpr double kBimodalLow = -5.1;
  static constexpr double kBimodalHighProb = 0.1;
  static constexpr double kBimodalSigma = 15.3;  // sqrt(0.1*45.9^2 + 0.9*5.1^2)

  double sample(CounterRng& rng) const {
    switch (kind) {
      case Kind::None:
        return 0.0;
      case Kind::Gaussian:
        return sigma * rng.next_gaussian();
      case Kind::Uniform:
        // [-sqrt(3) s, sqrt(3) s] has standard deviation s
        return rng.next_uniform(-sigma * std::sqrt(3.0), sigma * std::sqrt(3.0));
      case Kind::Bimodal:
        return rng.next_unit() <= kBimodalHighProb ? kBimodalHigh : kBimodalLow;
    }
    return 0.0;
  }

  // true per-coordinate standard deviation
  double stddev() const { return kind == Kind::None ? 0.0 : sigma; }

  bool unimodal_symmetric() const {
    return kind == Kind::Gaussian || kind == Kind::Uniform || kind == Kind::None;
  }

 private:
  static double check(double s) {
    if (s < 0.0) throw std::invalid_argument("NoiseModel: sigma must be nonnegative");
    return s;
  }
};

// One stochastic gradient sample with oracle-known ground truth attached.
struct StochasticGradient {
  std::vector<double> values;
  std::vector<double> true_gradient;
  std::uint32_t round = 0;
  std::uint32_t worker_id = 0;
};

// A differentiable objective with a stochastic gradient oracle. Oracles are
// pure given (x, rng state); each worker owns its rng.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual std::uint32_t dim() const = 0;
  virtual double value(std::span<const double> x) const = 0;
  virtual void gradient(std::span<const double> x, std::span<double> out) const = 0;
  // One draw of the stochastic gradient (mini-batching is the caller's job).
  virtual void sample_gradient(std::span<const double> x, CounterRng& rng,
                               std::span<double> out) const = 0;
  virtual ObjectiveSpec describe(std::span<const double> x0) const = 0;
};

// f(x) = 0.5 ||x||^2 with additive coordinate noise on the gradient:
// g(x) = x, f* = 0, L_i = 1.
class QuadraticObjective final : public Objective {
 public:
  QuadraticObjective(std::uint32_t dim, NoiseModel noise) : dim_(dim), noise_(noise) {
    if (dim == 0) throw std::invalid_argument("QuadraticObjective: dim >= 1 required");
  }

  std::uint32_t dim() const override { return dim_; }

  double value(std::span<const double> x) const override {
    double s = 0.0;
    for (double v : x) s += v * v;
    return 0.5 * s;
  }

  void gradient(std::span<const double> x, std::span<double> out) const override {
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i];
  }

  void sample_gradient(std::span<const double> x, CounterRng& rng,
                       std::span<double> out) const override {
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + noise_.sample(rng);
  }

  ObjectiveSpec describe(std::span<const double> x0) const override {
    ObjectiveSpec spec;
    spec.dim = dim_;
    spec.f_star = 0.0;
    spec.f0 = value(x0);
    spec.smoothness.assign(dim_, 1.0);
    spec.noise_sigma.assign(dim_, noise_.stddev());
    return spec;
  }

  const NoiseModel& noise() const { return noise_; }

 private:
  std::uint32_t dim_;
  NoiseModel noise_;
};

inline StochasticGradient quadratic_oracle(std::span<const double> x, const NoiseModel& noise,
                                           CounterRng& rng) {
  StochasticGradient g;
  g.true_gradient.assign(x.begin(), x.end());
  g.values.resize(x.size());
  QuadraticObjective obj(static_cast<std::uint32_t>(x.size()), noise);
  obj.sample_gradient(x, rng, g.values);
  return g;
}

// The bimodal scalar counterexample: g~ = 50 w.p. 0.1, -1 otherwise, so the
// true gradient E[g~] = 4.1 is positive while the sign is negative 90% of
// the time.
inline constexpr double kBimodalTrueGradient = 4.1;
inline constexpr double kBimodalFlipProbability = 0.9;

inline double bimodal_oracle(CounterRng& rng) {
  return rng.next_unit() <= 0.1 ? 50.0 : -1.0;
}

// Synthetic logistic-regression task: examples x_j ~ N(0, I_d), labels from a
// seeded unit normal w*, then flipped with probability flip_rate. Fully
// determined by (seed, examples, dim, flip_rate).
struct LogisticDataset {
  std::uint32_t dim = 0;
  std::vector<std::vector<double>> features;
  std::vector<double> labels;  // +1/-1

  static LogisticDataset generate(std::uint64_t seed, std::uint32_t examples,
                                  std::uint32_t dim, double flip_rate) {
    if (examples == 0 || dim == 0)
      throw std::invalid_argument("LogisticDataset: examples and dim must be >= 1");
    if (!(flip_rate >= 0.0 && flip_rate <= 0.5))
      throw std::invalid_argument("LogisticDataset: flip_rate must be in [0, 0.5]");
    LogisticDataset ds;
    ds.dim = dim;
    CounterRng rng = CounterRng::derive(seed, 0x10615713ULL);
    std::vector<double> w_true(dim);
    double norm = 0.0;
    for (double& w : w_true) {
      w = rng.next_gaussian();
      norm += w * w;
    }
    norm = std::sqrt(norm);
    for (double& w : w_true) w /= norm;

    ds.features.resize(examples, std::vector<double>(dim));
    ds.labels.resize(examples);
    for (std::uint32_t j = 0; j < examples; ++j) {
      double margin = 0.0;
      for (std::uint32_t i = 0; i < dim; ++i) {
        ds.features[j][i] = rng.next_gaussian();
        margin += w_true[i] * ds.features[j][i];
      }
      double label = margin >= 0.0 ? 1.0 : -1.0;
      if (rng.next_unit() <= flip_rate) label = -label;
      ds.labels[j] = label;
    }
    return ds;
  }

  std::size_t size() const { return labels.size(); }
};

// Mean logistic loss over the dataset. Single-draw oracle samples one example
// uniformly; L_i and sigma_i come from the uniform bounds
// |dl/dw_i| <= |x_i| and d2l/dw_i^2 <= x_i^2 / 4.
class LogisticObjective final : public Objective {
 public:
  explicit LogisticObjective(LogisticDataset dataset) : data_(std::move(dataset)) {
    smoothness_.assign(data_.dim, 0.0);
    sigma_.assign(data_.dim, 0.0);
    const double n = static_cast<double>(data_.size());
    for (const auto& x : data_.features)
      for (std::uint32_t i = 0; i < data_.dim; ++i) {
        smoothness_[i] += x[i] * x[i] / (4.0 * n);
        sigma_[i] += x[i] * x[i] / n;
      }
    for (double& s : sigma_) s = std::sqrt(s);
  }

  std::uint32_t dim() const override { return data_.dim; }

  double value(std::span<const double> w) const override {
    double total = 0.0;
    for (std::size_t j = 0; j < data_.size(); ++j)
      total += std::log1p(std::exp(-data_.labels[j] * dot(data_.features[j], w)));
    return total / static_cast<double>(data_.size());
  }

  void gradient(std::span<const double> w, std::span<double> out) const override {
    std::fill(out.begin(), out.end(), 0.0);
    const double n = static_cast<double>(data_.size());
    for (std::size_t j = 0; j < data_.size(); ++j) accumulate_example(j, w, 1.0 / n, out);
  }

  void sample_gradient(std::span<const double> w, CounterRng& rng,
                       std::span<double> out) const override {
    std::fill(out.begin(), out.end(), 0.0);
    const std::size_t j = static_cast<std::size_t>(rng.next_u64() % data_.size());
    accumulate_example(j, w, 1.0, out);
  }

  ObjectiveSpec describe(std::span<const double> x0) const override {
    ObjectiveSpec spec;
    spec.dim = data_.dim;
    spec.f_star = 0.0;
    spec.f0 = value(x0);
    spec.smoothness = smoothness_;
    spec.noise_sigma = sigma_;
    return spec;
  }

  const LogisticDataset& dataset() const { return data_; }

 private:
  static double dot(const std::vector<double>& a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
  }

  void accumulate_example(std::size_t j, std::span<const double> w, double weight,
                          std::span<double> out) const {
    const double y = data_.labels[j];
    const double z = -y * dot(data_.features[j], w);
    const double s = 1.0 / (1.0 + std::exp(-z));  // sigmoid(z)
    for (std::uint32_t i = 0; i < data_.dim; ++i)
      out[i] += weight * (-y * data_.features[j][i] * s);
  }

  LogisticDataset data_;
  std::vector<double> smoothness_;
  std::vector<double> sigma_;
};

// Mini-batch logistic oracle. Batches of size n < N sample examples with
// replacement so the mean's variance is exactly var_1/n; n >= N evaluates the
// full batch, making the sample equal to the true gradient.
inline StochasticGradient logistic_oracle(const LogisticObjective& objective,
                                          std::span<const double> w, std::uint32_t batch,
                                          CounterRng& rng) {
  if (batch == 0) throw std::invalid_argument("logistic_oracle: empty batch");
  StochasticGradient g;
  g.true_gradient.resize(objective.dim());
  objective.gradient(w, g.true_gradient);
  g.values.assign(objective.dim(), 0.0);
  if (batch >= objective.dataset().size()) {
    g.values = g.true_gradient;
    return g;
  }
  std::vector<double> draw(objective.dim());
  for (std::uint32_t b = 0; b < batch; ++b) {
    objective.sample_gradient(w, rng, draw);
    for (std::uint32_t i = 0; i < objective.dim(); ++i) g.values[i] += draw[i] / batch;
  }
  return g;
}

}  // namespace signvote
