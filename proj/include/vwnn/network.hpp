#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "vwnn/data.hpp"
#include "vwnn/errors.hpp"
#include "vwnn/layers.hpp"
#include "vwnn/rng.hpp"

namespace vwnn {

struct NetworkSpec {
  std::string name;
  std::size_t input_dim = kNumFeatures;
  std::vector<LayerDesc> layers;

  bool operator==(const NetworkSpec&) const = default;
};

/// Layers must chain, and the last one must be Dense(->1, Sigmoid).
inline void validate(const NetworkSpec& spec) {
  if (spec.layers.empty()) throw ArgumentError("network spec has no layers");
  std::size_t width = spec.input_dim;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const LayerDesc& d = spec.layers[i];
    validate_desc(d);
    if (d.n_in != width) {
      throw DimensionError("layer " + std::to_string(i) + " expects " + std::to_string(d.n_in) + " inputs but receives " +
                           std::to_string(width));
    }
    width = d.n_out;
  }
  const LayerDesc& head = spec.layers.back();
  if (head.kind != LayerKind::Dense || head.n_out != 1 || head.activation != Activation::Sigmoid) {
    throw ArgumentError("network head must be Dense(->1, sigmoid)");
  }
}

inline const std::vector<std::string>& arch_names() {
  static const std::vector<std::string> names{"nn", "vw", "vb"};
  return names;
}

/// Preset architectures:
///   nn: Dense(16->16, relu) . Dense(16->16, relu) . Dense(16->1, sigmoid)
///   vw: Dense(16->16, relu) . VarWeight(16->16)   . Dense(16->1, sigmoid)
///   vb: Dense(16->8, relu)  . VarBias(8->8)       . Dense(8->1, sigmoid)
inline NetworkSpec build_arch(const std::string& name) {
  using enum LayerKind;
  const Activation relu = Activation::ReLU, sig = Activation::Sigmoid, th = Activation::Tanh;
  if (name == "nn") {
    return {"nn", kNumFeatures, {{Dense, 16, 16, relu, th}, {Dense, 16, 16, relu, th}, {Dense, 16, 1, sig, th}}};
  }
  if (name == "vw") {
    return {"vw", kNumFeatures, {{Dense, 16, 16, relu, th}, {VarWeight, 16, 16, relu, th}, {Dense, 16, 1, sig, th}}};
  }
  if (name == "vb") {
    return {"vb", kNumFeatures, {{Dense, 16, 8, relu, th}, {VarBias, 8, 8, relu, th}, {Dense, 8, 1, sig, th}}};
  }
  throw ArgumentError("unknown architecture '" + name + "' (valid: nn, vw, vb)");
}

inline std::size_t param_count(const NetworkSpec& spec) {
  std::size_t n = 0;
  for (const auto& d : spec.layers) n += param_count(d);
  return n;
}

struct Network {
  NetworkSpec spec;
  std::vector<LayerParams> layers;

  bool operator==(const Network&) const = default;
};

inline std::size_t param_count(const Network& net) {
  std::size_t n = 0;
  for (const auto& l : net.layers) n += param_count(l);
  return n;
}

/// Layer i draws from RngStream(seed, "init-layer-i").
inline Network init_network(const NetworkSpec& spec, std::uint64_t seed) {
  validate(spec);
  Network net{spec, {}};
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    RngStream rng(seed, "init-layer-" + std::to_string(i));
    net.layers.push_back(init_params(spec.layers[i], rng));
  }
  return net;
}

struct Trace {
  double probability = 0.0;
  std::vector<ForwardCache> caches;
};

inline Trace forward_trace(const Network& net, const Tensor& x) {
  require_vector(x, net.spec.input_dim, "network input");
  Trace t;
  t.caches.reserve(net.layers.size());
  Tensor h = x;
  for (const auto& layer : net.layers) {
    auto f = layer_forward(layer, h);
    h = std::move(f.y);
    t.caches.push_back(std::move(f.cache));
  }
  t.probability = h[0];
  return t;
}

inline double forward(const Network& net, const Tensor& x) { return forward_trace(net, x).probability; }

struct Prediction {
  Label label = Label::Negative;
  double probability = 0.0;
};

/// Positive iff probability >= 0.5.
inline Label label_for(double probability) { return probability >= 0.5 ? Label::Positive : Label::Negative; }

inline Prediction predict(const Network& net, const Tensor& x) {
  const double p = forward(net, x);
  return {label_for(p), p};
}

inline constexpr double kProbabilityClamp = 1e-12;

struct LossValue {
  double loss = 0.0;
  double grad = 0.0;  // dL/dp at the clamped probability
};

/// Binary cross-entropy with the probability clamped to [1e-12, 1 - 1e-12].
inline LossValue bce_loss(double p, int y) {
  const double q = std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp);
  if (y == 1) return {-std::log(q), -1.0 / q};
  return {-std::log1p(-q), 1.0 / (1.0 - q)};
}

using NetworkGradients = std::vector<LayerGradients>;

inline NetworkGradients zero_gradients(const Network& net) {
  NetworkGradients g;
  g.reserve(net.layers.size());
  for (const auto& l : net.layers) g.push_back(std::visit([](const auto& p) -> LayerGradients { return zeros_like(p); }, l));
  return g;
}

/// Back-propagates dL/dp through the trace, accumulating into `grads`.
/// Returns dL/dx.
inline Tensor backward(const Network& net, const Trace& trace, double dloss_dp, NetworkGradients& grads) {
  Tensor d = Tensor::vector({dloss_dp});
  for (std::size_t i = net.layers.size(); i-- > 0;) d = layer_backward_into(net.layers[i], trace.caches[i], d, grads[i]);
  return d;
}

// ---------------------------------------------------------------------------
// Training

struct TrainConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t batch_size = 32;
  std::size_t epochs = 200;
  std::uint64_t seed = 42;
  bool shuffle = true;
};

inline void validate(const TrainConfig& cfg) {
  if (!(cfg.learning_rate > 0.0)) throw ArgumentError("learning rate must be positive");
  if (cfg.batch_size < 1) throw ArgumentError("batch size must be at least 1");
  if (cfg.epochs < 1) throw ArgumentError("epochs must be at least 1");
  if (!(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0 && cfg.beta2 >= 0.0 && cfg.beta2 < 1.0)) {
    throw ArgumentError("Adam betas must lie in [0, 1)");
  }
}

struct EpochStats {
  double mean_loss = 0.0;
  double accuracy = 0.0;  // fraction in [0, 1]
};

using TrainHistory = std::vector<EpochStats>;

struct TrainResult {
  Network network;
  TrainHistory history;
};

/// Adam state, one first/second moment per parameter, in for_each_block order.
class AdamOptimizer {
 public:
  AdamOptimizer(const Network& net, const TrainConfig& cfg) : cfg_(cfg), m_(zero_gradients(net)), v_(zero_gradients(net)) {}

  /// Applies one step using `grads` scaled by `scale`.
  void step(Network& net, const NetworkGradients& grads, double scale) {
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      std::vector<std::span<double>> theta, m, v;
      std::vector<std::span<const double>> g;
      for_each_block(net.layers[l], [&](Tensor& t) { theta.push_back(t.flat()); });
      for_each_block(m_[l], [&](Tensor& t) { m.push_back(t.flat()); });
      for_each_block(v_[l], [&](Tensor& t) { v.push_back(t.flat()); });
      for_each_block(grads[l], [&](const Tensor& t) { g.push_back(t.flat()); });
      for (std::size_t b = 0; b < theta.size(); ++b) {
        for (std::size_t i = 0; i < theta[b].size(); ++i) {
          const double gi = g[b][i] * scale;
          m[b][i] = cfg_.beta1 * m[b][i] + (1.0 - cfg_.beta1) * gi;
          v[b][i] = cfg_.beta2 * v[b][i] + (1.0 - cfg_.beta2) * gi * gi;
          const double mhat = m[b][i] / c1;
          const double vhat = v[b][i] / c2;
          theta[b][i] -= cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.epsilon);
        }
      }
    }
  }

 private:
  TrainConfig cfg_;
  NetworkGradients m_;
  NetworkGradients v_;
  std::uint64_t t_ = 0;
};

/// Mini-batch Adam on mean BCE. Epoch e visits rows in the order drawn from
/// RngStream(seed, "shuffle-epoch-e"); parameters start from init_network(spec, seed).
inline TrainResult train(const NetworkSpec& spec, const EncodedDataset& data, const TrainConfig& cfg) {
  validate(cfg);
  validate(spec);
  if (data.size() == 0) throw ArgumentError("train: empty dataset");
  if (data.features.extent(1) != spec.input_dim) {
    throw DimensionError("train: dataset has " + std::to_string(data.features.extent(1)) + " features, network expects " +
                         std::to_string(spec.input_dim));
  }
  TrainResult out{init_network(spec, cfg.seed), {}};
  Network& net = out.network;
  AdamOptimizer adam(net, cfg);
  NetworkGradients grads = zero_gradients(net);

  std::vector<Tensor> rows;
  rows.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) rows.push_back(data.row(i));

  std::vector<std::size_t> order(data.size());
  for (std::size_t e = 1; e <= cfg.epochs; ++e) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (cfg.shuffle) {
      RngStream rng(cfg.seed, "shuffle-epoch-" + std::to_string(e));
      rng.shuffle(order);
    }
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      for (auto& g : grads) for_each_block(g, [](Tensor& t) { t.fill(0.0); });
      for (std::size_t s = start; s < end; ++s) {
        const std::size_t i = order[s];
        const Trace trace = forward_trace(net, rows[i]);
        const LossValue lv = bce_loss(trace.probability, data.labels[i]);
        loss_sum += lv.loss;
        if ((label_for(trace.probability) == Label::Positive) == (data.labels[i] == 1)) ++correct;
        backward(net, trace, lv.grad, grads);
      }
      adam.step(net, grads, 1.0 / static_cast<double>(end - start));
    }
    out.history.push_back(
        {loss_sum / static_cast<double>(data.size()), static_cast<double>(correct) / static_cast<double>(data.size())});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Gradient checking

/// Smallest |pre-activation| over every ReLU unit on the path of x. Finite
/// differences are only trusted when this is comfortably above zero.
inline double relu_margin(const Network& net, const Tensor& x) {
  const Trace t = forward_trace(net, x);
  double margin = INFINITY;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const LayerDesc d = desc_of(net.layers[i]);
    if (d.activation != Activation::ReLU) continue;
    std::visit([&](const auto& c) { for (double z : c.pre.flat()) margin = std::min(margin, std::abs(z)); }, t.caches[i]);
  }
  return margin;
}

inline double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1e-8, std::abs(analytic) + std::abs(numeric));
}

struct GradcheckResult {
  double max_relative_error = 0.0;
  std::size_t parameters_checked = 0;
};

/// Compares the analytic dL/dtheta of every parameter of `net` against central
/// differences of the BCE loss at (x, y).
inline GradcheckResult gradcheck(const Network& net, const Tensor& x, int y, double eps) {
  if (!(eps > 1e-8 && eps < 1e-2)) throw ArgumentError("gradcheck: eps must lie in (1e-8, 1e-2)");
  NetworkGradients grads = zero_gradients(net);
  const Trace trace = forward_trace(net, x);
  backward(net, trace, bce_loss(trace.probability, y).grad, grads);

  Network probe = net;
  GradcheckResult r;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    std::vector<std::span<double>> theta;
    std::vector<std::span<const double>> analytic;
    for_each_block(probe.layers[l], [&](Tensor& t) { theta.push_back(t.flat()); });
    for_each_block(grads[l], [&](const Tensor& t) { analytic.push_back(t.flat()); });
    for (std::size_t b = 0; b < theta.size(); ++b) {
      for (std::size_t i = 0; i < theta[b].size(); ++i) {
        const double saved = theta[b][i];
        theta[b][i] = saved + eps;
        const double up = bce_loss(forward(probe, x), y).loss;
        theta[b][i] = saved - eps;
        const double down = bce_loss(forward(probe, x), y).loss;
        theta[b][i] = saved;
        const double numeric = (up - down) / (2.0 * eps);
        r.max_relative_error = std::max(r.max_relative_error, relative_error(analytic[b][i], numeric));
        ++r.parameters_checked;
      }
    }
  }
  return r;
}

inline constexpr double kKinkMargin = 1e-3;

/// Initialises `spec` from `seed`, jitters every parameter by U(-0.25, 0.25)
/// so zero-initialised biases take part, then gradchecks `samples` random
/// inputs in [0,1]^d whose ReLU margins exceed 1e-3. Returns the worst error.
inline GradcheckResult gradcheck_spec(const NetworkSpec& spec, std::size_t samples, double eps, std::uint64_t seed) {
  Network net = init_network(spec, seed);
  RngStream jitter(seed, "gradcheck-jitter");
  for (auto& layer : net.layers) {
    for_each_block(layer, [&](Tensor& t) {
      for (double& v : t.flat()) v += 0.5 * jitter.next_unit() - 0.25;
    });
  }
  RngStream rng(seed, "gradcheck-samples");
  GradcheckResult worst;
  std::size_t accepted = 0, attempts = 0;
  while (accepted < samples) {
    if (++attempts > 1000 * samples) throw ArgumentError("gradcheck: could not draw kink-free samples");
    Tensor x = rng_uniform(rng, 0.0, 1.0, spec.input_dim);
    const int y = static_cast<int>(rng.next_below(2));
    if (relu_margin(net, x) < kKinkMargin) continue;
    const GradcheckResult r = gradcheck(net, x, y, eps);
    worst.max_relative_error = std::max(worst.max_relative_error, r.max_relative_error);
    worst.parameters_checked += r.parameters_checked;
    ++accepted;
  }
  return worst;
}

}  // namespace vwnn
