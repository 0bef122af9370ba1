#pragma once

// Dense, variable-weight and variable-bias layers with forward and exact
// backward passes.
//
// Weight layout convention, shared by all three kinds: matrices are indexed
// [input k][output j], and the variable-weight tensor is indexed
// [input k][output j][predictor m]. Every layer reads its predictor vector p
// from its own input.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>

#include "vwnn/activation.hpp"
#include "vwnn/errors.hpp"
#include "vwnn/rng.hpp"
#include "vwnn/tensor.hpp"

namespace vwnn {

enum class LayerKind : std::uint8_t { Dense = 0, VarWeight = 1, VarBias = 2 };

inline std::string_view to_string(LayerKind k) {
  switch (k) {
    case LayerKind::Dense: return "Dense";
    case LayerKind::VarWeight: return "VarWeight";
    case LayerKind::VarBias: return "VarBias";
  }
  return "?";
}

/// Shape-level description of one layer. `activation` is the dense output
/// activation; `f1` is the weight-prediction squashing of a VarWeight layer.
/// The predictor width of the dynamic kinds equals n_in.
struct LayerDesc {
  LayerKind kind = LayerKind::Dense;
  std::size_t n_in = 0;
  std::size_t n_out = 0;
  Activation activation = Activation::ReLU;
  Activation f1 = Activation::Tanh;

  std::size_t n_p() const noexcept { return kind == LayerKind::Dense ? 0 : n_in; }
  bool operator==(const LayerDesc&) const = default;
};

struct DenseParams {
  Tensor weights;  // n_in x n_out
  Tensor bias;     // n_out
  Activation activation = Activation::ReLU;

  bool operator==(const DenseParams&) const = default;
};

struct VarWeightParams {
  Tensor weight_tensor;  // n_in x n_out x n_p
  Tensor pred_bias;      // n_in x n_out
  Tensor out_bias;       // n_out
  Activation f1 = Activation::Tanh;
  Activation f2 = Activation::ReLU;

  bool operator==(const VarWeightParams&) const = default;
};

/// Bias-prediction map is linear and the output activation is ReLU; neither is
/// configurable.
struct VarBiasParams {
  Tensor weights;            // n_in x n_out
  Tensor bias_pred_weights;  // n_p x n_out
  Tensor bias_pred_bias;     // n_out

  static constexpr Activation kBiasActivation = Activation::Linear;
  static constexpr Activation kOutActivation = Activation::ReLU;

  bool operator==(const VarBiasParams&) const = default;
};

using LayerParams = std::variant<DenseParams, VarWeightParams, VarBiasParams>;

// Gradients share the parameter records' layout.
using DenseGradients = DenseParams;
using VarWeightGradients = VarWeightParams;
using VarBiasGradients = VarBiasParams;
using LayerGradients = LayerParams;

struct DenseCache {
  Tensor input;
  Tensor pre;
};

struct VarWeightCache {
  Tensor input;
  Tensor weight_pre;  // pre-activation of the predicted weights
  Tensor weights;     // realized W_v
  Tensor pre;
};

struct VarBiasCache {
  Tensor input;
  Tensor bias;  // realized b_v
  Tensor pre;
};

using ForwardCache = std::variant<DenseCache, VarWeightCache, VarBiasCache>;

template <typename Cache>
struct Forward {
  Tensor y;
  Cache cache;
};

template <typename Grads>
struct Backward {
  Tensor dx;
  Grads grads;
};

// ---------------------------------------------------------------------------
// Shape helpers

inline std::size_t n_in(const DenseParams& p) { return p.weights.extent(0); }
inline std::size_t n_out(const DenseParams& p) { return p.weights.extent(1); }
inline std::size_t n_in(const VarWeightParams& p) { return p.weight_tensor.extent(0); }
inline std::size_t n_out(const VarWeightParams& p) { return p.weight_tensor.extent(1); }
inline std::size_t n_in(const VarBiasParams& p) { return p.weights.extent(0); }
inline std::size_t n_out(const VarBiasParams& p) { return p.weights.extent(1); }

inline LayerKind kind_of(const LayerParams& p) { return static_cast<LayerKind>(p.index()); }

inline LayerDesc desc_of(const LayerParams& params) {
  return std::visit(
      [](const auto& p) -> LayerDesc {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, DenseParams>) {
          return {LayerKind::Dense, n_in(p), n_out(p), p.activation, Activation::Tanh};
        } else if constexpr (std::is_same_v<T, VarWeightParams>) {
          return {LayerKind::VarWeight, n_in(p), n_out(p), p.f2, p.f1};
        } else {
          return {LayerKind::VarBias, n_in(p), n_out(p), VarBiasParams::kOutActivation, Activation::Tanh};
        }
      },
      params);
}

inline void require_vector(const Tensor& v, std::size_t n, std::string_view what) {
  if (v.rank() != 1 || v.extent(0) != n) {
    throw DimensionError(std::string(what) + ": expected vector of length " + std::to_string(n) + ", got " +
                         shape_str(v.shape()));
  }
}

/// Zero-filled record with the same shapes (and tags) as `p`.
template <typename Params>
Params zeros_like(const Params& p) {
  Params z = p;
  for_each_block(z, [](Tensor& t) { t.fill(0.0); });
  return z;
}

/// Visits every trainable tensor in canonical order. The order is part of the
/// model file format and the optimizer state layout.
template <typename Fn>
void for_each_block(DenseParams& p, Fn&& fn) {
  fn(p.weights);
  fn(p.bias);
}
template <typename Fn>
void for_each_block(const DenseParams& p, Fn&& fn) {
  fn(p.weights);
  fn(p.bias);
}
template <typename Fn>
void for_each_block(VarWeightParams& p, Fn&& fn) {
  fn(p.weight_tensor);
  fn(p.pred_bias);
  fn(p.out_bias);
}
template <typename Fn>
void for_each_block(const VarWeightParams& p, Fn&& fn) {
  fn(p.weight_tensor);
  fn(p.pred_bias);
  fn(p.out_bias);
}
template <typename Fn>
void for_each_block(VarBiasParams& p, Fn&& fn) {
  fn(p.weights);
  fn(p.bias_pred_weights);
  fn(p.bias_pred_bias);
}
template <typename Fn>
void for_each_block(const VarBiasParams& p, Fn&& fn) {
  fn(p.weights);
  fn(p.bias_pred_weights);
  fn(p.bias_pred_bias);
}
template <typename Fn>
void for_each_block(LayerParams& p, Fn&& fn) {
  std::visit([&](auto& q) { for_each_block(q, fn); }, p);
}
template <typename Fn>
void for_each_block(const LayerParams& p, Fn&& fn) {
  std::visit([&](const auto& q) { for_each_block(q, fn); }, p);
}

// ---------------------------------------------------------------------------
// Validation

inline void validate(const DenseParams& p) {
  if (p.weights.rank() != 2) throw DimensionError("dense weights must be a matrix, got " + shape_str(p.weights.shape()));
  require_vector(p.bias, n_out(p), "dense bias");
}

inline void validate(const VarWeightParams& p) {
  const auto& t = p.weight_tensor;
  if (t.rank() != 3) throw DimensionError("weight tensor must be rank 3, got " + shape_str(t.shape()));
  if (t.extent(2) != t.extent(0)) {
    throw DimensionError("predictor width must equal input width, got " + shape_str(t.shape()));
  }
  if (p.pred_bias.shape() != Shape{t.extent(0), t.extent(1)}) {
    throw DimensionError("pred_bias must be " + shape_str({t.extent(0), t.extent(1)}) + ", got " +
                         shape_str(p.pred_bias.shape()));
  }
  require_vector(p.out_bias, t.extent(1), "out_bias");
  if (p.f1 != Activation::Tanh && p.f1 != Activation::Linear) {
    throw ArgumentError("weight-prediction activation must be tanh or linear, got " + std::string(to_string(p.f1)));
  }
}

inline void validate(const VarBiasParams& p) {
  if (p.weights.rank() != 2) throw DimensionError("weights must be a matrix, got " + shape_str(p.weights.shape()));
  if (p.bias_pred_weights.shape() != Shape{n_in(p), n_out(p)}) {
    throw DimensionError("bias_pred_weights must be " + shape_str({n_in(p), n_out(p)}) + ", got " +
                         shape_str(p.bias_pred_weights.shape()));
  }
  require_vector(p.bias_pred_bias, n_out(p), "bias_pred_bias");
}

// ---------------------------------------------------------------------------
// Dense

inline Forward<DenseCache> dense_forward(const DenseParams& params, const Tensor& x) {
  const std::size_t ni = n_in(params), no = n_out(params);
  require_vector(x, ni, "dense_forward input");
  Tensor pre = params.bias;
  for (std::size_t k = 0; k < ni; ++k) {
    const double xk = x[k];
    for (std::size_t j = 0; j < no; ++j) pre[j] += xk * params.weights(k, j);
  }
  Tensor y = apply_activation(params.activation, pre);
  return {std::move(y), DenseCache{x, std::move(pre)}};
}

inline void check_cache(const DenseParams& p, const DenseCache& c) {
  if (c.input.size() != n_in(p) || c.pre.size() != n_out(p)) {
    throw ContractError("dense cache does not match layer " + shape_str(p.weights.shape()));
  }
}

/// Adds the parameter gradients into `grads` and returns dL/dx.
inline Tensor dense_backward_into(const DenseParams& params, const DenseCache& cache, const Tensor& dy,
                                  DenseGradients& grads) {
  check_cache(params, cache);
  const std::size_t ni = n_in(params), no = n_out(params);
  require_vector(dy, no, "dense_backward cotangent");
  Tensor dz({no});
  for (std::size_t j = 0; j < no; ++j) dz[j] = dy[j] * activate_derivative(params.activation, cache.pre[j]);
  Tensor dx({ni});
  for (std::size_t k = 0; k < ni; ++k) {
    const double xk = cache.input[k];
    double acc = 0.0;
    for (std::size_t j = 0; j < no; ++j) {
      grads.weights(k, j) += xk * dz[j];
      acc += params.weights(k, j) * dz[j];
    }
    dx[k] = acc;
  }
  for (std::size_t j = 0; j < no; ++j) grads.bias[j] += dz[j];
  return dx;
}

inline Backward<DenseGradients> dense_backward(const DenseParams& params, const DenseCache& cache,
                                               const Tensor& dy) {
  DenseGradients g = zeros_like(params);
  Tensor dx = dense_backward_into(params, cache, dy, g);
  return {std::move(dx), std::move(g)};
}

// ---------------------------------------------------------------------------
// Variable weight

namespace detail {

inline Tensor vw_weight_pre(const VarWeightParams& params, const Tensor& p) {
  Tensor pre = contract3(params.weight_tensor, p);
  for (std::size_t i = 0; i < pre.size(); ++i) pre[i] += params.pred_bias[i];
  return pre;
}

}  // namespace detail

/// W_v(k, j) = f1( sum_m T(k, j, m) p[m] + pred_bias(k, j) )
inline Tensor vw_predict_weights(const VarWeightParams& params, const Tensor& p) {
  require_vector(p, params.weight_tensor.extent(2), "vw_predict_weights predictor");
  return apply_activation(params.f1, detail::vw_weight_pre(params, p));
}

inline Forward<VarWeightCache> vw_forward(const VarWeightParams& params, const Tensor& p) {
  const std::size_t ni = n_in(params), no = n_out(params);
  require_vector(p, ni, "vw_forward input");
  Tensor weight_pre = detail::vw_weight_pre(params, p);
  Tensor weights = apply_activation(params.f1, weight_pre);
  Tensor pre = params.out_bias;
  for (std::size_t k = 0; k < ni; ++k) {
    const double pk = p[k];
    for (std::size_t j = 0; j < no; ++j) pre[j] += pk * weights(k, j);
  }
  Tensor y = apply_activation(params.f2, pre);
  return {std::move(y), VarWeightCache{p, std::move(weight_pre), std::move(weights), std::move(pre)}};
}

inline void check_cache(const VarWeightParams& params, const VarWeightCache& c) {
  const std::size_t ni = n_in(params), no = n_out(params);
  if (c.input.size() != ni || c.pre.size() != no || c.weights.size() != ni * no || c.weight_pre.size() != ni * no) {
    throw ContractError("variable-weight cache does not match layer " + shape_str(params.weight_tensor.shape()));
  }
}

/// dL/dp sums two routes: through the data path (p times W_v) and through the
/// weight prediction (f1 and the rank-3 tensor).
inline Tensor vw_backward_into(const VarWeightParams& params, const VarWeightCache& cache, const Tensor& dy,
                               VarWeightGradients& grads) {
  check_cache(params, cache);
  const std::size_t ni = n_in(params), no = n_out(params), np = ni;
  require_vector(dy, no, "vw_backward cotangent");
  const Tensor& p = cache.input;

  Tensor dz({no});
  for (std::size_t j = 0; j < no; ++j) {
    dz[j] = dy[j] * activate_derivative(params.f2, cache.pre[j]);
    grads.out_bias[j] += dz[j];
  }

  Tensor dp({np});
  const double* tensor = params.weight_tensor.flat().data();
  double* dtensor = grads.weight_tensor.flat().data();
  for (std::size_t k = 0; k < ni; ++k) {
    double direct = 0.0;
    for (std::size_t j = 0; j < no; ++j) {
      const std::size_t kj = k * no + j;
      direct += cache.weights[kj] * dz[j];
      const double dweight = p[k] * dz[j];
      const double dpre = dweight * activate_derivative(params.f1, cache.weight_pre[kj]);
      grads.pred_bias[kj] += dpre;
      if (dpre == 0.0) continue;
      const double* t_row = tensor + kj * np;
      double* dt_row = dtensor + kj * np;
      for (std::size_t m = 0; m < np; ++m) {
        dt_row[m] += dpre * p[m];
        dp[m] += dpre * t_row[m];
      }
    }
    dp[k] += direct;
  }
  return dp;
}

inline Backward<VarWeightGradients> vw_backward(const VarWeightParams& params, const VarWeightCache& cache,
                                                const Tensor& dy) {
  VarWeightGradients g = zeros_like(params);
  Tensor dx = vw_backward_into(params, cache, dy, g);
  return {std::move(dx), std::move(g)};
}

// ---------------------------------------------------------------------------
// Variable bias

inline Forward<VarBiasCache> vb_forward(const VarBiasParams& params, const Tensor& p) {
  const std::size_t ni = n_in(params), no = n_out(params);
  require_vector(p, ni, "vb_forward input");
  Tensor bias = params.bias_pred_bias;
  Tensor pre({no});
  for (std::size_t k = 0; k < ni; ++k) {
    const double pk = p[k];
    for (std::size_t j = 0; j < no; ++j) {
      bias[j] += pk * params.bias_pred_weights(k, j);
      pre[j] += pk * params.weights(k, j);
    }
  }
  for (std::size_t j = 0; j < no; ++j) pre[j] += bias[j];
  Tensor y = apply_activation(VarBiasParams::kOutActivation, pre);
  return {std::move(y), VarBiasCache{p, std::move(bias), std::move(pre)}};
}

inline void check_cache(const VarBiasParams& params, const VarBiasCache& c) {
  if (c.input.size() != n_in(params) || c.pre.size() != n_out(params) || c.bias.size() != n_out(params)) {
    throw ContractError("variable-bias cache does not match layer " + shape_str(params.weights.shape()));
  }
}

inline Tensor vb_backward_into(const VarBiasParams& params, const VarBiasCache& cache, const Tensor& dy,
                               VarBiasGradients& grads) {
  check_cache(params, cache);
  const std::size_t ni = n_in(params), no = n_out(params);
  require_vector(dy, no, "vb_backward cotangent");
  Tensor dz({no});
  for (std::size_t j = 0; j < no; ++j) {
    // The bias path is linear, so dz is also dL/db_v.
    dz[j] = dy[j] * activate_derivative(VarBiasParams::kOutActivation, cache.pre[j]);
    grads.bias_pred_bias[j] += dz[j];
  }
  Tensor dp({ni});
  for (std::size_t k = 0; k < ni; ++k) {
    const double pk = cache.input[k];
    double acc = 0.0;
    for (std::size_t j = 0; j < no; ++j) {
      grads.weights(k, j) += pk * dz[j];
      grads.bias_pred_weights(k, j) += pk * dz[j];
      acc += (params.weights(k, j) + params.bias_pred_weights(k, j)) * dz[j];
    }
    dp[k] = acc;
  }
  return dp;
}

inline Backward<VarBiasGradients> vb_backward(const VarBiasParams& params, const VarBiasCache& cache,
                                              const Tensor& dy) {
  VarBiasGradients g = zeros_like(params);
  Tensor dx = vb_backward_into(params, cache, dy, g);
  return {std::move(dx), std::move(g)};
}

// ---------------------------------------------------------------------------
// Kind-erased dispatch

inline Forward<ForwardCache> layer_forward(const LayerParams& params, const Tensor& x) {
  return std::visit(
      [&](const auto& p) -> Forward<ForwardCache> {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, DenseParams>) {
          auto f = dense_forward(p, x);
          return {std::move(f.y), std::move(f.cache)};
        } else if constexpr (std::is_same_v<T, VarWeightParams>) {
          auto f = vw_forward(p, x);
          return {std::move(f.y), std::move(f.cache)};
        } else {
          auto f = vb_forward(p, x);
          return {std::move(f.y), std::move(f.cache)};
        }
      },
      params);
}

/// Accumulates into `grads`, which must hold the same alternative as `params`.
inline Tensor layer_backward_into(const LayerParams& params, const ForwardCache& cache, const Tensor& dy,
                                  LayerGradients& grads) {
  if (params.index() != cache.index() || params.index() != grads.index()) {
    throw ContractError("backward: cache or gradient record belongs to a different layer kind than " +
                        std::string(to_string(kind_of(params))));
  }
  switch (kind_of(params)) {
    case LayerKind::Dense:
      return dense_backward_into(std::get<DenseParams>(params), std::get<DenseCache>(cache), dy,
                                 std::get<DenseParams>(grads));
    case LayerKind::VarWeight:
      return vw_backward_into(std::get<VarWeightParams>(params), std::get<VarWeightCache>(cache), dy,
                              std::get<VarWeightParams>(grads));
    case LayerKind::VarBias:
      return vb_backward_into(std::get<VarBiasParams>(params), std::get<VarBiasCache>(cache), dy,
                              std::get<VarBiasParams>(grads));
  }
  throw ContractError("backward: unknown layer kind");
}

inline Backward<LayerGradients> layer_backward(const LayerParams& params, const ForwardCache& cache,
                                               const Tensor& dy) {
  LayerGradients g = std::visit([](const auto& p) -> LayerGradients { return zeros_like(p); }, params);
  Tensor dx = layer_backward_into(params, cache, dy, g);
  return {std::move(dx), std::move(g)};
}

// ---------------------------------------------------------------------------
// Construction and accounting

inline void validate_desc(const LayerDesc& d) {
  if (d.n_in == 0 || d.n_out == 0) throw ArgumentError("layer extents must be positive");
  if (d.kind == LayerKind::VarWeight && d.f1 != Activation::Tanh && d.f1 != Activation::Linear) {
    throw ArgumentError("weight-prediction activation must be tanh or linear");
  }
}

namespace detail {

inline void fill_uniform(Tensor& t, RngStream& rng, double limit) {
  Tensor draws = rng_uniform(rng, -limit, limit, t.size());
  std::copy(draws.flat().begin(), draws.flat().end(), t.flat().begin());
}

}  // namespace detail

/// Correctly shaped parameters with every value zero.
inline LayerParams zero_params(const LayerDesc& d) {
  validate_desc(d);
  switch (d.kind) {
    case LayerKind::Dense:
      return DenseParams{Tensor::matrix(d.n_in, d.n_out), Tensor({d.n_out}), d.activation};
    case LayerKind::VarWeight:
      return VarWeightParams{Tensor({d.n_in, d.n_out, d.n_p()}), Tensor::matrix(d.n_in, d.n_out), Tensor({d.n_out}),
                             d.f1, d.activation};
    case LayerKind::VarBias:
      return VarBiasParams{Tensor::matrix(d.n_in, d.n_out), Tensor::matrix(d.n_p(), d.n_out), Tensor({d.n_out})};
  }
  throw ArgumentError("unknown layer kind");
}

/// Glorot-uniform weights; the rank-3 prediction tensor gets an extra 0.1
/// factor so initial W_v sits in tanh's linear region. Bias-like fields are 0.
inline LayerParams init_params(const LayerDesc& d, RngStream& rng) {
  LayerParams params = zero_params(d);
  const double ni = static_cast<double>(d.n_in), no = static_cast<double>(d.n_out), np = static_cast<double>(d.n_p());
  if (auto* p = std::get_if<DenseParams>(&params)) {
    detail::fill_uniform(p->weights, rng, std::sqrt(6.0 / (ni + no)));
  } else if (auto* p = std::get_if<VarWeightParams>(&params)) {
    detail::fill_uniform(p->weight_tensor, rng, 0.1 * std::sqrt(6.0 / (np + ni * no)));
  } else if (auto* p = std::get_if<VarBiasParams>(&params)) {
    detail::fill_uniform(p->weights, rng, std::sqrt(6.0 / (ni + no)));
    detail::fill_uniform(p->bias_pred_weights, rng, std::sqrt(6.0 / (np + no)));
  }
  return params;
}

/// Closed-form scalar count for a layer description.
inline std::size_t param_count(const LayerDesc& d) {
  const std::size_t io = d.n_in * d.n_out;
  switch (d.kind) {
    case LayerKind::Dense: return io + d.n_out;
    case LayerKind::VarWeight: return io * d.n_p() + io + d.n_out;
    case LayerKind::VarBias: return io + d.n_p() * d.n_out + d.n_out;
  }
  return 0;
}

/// Enumerated scalar count of materialized parameters.
inline std::size_t param_count(const LayerParams& p) {
  std::size_t n = 0;
  for_each_block(p, [&](const Tensor& t) { n += t.size(); });
  return n;
}

}  // namespace vwnn
