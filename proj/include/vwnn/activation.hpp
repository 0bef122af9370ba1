#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "vwnn/tensor.hpp"

namespace vwnn {

enum class Activation : std::uint8_t { ReLU = 0, Tanh = 1, Linear = 2, Sigmoid = 3 };

inline std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::ReLU: return "relu";
    case Activation::Tanh: return "tanh";
    case Activation::Linear: return "linear";
    case Activation::Sigmoid: return "sigmoid";
  }
  return "?";
}

inline std::optional<Activation> activation_from_tag(std::uint8_t tag) {
  if (tag > static_cast<std::uint8_t>(Activation::Sigmoid)) return std::nullopt;
  return static_cast<Activation>(tag);
}

inline double sigmoid(double x) {
  // Branching keeps exp() from overflowing for large |x|.
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double activate(Activation a, double x) {
  switch (a) {
    case Activation::ReLU: return x > 0.0 ? x : 0.0;
    case Activation::Tanh: return std::tanh(x);
    case Activation::Linear: return x;
    case Activation::Sigmoid: return sigmoid(x);
  }
  return x;
}

/// Derivative of `activate(a, .)` evaluated at pre-activation x.
/// ReLU'(0) is taken as 0.
inline double activate_derivative(Activation a, double x) {
  switch (a) {
    case Activation::ReLU: return x > 0.0 ? 1.0 : 0.0;
    case Activation::Tanh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case Activation::Linear: return 1.0;
    case Activation::Sigmoid: {
      const double s = sigmoid(x);
      return s * (1.0 - s);
    }
  }
  return 1.0;
}

inline Tensor apply_activation(Activation a, const Tensor& v) {
  Tensor out = v;
  for (double& x : out.flat()) x = activate(a, x);
  return out;
}

inline Tensor activation_derivative(Activation a, const Tensor& v) {
  Tensor out = v;
  for (double& x : out.flat()) x = activate_derivative(a, x);
  return out;
}

}  // namespace vwnn
