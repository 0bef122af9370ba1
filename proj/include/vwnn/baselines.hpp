#pragma once

// Naive Bayes and logistic regression reference classifiers.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "vwnn/activation.hpp"
#include "vwnn/data.hpp"
#include "vwnn/errors.hpp"

namespace vwnn {

// ---------------------------------------------------------------------------
// Categorical naive Bayes

/// Per-feature category counts. A count of 2 means a {0, 1} feature; a count
/// c > 2 means an ordinal feature stored as b / c with b in 1..c (the age bin).
using CategoryLayout = std::vector<std::size_t>;

inline CategoryLayout default_category_layout() {
  CategoryLayout layout(kNumFeatures, 2);
  layout[0] = 5;
  return layout;
}

/// Category index in [0, c) of an encoded feature value.
inline std::size_t category_of(double value, std::size_t categories) {
  long idx = categories == 2 ? std::lround(value) : std::lround(value * static_cast<double>(categories)) - 1;
  if (idx < 0) idx = 0;
  if (idx >= static_cast<long>(categories)) idx = static_cast<long>(categories) - 1;
  return static_cast<std::size_t>(idx);
}

struct NaiveBayesModel {
  std::array<double, 2> priors{};  // P(label)
  CategoryLayout layout;
  // conditionals[f][label][c] = P(feature f in category c | label)
  std::vector<std::array<std::vector<double>, 2>> conditionals;
  double alpha = 1.0;
};

/// Maximum-likelihood tables with additive (Laplace) smoothing `alpha` per
/// category. Priors are unsmoothed class frequencies.
inline NaiveBayesModel nb_train(const EncodedDataset& data, double alpha = 1.0,
                                const CategoryLayout& layout = default_category_layout()) {
  if (!(alpha > 0.0)) throw ArgumentError("nb_train: smoothing constant must be positive");
  const std::size_t d = data.features.extent(1);
  if (layout.size() != d) throw DimensionError("nb_train: category layout does not match feature count");
  const std::size_t pos = data.positives(), neg = data.negatives();
  if (pos == 0 || neg == 0) throw ArgumentError("nb_train: both labels must be present");

  NaiveBayesModel m;
  m.alpha = alpha;
  m.layout = layout;
  m.priors = {static_cast<double>(neg) / static_cast<double>(data.size()),
              static_cast<double>(pos) / static_cast<double>(data.size())};
  const std::array<double, 2> class_n{static_cast<double>(neg), static_cast<double>(pos)};
  m.conditionals.resize(d);
  for (std::size_t f = 0; f < d; ++f) {
    std::array<std::vector<double>, 2> counts{std::vector<double>(layout[f], 0.0), std::vector<double>(layout[f], 0.0)};
    for (std::size_t i = 0; i < data.size(); ++i) {
      counts[data.labels[i] == 1 ? 1 : 0][category_of(data.features(i, f), layout[f])] += 1.0;
    }
    const double c = static_cast<double>(layout[f]);
    for (std::size_t y = 0; y < 2; ++y) {
      for (double& v : counts[y]) v = (v + alpha) / (class_n[y] + alpha * c);
    }
    m.conditionals[f] = std::move(counts);
  }
  return m;
}

struct ScoredLabel {
  Label label = Label::Negative;
  double probability = 0.0;  // P(Positive | x)
};

/// Log-space posterior; exact ties resolve to Positive.
inline ScoredLabel nb_predict(const NaiveBayesModel& m, std::span<const double> x) {
  if (x.size() != m.layout.size()) throw DimensionError("nb_predict: feature vector length mismatch");
  std::array<double, 2> lp{std::log(m.priors[0]), std::log(m.priors[1])};
  for (std::size_t f = 0; f < x.size(); ++f) {
    const std::size_t c = category_of(x[f], m.layout[f]);
    lp[0] += std::log(m.conditionals[f][0][c]);
    lp[1] += std::log(m.conditionals[f][1][c]);
  }
  const double posterior = sigmoid(lp[1] - lp[0]);
  return {lp[1] >= lp[0] ? Label::Positive : Label::Negative, posterior};
}

// ---------------------------------------------------------------------------
// Logistic regression

struct LogisticModel {
  std::vector<double> weights;
  double intercept = 0.0;
};

inline double lr_probability(const LogisticModel& m, std::span<const double> x) {
  if (x.size() != m.weights.size()) throw DimensionError("logistic model: feature vector length mismatch");
  double z = m.intercept;
  for (std::size_t f = 0; f < x.size(); ++f) z += m.weights[f] * x[f];
  return sigmoid(z);
}

struct LogisticLoss {
  double loss = 0.0;
  LogisticModel gradient;  // d(mean BCE)/d(weights, intercept)
};

/// Mean binary cross-entropy over `data` and its gradient.
inline LogisticLoss lr_loss(const LogisticModel& m, const EncodedDataset& data) {
  const std::size_t d = data.features.extent(1);
  LogisticLoss out{0.0, {std::vector<double>(d, 0.0), 0.0}};
  const double inv_n = 1.0 / static_cast<double>(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::span<const double> x = data.features.flat().subspan(i * d, d);
    const double p = lr_probability(m, x);
    const int y = data.labels[i];
    const double q = std::clamp(p, 1e-12, 1.0 - 1e-12);
    out.loss -= inv_n * (y == 1 ? std::log(q) : std::log1p(-q));
    const double r = (p - static_cast<double>(y)) * inv_n;
    for (std::size_t f = 0; f < d; ++f) out.gradient.weights[f] += r * x[f];
    out.gradient.intercept += r;
  }
  return out;
}

struct LogisticFit {
  LogisticModel model;
  std::vector<double> loss_history;  // loss before each update
};

/// Full-batch gradient descent from zero initialisation.
inline LogisticFit lr_fit(const EncodedDataset& data, double learning_rate = 0.1, std::size_t epochs = 500) {
  if (data.size() == 0) throw ArgumentError("lr_train: empty dataset");
  if (!(learning_rate > 0.0)) throw ArgumentError("lr_train: learning rate must be positive");
  LogisticFit fit{{std::vector<double>(data.features.extent(1), 0.0), 0.0}, {}};
  fit.loss_history.reserve(epochs);
  for (std::size_t e = 0; e < epochs; ++e) {
    const LogisticLoss l = lr_loss(fit.model, data);
    fit.loss_history.push_back(l.loss);
    for (std::size_t f = 0; f < fit.model.weights.size(); ++f) {
      fit.model.weights[f] -= learning_rate * l.gradient.weights[f];
    }
    fit.model.intercept -= learning_rate * l.gradient.intercept;
  }
  return fit;
}

inline LogisticModel lr_train(const EncodedDataset& data, double learning_rate = 0.1, std::size_t epochs = 500) {
  return lr_fit(data, learning_rate, epochs).model;
}

inline ScoredLabel lr_predict(const LogisticModel& m, std::span<const double> x) {
  const double p = lr_probability(m, x);
  return {p >= 0.5 ? Label::Positive : Label::Negative, p};
}

}  // namespace vwnn
