#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "support/synthetic_data.hpp"
#include "vwnn/baselines.hpp"

using namespace vwnn;

namespace {

EncodedDataset make_dataset(const std::vector<std::vector<double>>& rows, const std::vector<int>& labels) {
  EncodedDataset d;
  std::vector<double> flat;
  for (const auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
  d.features = Tensor({rows.size(), rows[0].size()}, flat);
  d.labels = labels;
  d.source_rows.resize(rows.size());
  std::iota(d.source_rows.begin(), d.source_rows.end(), std::size_t{0});
  return d;
}

// Four positives and four negatives over two binary features.
EncodedDataset toy() {
  return make_dataset({{1, 1}, {1, 0}, {1, 1}, {0, 1}, {0, 0}, {0, 1}, {1, 0}, {0, 0}}, {1, 1, 1, 1, 0, 0, 0, 0});
}

std::vector<double> span_values(const Tensor& t) { return t.values(); }

}  // namespace

TEST(NaiveBayes, ToyPosteriorsByHand) {
  const auto m = nb_train(toy(), 1.0, {2, 2});
  EXPECT_DOUBLE_EQ(m.priors[0], 0.5);
  EXPECT_DOUBLE_EQ(m.priors[1], 0.5);
  // P(f=1 | pos) = (3 + 1) / (4 + 2), P(f=1 | neg) = (1 + 1) / (4 + 2) for both features.
  EXPECT_NEAR(m.conditionals[0][1][1], 4.0 / 6.0, 1e-15);
  EXPECT_NEAR(m.conditionals[1][0][1], 2.0 / 6.0, 1e-15);
  const std::vector<double> both{1, 1}, none{0, 0}, mixed{1, 0};
  EXPECT_NEAR(nb_predict(m, both).probability, 0.8, 1e-12);
  EXPECT_EQ(nb_predict(m, both).label, Label::Positive);
  EXPECT_NEAR(nb_predict(m, none).probability, 0.2, 1e-12);
  EXPECT_EQ(nb_predict(m, none).label, Label::Negative);
  // Evidence cancels exactly; ties go to Positive.
  EXPECT_EQ(nb_predict(m, mixed).label, Label::Positive);
  EXPECT_NEAR(nb_predict(m, mixed).probability, 0.5, 1e-12);
}

TEST(NaiveBayes, SmoothedTablesAreDistributions) {
  const auto data = preprocess(fixtures::synthetic_records(300, 1));
  const auto m = nb_train(data);
  const std::array<double, 2> n{static_cast<double>(data.negatives()), static_cast<double>(data.positives())};
  for (std::size_t f = 0; f < kNumFeatures; ++f) {
    const double c = static_cast<double>(m.layout[f]);
    for (std::size_t y = 0; y < 2; ++y) {
      double sum = 0.0;
      for (double p : m.conditionals[f][y]) {
        EXPECT_GE(p, 1.0 / (n[y] + c));
        EXPECT_LE(p, (n[y] + 1.0) / (n[y] + c));
        sum += p;
      }
      EXPECT_NEAR(sum, 1.0, 1e-12);
    }
  }
}

TEST(NaiveBayes, UnseenCategoryStillFinite) {
  // Age bin 5 never occurs in training.
  auto recs = fixtures::synthetic_records(100, 2);
  for (auto& r : recs) r.age = 30;
  const auto m = nb_train(preprocess(recs));
  RawRecord q;
  q.age = 80;
  const EncodedRow row = encode_record(q);
  const auto s = nb_predict(m, row.features);
  EXPECT_TRUE(std::isfinite(s.probability));
}

TEST(NaiveBayes, RowOrderDoesNotMatter) {
  const auto data = preprocess(fixtures::synthetic_records(200, 3));
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  RngStream rng(1, "perm");
  rng.shuffle(idx);
  const auto a = nb_train(data), b = nb_train(data.subset(idx));
  for (std::size_t f = 0; f < kNumFeatures; ++f) {
    for (std::size_t y = 0; y < 2; ++y) {
      for (std::size_t c = 0; c < a.layout[f]; ++c) {
        EXPECT_NEAR(a.conditionals[f][y][c], b.conditionals[f][y][c], 1e-15);
      }
    }
  }
}

TEST(NaiveBayes, Errors) {
  EXPECT_THROW(nb_train(toy(), 0.0, {2, 2}), ArgumentError);
  EXPECT_THROW(nb_train(toy(), 1.0, {2}), DimensionError);
  const auto one_class = make_dataset({{1, 0}, {0, 1}}, {1, 1});
  EXPECT_THROW(nb_train(one_class, 1.0, {2, 2}), ArgumentError);
}

TEST(Logistic, ZeroInitPredictsOneHalf) {
  const auto fit = lr_fit(toy(), 0.1, 0);
  const std::vector<double> x{1, 0};
  EXPECT_EQ(lr_probability(fit.model, x), 0.5);
}

TEST(Logistic, GradientMatchesFiniteDifferences) {
  const auto data = preprocess(fixtures::synthetic_records(80, 4));
  LogisticModel m{std::vector<double>(kNumFeatures), 0.1};
  RngStream rng(2, "lr-point");
  for (double& w : m.weights) w = rng.next_unit() - 0.5;
  const auto l = lr_loss(m, data);
  const double h = 1e-6;
  for (std::size_t f = 0; f <= kNumFeatures; ++f) {
    LogisticModel up = m, down = m;
    double& u = f < kNumFeatures ? up.weights[f] : up.intercept;
    double& d = f < kNumFeatures ? down.weights[f] : down.intercept;
    u += h;
    d -= h;
    const double numeric = (lr_loss(up, data).loss - lr_loss(down, data).loss) / (2 * h);
    const double analytic = f < kNumFeatures ? l.gradient.weights[f] : l.gradient.intercept;
    EXPECT_NEAR(analytic, numeric, 1e-7) << f;
  }
}

TEST(Logistic, LossNonIncreasing) {
  const auto fit = lr_fit(preprocess(fixtures::synthetic_records(300, 5)));
  ASSERT_EQ(fit.loss_history.size(), 500u);
  for (std::size_t e = 1; e < fit.loss_history.size(); ++e) {
    EXPECT_LE(fit.loss_history[e], fit.loss_history[e - 1] + 1e-15) << e;
  }
  EXPECT_NEAR(fit.loss_history.front(), std::log(2.0), 1e-12);
}

TEST(Logistic, SeparableDataFitsPerfectly) {
  const auto data = make_dataset({{1, 0.3}, {1, 0.9}, {1, 0.1}, {0, 0.2}, {0, 0.8}, {0, 0.5}}, {1, 1, 1, 0, 0, 0});
  const auto m = lr_train(data);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto row = span_values(data.row(i));
    EXPECT_EQ(lr_predict(m, row).label, data.labels[i] == 1 ? Label::Positive : Label::Negative) << i;
  }
}

TEST(Logistic, Errors) {
  EXPECT_THROW(lr_fit(toy(), 0.0), ArgumentError);
  const LogisticModel m{{0.0, 0.0}, 0.0};
  const std::vector<double> bad{1, 2, 3};
  EXPECT_THROW(lr_probability(m, bad), DimensionError);
}
