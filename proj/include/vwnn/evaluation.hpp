#pragma once

// Accuracy accounting, cross-validation and percentage-split drivers, and
// comparison-table rendering.

#include <algorithm>
#include <array>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <future>
#include <iomanip>
#include <iterator>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "vwnn/baselines.hpp"
#include "vwnn/data.hpp"
#include "vwnn/errors.hpp"
#include "vwnn/network.hpp"
#include "vwnn/rng.hpp"

namespace vwnn {

enum class Algorithm { NB, LR, NN, VB, VW };

inline constexpr std::array<Algorithm, 5> kAllAlgorithms = {Algorithm::NB, Algorithm::LR, Algorithm::NN, Algorithm::VB,
                                                            Algorithm::VW};

inline std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::NB: return "nb";
    case Algorithm::LR: return "lr";
    case Algorithm::NN: return "nn";
    case Algorithm::VB: return "vb";
    case Algorithm::VW: return "vw";
  }
  return "?";
}

inline Algorithm algorithm_from_string(std::string_view s) {
  for (Algorithm a : kAllAlgorithms) {
    if (to_string(a) == s) return a;
  }
  throw ArgumentError("unknown algorithm '" + std::string(s) + "' (valid: nb, lr, nn, vb, vw)");
}

struct AccuracyCounts {
  std::size_t correct = 0;
  std::size_t incorrect = 0;
  double percent = 0.0;
};

inline AccuracyCounts accuracy(const std::vector<Label>& predictions, const std::vector<Label>& truth) {
  if (predictions.size() != truth.size()) {
    throw ArgumentError("accuracy: " + std::to_string(predictions.size()) + " predictions for " +
                        std::to_string(truth.size()) + " labels");
  }
  if (truth.empty()) throw ArgumentError("accuracy: empty input");
  AccuracyCounts c;
  for (std::size_t i = 0; i < truth.size(); ++i) (predictions[i] == truth[i] ? c.correct : c.incorrect) += 1;
  c.percent = 100.0 * static_cast<double>(c.correct) / static_cast<double>(truth.size());
  return c;
}

/// One column of a comparison table.
struct EvalEntry {
  std::string algorithm;  // "nb", "lr", "j48", "rf", "nn", "vb", "vw"
  std::size_t total = 0;
  std::size_t correct = 0;
  bool quoted = false;  // reference value reproduced from the literature, not measured

  std::size_t incorrect() const noexcept { return total - correct; }
  double accuracy_percent() const { return total ? 100.0 * static_cast<double>(correct) / static_cast<double>(total) : 0.0; }
  bool operator==(const EvalEntry&) const = default;
};

enum class Protocol { CrossValidation, PercentageSplit };

/// J48 and random-forest results for this dataset as published; they are
/// shown for comparison only and never computed here.
inline std::array<EvalEntry, 2> quoted_reference_entries(Protocol p) {
  if (p == Protocol::CrossValidation) return {EvalEntry{"j48", 500, 478, true}, EvalEntry{"rf", 500, 487, true}};
  return {EvalEntry{"j48", 100, 95, true}, EvalEntry{"rf", 100, 99, true}};
}

struct EvalOptions {
  TrainConfig train;  // seed field is overridden per fold
  double nb_alpha = 1.0;
  double lr_learning_rate = 0.1;
  std::size_t lr_epochs = 500;
  bool parallel = false;
};

/// Trains `algo` on `train_set` and labels every row of `test_set`.
inline std::vector<Label> fit_and_predict(Algorithm algo, const EncodedDataset& train_set,
                                          const EncodedDataset& test_set, const EvalOptions& opt,
                                          std::uint64_t train_seed) {
  std::vector<Label> out;
  out.reserve(test_set.size());
  const std::size_t d = test_set.features.extent(1);
  auto row_span = [&](std::size_t i) { return test_set.features.flat().subspan(i * d, d); };
  switch (algo) {
    case Algorithm::NB: {
      const auto m = nb_train(train_set, opt.nb_alpha);
      for (std::size_t i = 0; i < test_set.size(); ++i) out.push_back(nb_predict(m, row_span(i)).label);
      break;
    }
    case Algorithm::LR: {
      const auto m = lr_train(train_set, opt.lr_learning_rate, opt.lr_epochs);
      for (std::size_t i = 0; i < test_set.size(); ++i) out.push_back(lr_predict(m, row_span(i)).label);
      break;
    }
    case Algorithm::NN:
    case Algorithm::VB:
    case Algorithm::VW: {
      TrainConfig cfg = opt.train;
      cfg.seed = train_seed;
      const auto result = train(build_arch(std::string(to_string(algo))), train_set, cfg);
      for (std::size_t i = 0; i < test_set.size(); ++i) out.push_back(predict(result.network, test_set.row(i)).label);
      break;
    }
  }
  return out;
}

inline std::vector<Label> labels_of(const EncodedDataset& d) {
  std::vector<Label> out;
  out.reserve(d.size());
  for (int y : d.labels) out.push_back(y == 1 ? Label::Positive : Label::Negative);
  return out;
}

/// Training seed for fold f: first draw of RngStream(seed, "fold-f").
inline std::uint64_t fold_seed(std::uint64_t seed, std::size_t fold) {
  return RngStream(seed, "fold-" + std::to_string(fold)).next_u64();
}

struct CrossvalResult {
  EvalEntry entry;
  std::vector<std::size_t> fold_correct;
  std::vector<std::size_t> fold_total;
};

/// Stratified k-fold evaluation with counts pooled over folds, so the entry's
/// total equals N.
inline CrossvalResult run_crossval(Algorithm algo, const EncodedDataset& data, std::size_t k, std::uint64_t seed,
                                   const EvalOptions& opt = {}) {
  const FoldPlan plan = stratified_kfold(data, k, seed);

  auto run_fold = [&](std::size_t f) -> AccuracyCounts {
    const std::vector<std::size_t> train_idx = plan.training_indices(f);
    const std::vector<std::size_t>& test_idx = plan.folds[f];
    std::vector<std::size_t> overlap;
    std::set_intersection(train_idx.begin(), train_idx.end(), test_idx.begin(), test_idx.end(),
                          std::back_inserter(overlap));
    if (!overlap.empty() || train_idx.size() + test_idx.size() != data.size()) {
      throw ContractError("fold " + std::to_string(f) + ": training and test indices overlap");
    }
    const EncodedDataset test_set = data.subset(test_idx);
    try {
      const auto preds = fit_and_predict(algo, data.subset(train_idx), test_set, opt, fold_seed(seed, f));
      return accuracy(preds, labels_of(test_set));
    } catch (const std::exception& e) {
      throw std::runtime_error("cross-validation fold " + std::to_string(f) + " failed: " + e.what());
    }
  };

  std::vector<AccuracyCounts> per_fold(k);
  if (opt.parallel) {
    std::vector<std::future<AccuracyCounts>> jobs;
    for (std::size_t f = 0; f < k; ++f) jobs.push_back(std::async(std::launch::async, run_fold, f));
    for (std::size_t f = 0; f < k; ++f) per_fold[f] = jobs[f].get();
  } else {
    for (std::size_t f = 0; f < k; ++f) per_fold[f] = run_fold(f);
  }

  CrossvalResult r;
  r.entry.algorithm = std::string(to_string(algo));
  for (std::size_t f = 0; f < k; ++f) {
    r.fold_correct.push_back(per_fold[f].correct);
    r.fold_total.push_back(per_fold[f].correct + per_fold[f].incorrect);
    r.entry.correct += per_fold[f].correct;
    r.entry.total += r.fold_total.back();
  }
  return r;
}

/// Train on the stratified `fraction` side, evaluate on the rest.
inline EvalEntry run_split(Algorithm algo, const EncodedDataset& data, double fraction, std::uint64_t seed,
                           const EvalOptions& opt = {}) {
  const SplitPlan plan = percentage_split(data, fraction, seed);
  const EncodedDataset test_set = data.subset(plan.test);
  const auto preds =
      fit_and_predict(algo, data.subset(plan.train), test_set, opt, RngStream(seed, "split-train").next_u64());
  const AccuracyCounts c = accuracy(preds, labels_of(test_set));
  return {std::string(to_string(algo)), test_set.size(), c.correct, false};
}

// ---------------------------------------------------------------------------
// Rendering

/// One decimal place, half-up, computed in integers: 487/500 -> "97.4%".
inline std::string format_percent(std::size_t part, std::size_t total) {
  if (total == 0) return "-";
  const std::uint64_t tenths = (2000ULL * part + total) / (2ULL * total);
  return std::to_string(tenths / 10) + "." + std::to_string(tenths % 10) + "%";
}

inline std::string column_title(const EvalEntry& e) {
  std::string t = e.algorithm;
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return e.quoted ? t + "*" : t;
}

inline constexpr std::array<std::string_view, 7> kColumnOrder = {"nb", "lr", "j48", "rf", "nn", "vb", "vw"};

inline std::vector<EvalEntry> ordered_entries(std::vector<EvalEntry> entries) {
  auto rank = [](const EvalEntry& e) {
    return static_cast<std::size_t>(std::find(kColumnOrder.begin(), kColumnOrder.end(), e.algorithm) -
                                    kColumnOrder.begin());
  };
  std::stable_sort(entries.begin(), entries.end(), [&](const auto& a, const auto& b) { return rank(a) < rank(b); });
  return entries;
}

inline std::string protocol_title(Protocol p) {
  return p == Protocol::CrossValidation ? "cross-validation" : "percentage split";
}

/// Text comparison table: columns in NB, LR, J48, RF, NN, VB, VW order;
/// quoted columns carry an asterisk on every cell and a footnote.
inline std::string render_report(const std::vector<EvalEntry>& entries, Protocol protocol,
                                 const std::string& detail = {}) {
  if (entries.empty()) throw ArgumentError("render_report: no entries");
  const auto cols = ordered_entries(entries);
  const bool any_quoted = std::any_of(cols.begin(), cols.end(), [](const auto& e) { return e.quoted; });

  std::ostringstream os;
  os << "Comparison of evaluation metrics (" << protocol_title(protocol);
  if (!detail.empty()) os << ", " << detail;
  os << ")\n";
  constexpr int label_w = 18, col_w = 9;
  auto row = [&](std::string_view label, auto cell) {
    os << std::left << std::setw(label_w) << label << std::right;
    for (const auto& e : cols) {
      std::string s = cell(e);
      if (e.quoted) s += "*";
      os << std::setw(col_w) << s;
    }
    os << "\n";
  };
  os << std::left << std::setw(label_w) << "Metric" << std::right;
  for (const auto& e : cols) os << std::setw(col_w) << column_title(e);
  os << "\n";
  row("Total instances", [](const EvalEntry& e) { return std::to_string(e.total); });
  row("Correct", [](const EvalEntry& e) { return std::to_string(e.correct); });
  row("Correct %", [](const EvalEntry& e) { return format_percent(e.correct, e.total); });
  row("Incorrect", [](const EvalEntry& e) { return std::to_string(e.incorrect()); });
  row("Incorrect %", [](const EvalEntry& e) { return format_percent(e.incorrect(), e.total); });
  if (any_quoted) os << "* published reference value, not computed by this tool\n";
  return os.str();
}

inline nlohmann::json report_json(const std::vector<EvalEntry>& entries, Protocol protocol, std::uint64_t seed) {
  nlohmann::json j;
  j["protocol"] = protocol == Protocol::CrossValidation ? "crossval" : "split";
  j["seed"] = seed;
  j["entries"] = nlohmann::json::array();
  for (const auto& e : ordered_entries(entries)) {
    j["entries"].push_back({{"algorithm", e.algorithm},
                            {"total", e.total},
                            {"correct", e.correct},
                            {"incorrect", e.incorrect()},
                            {"accuracy", format_percent(e.correct, e.total)},
                            {"quoted", e.quoted}});
  }
  return j;
}

}  // namespace vwnn
