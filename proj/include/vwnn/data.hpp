#pragma once

// Symptom questionnaire ingestion: CSV parsing, feature encoding,
// de-duplication and stratified partitioning.

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vwnn/errors.hpp"
#include "vwnn/rng.hpp"
#include "vwnn/tensor.hpp"

namespace vwnn {

inline constexpr std::size_t kNumFeatures = 16;
inline constexpr std::size_t kNumSymptoms = 14;

/// Column names in feature order, followed by the class column.
inline constexpr std::array<std::string_view, kNumFeatures + 1> kColumnNames = {
    "Age",          "Gender",         "Polyuria",        "Polydipsia",      "sudden weight loss", "weakness",
    "Polyphagia",   "Genital thrush", "visual blurring", "Itching",         "Irritability",       "delayed healing",
    "partial paresis", "muscle stiffness", "Alopecia",   "Obesity",         "class"};

enum class Label : std::uint8_t { Negative = 0, Positive = 1 };

inline std::string_view to_string(Label l) { return l == Label::Positive ? "Positive" : "Negative"; }

struct RawRecord {
  int age = 0;
  bool male = false;
  std::array<bool, kNumSymptoms> symptoms{};  // Polyuria .. Obesity, column order
  Label label = Label::Negative;

  bool operator==(const RawRecord&) const = default;
};

struct EncodedRow {
  std::array<double, kNumFeatures> features{};
  int label = 0;
};

struct EncodedDataset {
  Tensor features;                       // N x 16, entries in [0, 1]
  std::vector<int> labels;               // 1 = Positive
  std::vector<std::size_t> source_rows;  // index into the record list each row came from

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t positives() const { return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1)); }
  std::size_t negatives() const { return size() - positives(); }

  Tensor row(std::size_t i) const {
    const std::size_t d = features.extent(1);
    const auto begin = features.values().begin() + static_cast<std::ptrdiff_t>(i * d);
    return Tensor::vector(std::vector<double>(begin, begin + static_cast<std::ptrdiff_t>(d)));
  }

  EncodedDataset subset(const std::vector<std::size_t>& idx) const {
    if (idx.empty()) throw ArgumentError("subset: empty index list");
    const std::size_t d = features.extent(1);
    std::vector<double> flat;
    flat.reserve(idx.size() * d);
    EncodedDataset out;
    for (std::size_t i : idx) {
      if (i >= size()) throw ArgumentError("subset: index " + std::to_string(i) + " out of range");
      const auto begin = features.values().begin() + static_cast<std::ptrdiff_t>(i * d);
      flat.insert(flat.end(), begin, begin + static_cast<std::ptrdiff_t>(d));
      out.labels.push_back(labels[i]);
      out.source_rows.push_back(source_rows[i]);
    }
    out.features = Tensor({idx.size(), d}, std::move(flat));
    return out;
  }

  bool operator==(const EncodedDataset&) const = default;
};

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

/// Lowercase, trimmed, internal whitespace runs collapsed to one space.
inline std::string normalize(std::string_view s) {
  std::string out;
  bool space = false;
  for (char c : trim(s)) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = true;
      continue;
    }
    if (space && !out.empty()) out += ' ';
    space = false;
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
    } else if (c == ',' && !quoted) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

/// Column index in kColumnNames for a header cell, accepting "Sex" for "Gender".
inline std::optional<std::size_t> column_index(std::string_view header) {
  const std::string h = normalize(header);
  if (h == "sex") return 1;
  for (std::size_t i = 0; i < kColumnNames.size(); ++i) {
    if (h == normalize(kColumnNames[i])) return i;
  }
  return std::nullopt;
}

inline std::optional<bool> parse_yes_no(std::string_view v) {
  const std::string n = normalize(v);
  if (n == "yes") return true;
  if (n == "no") return false;
  return std::nullopt;
}

inline std::optional<bool> parse_gender_male(std::string_view v) {
  const std::string n = normalize(v);
  if (n == "male") return true;
  if (n == "female") return false;
  return std::nullopt;
}

inline std::optional<Label> parse_label(std::string_view v) {
  const std::string n = normalize(v);
  if (n == "positive") return Label::Positive;
  if (n == "negative") return Label::Negative;
  return std::nullopt;
}

inline std::optional<int> parse_age(std::string_view v) {
  const std::string t = trim(v);
  if (t.empty() || t.size() > 4) return std::nullopt;
  int age = 0;
  for (char c : t) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
    age = age * 10 + (c - '0');
  }
  if (age < 1) return std::nullopt;
  return age;
}

}  // namespace detail

/// Parses one questionnaire field into `rec`. `column` indexes kColumnNames.
/// Returns false when the value is not valid for that column.
inline bool set_field(RawRecord& rec, std::size_t column, std::string_view value) {
  if (column == 0) {
    auto a = detail::parse_age(value);
    if (!a) return false;
    rec.age = *a;
  } else if (column == 1) {
    auto g = detail::parse_gender_male(value);
    if (!g) return false;
    rec.male = *g;
  } else if (column <= kNumSymptoms + 1) {
    auto b = detail::parse_yes_no(value);
    if (!b) return false;
    rec.symptoms[column - 2] = *b;
  } else {
    auto l = detail::parse_label(value);
    if (!l) return false;
    rec.label = *l;
  }
  return true;
}

/// Parses the questionnaire CSV. Columns may appear in any order; header names
/// are matched case-insensitively. Row numbers in errors are file line numbers.
inline std::vector<RawRecord> parse_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::size_t> mapping;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (!detail::trim(line).empty()) break;
  }
  if (detail::trim(line).empty()) throw SchemaError("empty input: missing header row");

  std::array<bool, kColumnNames.size()> seen{};
  for (const auto& cell : detail::split_csv_line(line)) {
    auto idx = detail::column_index(cell);
    if (!idx) throw SchemaError("unknown column '" + cell + "'");
    if (seen[*idx]) throw SchemaError("duplicate column '" + std::string(kColumnNames[*idx]) + "'");
    seen[*idx] = true;
    mapping.push_back(*idx);
  }
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (!seen[i]) throw SchemaError("missing column '" + std::string(kColumnNames[i]) + "'");
  }

  std::vector<RawRecord> records;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != mapping.size()) {
      throw RowError(line_no, "*", "expected " + std::to_string(mapping.size()) + " fields, found " +
                                       std::to_string(cells.size()));
    }
    RawRecord rec;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (!set_field(rec, mapping[c], cells[c])) {
        throw RowError(line_no, std::string(kColumnNames[mapping[c]]), "unparseable value '" + cells[c] + "'");
      }
    }
    records.push_back(rec);
  }
  return records;
}

inline std::vector<RawRecord> parse_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open data file '" + path + "'");
  return parse_csv(in);
}

// ---------------------------------------------------------------------------
// Encoding

/// Ordinal age bin: <=35 -> 1, 36-45 -> 2, 46-55 -> 3, 56-65 -> 4, >65 -> 5.
/// Ages under 20 fall into the first bin.
inline int age_bin(int age) {
  if (age <= 35) return 1;
  if (age <= 45) return 2;
  if (age <= 55) return 3;
  if (age <= 65) return 4;
  return 5;
}

inline EncodedRow encode_record(const RawRecord& r) {
  EncodedRow row;
  row.features[0] = age_bin(r.age) / 5.0;
  row.features[1] = r.male ? 1.0 : 0.0;
  for (std::size_t i = 0; i < kNumSymptoms; ++i) row.features[i + 2] = r.symptoms[i] ? 1.0 : 0.0;
  row.label = r.label == Label::Positive ? 1 : 0;
  return row;
}

/// Drops rows whose (features, label) exactly repeat an earlier row.
inline EncodedDataset deduplicate(const EncodedDataset& data) {
  std::set<std::pair<std::vector<double>, int>> seen;
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (seen.emplace(data.row(i).values(), data.labels[i]).second) keep.push_back(i);
  }
  return data.subset(keep);
}

inline EncodedDataset preprocess(const std::vector<RawRecord>& records) {
  if (records.empty()) throw ArgumentError("preprocess: no records (empty dataset)");
  EncodedDataset all;
  std::vector<double> flat;
  flat.reserve(records.size() * kNumFeatures);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const EncodedRow row = encode_record(records[i]);
    flat.insert(flat.end(), row.features.begin(), row.features.end());
    all.labels.push_back(row.label);
    all.source_rows.push_back(i);
  }
  all.features = Tensor({records.size(), kNumFeatures}, std::move(flat));
  return deduplicate(all);
}

// ---------------------------------------------------------------------------
// Partitioning

struct FoldPlan {
  std::vector<std::vector<std::size_t>> folds;  // each sorted ascending
  std::uint64_t seed = 0;

  std::size_t k() const noexcept { return folds.size(); }

  /// Every index not in fold `f`, ascending.
  std::vector<std::size_t> training_indices(std::size_t f) const {
    std::vector<std::size_t> out;
    for (std::size_t g = 0; g < folds.size(); ++g) {
      if (g != f) out.insert(out.end(), folds[g].begin(), folds[g].end());
    }
    std::sort(out.begin(), out.end());
    return out;
  }
};

/// Shuffles each label group with RngStream(seed, "folds") and deals the
/// concatenated groups round-robin, so fold sizes and per-label counts each
/// differ by at most one.
inline FoldPlan stratified_kfold(const std::vector<int>& labels, std::size_t k, std::uint64_t seed) {
  const std::size_t n = labels.size();
  if (k < 2) throw ArgumentError("stratified_kfold: k must be at least 2, got " + std::to_string(k));
  if (k > n) {
    throw ArgumentError("stratified_kfold: k = " + std::to_string(k) + " exceeds dataset size " + std::to_string(n));
  }
  std::array<std::vector<std::size_t>, 2> groups;
  for (std::size_t i = 0; i < n; ++i) groups[labels[i] == 1 ? 1 : 0].push_back(i);
  RngStream rng(seed, "folds");
  FoldPlan plan{std::vector<std::vector<std::size_t>>(k), seed};
  std::size_t counter = 0;
  for (auto& g : groups) {
    rng.shuffle(g);
    for (std::size_t i : g) plan.folds[counter++ % k].push_back(i);
  }
  for (auto& f : plan.folds) std::sort(f.begin(), f.end());
  return plan;
}

inline FoldPlan stratified_kfold(const EncodedDataset& data, std::size_t k, std::uint64_t seed) {
  return stratified_kfold(data.labels, k, seed);
}

struct SplitPlan {
  std::vector<std::size_t> train;  // ascending
  std::vector<std::size_t> test;   // ascending
};

/// Stratified shuffle split with exactly N - round(N * train_fraction) test rows.
inline SplitPlan percentage_split(const std::vector<int>& labels, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ArgumentError("percentage_split: train fraction must lie in (0, 1), got " + std::to_string(train_fraction));
  }
  const std::size_t n = labels.size();
  const auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(n) * train_fraction));
  if (n_train == 0 || n_train >= n) {
    throw ArgumentError("percentage_split: fraction " + std::to_string(train_fraction) + " leaves an empty side for N = " +
                        std::to_string(n));
  }
  const std::size_t n_test = n - n_train;

  std::array<std::vector<std::size_t>, 2> groups;
  for (std::size_t i = 0; i < n; ++i) groups[labels[i] == 1 ? 1 : 0].push_back(i);

  // Largest-remainder allocation of the test quota across label groups;
  // ties go to the larger group, then to the negatives.
  std::array<std::size_t, 2> quota{};
  std::array<double, 2> remainder{};
  std::size_t assigned = 0;
  for (std::size_t g = 0; g < 2; ++g) {
    const double exact = static_cast<double>(groups[g].size()) * static_cast<double>(n_test) / static_cast<double>(n);
    quota[g] = static_cast<std::size_t>(std::floor(exact));
    remainder[g] = exact - std::floor(exact);
    assigned += quota[g];
  }
  while (assigned < n_test) {
    std::size_t g = remainder[1] > remainder[0] ||
                            (remainder[1] == remainder[0] && groups[1].size() > groups[0].size())
                        ? 1
                        : 0;
    if (quota[g] >= groups[g].size()) g = 1 - g;
    ++quota[g];
    remainder[g] = -1.0;
    ++assigned;
  }

  RngStream rng(seed, "split");
  SplitPlan plan;
  for (std::size_t g = 0; g < 2; ++g) {
    rng.shuffle(groups[g]);
    for (std::size_t i = 0; i < groups[g].size(); ++i) (i < quota[g] ? plan.test : plan.train).push_back(groups[g][i]);
  }
  std::sort(plan.train.begin(), plan.train.end());
  std::sort(plan.test.begin(), plan.test.end());
  return plan;
}

inline SplitPlan percentage_split(const EncodedDataset& data, double train_fraction, std::uint64_t seed) {
  return percentage_split(data.labels, train_fraction, seed);
}

}  // namespace vwnn
