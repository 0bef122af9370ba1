#pragma once

// Command-line front end. `run_cli` is the whole program minus process
// plumbing, so tests can drive it with string streams.
//
// Exit codes: 0 success, 1 check failed, 2 usage, 3 data, 4 I/O.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vwnn/data.hpp"
#include "vwnn/errors.hpp"
#include "vwnn/evaluation.hpp"
#include "vwnn/network.hpp"
#include "vwnn/serialize.hpp"

namespace vwnn::cli {

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kUsage = 2, kDataError = 3, kIoError = 4 };

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CliConfig {
  std::string data_path;
  std::string arch;
  std::string algo;
  bool all = false;
  std::string out_path;
  std::string model_path;
  std::string answers_path;
  std::string json_path;
  std::uint64_t seed = 42;
  std::size_t folds = 10;
  double fraction = 0.8;
  std::optional<std::size_t> epochs;
  std::optional<double> learning_rate;
  double eps = 1e-5;
  std::size_t samples = 20;
  bool parallel = false;
  std::map<std::size_t, std::string> answers;  // keyed by column index
};

namespace detail {

/// --flag name for a questionnaire column: lowercase, spaces become dashes.
inline std::string flag_name(std::string_view column) {
  std::string s = vwnn::detail::normalize(column);
  for (char& c : s) {
    if (c == ' ') c = '-';
  }
  return s;
}

inline EncodedDataset load_dataset(const std::string& path) {
  const auto records = parse_csv_file(path);
  if (records.empty()) throw SchemaError("'" + path + "' contains no data rows");
  return preprocess(records);
}

inline TrainConfig train_config(const CliConfig& c) {
  TrainConfig t;
  t.seed = c.seed;
  if (c.epochs) t.epochs = *c.epochs;
  if (c.learning_rate) t.learning_rate = *c.learning_rate;
  validate(t);
  return t;
}

inline std::vector<Algorithm> selected_algorithms(const CliConfig& c) {
  const int chosen = (c.all ? 1 : 0) + (c.arch.empty() ? 0 : 1) + (c.algo.empty() ? 0 : 1);
  if (chosen != 1) throw UsageError("choose exactly one of --arch, --algo or --all");
  if (c.all) return {kAllAlgorithms.begin(), kAllAlgorithms.end()};
  if (!c.arch.empty()) {
    build_arch(c.arch);  // validates the name
    return {algorithm_from_string(c.arch)};
  }
  return {algorithm_from_string(c.algo)};
}

inline void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << j.dump(2) << "\n";
  if (!out) throw IoError("write to '" + path + "' failed");
}

inline std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

inline std::string scientific(double v) {
  std::ostringstream os;
  os << std::scientific << std::setprecision(3) << v;
  return os.str();
}

}  // namespace detail

inline int cmd_params(const CliConfig& c, std::ostream& out) {
  const std::vector<std::string> names = c.arch.empty() ? arch_names() : std::vector<std::string>{c.arch};
  for (const auto& name : names) {
    const NetworkSpec spec = build_arch(name);
    out << name << "\n";
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
      const LayerDesc& d = spec.layers[i];
      std::ostringstream dims;
      dims << d.n_in << " -> " << d.n_out;
      out << "  layer " << i << "  " << std::left << std::setw(10) << to_string(d.kind) << std::setw(10) << dims.str()
          << std::right << std::setw(8) << param_count(d) << "\n";
    }
    out << "  total" << std::setw(33) << param_count(spec) << "\n";
  }
  return kOk;
}

inline int cmd_gradcheck(const CliConfig& c, std::ostream& out) {
  if (!(c.eps > 1e-8 && c.eps < 1e-2)) throw UsageError("--eps must lie in (1e-8, 1e-2)");
  if (c.samples == 0) throw UsageError("--samples must be positive");
  const std::vector<std::string> names = c.arch.empty() ? arch_names() : std::vector<std::string>{c.arch};
  constexpr double kTolerance = 1e-4;
  bool ok = true;
  for (const auto& name : names) {
    const auto r = gradcheck_spec(build_arch(name), c.samples, c.eps, c.seed);
    const bool pass = r.max_relative_error < kTolerance;
    ok = ok && pass;
    out << name << ": max relative error " << detail::scientific(r.max_relative_error) << " over " << c.samples
        << " samples (" << r.parameters_checked << " partials) " << (pass ? "PASS" : "FAIL") << "\n";
  }
  return ok ? kOk : kCheckFailed;
}

inline int cmd_train(const CliConfig& c, std::ostream& out) {
  if (c.data_path.empty()) throw UsageError("train: --data is required");
  if (c.arch.empty()) throw UsageError("train: --arch is required");
  if (c.out_path.empty()) throw UsageError("train: --out is required");
  const NetworkSpec spec = build_arch(c.arch);
  const TrainConfig cfg = detail::train_config(c);
  const EncodedDataset data = detail::load_dataset(c.data_path);
  const TrainResult result = train(spec, data, cfg);
  save(result.network, c.out_path);
  out << "arch: " << c.arch << "\n";
  out << "parameters: " << param_count(result.network) << "\n";
  out << "instances: " << data.size() << " (" << data.positives() << " positive, " << data.negatives()
      << " negative)\n";
  out << "epochs: " << cfg.epochs << "\n";
  out << "final training loss: " << detail::fixed(result.history.back().mean_loss, 6) << "\n";
  out << "final training accuracy: " << detail::fixed(100.0 * result.history.back().accuracy, 1) << "%\n";
  out << "model written to " << c.out_path << "\n";
  return kOk;
}

inline EvalOptions eval_options(const CliConfig& c) {
  EvalOptions opt;
  opt.train = detail::train_config(c);
  opt.parallel = c.parallel;
  return opt;
}

inline int cmd_crossval(const CliConfig& c, std::ostream& out) {
  if (c.data_path.empty()) throw UsageError("crossval: --data is required");
  const auto algos = detail::selected_algorithms(c);
  const EvalOptions opt = eval_options(c);
  const EncodedDataset data = detail::load_dataset(c.data_path);
  if (c.folds < 2 || c.folds > data.size()) {
    throw UsageError("--folds must lie in [2, " + std::to_string(data.size()) + "]");
  }
  std::vector<EvalEntry> entries;
  for (Algorithm a : algos) entries.push_back(run_crossval(a, data, c.folds, c.seed, opt).entry);
  if (c.all) {
    for (const auto& q : quoted_reference_entries(Protocol::CrossValidation)) entries.push_back(q);
  }
  out << render_report(entries, Protocol::CrossValidation,
                       std::to_string(c.folds) + " folds, seed " + std::to_string(c.seed) + ", N = " +
                           std::to_string(data.size()));
  if (!c.json_path.empty()) detail::write_json(c.json_path, report_json(entries, Protocol::CrossValidation, c.seed));
  return kOk;
}

inline int cmd_split(const CliConfig& c, std::ostream& out) {
  if (c.data_path.empty()) throw UsageError("split: --data is required");
  if (!(c.fraction > 0.0 && c.fraction < 1.0)) throw UsageError("--fraction must lie in (0, 1)");
  const auto algos = detail::selected_algorithms(c);
  const EvalOptions opt = eval_options(c);
  const EncodedDataset data = detail::load_dataset(c.data_path);
  std::vector<EvalEntry> entries;
  for (Algorithm a : algos) entries.push_back(run_split(a, data, c.fraction, c.seed, opt));
  if (c.all) {
    for (const auto& q : quoted_reference_entries(Protocol::PercentageSplit)) entries.push_back(q);
  }
  const auto train_pct = static_cast<int>(std::lround(c.fraction * 100.0));
  out << render_report(entries, Protocol::PercentageSplit,
                       std::to_string(train_pct) + ":" + std::to_string(100 - train_pct) + ", seed " +
                           std::to_string(c.seed) + ", N = " + std::to_string(data.size()));
  if (!c.json_path.empty()) detail::write_json(c.json_path, report_json(entries, Protocol::PercentageSplit, c.seed));
  return kOk;
}

/// Reads `name=value` lines; names are questionnaire column names.
inline std::map<std::size_t, std::string> read_answers_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open answers file '" + path + "'");
  std::map<std::size_t, std::string> answers;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = vwnn::detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find_first_of("=:");
    if (eq == std::string::npos) throw UsageError("answers line " + std::to_string(line_no) + ": expected name=value");
    auto idx = vwnn::detail::column_index(t.substr(0, eq));
    if (!idx || *idx >= kNumFeatures) {
      throw UsageError("answers line " + std::to_string(line_no) + ": unknown field '" + t.substr(0, eq) + "'");
    }
    answers[*idx] = vwnn::detail::trim(t.substr(eq + 1));
  }
  return answers;
}

inline int cmd_predict(const CliConfig& c, std::ostream& out) {
  if (c.model_path.empty()) throw UsageError("predict: --model is required");
  std::map<std::size_t, std::string> answers;
  if (!c.answers_path.empty()) answers = read_answers_file(c.answers_path);
  for (const auto& [k, v] : c.answers) answers[k] = v;

  std::vector<std::string> missing;
  for (std::size_t i = 0; i < kNumFeatures; ++i) {
    if (!answers.count(i)) missing.push_back(std::string(kColumnNames[i]));
  }
  if (!missing.empty()) {
    std::string msg = "missing answers (" + std::to_string(missing.size()) + "):";
    for (const auto& m : missing) msg += " '" + m + "'";
    throw UsageError(msg);
  }
  RawRecord rec;
  for (const auto& [i, v] : answers) {
    if (!set_field(rec, i, v)) throw UsageError("invalid answer '" + v + "' for '" + std::string(kColumnNames[i]) + "'");
  }
  const Network net = load(c.model_path);
  const EncodedRow row = encode_record(rec);
  const Prediction p = predict(net, Tensor::vector({row.features.begin(), row.features.end()}));
  out << to_string(p.label) << " (probability " << detail::fixed(p.probability, 3) << ")\n";
  return kOk;
}

/// Parses argv and dispatches. Never throws; maps failures to exit codes.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Variable-weight neural networks for diabetes symptom screening"};
  app.require_subcommand(1);
  CliConfig c;

  const std::string arch_help = "architecture preset: nn, vw or vb";
  const std::string seed_help = "random seed (default 42)";

  auto* train_cmd = app.add_subcommand("train", "train a preset on the full dataset and save the model");
  train_cmd->add_option("--data", c.data_path, "questionnaire CSV file");
  train_cmd->add_option("--arch", c.arch, arch_help);
  train_cmd->add_option("--out", c.out_path, "model file to write");
  train_cmd->add_option("--seed", c.seed, seed_help);
  train_cmd->add_option("--epochs", c.epochs, "training epochs (default 200)");
  train_cmd->add_option("--lr", c.learning_rate, "Adam learning rate (default 1e-3)");

  auto add_eval_flags = [&](CLI::App* cmd) {
    cmd->add_option("--data", c.data_path, "questionnaire CSV file");
    cmd->add_option("--arch", c.arch, arch_help);
    cmd->add_option("--algo", c.algo, "algorithm: nb, lr, nn, vb or vw");
    cmd->add_flag("--all", c.all, "evaluate every algorithm and print the full comparison table");
    cmd->add_option("--seed", c.seed, seed_help);
    cmd->add_option("--json", c.json_path, "also write the report as JSON to this file");
    cmd->add_option("--epochs", c.epochs, "training epochs for network presets (default 200)");
    cmd->add_option("--lr", c.learning_rate, "Adam learning rate (default 1e-3)");
  };
  auto* cv_cmd = app.add_subcommand("crossval", "stratified k-fold cross-validation");
  add_eval_flags(cv_cmd);
  cv_cmd->add_option("--folds", c.folds, "number of folds (default 10)");
  cv_cmd->add_flag("--parallel", c.parallel, "train folds concurrently (output is unchanged)");

  auto* split_cmd = app.add_subcommand("split", "stratified percentage split");
  add_eval_flags(split_cmd);
  split_cmd->add_option("--fraction", c.fraction, "training fraction (default 0.8)");

  auto* predict_cmd = app.add_subcommand("predict", "classify one questionnaire with a saved model");
  predict_cmd->add_option("--model", c.model_path, "model file");
  predict_cmd->add_option("--answers", c.answers_path, "file of name=value answers");
  std::vector<std::string> answer_values(kNumFeatures);
  std::vector<CLI::Option*> answer_opts;
  for (std::size_t i = 0; i < kNumFeatures; ++i) {
    const std::string help = i == 0 ? "age in years" : i == 1 ? "male or female" : "yes or no";
    answer_opts.push_back(predict_cmd->add_option("--" + detail::flag_name(kColumnNames[i]), answer_values[i], help));
  }
  predict_cmd->add_option("--sex", answer_values[1], "alias of --gender")->excludes(answer_opts[1]);

  auto* gc_cmd = app.add_subcommand("gradcheck", "compare analytic gradients with central differences");
  gc_cmd->add_option("--arch", c.arch, arch_help + " (default: all)");
  gc_cmd->add_option("--eps", c.eps, "finite-difference step (default 1e-5)");
  gc_cmd->add_option("--samples", c.samples, "number of random samples (default 20)");
  gc_cmd->add_option("--seed", c.seed, seed_help);

  auto* params_cmd = app.add_subcommand("params", "print per-layer parameter counts");
  params_cmd->add_option("--arch", c.arch, arch_help + " (default: all)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kUsage;
  }

  for (std::size_t i = 0; i < kNumFeatures; ++i) {
    if (!answer_values[i].empty()) c.answers[i] = answer_values[i];
  }

  CLI::App* active = app.get_subcommands().front();
  try {
    if (active == train_cmd) return cmd_train(c, out);
    if (active == cv_cmd) return cmd_crossval(c, out);
    if (active == split_cmd) return cmd_split(c, out);
    if (active == predict_cmd) return cmd_predict(c, out);
    if (active == gc_cmd) return cmd_gradcheck(c, out);
    if (active == params_cmd) return cmd_params(c, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n" << active->help();
    return kUsage;
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kIoError;
  } catch (const SchemaError& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const RowError& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const FormatError& e) {
    err << "model file error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kUsage;
}

}  // namespace vwnn::cli
