#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "support/synthetic_data.hpp"
#include "vwnn/cli.hpp"

using namespace vwnn;

namespace {

namespace fs = std::filesystem;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "vwnn");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("vwnn_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
    write("data.csv", fixtures::to_csv(fixtures::synthetic_records(150, 11)));
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name), std::ios::binary) << text;
    return path(name);
  }

  fs::path dir_;
};

const std::vector<std::string> kAnswerLines = {
    "Age=52",           "Gender=Male",       "Polyuria=Yes",          "Polydipsia=Yes",
    "sudden weight loss=No", "weakness=Yes", "Polyphagia=No",         "Genital thrush=No",
    "visual blurring=No",    "Itching=Yes",  "Irritability=No",       "delayed healing=Yes",
    "partial paresis=No",    "muscle stiffness=No", "Alopecia=No",    "Obesity=No"};

std::string answers_text(std::size_t count) {
  std::string s = "# questionnaire\n";
  for (std::size_t i = 0; i < count; ++i) s += kAnswerLines[i] + "\n";
  return s;
}

}  // namespace

TEST_F(CliTest, ParamsListsPresetTotals) {
  const auto r = run({"params"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("561"), std::string::npos);
  EXPECT_NE(r.out.find("4657"), std::string::npos);
  EXPECT_NE(r.out.find("4368"), std::string::npos);
  EXPECT_NE(r.out.find("281"), std::string::npos);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"crossval", "--arch", "vw"}).code, 2);
  EXPECT_EQ(run({"crossval", "--data", path("data.csv"), "--arch", "cnn"}).code, 2);
  EXPECT_EQ(run({"crossval", "--data", path("data.csv"), "--arch", "vw", "--all"}).code, 2);
  EXPECT_EQ(run({"split", "--data", path("data.csv"), "--algo", "nb", "--fraction", "1.5"}).code, 2);
  EXPECT_EQ(run({"gradcheck", "--eps", "0.5"}).code, 2);
  EXPECT_EQ(run({"train", "--data", path("data.csv"), "--arch", "nn"}).code, 2);
  EXPECT_EQ(run({"params", "--arch", "rnn"}).code, 2);
}

TEST_F(CliTest, DataAndIoErrors) {
  EXPECT_EQ(run({"crossval", "--data", path("absent.csv"), "--algo", "nb"}).code, 4);
  write("bad.csv", "Age,Gender\n40,Male\n");
  EXPECT_EQ(run({"crossval", "--data", path("bad.csv"), "--algo", "nb"}).code, 3);
  write("empty.csv", "");
  EXPECT_EQ(run({"crossval", "--data", path("empty.csv"), "--algo", "nb"}).code, 3);
  write("model.bin", "not a model");
  write("answers.txt", answers_text(16));
  const auto r = run({"predict", "--model", path("model.bin"), "--answers", path("answers.txt")});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("offset"), std::string::npos);
}

TEST_F(CliTest, CrossvalReportIsDeterministic) {
  const std::vector<std::string> args = {"crossval", "--data", path("data.csv"), "--algo", "nb", "--folds", "5"};
  const auto a = run(args), b = run(args);
  EXPECT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out.find("Correct %"), std::string::npos);
}

TEST_F(CliTest, SplitWithJson) {
  const auto r = run({"split", "--data", path("data.csv"), "--algo", "lr", "--json", path("r.json")});
  EXPECT_EQ(r.code, 0);
  std::ifstream in(path("r.json"));
  const auto j = nlohmann::json::parse(in);
  EXPECT_EQ(j["entries"][0]["algorithm"], "lr");
}

TEST_F(CliTest, TrainThenPredict) {
  const auto t = run({"train", "--data", path("data.csv"), "--arch", "vb", "--epochs", "5", "--out", path("m.bin")});
  ASSERT_EQ(t.code, 0) << t.err;
  EXPECT_NE(t.out.find("parameters: 281"), std::string::npos);

  write("answers.txt", answers_text(16));
  const auto p = run({"predict", "--model", path("m.bin"), "--answers", path("answers.txt")});
  ASSERT_EQ(p.code, 0) << p.err;
  EXPECT_NE(p.out.find("probability"), std::string::npos);

  // Flags override the file and the --sex alias is accepted.
  const auto q = run({"predict", "--model", path("m.bin"), "--answers", path("answers.txt"), "--sex", "female"});
  EXPECT_EQ(q.code, 0) << q.err;
}

TEST_F(CliTest, PredictNamesMissingAnswers) {
  run({"train", "--data", path("data.csv"), "--arch", "nn", "--epochs", "1", "--out", path("m.bin")});
  write("answers.txt", answers_text(14));
  const auto r = run({"predict", "--model", path("m.bin"), "--answers", path("answers.txt")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("missing answers (2)"), std::string::npos);
  EXPECT_NE(r.err.find("'Alopecia'"), std::string::npos);
  EXPECT_NE(r.err.find("'Obesity'"), std::string::npos);

  const auto bad = run({"predict", "--model", path("m.bin"), "--answers", path("answers.txt"), "--alopecia", "No",
                        "--obesity", "perhaps"});
  EXPECT_EQ(bad.code, 2);
}

TEST_F(CliTest, GradcheckPasses) {
  const auto r = run({"gradcheck", "--arch", "vb", "--samples", "2"});
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("PASS"), std::string::npos);
}
