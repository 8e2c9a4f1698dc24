#include "cli.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace semisup {
namespace {

namespace fs = std::filesystem;

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("semisup_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(std::vector<std::string> args) {
    args.insert(args.begin(), "semisup");
    out_.str("");
    err_.str("");
    return cli::run(args, out_, err_);
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::size_t lines(const std::string& name) const {
    std::ifstream in(dir_ / name);
    std::size_t n = 0;
    for (std::string line; std::getline(in, line);) ++n;
    return n;
  }

  void gen_four_gauss(const std::string& fraction = "0.2") {
    ASSERT_EQ(run({"gen", "--dataset", "four-gauss", "--n", "80", "--sigma", "0.15", "--seed", "3",
                   "--labeled-fraction", fraction, "--out", dir_.string()}),
              0)
        << err_.str();
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

TEST_F(Cli, GenWritesEveryRow) {
  gen_four_gauss();
  EXPECT_EQ(lines("four-gauss.csv"), 81U);
  EXPECT_EQ(run({"gen", "--dataset", "pile", "--seed", "1", "--out", dir_.string()}), 0) << err_.str();
  EXPECT_TRUE(fs::exists(dir_ / "pile_meta.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "pile_signals.csv"));
}

TEST_F(Cli, GenIsDeterministicForASeed) {
  auto read = [&](const std::string& name) {
    std::ifstream in(dir_ / name);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  ASSERT_EQ(run({"gen", "--dataset", "four-gauss", "--n", "400", "--seed", "1", "--out", path("a")}), 0);
  ASSERT_EQ(run({"gen", "--dataset", "four-gauss", "--n", "400", "--seed", "1", "--out", path("b")}), 0);
  ASSERT_EQ(run({"gen", "--dataset", "four-gauss", "--n", "400", "--seed", "2", "--out", path("c")}), 0);
  EXPECT_EQ(read("a/four-gauss.csv"), read("b/four-gauss.csv"));
  EXPECT_NE(read("a/four-gauss.csv"), read("c/four-gauss.csv"));
}

TEST_F(Cli, MissingConfigNamesThePath) {
  EXPECT_EQ(run({"bench", "--config", path("nowhere.json"), "--out", dir_.string()}), 1);
  EXPECT_NE(err_.str().find("nowhere.json"), std::string::npos) << err_.str();
  EXPECT_EQ(run({"pile", "--config", path("nowhere.json"), "--out", dir_.string()}), 1);
  EXPECT_EQ(run({"gen", "--bogus-flag"}), 1);
  EXPECT_NE(err_.str().find("--dataset"), std::string::npos);
}

TEST_F(Cli, BadArgumentsExitWithOne) {
  EXPECT_EQ(run({}), 1);
  EXPECT_EQ(run({"frobnicate"}), 1);
  EXPECT_EQ(run({"gen", "--n", "banana"}), 1);
  EXPECT_EQ(run({"gen", "--dataset", "moons", "--out", dir_.string()}), 1);
  EXPECT_NE(err_.str().find("unknown dataset"), std::string::npos);
  EXPECT_EQ(run({"gen", "--labeled-fraction", "0", "--out", dir_.string()}), 1);
  EXPECT_EQ(run({"propagate"}), 1);
  EXPECT_EQ(run({"bench", "--out", dir_.string()}), 1);
  EXPECT_EQ(run({"--help"}), 0);
  EXPECT_NE(out_.str().find("propagate"), std::string::npos);
}

TEST_F(Cli, SampleWritesAPlan) {
  ASSERT_EQ(run({"gen", "--dataset", "imbalanced", "--n", "200", "--seed", "2", "--out", dir_.string()}), 0);
  ASSERT_EQ(run({"sample", "--data", path("imbalanced.csv"), "--strategy", "RANDOM", "--fraction", "0.3", "--seed",
                 "4", "--out", dir_.string()}),
            0)
      << err_.str();
  EXPECT_TRUE(fs::exists(dir_ / "plan_RANDOM_4.csv"));
  const auto summary = nlohmann::json::parse(std::ifstream(dir_ / "plan_summary.json"));
  EXPECT_TRUE(summary.is_object());
  EXPECT_EQ(run({"sample", "--data", path("imbalanced.csv"), "--strategy", "NOPE", "--out", dir_.string()}), 1);
}

TEST_F(Cli, PropagateEveryMethod) {
  gen_four_gauss();
  for (const std::string method : {"harmonic", "regularized", "anchor"}) {
    ASSERT_EQ(run({"propagate", "--data", path("four-gauss.csv"), "--method", method, "--graph", "knn", "--k", "8",
                   "--out", dir_.string()}),
              0)
        << method << ": " << err_.str();
    EXPECT_EQ(lines("soft_labels.csv"), 81U) << method;
  }
  EXPECT_EQ(run({"propagate", "--data", path("four-gauss.csv"), "--method", "magic", "--out", dir_.string()}), 1);
  EXPECT_EQ(run({"propagate", "--data", path("missing.csv"), "--out", dir_.string()}), 1);
}

TEST_F(Cli, TrainEveryClassifier) {
  gen_four_gauss("0.5");
  for (const std::string kind : {"knn", "linreg", "tsvm"}) {
    fs::remove(dir_ / "predictions.csv");
    ASSERT_EQ(run({"train", "--data", path("four-gauss.csv"), "--classifier", kind, "--out", dir_.string()}), 0)
        << kind << ": " << err_.str();
    EXPECT_EQ(lines("predictions.csv"), 81U) << kind;
  }
  EXPECT_TRUE(fs::exists(dir_ / "model.txt"));
}

TEST_F(Cli, SelftrainWritesTheAudit) {
  gen_four_gauss("1");
  ASSERT_EQ(run({"selftrain", "--data", path("four-gauss.csv"), "--classifier", "knn", "--passes", "3", "--seed", "5",
                 "--out", dir_.string()}),
            0)
      << err_.str();
  EXPECT_GT(lines("audit.csv"), 1U);
  const auto s = nlohmann::json::parse(std::ifstream(dir_ / "selftrain_summary.json"));
  EXPECT_TRUE(s.is_object());
  EXPECT_NE(out_.str().find("oracle queries"), std::string::npos);
}

TEST_F(Cli, RankWithAndWithoutALearnedMetric) {
  gen_four_gauss("1");
  ASSERT_EQ(run({"rank", "--data", path("four-gauss.csv"), "--positive", "0,1,2", "--negative", "40,41,60",
                 "--top-n", "10", "--out", dir_.string()}),
            0)
      << err_.str();
  EXPECT_EQ(lines("ranking.csv"), 75U);
  ASSERT_EQ(run({"rank", "--data", path("four-gauss.csv"), "--positive", "0,1,2", "--negative", "40,41,60", "--learn",
                 "--out", dir_.string()}),
            0)
      << err_.str();
  EXPECT_TRUE(fs::exists(dir_ / "metric.csv"));
  EXPECT_EQ(run({"rank", "--data", path("four-gauss.csv"), "--positive", "nope", "--negative", "1", "--out",
                 dir_.string()}),
            1);
}

TEST_F(Cli, BenchRunsTheGrid) {
  {
    std::ofstream f(dir_ / "bench.json");
    f << R"({"dataset": {"generator": "imbalanced", "n": 200, "minority_fraction": 0.1},
             "strategies": ["RANDOM"], "classifiers": ["knn", "linreg"]})";
  }
  ASSERT_EQ(run({"bench", "--config", path("bench.json"), "--seed", "1", "--out", path("report")}), 0) << err_.str();
  EXPECT_NE(out_.str().find("2 cells (0 failed)"), std::string::npos) << out_.str();
  EXPECT_EQ(lines("report/cells.csv"), 3U);
  EXPECT_TRUE(fs::exists(dir_ / "report" / "summary.json"));
  {
    std::ofstream f(dir_ / "broken.json");
    f << "{";
  }
  EXPECT_EQ(run({"bench", "--config", path("broken.json"), "--out", path("report")}), 1);
}

TEST_F(Cli, PilePrintsTheTable) {
  {
    std::ofstream f(dir_ / "pile.json");
    f << R"({"descriptors": ["DIFF"], "classifiers": ["knn"], "echo": {"nodes": 3}})";
  }
  ASSERT_EQ(run({"pile", "--config", path("pile.json"), "--seed", "2", "--out", path("pile")}), 0) << err_.str();
  EXPECT_NE(out_.str().find("DIFF"), std::string::npos) << out_.str();
}

}  // namespace
}  // namespace semisup
