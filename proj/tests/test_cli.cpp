// Copyright 2026 The cagr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

#include "cagr/cli.hpp"

namespace cagr {
namespace {

namespace fs = std::filesystem;

int run_cli(std::initializer_list<std::string> args) {
  std::vector<std::string> storage{"cagr"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());
  return run(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root = fs::temp_directory_path() / ("cagr_cli_" + std::string(
        ::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(root);
    fs::create_directories(root);
    std::ofstream(root / "cfg") << "dim = 8\nfeature_dim = 4\nbehavior_dim = 4\nattn_dim = 8\n"
                                   "interests = 2\nnegatives = 8\nepochs = 2\nlr = 0.003\n";
  }
  void TearDown() override { fs::remove_all(root); }
  std::string p(const char* name) const { return (root / name).string(); }
  fs::path root;
};

TEST_F(CliTest, FullPipeline) {
  ASSERT_EQ(run_cli({"gen-synth", "--users", "100", "--items", "500", "--seed", "7", "--out", p("data")}), 0);
  EXPECT_TRUE(fs::exists(root / "data" / "interactions.tsv"));
  EXPECT_TRUE(fs::exists(root / "data" / "items.tsv"));
  ASSERT_EQ(run_cli({"train", "--config", p("cfg"), "--data", p("data"), "--out", p("model"), "--quiet"}), 0);
  EXPECT_EQ(slurp(root / "model" / "metrics.tsv").substr(0, 11), "epoch\tloss\n");
  ASSERT_EQ(run_cli({"eval", "--model", p("model"), "--data", p("data"), "--k", "20,50", "--out", p("report.txt")}), 0);
  const auto report = slurp(root / "report.txt");
  EXPECT_NE(report.find("recall"), std::string::npos);
  EXPECT_NE(report.find("50"), std::string::npos);
  ASSERT_EQ(run_cli({"build-index", "--model", p("model"), "--out", p("index.txt")}), 0);
  ASSERT_EQ(run_cli({"recommend", "--model", p("model"), "--index", p("index.txt"), "--user", "u01",
                     "--top-n", "20", "--out", p("recs.tsv"), "--embeddings-out", p("users.tsv")}),
            0);
  const auto recs = slurp(root / "recs.tsv");
  const auto rows = std::count(recs.begin(), recs.end(), '\n');
  EXPECT_GT(rows, 0);
  EXPECT_LE(rows, 20);
  EXPECT_EQ(recs.rfind("u01\t1\t", 0), 0u);
  const auto users = slurp(root / "users.tsv");
  EXPECT_EQ(std::count(users.begin(), users.end(), '\n'), 2);
}

TEST_F(CliTest, ReportsAreByteIdenticalAcrossRuns) {
  std::vector<std::string> reports;
  for (const char* run : {"a", "b"}) {
    const auto dir = root / run;
    const auto d = [&](const char* n) { return (dir / n).string(); };
    ASSERT_EQ(run_cli({"gen-synth", "--users", "60", "--items", "200", "--seed", "3", "--out", d("data")}), 0);
    ASSERT_EQ(run_cli({"train", "--config", p("cfg"), "--data", d("data"), "--out", d("model"), "--seed", "11", "--quiet"}), 0);
    ASSERT_EQ(run_cli({"eval", "--model", d("model"), "--data", d("data"), "--format", "kv", "--out", d("r.txt")}), 0);
    reports.push_back(slurp(dir / "r.txt"));
  }
  EXPECT_EQ(reports[0], reports[1]);
  EXPECT_FALSE(reports[0].empty());
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(run_cli({}), 1);
  EXPECT_EQ(run_cli({"frobnicate"}), 1);
  EXPECT_EQ(run_cli({"gen-synth", "--out", p("d"), "--colour", "red"}), 1);
  EXPECT_EQ(run_cli({"eval", "--model", p("model")}), 1);
  EXPECT_EQ(run_cli({"gen-synth", "--help"}), 0);
  testing::internal::CaptureStderr();
  EXPECT_EQ(run_cli({"train", "--data", p("missing_dir"), "--out", p("m")}), 2);
  const std::string err = testing::internal::GetCapturedStderr();
  EXPECT_NE(err.find("missing_dir"), std::string::npos) << err;
  std::ofstream(root / "bad.cfg") << "lambda = -1\n";
  EXPECT_EQ(run_cli({"train", "--config", p("bad.cfg"), "--data", p("x"), "--out", p("m")}), 2);
}

TEST_F(CliTest, AblateAndGradCheck) {
  ASSERT_EQ(run_cli({"gen-synth", "--users", "30", "--items", "80", "--seed", "1", "--out", p("data")}), 0);
  ASSERT_EQ(run_cli({"ablate", "--config", p("cfg"), "--data", p("data"), "--k", "20", "--out", p("abl.txt")}), 0);
  const auto abl = slurp(root / "abl.txt");
  for (const char* label : {"# full", "# -c", "# -p", "# -a", "# -e", "# -g"}) {
    EXPECT_NE(abl.find(label), std::string::npos) << label;
  }
  ASSERT_EQ(run_cli({"ablate", "--config", p("cfg"), "--data", p("data"), "--lambdas", "0,0.2,0.4",
                     "--format", "kv", "--out", p("sweep.txt")}),
            0);
  const auto sweep = slurp(root / "sweep.txt");
  EXPECT_NE(sweep.find("label=lambda=0.4"), std::string::npos) << sweep;
  testing::internal::CaptureStdout();
  EXPECT_EQ(run_cli({"grad-check", "--seed", "2"}), 0);
  EXPECT_NE(testing::internal::GetCapturedStdout().find("(ok)"), std::string::npos);
}

}  // namespace
}  // namespace cagr
