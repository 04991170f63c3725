// Copyright 2026 The loca Authors
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

#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "loca/cli.hpp"
#include "support.hpp"

namespace loca {
namespace {

namespace fs = std::filesystem;

struct Result {
  int status;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "loca");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int status = cli::run_command(static_cast<int>(argv.size()), argv.data(), out, err);
  return {status, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("loca_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    BlockLogSpec spec;
    spec.users = 50;
    spec.items = 40;
    spec.min_length = 12;
    spec.max_length = 18;
    const auto log = make_block_log(spec);
    std::ofstream data(dir_ / "data.csv");
    data << "user,item,rating,timestamp\n";
    for (const auto& r : log.records) data << r.user << ',' << r.item << ",1," << *r.timestamp << '\n';
    std::ofstream(dir_ / "run.ini") << "out = " << (dir_ / "out").string() << "\nq = 3\nembedding_dim = 4\n"
                                    << "[data]\npath = " << (dir_ / "data.csv").string()
                                    << "\nheader = true\n[ease]\nlambda = 5\n[eval]\nn_values = 5,10\n";
  }
  void TearDown() override { fs::remove_all(dir_); }

  Result cmd(std::vector<std::string> args) {
    args.insert(args.begin(), {"--config", (dir_ / "run.ini").string()});
    return run(std::move(args));
  }

  fs::path dir_;
};

TEST_F(CliTest, PrepareTrainEvaluateRecommend) {
  ASSERT_EQ(cmd({"prepare"}).status, 0);
  EXPECT_TRUE(fs::exists(dir_ / "out/split/train.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "out/config.resolved.ini"));
  const auto manifest = slurp(dir_ / "out/manifest_prepare.txt");
  EXPECT_NE(manifest.find("input.data="), std::string::npos);
  EXPECT_NE(manifest.find("seed=0"), std::string::npos);

  const auto t = cmd({"train", "--jobs", "2"});
  ASSERT_EQ(t.status, 0) << t.err;
  EXPECT_TRUE(fs::exists(dir_ / "out/model/manifest.txt"));
  const auto model_bytes = slurp(dir_ / "out/model/local_0000.bin");

  const auto e = cmd({"evaluate"});
  ASSERT_EQ(e.status, 0) << e.err;
  EXPECT_NE(e.out.find("ndcg@10="), std::string::npos);
  EXPECT_EQ(slurp(dir_ / "out/model/local_0000.bin"), model_bytes);
  EXPECT_EQ(lines(slurp(dir_ / "out/eval/report.csv")), 1u + 50u * 4u);
  EXPECT_TRUE(fs::exists(dir_ / "out/eval/activity.csv"));
  ASSERT_EQ(cmd({"evaluate", "--global-only"}).status, 0);
  EXPECT_TRUE(fs::exists(dir_ / "out/eval/global_summary.txt"));

  const auto r = cmd({"recommend", "--users", "u0,u7", "--n", "4"});
  ASSERT_EQ(r.status, 0) << r.err;
  const auto rec = slurp(dir_ / "out/recommend.csv");
  EXPECT_EQ(lines(rec), 9u);
  EXPECT_EQ(rec.substr(0, rec.find('\n')), "user,rank,item,score");
  EXPECT_EQ(cmd({"recommend", "--users", "nobody"}).status, 1);
}

TEST_F(CliTest, SweepRowCount) {
  ASSERT_EQ(cmd({"prepare"}).status, 0);
  const auto s = cmd({"sweep", "--param", "q", "--values", "1,5,10"});
  ASSERT_EQ(s.status, 0) << s.err;
  const auto table = slurp(dir_ / "out/sweep_q.csv");
  EXPECT_EQ(lines(table), 4u);
  ASSERT_EQ(cmd({"sweep", "--param", "h_W", "--values", "0.2,0.5"}).status, 0);
  EXPECT_EQ(lines(slurp(dir_ / "out/sweep_h_W.csv")), 3u);
  const auto bad = cmd({"sweep", "--param", "h_W", "--values", "2.0"});
  EXPECT_EQ(bad.status, 1);
  EXPECT_NE(bad.err.find("kernel.h_W"), std::string::npos);
}

TEST_F(CliTest, AblationIsDeterministic) {
  ASSERT_EQ(cmd({"prepare"}).status, 0);
  ASSERT_EQ(cmd({"ablate-anchors", "--strategies", "coverage,random", "--q", "10", "--seed", "4"}).status, 0);
  const auto first = slurp(dir_ / "out/ablation.csv");
  ASSERT_EQ(cmd({"ablate-anchors", "--strategies", "coverage,random", "--q", "10", "--seed", "4"}).status, 0);
  EXPECT_EQ(slurp(dir_ / "out/ablation.csv"), first);
  EXPECT_EQ(lines(first), 3u);
  EXPECT_EQ(first.substr(0, first.find('\n')), "strategy,q,coverage,recall@5,recall@10,ndcg@5,ndcg@10");
}

TEST_F(CliTest, ErrorsAndExitCodes) {
  EXPECT_EQ(run({}).status, 2);
  EXPECT_EQ(run({"frobnicate"}).status, 2);
  EXPECT_EQ(run({"train", "--bogus"}).status, 2);
  const auto missing = cmd({"train"});
  EXPECT_EQ(missing.status, 1);
  EXPECT_NE(missing.err.find("prepare"), std::string::npos);
  const auto bad_key = cmd({"--set", "kernel.bandwidth=1", "prepare"});
  EXPECT_EQ(bad_key.status, 1);
  EXPECT_NE(bad_key.err.find("kernel.bandwidth"), std::string::npos);
  const auto no_data = run({"--out", (dir_ / "x").string(), "prepare"});
  EXPECT_EQ(no_data.status, 1);
  EXPECT_NE(no_data.err.find("data.path"), std::string::npos);
  EXPECT_EQ(run({"--help"}).status, 0);
}

TEST_F(CliTest, ConfigEchoReproducesRun) {
  ASSERT_EQ(cmd({"prepare"}).status, 0);
  ASSERT_EQ(cmd({"train", "--set", "seed=3"}).status, 0);
  const auto first = slurp(dir_ / "out/model/local_0001.bin");
  fs::copy_file(dir_ / "out/config.resolved.ini", dir_ / "echo.ini");
  ASSERT_EQ(run({"--config", (dir_ / "echo.ini").string(), "train"}).status, 0);
  EXPECT_EQ(slurp(dir_ / "out/model/local_0001.bin"), first);
}

}  // namespace
}  // namespace loca
