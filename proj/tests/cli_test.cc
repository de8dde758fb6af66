/*
 * Copyright 2026 The seqdx Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// End-to-end checks of the seqdx executable.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "test_util.h"

namespace seqdx {
namespace {

namespace fs = std::filesystem;

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t line_count(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new testing::TempDir("cli");
    std::ofstream(*dir_ / "cfg.ini") << "[data]\nrows = 16\ncols = 16\nn_train = 24\nn_val = 8\nn_test = 8\n"
                                        "[classifier]\nhidden = 8\nepochs = 3\nbatch = 8\n"
                                        "[policy]\nhidden = 8\nepochs = 1\nbatch = 8\nsteps = 4\nq = 3\n"
                                        "[eval]\nseeds = 1,2\n";
    ASSERT_EQ(run("gen-data --out data").code, 0);
    ASSERT_EQ(run("train-cls --manifest data/manifest.tsv --task disease --out d.modl").code, 0);
    ASSERT_EQ(run("train-cls --manifest data/manifest.tsv --task severity --init d.modl --out s.modl").code, 0);
    ASSERT_EQ(run("train-policy --manifest data/manifest.tsv --variant weighted --cls-d d.modl --cls-s s.modl "
                  "--out w.modl")
                  .code,
              0);
  }
  static void TearDownTestSuite() {
    delete dir_;
    dir_ = nullptr;
  }

  // Runs the CLI with the shared config and the temp dir as output base.
  static CliResult run(const std::string& args) {
    const fs::path out = *dir_ / "stdout.txt", err = *dir_ / "stderr.txt";
    const std::string cmd = "cd '" + dir_->path().string() + "' && '" + SEQDX_CLI_PATH +
                            "' --config cfg.ini " + args + " >'" + out.string() + "' 2>'" + err.string() + "'";
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, read_text(out), read_text(err)};
  }

  static fs::path path(const std::string& name) { return *dir_ / name; }

  static testing::TempDir* dir_;
};

testing::TempDir* CliTest::dir_ = nullptr;

TEST_F(CliTest, GenDataWritesManifestAndIsReproducible) {
  const std::string manifest = read_text(path("data/manifest.tsv"));
  std::istringstream lines(manifest);
  std::size_t entries = 0;
  for (std::string l; std::getline(lines, l);) entries += !l.empty() && l[0] != '#';
  EXPECT_EQ(entries, 24u + 8 + 8);
  ASSERT_EQ(run("gen-data --out again").code, 0);
  EXPECT_EQ(read_text(path("again/manifest.tsv")), manifest);
  std::size_t files = 0;
  for (const auto& entry : fs::recursive_directory_iterator(path("data"))) {
    if (!entry.is_regular_file()) continue;
    ++files;
    const fs::path rel = fs::relative(entry.path(), path("data"));
    EXPECT_EQ(read_text(entry.path()), read_text(path("again") / rel)) << rel;
  }
  EXPECT_EQ(files, 1u + 40);
  ASSERT_EQ(run("gen-data --out other --seed 123").code, 0);
  EXPECT_NE(read_text(path("other/manifest.tsv")), manifest);
}

TEST_F(CliTest, GenDataUnwritablePathIsAnIoError) {
  const CliResult r = run("gen-data --out /nonexistent_seqdx_parent/sub/data");
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("/nonexistent_seqdx_parent"), std::string::npos) << r.err;
}

TEST_F(CliTest, TrainClsLogsOneRowPerEpoch) {
  const std::string log = read_text(path("d.modl.log.csv"));
  EXPECT_EQ(log.substr(0, log.find('\n')), "epoch,train_loss,val_bacc");
  EXPECT_EQ(line_count(log), 1u + 3);
  ASSERT_EQ(run("train-cls --manifest data/manifest.tsv --task disease --out d5.modl --epochs 5").code, 0);
  EXPECT_EQ(line_count(read_text(path("d5.modl.log.csv"))), 1u + 5);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run("train-cls --manifest data/manifest.tsv --task severity --out x.modl").code, 2);
  EXPECT_EQ(run("train-cls --manifest data/manifest.tsv --task grading --out x.modl").code, 2);
  const CliResult v = run("train-policy --manifest data/manifest.tsv --variant bogus --cls-d d.modl --cls-s s.modl --out x.modl");
  EXPECT_EQ(v.code, 2);
  EXPECT_NE(v.err.find("weighted"), std::string::npos) << v.err;
  EXPECT_NE(v.err.find("varying"), std::string::npos) << v.err;
  EXPECT_EQ(run("no-such-command").code, 2);
  EXPECT_EQ(run("eval --policy w.modl").code, 2);
}

TEST_F(CliTest, RandomVariantWritesSentinel) {
  ASSERT_EQ(run("train-policy --manifest data/manifest.tsv --variant random --out r.modl").code, 0);
  const std::string bytes = read_text(path("r.modl"));
  EXPECT_EQ(bytes.substr(0, 4), "MODL");
  EXPECT_NE(bytes.find("uniform=1"), std::string::npos);
  ASSERT_EQ(run("eval --policy r.modl --cls-d d.modl --cls-s s.modl --manifest data/manifest.tsv --out r.csv").code, 0);
}

TEST_F(CliTest, CheckpointErrorsExitWithFour) {
  EXPECT_EQ(run("train-policy --manifest data/manifest.tsv --variant weighted --cls-d missing.modl --cls-s s.modl "
                "--out x.modl")
                .code,
            4);
  std::ofstream(path("corrupt.modl")) << "MODL garbage";
  EXPECT_EQ(run("eval --policy corrupt.modl --cls-d d.modl --cls-s s.modl --manifest data/manifest.tsv --out x.csv").code,
            4);
  // Disease and severity checkpoints swapped.
  EXPECT_EQ(run("eval --policy w.modl --cls-d s.modl --cls-s d.modl --manifest data/manifest.tsv --out x.csv").code, 4);
}

TEST_F(CliTest, EvalWritesCurvesAndSummary) {
  ASSERT_EQ(run("eval --policy w.modl --cls-d d.modl --cls-s s.modl --manifest data/manifest.tsv --out w.csv").code, 0);
  const std::string csv = read_text(path("w.csv"));
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "step,lines_acquired,disease_bacc,severity_bacc,sequential_bacc,disease_auc,severity_auc,seed");
  EXPECT_EQ(line_count(csv), 1u + 3 * 5);  // seeds 1, 2 and the mean, steps 0..4
  EXPECT_NE(read_text(path("w.csv.summary.txt")).find("sequential_bacc"), std::string::npos);

  ASSERT_EQ(run("eval --policy w.modl --cls-d d.modl --cls-s s.modl --manifest data/manifest.tsv --out w1.csv "
                "--seeds 1 --budget 2")
                .code,
            0);
  EXPECT_EQ(line_count(read_text(path("w1.csv"))), 1u + 2 * 3);

  ASSERT_EQ(run("--workers 3 eval --policy w.modl --cls-d d.modl --cls-s s.modl --manifest data/manifest.tsv "
                "--out w3.csv")
                .code,
            0);
  EXPECT_EQ(read_text(path("w3.csv")), csv);
}

TEST_F(CliTest, OutDirPrecedence) {
  fs::create_directories(path("flagdir"));
  ASSERT_EQ(run("--out-dir flagdir eval --policy w.modl --cls-d d.modl --cls-s s.modl --manifest data/manifest.tsv "
                "--out p.csv --seeds 1")
                .code,
            0);
  EXPECT_TRUE(fs::exists(path("flagdir/p.csv")));
  fs::create_directories(path("envdir"));
  const std::string cmd = "cd '" + dir_->path().string() + "' && SEQDX_OUT_DIR=envdir '" + SEQDX_CLI_PATH +
                          "' --config cfg.ini eval --policy w.modl --cls-d d.modl --cls-s s.modl "
                          "--manifest data/manifest.tsv --out e.csv --seeds 1 >/dev/null 2>&1";
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_TRUE(fs::exists(path("envdir/e.csv")));
}

TEST_F(CliTest, TrajectoryAndCorrelate) {
  ASSERT_EQ(run("train-policy --manifest data/manifest.tsv --variant varying --cls-d d.modl --cls-s s.modl "
                "--out v.modl")
                .code,
            0);
  const std::string traj = "--cls-d d.modl --cls-s s.modl --manifest data/manifest.tsv";
  ASSERT_EQ(run("trajectory --policy w.modl " + traj + " --out tw.csv").code, 0);
  ASSERT_EQ(run("trajectory --policy v.modl " + traj + " --out tv.csv").code, 0);
  EXPECT_EQ(line_count(read_text(path("tw.csv"))), 1u + 4);
  const CliResult self = run("correlate --traj-a tw.csv --traj-b tw.csv");
  ASSERT_EQ(self.code, 0);
  EXPECT_EQ(self.out, "step,pearson_r\n0,1\n1,1\n2,1\n3,1\n");
  ASSERT_EQ(run("correlate --traj-a tw.csv --traj-b tv.csv --out c.csv").code, 0);
  EXPECT_EQ(line_count(read_text(path("c.csv"))), 1u + 4);

  std::ofstream(path("narrow.csv")) << "0,1\n0.5,0.5\n";
  EXPECT_EQ(run("correlate --traj-a tw.csv --traj-b narrow.csv").code, 4);
  EXPECT_EQ(run("correlate --traj-a tw.csv --traj-b absent.csv").code, 3);
}

}  // namespace
}  // namespace seqdx
