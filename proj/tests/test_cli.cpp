#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "lecam/text_io.hpp"

namespace fs = std::filesystem;

namespace {

struct CommandResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr
};

CommandResult run_cli(const std::string& args) {
  const std::string out_file =
      (fs::temp_directory_path() / "lecam_cli_out.txt").string();
  const std::string cmd =
      std::string(LECAM_CLI_PATH) + " " + args + " > " + out_file + " 2>&1";
  const int status = std::system(cmd.c_str());
  CommandResult result;
  result.exit_code = WEXITSTATUS(status);
  result.output = lecam::read_file(out_file);
  fs::remove(out_file);
  return result;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / "lecam_cli_test";
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& content) {
    const std::string path = (dir_ / name).string();
    lecam::write_file(path, content);
    return path;
  }

  fs::path dir_;
};

std::string tiny_train_config(const std::string& out_dir) {
  return "[dataset]\n"
         "type = ring8\n"
         "n = 200\n"
         "fraction = 0.5\n"
         "seed = 3\n"
         "[model]\n"
         "g_hidden = 8\n"
         "d_hidden = 8\n"
         "[train]\n"
         "loss = hinge\n"
         "lambda = 0.3\n"
         "batch = 8\n"
         "total_g_steps = 40\n"
         "eval_every = 20\n"
         "eval_sample = 64\n"
         "seed = 5\n"
         "[output]\n"
         "dir = " + out_dir + "\n";
}

std::vector<std::string> csv_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string cur;
  for (char c : text) {
    if (c == '\n') {
      lines.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) lines.push_back(cur);
  return lines;
}

}  // namespace

TEST_F(CliTest, TrainWritesRunArtifactsAndSummary) {
  const std::string cfg = write("exp.ini", tiny_train_config(dir_.string() + "/runs"));
  const CommandResult r = run_cli("train " + cfg);
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(r.output.find("final proxy_fd"), std::string::npos);

  // Exactly one content-addressed run directory with the three artifacts.
  std::vector<fs::path> runs;
  for (const auto& entry : fs::directory_iterator(dir_ / "runs")) {
    runs.push_back(entry.path());
  }
  ASSERT_EQ(runs.size(), 1u);
  EXPECT_TRUE(fs::exists(runs[0] / "metrics.csv"));
  EXPECT_TRUE(fs::exists(runs[0] / "config.snapshot"));
  EXPECT_TRUE(fs::exists(runs[0] / "g_final.ckpt"));
  EXPECT_TRUE(fs::exists(runs[0] / "d_final.ckpt"));

  const auto lines = csv_lines(lecam::read_file((runs[0] / "metrics.csv").string()));
  ASSERT_EQ(lines.size(), 4u);  // header + steps 0, 20, 40
  EXPECT_EQ(lines[0].rfind("step,", 0), 0u);
}

TEST_F(CliTest, SameConfigAndSeedReproducesMetricsByteForByte) {
  const std::string cfg = write("exp.ini", tiny_train_config(dir_.string() + "/a"));
  ASSERT_EQ(run_cli("train " + cfg).exit_code, 0);
  const std::string cfg_b = write("exp_b.ini", tiny_train_config(dir_.string() + "/b"));
  ASSERT_EQ(run_cli("train " + cfg_b).exit_code, 0);

  std::string metrics_a, metrics_b;
  for (const auto& entry : fs::recursive_directory_iterator(dir_)) {
    if (entry.path().filename() == "metrics.csv") {
      if (entry.path().string().find("/a/") != std::string::npos) {
        metrics_a = lecam::read_file(entry.path().string());
      } else if (entry.path().string().find("/b/") != std::string::npos) {
        metrics_b = lecam::read_file(entry.path().string());
      }
    }
  }
  ASSERT_FALSE(metrics_a.empty());
  EXPECT_EQ(metrics_a, metrics_b);
}

TEST_F(CliTest, SnapshotRerunReproducesMetricsByteForByte) {
  const std::string cfg = write("exp.ini", tiny_train_config(dir_.string() + "/runs"));
  ASSERT_EQ(run_cli("train " + cfg).exit_code, 0);

  fs::path run_dir;
  for (const auto& entry : fs::directory_iterator(dir_ / "runs")) run_dir = entry.path();
  const std::string original = lecam::read_file((run_dir / "metrics.csv").string());
  const std::string snapshot = (run_dir / "config.snapshot").string();

  const CommandResult rerun =
      run_cli("train " + snapshot + " --out " + dir_.string() + "/rerun");
  ASSERT_EQ(rerun.exit_code, 0) << rerun.output;
  fs::path rerun_dir;
  for (const auto& entry : fs::directory_iterator(dir_ / "rerun")) rerun_dir = entry.path();
  const std::string reproduced =
      lecam::read_file((rerun_dir / "metrics.csv").string());
  EXPECT_EQ(original, reproduced);
  // Content addressing: same experiment, same run directory name.
  EXPECT_EQ(run_dir.filename(), rerun_dir.filename());
}

TEST_F(CliTest, SeedFlagOverridesTheConfigSeed) {
  const std::string cfg = write("exp.ini", tiny_train_config(dir_.string() + "/runs"));
  ASSERT_EQ(run_cli("train " + cfg + " --seed 99").exit_code, 0);
  fs::path run_dir;
  for (const auto& entry : fs::directory_iterator(dir_ / "runs")) run_dir = entry.path();
  EXPECT_NE(run_dir.filename().string().find("_s99"), std::string::npos);
  const std::string snap = lecam::read_file((run_dir / "config.snapshot").string());
  EXPECT_NE(snap.find("seed = 99"), std::string::npos);
}

TEST_F(CliTest, ZeroStepConfigYieldsOneRowMetrics) {
  std::string text = tiny_train_config(dir_.string() + "/runs");
  const auto pos = text.find("total_g_steps = 40");
  text.replace(pos, 18, "total_g_steps = 0 ");
  const std::string cfg = write("exp.ini", text);
  ASSERT_EQ(run_cli("train " + cfg).exit_code, 0);
  fs::path run_dir;
  for (const auto& entry : fs::directory_iterator(dir_ / "runs")) run_dir = entry.path();
  const auto lines = csv_lines(lecam::read_file((run_dir / "metrics.csv").string()));
  EXPECT_EQ(lines.size(), 2u);  // header + step-0 row
}

TEST_F(CliTest, InvalidConfigFailsWithMachineParseableError) {
  const std::string cfg = write("bad.ini", "[train]\nbogus_key = 1\n");
  const CommandResult r = run_cli("train " + cfg);
  EXPECT_NE(r.exit_code, 0);
  EXPECT_EQ(r.output.rfind("error:", 0), 0u) << r.output;
  EXPECT_NE(r.output.find("bogus_key"), std::string::npos);
}

TEST_F(CliTest, DivergenceOnIdenticalFilesPrintsZeros) {
  const std::string p = write("p.csv", "0.25\n0.25\n0.5\n");
  const CommandResult r = run_cli("divergence " + p + " " + p);
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(r.output.find("lecam 0\n"), std::string::npos);
  EXPECT_NE(r.output.find("kl 0\n"), std::string::npos);
}

TEST_F(CliTest, DivergenceOnDisjointFilesShowsTheMaxima) {
  const std::string p = write("p.csv", "1\n0\n");
  const std::string q = write("q.csv", "0\n1\n");
  const CommandResult r = run_cli("divergence " + p + " " + q);
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(r.output.find("lecam 2\n"), std::string::npos);
  EXPECT_NE(r.output.find("tv 2\n"), std::string::npos);
  // js line carries ln 2; parse rather than match digits (libm is not
  // correctly rounded).
  const auto pos = r.output.find("js ");
  ASSERT_NE(pos, std::string::npos);
  double js = 0.0;
  ASSERT_TRUE(lecam::parse_double(
      r.output.substr(pos + 3, r.output.find('\n', pos) - pos - 3), js));
  EXPECT_NEAR(js, std::log(2.0), 1e-12);
}

TEST_F(CliTest, DivergenceNamesTheBadFile) {
  const std::string p = write("p.csv", "1\n0\n");
  const std::string bad = write("neg.csv", "1\n-1\n");
  const CommandResult r = run_cli("divergence " + p + " " + bad);
  EXPECT_NE(r.exit_code, 0);
  EXPECT_EQ(r.output.rfind("error:", 0), 0u);
  EXPECT_NE(r.output.find("neg.csv"), std::string::npos);
  const CommandResult mismatch =
      run_cli("divergence " + p + " " + write("short.csv", "1\n"));
  EXPECT_NE(mismatch.exit_code, 0);
}

TEST_F(CliTest, CurvesTableHasTheContractedShape) {
  const std::string out = (dir_ / "curves.csv").string();
  ASSERT_EQ(run_cli("curves --out " + out).exit_code, 0);
  const auto lines = csv_lines(lecam::read_file(out));
  ASSERT_EQ(lines.size(), 201u);  // header + 200 points
  EXPECT_EQ(lines[0], "t,lecam,lecam_weighted_quarter,js,chi2,tv,kl");
  EXPECT_EQ(lines[101], "1,0,0,0,0,0,0");  // the t = 1 row

  // Weighted column is exactly a quarter of the lecam column.
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = lecam::split_csv_line(lines[i]);
    ASSERT_EQ(fields.size(), 7u);
    double lc = 0, weighted = 0;
    ASSERT_TRUE(lecam::parse_double(fields[1], lc));
    ASSERT_TRUE(lecam::parse_double(fields[2], weighted));
    EXPECT_EQ(weighted, 0.25 * lc);
  }
}

TEST_F(CliTest, LambdaSweepScriptEmitsOneRunPerValue) {
  std::string text = tiny_train_config((dir_ / "sweep").string());
  auto pos = text.find("total_g_steps = 40");
  text.replace(pos, 18, "total_g_steps = 10");
  const std::string cfg = write("base.ini", text);

  const fs::path script = LECAM_SWEEP_SCRIPT;
  ASSERT_TRUE(fs::exists(script)) << script;
  const std::string cmd = "sh " + script.string() + " " +
                          std::string(LECAM_CLI_PATH) + " " + cfg + " " +
                          (dir_ / "sweep").string() + " 1 > /dev/null 2>&1";
  ASSERT_EQ(WEXITSTATUS(std::system(cmd.c_str())), 0);

  std::vector<double> lambdas;
  for (const auto& entry : fs::directory_iterator(dir_ / "sweep")) {
    if (!entry.is_directory()) continue;
    const std::string snap =
        lecam::read_file((entry.path() / "config.snapshot").string());
    const auto lpos = snap.find("lambda = ");
    ASSERT_NE(lpos, std::string::npos);
    double v = 0.0;
    ASSERT_TRUE(lecam::parse_double(
        snap.substr(lpos + 9, snap.find('\n', lpos) - lpos - 9), v));
    lambdas.push_back(v);
  }
  std::sort(lambdas.begin(), lambdas.end());
  ASSERT_EQ(lambdas.size(), 5u);
  EXPECT_EQ(lambdas[0], 0.0);
  EXPECT_NEAR(lambdas[1], 0.1, 1e-12);
  EXPECT_NEAR(lambdas[2], 0.3, 1e-12);
  EXPECT_EQ(lambdas[3], 0.5);
  EXPECT_EQ(lambdas[4], 1.0);
}

TEST_F(CliTest, Prop1VerifyPassesAndReportsBothResiduals) {
  const CommandResult r = run_cli("prop1-verify --trials 300 --seed 11");
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(r.output.find("max_identity_error"), std::string::npos);
  EXPECT_NE(r.output.find("max_stationarity_residual"), std::string::npos);
  EXPECT_NE(r.output.find("PASS"), std::string::npos);

  const CommandResult single = run_cli("prop1-verify --trials 1 --seed 2");
  EXPECT_EQ(single.exit_code, 0);

  const CommandResult negative =
      run_cli("prop1-verify --trials 100 --seed 3 --negative-weight");
  ASSERT_EQ(negative.exit_code, 0) << negative.output;
  EXPECT_NE(negative.output.find("negative_cg 100/100"), std::string::npos);
}
