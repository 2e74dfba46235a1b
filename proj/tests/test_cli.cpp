#include <cstdlib>
#include <filesystem>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "hdemg/data.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path& workdir() {
  static const fs::path dir = [] {
    auto p = fs::temp_directory_path() / "hdemg_cli_test";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

std::string path(const std::string& name) { return (workdir() / name).string(); }

int run(const std::string& args) {
  const std::string cmd = "\"" HDEMG_CLI_PATH "\" " + args + " >\"" + path("stdout.txt") + "\" 2>\"" +
                          path("stderr.txt") + "\"";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& name) { return hdemg::detail::read_file(path(name)); }

// Eight channels keep every stage of the pipeline fast.
const std::string& data_dir() {
  static const std::string dir = [] {
    const auto d = path("data");
    EXPECT_EQ(run("synth --out \"" + d + "\" --channels 8 --seed 5"), 0) << slurp("stderr.txt");
    return d;
  }();
  return dir;
}

const std::string kSmall = " --dim 1000 ";

}  // namespace

TEST(Cli, HelpAndUsage) {
  EXPECT_EQ(run("--help"), 0);
  EXPECT_NE(slurp("stdout.txt").find("eval"), std::string::npos);
  EXPECT_EQ(run(""), 3);
  EXPECT_EQ(run("frobnicate"), 3);
  EXPECT_EQ(run("eval ctx-pair"), 3);  // missing --data
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run("eval crossval --data \"" + path("nowhere") + "\""), 2);
  EXPECT_EQ(run("eval crossval --effort extreme --data \"" + data_dir() + "\""), 3);
  EXPECT_EQ(run("eval crossval --dim 0 --data \"" + data_dir() + "\""), 3);
  EXPECT_EQ(run("eval ctx-pair --pair low --data \"" + data_dir() + "\""), 3);
  EXPECT_EQ(run("report \"" + path("nowhere.jsonl") + "\""), 2);
}

TEST(Cli, SynthWritesLayout) {
  EXPECT_TRUE(fs::exists(fs::path(data_dir()) / "subject1" / "fist_high_5.emg"));
  EXPECT_EQ(hdemg::load_trials(data_dir()).size(), 135u);
}

TEST(Cli, TrainMergeClassify) {
  const auto d = data_dir();
  ASSERT_EQ(run("train" + kSmall + "--data \"" + d + "\" --effort low --fit low,high --out \"" + path("low.hdam") + "\""),
            0)
      << slurp("stderr.txt");
  ASSERT_EQ(
      run("train" + kSmall + "--data \"" + d + "\" --effort high --fit low,high --out \"" + path("high.hdam") + "\""), 0);
  ASSERT_EQ(run("merge --model \"" + path("low.hdam") + "\" --model \"" + path("high.hdam") + "\" --out \"" +
                path("merged.hdam") + "\""),
            0)
      << slurp("stderr.txt");
  ASSERT_EQ(run("classify --model \"" + path("merged.hdam") + "\" --data \"" + d + "\""), 0) << slurp("stderr.txt");
  const auto table = slurp("stdout.txt");
  EXPECT_EQ(table.rfind("trial\ttruth\tpredicted\tper-window\n", 0), 0u);
  EXPECT_NE(table.find("\nmean\t"), std::string::npos);

  // Independent bounds make the two models incompatible.
  ASSERT_EQ(run("train" + kSmall + "--data \"" + d + "\" --effort medium --out \"" + path("medium.hdam") + "\""), 0);
  EXPECT_EQ(run("merge --model \"" + path("low.hdam") + "\" --model \"" + path("medium.hdam") + "\" --out \"" +
                path("bad.hdam") + "\""),
            3);
  EXPECT_EQ(run("merge --model \"" + path("low.hdam") + "\" --out \"" + path("bad.hdam") + "\""), 3);

  ASSERT_EQ(run("train" + kSmall + "--data \"" + d + "\" --effort all --mode gesture-effort --out \"" +
                path("joint.hdam") + "\""),
            0);
  EXPECT_EQ(run("classify --gesture-only --model \"" + path("joint.hdam") + "\" --data \"" + d + "\""), 0);
  EXPECT_EQ(run("classify --gesture-only --model \"" + path("low.hdam") + "\" --data \"" + d + "\""), 3);
}

TEST(Cli, EvalIsDeterministicAndReportRoundTrips) {
  const auto d = data_dir();
  const std::string eval = "eval ctx-pair --pair low,high" + kSmall + "--data \"" + d + "\" --out ";
  ASSERT_EQ(run(eval + "\"" + path("r1.jsonl") + "\""), 0) << slurp("stderr.txt");
  ASSERT_EQ(run(eval + "\"" + path("r2.jsonl") + "\""), 0);
  EXPECT_EQ(slurp("r1.jsonl"), slurp("r2.jsonl"));

  ASSERT_EQ(run("report --format record \"" + path("r1.jsonl") + "\" --out \"" + path("r3.jsonl") + "\""), 0);
  EXPECT_EQ(slurp("r1.jsonl"), slurp("r3.jsonl"));
  ASSERT_EQ(run("report \"" + path("r1.jsonl") + "\""), 0);
  EXPECT_NE(slurp("stdout.txt").find("merged_on_A"), std::string::npos);
  ASSERT_EQ(run("report --aggregation majority \"" + path("r1.jsonl") + "\""), 0);
  EXPECT_EQ(slurp("stdout.txt").find("per-window accuracy"), std::string::npos);
}
