#include <gtest/gtest.h>

#include <fstream>
#include <iterator>
#include <sstream>

#include "forgery/challenge_eval.hpp"
#include "forgery/cli.hpp"
#include "test_support.hpp"

using namespace forgery;
using forgery::testing::TempDir;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST(Cli, EvaluatePrintsBoundedLoss) {
  TempDir tmp("cli");
  GroundTruthSet truth;
  truth.labels = {{"a", 0}, {"b", 1}};
  write_ground_truth(tmp / "t.jsonl", truth);
  write_predictions(tmp / "p.jsonl", std::vector<PredictionRecord>{{"a", 0.5}, {"b", 0.5}});
  auto r = run({"evaluate", "--predictions", (tmp / "p.jsonl").string(), "--truth", (tmp / "t.jsonl").string()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.substr(0, 9), "0.693147\n");

  write_predictions(tmp / "q.jsonl", std::vector<PredictionRecord>{{"a", 0.5}});
  r = run({"evaluate", "--predictions", (tmp / "q.jsonl").string(), "--truth", (tmp / "t.jsonl").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("b"), std::string::npos);
}

TEST(Cli, LeaderboardOrdersEntries) {
  TempDir tmp("cli");
  std::ofstream(tmp / "e.jsonl") << "{\"team\": \"Miao\", \"bce_loss\": 0.4132, \"runtime_s\": 19823}\n"
                                    "{\"team\": \"Forensics\", \"bce_loss\": 0.2674, \"runtime_s\": 7690}\n"
                                    "{\"team\": \"VISG\", \"bce_loss\": 0.4060, \"runtime_s\": 11012}\n";
  const auto r = run({"leaderboard", "--entries", (tmp / "e.jsonl").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_LT(r.out.find("Forensics"), r.out.find("VISG"));
  EXPECT_LT(r.out.find("VISG"), r.out.find("Miao"));
  const auto j = run({"leaderboard", "--entries", (tmp / "e.jsonl").string(), "--format", "jsonl"});
  EXPECT_NE(j.out.find("\"ranking\":1"), std::string::npos);
}

TEST(Cli, ValidateRejectsBadSubmissions) {
  TempDir tmp("cli");
  GroundTruthSet truth;
  truth.labels = {{"a", 0}, {"b", 1}};
  write_ground_truth(tmp / "t.jsonl", truth);
  write_predictions(tmp / "p.jsonl", std::vector<PredictionRecord>{{"a", 0.5}, {"c", 0.5}});
  const auto r = run({"validate", "--predictions", (tmp / "p.jsonl").string(), "--truth", (tmp / "t.jsonl").string(),
                      "--phase", "dev"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("c"), std::string::npos);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"evaluate", "--truth", "x"}).code, 2);
  EXPECT_EQ(run({"gen-fixtures", "--out", "/tmp/x", "--artifact", "moire"}).code, 2);
  EXPECT_EQ(run({"evaluate", "--predictions", "/nonexistent", "--truth", "/nonexistent"}).code, 1);
}

TEST(Cli, GenerateTrainPredictIsReproducible) {
  TempDir tmp("cli");
  const std::string corpus = (tmp / "corpus").string();
  auto r = run({"gen-fixtures", "--out", corpus, "--videos", "8", "--frames", "6", "--size", "48", "--seed", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ofstream(tmp / "run.json") << R"({"pipeline": {"out_size": 112, "n_frames": 3},
    "train": {"epochs": 2, "batch_size": 8, "frames_per_video": 3}, "augment": {"train_size": 112}})";
  const std::string manifest = corpus + "/manifest.jsonl";
  std::string first;
  for (int round = 0; round < 2; ++round) {
    r = run({"train", "--config", (tmp / "run.json").string(), "--manifest", manifest, "--checkpoint",
             (tmp / "a.ckpt").string(), "--seed", "5"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("saved"), std::string::npos);
    if (round == 0) first = slurp(tmp / "a.ckpt");
  }
  EXPECT_TRUE(first == slurp(tmp / "a.ckpt"));

  r = run({"predict", "--checkpoint", (tmp / "a.ckpt").string(), "--manifest", manifest, "--out",
           (tmp / "p1.jsonl").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  r = run({"predict", "--checkpoint", (tmp / "a.ckpt").string(), "--manifest", manifest, "--out",
           (tmp / "p2.jsonl").string(), "--workers", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(tmp / "p1.jsonl"), slurp(tmp / "p2.jsonl"));
  const auto preds = read_predictions(tmp / "p1.jsonl");
  ASSERT_EQ(preds.size(), 8u);
  for (const auto& p : preds) {
    EXPECT_GE(p.score, 0.01);
    EXPECT_LE(p.score, 0.99);
  }
  r = run({"evaluate", "--predictions", (tmp / "p1.jsonl").string(), "--truth", corpus + "/truth.jsonl"});
  EXPECT_EQ(r.code, 0) << r.err;

  r = run({"train", "--config", (tmp / "run.json").string(), "--manifest", manifest, "--checkpoint",
           (tmp / "c.ckpt").string()});
  EXPECT_NE(r.code, 0);
}
