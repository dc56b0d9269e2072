#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>

#include "fixtures.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using fairbelief::testing::read_file;
using fairbelief::testing::TempDir;

namespace {

struct Result {
  int exit_code;
  std::string out;
  std::string err;
};

// Runs `audit <args>` with optional environment assignments in front.
Result audit(const TempDir& dir, const std::string& args, const std::string& env = "") {
  const auto out = dir / "stdout.txt";
  const auto err = dir / "stderr.txt";
  const std::string command = "cd '" + dir.path().string() + "' && " + env + " '" AUDIT_BINARY "' " +
                              args + " > '" + out.string() + "' 2> '" + err.string() + "'";
  const int status = std::system(command.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, read_file(out), read_file(err)};
}

const std::vector<std::string> kBundle = {"summary.csv",          "table1.txt",
                                          "scores_by_k.csv",      "group_scores.csv",
                                          "agreement_family.csv", "agreement_group.csv",
                                          "metadata.json"};

}  // namespace

TEST(Cli, TemplatesMatchesToyManifest) {
  TempDir dir;
  fairbelief::testing::write_toy_workspace(dir.path());
  const auto r = audit(dir, "templates --identities identities.csv --predicates predicates.csv --out m2.jsonl");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_NE(r.out.find("72 templates"), std::string::npos) << r.out;
  EXPECT_EQ(read_file(dir / "m2.jsonl"), read_file(dir / "manifest.jsonl"));
}

TEST(Cli, RunTwiceIsByteIdentical) {
  TempDir dir;
  fairbelief::testing::write_toy_workspace(dir.path());
  const auto first = audit(dir, "run --config run.json");
  ASSERT_EQ(first.exit_code, 0) << first.err;
  EXPECT_NE(first.out.find("HONEST"), std::string::npos);
  const auto second = audit(dir, "run --config run.json --output-dir out2");
  ASSERT_EQ(second.exit_code, 0) << second.err;
  for (const auto& name : kBundle) {
    EXPECT_EQ(read_file(dir / "out" / name), read_file(dir / "out2" / name)) << name;
  }
}

TEST(Cli, EnvOverridesAndFlagPrecedence) {
  TempDir dir;
  fairbelief::testing::write_toy_workspace(dir.path());
  auto r = audit(dir, "run --config run.json", "FAIRBELIEF_K_MAX=5 FAIRBELIEF_OUTPUT_DIR=envout");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  auto meta = nlohmann::json::parse(read_file(dir / "envout" / "metadata.json"));
  EXPECT_EQ(meta["settings"]["k_max"], 5);

  r = audit(dir, "run --config run.json --k-max 3 --std sample", "FAIRBELIEF_K_MAX=5");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  meta = nlohmann::json::parse(read_file(dir / "out" / "metadata.json"));
  EXPECT_EQ(meta["settings"]["k_max"], 3);
  EXPECT_EQ(meta["settings"]["std"], "sample");

  r = audit(dir, "run --config run.json", "FAIRBELIEF_MATCH=fuzzy");
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find("InvalidConfig"), std::string::npos) << r.err;
}

TEST(Cli, ValidateAcceptsAndRejects) {
  TempDir dir;
  fairbelief::testing::write_toy_workspace(dir.path());
  auto r = audit(dir, "validate toy-gpt-large.queer.jsonl --manifest manifest.jsonl");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_NE(r.out.find("records=720"), std::string::npos) << r.out;

  auto text = read_file(dir / "toy-gpt-large.queer.jsonl");
  const auto pos = text.find("\"rank\":2,");
  text.replace(pos, 9, "\"rank\":3,");
  fairbelief::testing::write_file(dir / "bad.jsonl", text);
  r = audit(dir, "validate bad.jsonl");
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find("[dump-model] RankGap"), std::string::npos) << r.err;
}

TEST(Cli, ManifestMismatchExitsWithPipelineError) {
  TempDir dir;
  fairbelief::testing::write_toy_workspace(dir.path());
  auto text = read_file(dir / "toy-bert-small.binary.jsonl");
  const auto pos = text.find("\"template_manifest_hash\":\"") + 26;
  text.replace(pos, 2, "zz");
  fairbelief::testing::write_file(dir / "toy-bert-small.binary.jsonl", text);
  const auto r = audit(dir, "run --config run.json");
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find("ManifestMismatch"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(dir / "out" / "summary.csv"));
}

TEST(Cli, SampleDefaults) {
  TempDir dir;
  fairbelief::testing::write_toy_workspace(dir.path());
  const auto r = audit(dir, "sample --config run.json --output-dir sheets");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_NE(r.out.find("4 sheets, 60 instances"), std::string::npos) << r.out;
  for (const auto* name : {"annotation_binary_A1.csv", "annotation_binary_A2.csv",
                           "annotation_queer_A1.csv", "annotation_queer_A2.csv"}) {
    EXPECT_TRUE(fs::is_regular_file(dir / "sheets" / name)) << name;
  }
  const auto again = audit(dir, "sample --config run.json --output-dir sheets2");
  ASSERT_EQ(again.exit_code, 0);
  EXPECT_EQ(read_file(dir / "sheets" / "annotation_queer_A2.csv"),
            read_file(dir / "sheets2" / "annotation_queer_A2.csv"));
  EXPECT_EQ(audit(dir, "sample --config run.json --per-relation 3").exit_code, 2);
}

TEST(Cli, UsageErrors) {
  TempDir dir;
  EXPECT_EQ(audit(dir, "").exit_code, 1);
  EXPECT_EQ(audit(dir, "run").exit_code, 1);
  EXPECT_EQ(audit(dir, "frobnicate").exit_code, 1);
  EXPECT_EQ(audit(dir, "--help").exit_code, 0);
  EXPECT_EQ(audit(dir, "run --config missing.json").exit_code, 2);
}
