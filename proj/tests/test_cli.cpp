#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "fixtures.hpp"
#include "lesionforge/eval.hpp"

namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CliRun cli(const std::string& args, const fs::path& scratch) {
  const fs::path out = scratch / "stdout.txt", err = scratch / "stderr.txt";
  const std::string cmd = std::string("\"") + LESIONFORGE_CLI + "\" " + args + " > \"" + out.string() +
                          "\" 2> \"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

// Annotated image and masks on disk, bank extracted, normals written.
fs::path prepare(const std::string& name) {
  const fs::path root = fixture::temp_dir(name);
  const auto sample = fixture::annotated_fundus();
  lesionforge::write_png(root / "annotated.png", sample.image);
  for (const auto& m : sample.masks)
    lesionforge::write_mask_png(root / ("mask_" + std::string(to_string(m.type)) + ".png"), m.mask);
  fixture::write_normals(root / "normals", 6, 96);
  const CliRun r = cli("extract --image " + (root / "annotated.png").string() +
                        " --mask-ma " + (root / "mask_MA.png").string() +
                        " --mask-he " + (root / "mask_HE.png").string() +
                        " --mask-se " + (root / "mask_SE.png").string() +
                        " --mask-ex " + (root / "mask_EX.png").string() + " --size 0 --out " +
                        (root / "bank").string(),
                    root);
  EXPECT_EQ(r.code, 0) << r.err;
  return root;
}

}  // namespace

TEST(Cli, ExtractSynthTwiceGivesIdenticalTrees) {
  const fs::path root = prepare("cli_synth");
  const CliRun cfg = cli("config --seed 11 --composition dr-grades --size 96", root);
  ASSERT_EQ(cfg.code, 0) << cfg.err;
  std::ofstream(root / "run.json") << cfg.out;
  const std::string common = "synth --bank " + (root / "bank").string() + " --normals " +
                             (root / "normals" / "normals.json").string() + " --config " +
                             (root / "run.json").string();
  ASSERT_EQ(cli(common + " --out " + (root / "a").string(), root).code, 0);
  ASSERT_EQ(cli(common + " --threads 3 --out " + (root / "b").string(), root).code, 0);
  const auto a = fixture::read_tree(root / "a");
  EXPECT_EQ(a.size(), 14u);
  EXPECT_EQ(a, fixture::read_tree(root / "b"));
  EXPECT_EQ(a.at("run_config.json"), cfg.out);

  const CliRun m = cli("montage --dataset " + (root / "a").string() + " --k 4 --out " +
                        (root / "montage.png").string(),
                    root);
  EXPECT_EQ(m.code, 0) << m.err;
  EXPECT_EQ(lesionforge::read_png(root / "montage.png").width, 192);
}

TEST(Cli, InvalidConfigNamesTheField) {
  const fs::path root = prepare("cli_badconfig");
  std::ofstream(root / "bad.json") << R"({"seed": 1, "composition": [
      {"probability": 0.5, "types": ["MA"]}, {"probability": 0.4, "types": ["HE"]}]})";
  const CliRun r = cli("synth --bank " + (root / "bank").string() + " --normals " +
                        (root / "normals" / "normals.json").string() + " --config " +
                        (root / "bad.json").string() + " --out " + (root / "out").string(),
                    root);
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("composition"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(root / "out"));
}

TEST(Cli, EvalReportsAucAndDeLong) {
  const fs::path root = fixture::temp_dir("cli_eval");
  std::ofstream(root / "a.csv") << "id,score,label\nw,0.1,0\nx,0.4,0\ny,0.35,1\nz,0.8,1\n";
  std::ofstream(root / "b.csv") << "id,score,label\nz,0.9,1\ny,0.8,1\nx,0.2,0\nw,0.1,0\n";
  const CliRun r = cli("eval --scores " + (root / "a.csv").string() + " --scores-b " +
                        (root / "b.csv").string() + " --roc " + (root / "roc.csv").string(),
                    root);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto report = nlohmann::json::parse(r.out);
  EXPECT_DOUBLE_EQ(report["a"]["auc"].get<double>(), 0.75);
  EXPECT_DOUBLE_EQ(report["delong"]["auc_b"].get<double>(), 1.0);
  EXPECT_EQ(slurp(root / "roc.csv").rfind("fpr,tpr\n", 0), 0u);

  std::ofstream(root / "one.csv") << "id,score,label\nw,0.1,1\nx,0.4,1\n";
  const CliRun bad = cli("eval --scores " + (root / "one.csv").string(), root);
  EXPECT_NE(bad.code, 0);
}

TEST(Cli, UsageErrors) {
  const fs::path root = fixture::temp_dir("cli_usage");
  EXPECT_NE(cli("", root).code, 0);
  EXPECT_NE(cli("config", root).code, 0);
  EXPECT_NE(cli("config --seed 1 --mixup-preset 0.9", root).code, 0);
}
