#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include <json.hpp>

#include <topolearn/io.hpp>

#include "oracles.hpp"
#include "topolearn_cli/commands.hpp"

namespace topolearn::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("topolearn_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "topolearn");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data());
  }

  fs::path write_config(const std::string& name, json doc) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << doc.dump(2);
    return p;
  }

  json chain_config(const std::string& mode) const {
    return {{"model", std::string(TOPOLEARN_CONFIG_DIR) + "/chain7_model.json"},
            {"corruption", json::array({{{"node", "4"}, {"kind", "random_delay"}, {"shifts", {-2, 0}}, {"p", 0.7}}})},
            {"mode", mode}};
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  static UndirectedGraph topology_graph(const fs::path& dir) {
    std::vector<std::string> labels;
    return parse_graph(json::parse(slurp(dir / "topology.json")).at("graph").dump(), labels);
  }

  fs::path dir_;
};

TEST_F(CliTest, ConfigErrorsExitTwo) {
  EXPECT_EQ(invoke({"pipeline", "--config", (dir_ / "missing.json").string()}), 2);
  EXPECT_EQ(invoke({"teleport"}), 2);
  EXPECT_EQ(invoke({}), 2);
  const auto cfg = write_config("c.json", {{"model", "no_such_model.json"}});
  EXPECT_EQ(invoke({"pipeline", "--config", cfg.string()}), 2);
  const auto bad = write_config("bad.json", {{"model", "x"}, {"mode", "psychic"}});
  EXPECT_EQ(invoke({"pipeline", "--config", bad.string()}), 2);
  auto good = chain_config("analytic");
  const auto ok = write_config("ok.json", good);
  EXPECT_EQ(invoke({"pipeline", "--config", ok.string(), "--format", "xml"}), 2);
  // Stages need their upstream artifacts.
  EXPECT_EQ(invoke({"detect", "--config", ok.string(), "--out", (dir_ / "empty").string()}), 2);
}

TEST_F(CliTest, BundledAnalyticPipelineRecoversChain) {
  const auto out = dir_ / "out";
  EXPECT_EQ(invoke({"pipeline", "--config", TOPOLEARN_CONFIG_DIR "/chain7_analytic.json", "--out", out.string()}), 0);
  EXPECT_EQ(topology_graph(out), oracle::chain7());
  const std::string dot = slurp(out / "topology.dot");
  for (const char* edge : {"\"1\" -- \"2\"", "\"3\" -- \"4\"", "\"4\" -- \"5\"", "\"6\" -- \"7\""}) {
    EXPECT_NE(dot.find(edge), std::string::npos) << edge;
  }
  EXPECT_TRUE(fs::exists(out / "signature_4.csv"));
  EXPECT_TRUE(fs::exists(out / "inverse_spectrum_plot.csv"));
  const json detection = json::parse(slurp(out / "detection.json"));
  EXPECT_EQ(detection.at("corrupt"), json::array({"4"}));
}

TEST_F(CliTest, UncorruptedConfigDetectsNoCorruptNodes) {
  const auto out = dir_ / "clean";
  EXPECT_EQ(invoke({"pipeline", "--config", TOPOLEARN_CONFIG_DIR "/chain7_clean.json", "--out", out.string()}), 0);
  const json detection = json::parse(slurp(out / "detection.json"));
  EXPECT_TRUE(detection.at("corrupt").empty());
  EXPECT_EQ(topology_graph(out), oracle::chain7());
}

TEST_F(CliTest, PipelineEqualsStagesAndIsReproducible) {
  auto doc = chain_config("empirical");
  doc["trajectory_length"] = 200'000;
  doc["output"] = {{"format", "csv"}};
  const auto cfg = write_config("emp.json", doc);
  const auto staged = dir_ / "staged";
  for (const char* stage : {"simulate", "corrupt", "spectra", "detect", "learn"}) {
    const int code = invoke({stage, "--config", cfg.string(), "--out", staged.string()});
    EXPECT_TRUE(code == 0 || code == 5) << stage;
  }
  const auto piped = dir_ / "piped";
  const auto again = dir_ / "again";
  const int a = invoke({"pipeline", "--config", cfg.string(), "--out", piped.string()});
  const int b = invoke({"pipeline", "--config", cfg.string(), "--out", again.string()});
  EXPECT_EQ(a, b);
  for (const char* file : {"clean.csv", "corrupted.csv", "spectrum.csv", "detection.json", "topology.json",
                           "topology.dot", "signature_4.csv"}) {
    EXPECT_EQ(slurp(staged / file), slurp(piped / file)) << file;
    EXPECT_EQ(slurp(piped / file), slurp(again / file)) << file;
  }
  const json manifest = json::parse(slurp(piped / "manifest_simulate.json"));
  EXPECT_EQ(manifest.at("config").at("seed"), 1);
  EXPECT_EQ(manifest.at("command"), "simulate");
  EXPECT_EQ(manifest.at("config").at("decision").at("magnitude_threshold"), 0.05);
  const json learn = json::parse(slurp(piped / "manifest_learn.json"));
  ASSERT_EQ(learn.at("inputs").size(), 3u);
  EXPECT_EQ(learn.at("inputs")[1].at("fnv1a64").get<std::string>().size(), 16u);
}

TEST_F(CliTest, SeedOverrideAndFormats) {
  auto doc = chain_config("empirical");
  doc["trajectory_length"] = 20'000;
  const auto cfg = write_config("emp.json", doc);
  EXPECT_EQ(invoke({"simulate", "--config", cfg.string(), "--out", (dir_ / "s1").string()}), 0);
  EXPECT_EQ(invoke({"simulate", "--config", cfg.string(), "--out", (dir_ / "s2").string(), "--seed", "9"}), 0);
  EXPECT_TRUE(fs::exists(dir_ / "s1" / "clean.rtsp"));
  EXPECT_NE(slurp(dir_ / "s1" / "clean.rtsp"), slurp(dir_ / "s2" / "clean.rtsp"));
  EXPECT_EQ(json::parse(slurp(dir_ / "s2" / "manifest_simulate.json")).at("config").at("seed"), 9);

  const auto analytic = write_config("an.json", chain_config("analytic"));
  EXPECT_EQ(invoke({"pipeline", "--config", analytic.string(), "--out", (dir_ / "j").string(), "--format", "json"}), 0);
  EXPECT_TRUE(fs::exists(dir_ / "j" / "topology.json"));
  EXPECT_FALSE(fs::exists(dir_ / "j" / "topology.dot"));
  EXPECT_TRUE(fs::exists(dir_ / "j" / "spectrum.rtsm"));
}

TEST_F(CliTest, CsvPanelsAreCapped) {
  auto doc = chain_config("empirical");
  doc["trajectory_length"] = 2'000'000;
  doc["output"] = {{"format", "csv"}};
  const auto cfg = write_config("big.json", doc);
  EXPECT_EQ(invoke({"simulate", "--config", cfg.string(), "--out", (dir_ / "o").string()}), 2);
}

TEST_F(CliTest, DataAndAssumptionExitCodes) {
  const auto cfg = write_config("an.json", chain_config("analytic"));
  const auto out = dir_ / "o";
  ASSERT_EQ(invoke({"pipeline", "--config", cfg.string(), "--out", out.string()}), 0);
  std::ofstream(out / "spectrum.rtsm", std::ios::trunc) << "RTSMgarbage";
  EXPECT_EQ(invoke({"detect", "--config", cfg.string(), "--out", out.string()}), 3);

  auto near_leaf = chain_config("analytic");
  near_leaf["corruption"][0]["node"] = "2";
  const auto violating = write_config("violating.json", near_leaf);
  EXPECT_EQ(invoke({"pipeline", "--config", violating.string(), "--out", (dir_ / "v").string()}), 5);
}

TEST_F(CliTest, SweepOutputs) {
  const auto empty = write_config("empty.json", {{"instances", 0}, {"output", {{"directory", (dir_ / "e").string()}}}});
  EXPECT_EQ(invoke({"sweep", "--config", empty.string()}), 0);
  EXPECT_EQ(slurp(dir_ / "e" / "sweep_summary.csv"), "instance,nodes,corrupt_count,length,recovered,diagnostics\n");

  const auto small = write_config("small.json", {{"instances", 4}, {"seed", 5}});
  EXPECT_EQ(invoke({"sweep", "--config", small.string(), "--out", (dir_ / "a").string(), "--threads", "2"}), 0);
  SweepConfig cfg = load_sweep(small);
  cfg.output.directory = dir_ / "b";
  const auto result = cmd_sweep(cfg, 1);
  ASSERT_EQ(result.recovery_rates.size(), 1u);
  EXPECT_EQ(result.recovery_rates[0].second, 1.0);
  EXPECT_EQ(slurp(dir_ / "a" / "sweep_summary.csv"), slurp(dir_ / "b" / "sweep_summary.csv"));

  const auto bad = write_config("neg.json", {{"instances", 6}, {"violation", "corrupt_pair_two_hops"}, {"corrupt", {2, 3}}});
  EXPECT_EQ(invoke({"sweep", "--config", bad.string(), "--out", (dir_ / "n").string()}), 0);
  std::istringstream rows(slurp(dir_ / "n" / "sweep_summary.csv"));
  std::string line;
  std::getline(rows, line);
  std::size_t count = 0;
  while (std::getline(rows, line)) {
    ++count;
    std::vector<std::string> fields;
    std::istringstream cells(line);
    for (std::string cell; std::getline(cells, cell, ',');) fields.push_back(cell);
    const bool recovered = fields.at(4) == "1";
    const bool diagnosed = fields.size() > 5 && !fields[5].empty();
    // Never an unflagged wrong answer.
    EXPECT_TRUE(diagnosed || recovered) << line;
  }
  EXPECT_EQ(count, 6u);
}

}  // namespace
}  // namespace topolearn::cli
