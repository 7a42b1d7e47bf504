#include <gtest/gtest.h>
#include <sys/wait.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  auto dir = fs::path(::testing::TempDir()) / ("shelterflow_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Result run(const std::string& args) {
  static int counter = 0;
  const auto base = fs::path(::testing::TempDir()) / ("shelterflow_cli_run" + std::to_string(counter++));
  const std::string cmd = std::string("\"") + SHELTERFLOW_CLI + "\" " + args + " >\"" + base.string() +
                          ".out\" 2>\"" + base.string() + ".err\"";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(base.string() + ".out");
  r.err = slurp(base.string() + ".err");
  return r;
}

std::string strip_comments(const std::string& dot) {
  std::stringstream in(dot);
  std::string out;
  for (std::string line; std::getline(in, line);)
    if (line.rfind("//", 0) != 0) out += line + "\n";
  return out;
}

const std::string kFig1 = std::string(SHELTERFLOW_SAMPLE_DIR) + "/fig1.csv";

}  // namespace

TEST(Cli, GraphOnFig1MatchesGolden) {
  const auto dir = scratch("fig1");
  const auto r = run("graph \"" + kFig1 + "\" -o \"" + dir.string() + "\"");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(strip_comments(slurp(dir / "graph_full.dot")), slurp(SHELTERFLOW_GOLDEN_DIR "/fig1_graph.dot"));
  const auto got = json::parse(slurp(dir / "graph_full.json"));
  const auto want = json::parse(slurp(SHELTERFLOW_GOLDEN_DIR "/fig1_graph.json"));
  EXPECT_EQ(got["graph"]["nodes"], want["nodes"]);
  EXPECT_EQ(got["graph"]["edges"], want["edges"]);
  EXPECT_EQ(got["graph"]["window"]["start"], "2018-04-01");
  EXPECT_EQ(got["graph"]["window"]["end"], "2018-05-06");
  EXPECT_TRUE(got["provenance"].contains("input_sha256"));
  EXPECT_FALSE(fs::exists(dir / "_INCOMPLETE"));
  for (const char* name : {"graph_pre-lockdown.dot", "graph_lockdown.json", "relative_lockdown.dot",
                           "relative_post-lockdown.json", "edges_pre-lockdown.csv", "edges_lockdown.csv"})
    EXPECT_TRUE(fs::exists(dir / name)) << name;
}

TEST(Cli, StatsOnEmptyInputFailsWithMessage) {
  const auto dir = scratch("empty");
  {
    std::ofstream f(dir / "empty.csv");
    f << "person_id,start_date,shelter_id,duration_days\n";
  }
  const auto r = run("stats \"" + (dir / "empty.csv").string() + "\" -o \"" + (dir / "out").string() + "\"");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("no persons in period"), std::string::npos) << r.err;
  const auto err = json::parse(r.err);
  EXPECT_EQ(err["error"]["kind"], "input");
  EXPECT_EQ(err["error"]["exit_code"], 2);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run("--help").code, 0);
  EXPECT_EQ(run("graph --no-such-flag x.csv").code, 1);
  EXPECT_EQ(run("graph \"" + kFig1 + "\" --gap-comparison sideways -o /tmp/shelterflow_cli_unused").code, 1);
  const auto missing = run("validate /nonexistent/file.csv -o /tmp/shelterflow_cli_unused");
  EXPECT_EQ(missing.code, 2) << missing.err;
  const auto dir = scratch("nomode");
  const auto nomode = run("timeline \"" + kFig1 + "\" -o \"" + dir.string() + "\"");
  EXPECT_EQ(nomode.code, 1);
  EXPECT_NE(nomode.err.find("mode"), std::string::npos);
}

TEST(Cli, ConfigFileThenFlagsOverride) {
  const auto dir = scratch("config");
  {
    std::ofstream f(dir / "cfg.json");
    f << R"({"gap": {"threshold_days": 10}, "timeline": {"smoothing_window": 3}})";
  }
  const auto r = run("-c \"" + (dir / "cfg.json").string() + "\" config --gap-threshold 12");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["gap"]["threshold_days"], 12);
  EXPECT_EQ(j["timeline"]["smoothing_window"], 3);
  {
    std::ofstream f(dir / "bad.json");
    f << R"({"gap": {"threshold": 10}})";
  }
  EXPECT_EQ(run("-c \"" + (dir / "bad.json").string() + "\" config").code, 1);
}

TEST(Cli, RepeatedRunsAreByteIdentical) {
  const auto dir = scratch("repeat");
  const auto sim = run("simulate --seed 3 --persons 400 -o \"" + (dir / "sim").string() + "\"");
  ASSERT_EQ(sim.code, 0) << sim.err;
  const auto input = (dir / "sim" / "records.csv").string();
  ASSERT_TRUE(fs::exists(input));
  const auto sim2 = run("simulate --seed 3 --persons 400 -o \"" + (dir / "sim2").string() + "\"");
  ASSERT_EQ(sim2.code, 0);
  EXPECT_EQ(slurp(dir / "sim" / "records.csv"), slurp(dir / "sim2" / "records.csv"));
  EXPECT_EQ(slurp(dir / "sim" / "ground_truth.json"), slurp(dir / "sim2" / "ground_truth.json"));

  for (const std::string sub : {"validate --dump-sequences", "graph", "timeline --mode direct", "stats", "cohorts"}) {
    std::map<std::string, std::string> first;
    for (int rep = 0; rep < 2; ++rep) {
      const auto out = dir / ("run" + std::to_string(rep));
      fs::remove_all(out);
      const auto r = run(sub + " \"" + input + "\" -o \"" + out.string() + "\"");
      ASSERT_EQ(r.code, 0) << sub << ": " << r.err;
      std::map<std::string, std::string> files;
      for (const auto& e : fs::directory_iterator(out)) files[e.path().filename().string()] = slurp(e.path());
      ASSERT_FALSE(files.empty()) << sub;
      if (rep == 0) first = files;
      else EXPECT_EQ(files, first) << sub;
    }
  }
}

TEST(Cli, TimelineAndStatsArtifacts) {
  const auto dir = scratch("artifacts");
  ASSERT_EQ(run("simulate --seed 4 --persons 300 -o \"" + dir.string() + "\"").code, 0);
  const auto input = "\"" + (dir / "records.csv").string() + "\"";
  ASSERT_EQ(run("timeline " + input + " --mode mobility --smoothing 1 -o \"" + (dir / "t").string() + "\"").code, 0);
  const auto timeline = slurp(dir / "t" / "timeline.csv");
  EXPECT_NE(timeline.find("\ndate,value,label\n"), std::string::npos);
  EXPECT_NE(timeline.find("ratio:All:mobility"), std::string::npos);
  ASSERT_EQ(run("stats " + input + " --mode direct -o \"" + (dir / "s").string() + "\"").code, 0);
  const auto stats = json::parse(slurp(dir / "s" / "stats.json"));
  EXPECT_EQ(stats["columns"].size(), 18u);
  ASSERT_EQ(run("cohorts " + input + " -o \"" + (dir / "c").string() + "\"").code, 0);
  const auto cohorts = json::parse(slurp(dir / "c" / "cohorts.json"));
  const auto truth = json::parse(slurp(dir / "ground_truth.json"));
  std::map<std::string, int> planted;
  for (const auto& p : truth["persons"]) ++planted[p["cohort"].get<std::string>()];
  for (const auto& [label, n] : planted) EXPECT_EQ(cohorts["counts"][label], n) << label;
}
