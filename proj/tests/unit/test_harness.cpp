#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "loctime/error.hpp"
#include "loctime/harness.hpp"

using namespace loctime;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = fs::path(LOCTIME_SOURCE_DIR) / "configs";

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("loctime_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig small_config(const fs::path& out) {
  ExperimentConfig c;
  c.chain_file = kConfigs / "lazy_walk.json";
  c.n_values = {64, 256};
  c.sample_counts = {400};
  c.seed = 2024;
  c.x_levels = {0};
  c.y_levels = {1, 2};
  c.intervals = {{-0.5, 0.5}, {0.0, 1.0}};
  c.eps_grid = {0.25, 0.5, 1.0};
  c.delta_grid = {0.2, 0.1};
  c.output_dir = out;
  c.checks = kCheckNames;
  return c;
}

ErrorKind run_kind(const ExperimentConfig& c) {
  try {
    run_experiment(c);
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST(Config, ParsesAllKeys) {
  const auto c = parse_config(R"({
    "chain_file": "chains/x.json", "n_values": [10, 20], "sample_counts": [5],
    "seed": 18446744073709551615, "x_levels": [0, -1], "y_levels": [2],
    "intervals": [[-0.5, 0.5]], "eps_grid": [0.5], "delta_grid": [0.1],
    "output_dir": "out", "checks": ["spectral"]})",
                              "/base");
  EXPECT_EQ(c.chain_file, fs::path("/base/chains/x.json"));
  EXPECT_EQ(c.seed, 18446744073709551615ULL);
  EXPECT_EQ(c.x_levels, (std::vector<long long>{0, -1}));
  EXPECT_EQ(c.intervals.size(), 1u);
  EXPECT_EQ(c.output_dir, fs::path("/base/out"));
}

TEST(Config, RejectsMalformedInput) {
  for (const char* text : {"[]", "{", R"({"n_values": [1]})",
                           R"({"chain_file": "a", "bogus": 1})",
                           R"({"chain_file": "a", "n_values": [0]})",
                           R"({"chain_file": "a", "n_values": [1.5]})",
                           R"({"chain_file": "a", "seed": -3})",
                           R"({"chain_file": "a", "intervals": [[1]]})"}) {
    try {
      parse_config(text);
      ADD_FAILURE() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::ConfigInvalid) << text;
    }
  }
}

TEST(Config, ValidationRules) {
  auto c = small_config(scratch("validate"));
  EXPECT_NO_THROW(validate_config(c));
  auto bad = c;
  bad.checks = {"spectral", "nonsense"};
  EXPECT_EQ(run_kind(bad), ErrorKind::ConfigInvalid);
  bad = c;
  bad.delta_grid = {0.5};
  EXPECT_EQ(run_kind(bad), ErrorKind::ConfigInvalid);
  bad = c;
  bad.sample_counts = {1, 2, 3};
  EXPECT_EQ(run_kind(bad), ErrorKind::ConfigInvalid);
  bad = c;
  bad.chain_file = kConfigs / "missing.json";
  EXPECT_EQ(run_kind(bad), ErrorKind::ConfigInvalid);
  bad = c;
  bad.intervals = {{1.0, 0.0}};
  EXPECT_EQ(run_kind(bad), ErrorKind::ConfigInvalid);
}

TEST(RunExperiment, EmptyChecksAreAllSkipped) {
  auto c = small_config(scratch("empty"));
  c.checks.clear();
  const auto r = run_experiment(c);
  ASSERT_EQ(r.checks.size(), kCheckNames.size());
  for (const auto& rec : r.checks) EXPECT_EQ(rec.status, CheckStatus::Skipped);
  EXPECT_TRUE(r.all_selected_pass());
}

TEST(RunExperiment, PeriodicChainRefusesDistributionalChecks) {
  auto c = small_config(scratch("periodic"));
  c.chain_file = kConfigs / "plus_minus_walk.json";
  c.checks = {"levy-ks"};
  EXPECT_EQ(run_kind(c), ErrorKind::AperiodicityRequired);
  c.checks = {"aperiodicity", "occupation"};
  const auto r = run_experiment(c);
  EXPECT_EQ(r.find("aperiodicity").status, CheckStatus::Fail);
  EXPECT_EQ(r.find("aperiodicity").metric("is_aperiodic"), 0.0);
  EXPECT_EQ(r.find("occupation").metric("violations"), 0.0);
}

TEST(RunExperiment, RejectedChain) {
  const auto dir = scratch("rejected");
  fs::create_directories(dir);
  std::ofstream(dir / "bad.json") << R"({"transition": [[1, 0], [0, 1]], "observable": [1, -1]})";
  auto c = small_config(dir / "out");
  c.chain_file = dir / "bad.json";
  EXPECT_EQ(run_kind(c), ErrorKind::ChainRejected);
}

TEST(RunExperiment, LevyKsTriggersSpectral) {
  auto c = small_config(scratch("auto"));
  c.checks = {"levy-ks"};
  const auto r = run_experiment(c);
  EXPECT_TRUE(r.spectral_auto_run);
  EXPECT_NE(r.find("spectral").status, CheckStatus::Skipped);
  EXPECT_NEAR(r.find("levy-ks").metric("sigma2"), 0.5, 1e-12);
  const auto doc = nlohmann::json::parse(slurp(c.output_dir / "report.json"));
  EXPECT_TRUE(doc["spectral_auto_run"].get<bool>());
}

TEST(RunExperiment, ArtifactsExistParseAndReproduce) {
  const auto a = small_config(scratch("det_a"));
  auto b = a;
  b.output_dir = scratch("det_b");
  const auto ra = run_experiment(a, {.threads = 1});
  const auto rb = run_experiment(b, {.threads = 3});
  std::size_t artifacts = 0;
  for (const auto& rec : ra.checks) {
    EXPECT_NE(rec.status, CheckStatus::Skipped) << rec.name;
    if (rec.status == CheckStatus::Fail) EXPECT_FALSE(rec.metrics.empty()) << rec.name;
    for (const auto& name : rec.artifacts) {
      ++artifacts;
      const auto text = slurp(a.output_dir / name);
      ASSERT_FALSE(text.empty()) << name;
      EXPECT_EQ(text, slurp(b.output_dir / name)) << name;
      if (fs::path(name).extension() == ".json") {
        EXPECT_TRUE(nlohmann::json::accept(text)) << name;
      } else {
        EXPECT_EQ(text.find('\r'), std::string::npos);
        const auto header = text.substr(0, text.find('\n'));
        const auto columns = std::count(header.begin(), header.end(), ',');
        std::istringstream lines(text);
        std::string line;
        while (std::getline(lines, line)) EXPECT_EQ(std::count(line.begin(), line.end(), ','), columns) << name;
      }
    }
  }
  EXPECT_GT(artifacts, 10u);
  const auto report = nlohmann::json::parse(slurp(a.output_dir / "report.json"));
  EXPECT_EQ(report["checks"].size(), kCheckNames.size());
  EXPECT_EQ(report["environment"]["seed"].get<std::uint64_t>(), 2024u);
  EXPECT_EQ(ra.find("exact-law").status, CheckStatus::Pass);
  EXPECT_EQ(ra.find("spectral").status, CheckStatus::Pass);
}

TEST(Report, JsonShape) {
  VerificationReport r;
  CheckRecord rec;
  rec.name = "spectral";
  rec.status = CheckStatus::Fail;
  rec.metrics = {{"max_pairwise_relative", 0.5}};
  rec.artifacts = {"spectral.json"};
  r.checks.push_back(rec);
  const auto doc = nlohmann::json::parse(report_to_json(r));
  EXPECT_EQ(doc["checks"][0]["status"], "fail");
  EXPECT_EQ(doc["checks"][0]["metrics"]["max_pairwise_relative"], 0.5);
  EXPECT_EQ(doc["environment"]["tool_version"], kToolVersion);
  EXPECT_FALSE(r.all_selected_pass());
}
