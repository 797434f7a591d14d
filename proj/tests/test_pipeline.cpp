#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <sstream>

#include <json.hpp>

#include "streetonomics/config.hpp"
#include "streetonomics/error.hpp"
#include "streetonomics/pipeline.hpp"
#include "test_support.hpp"

using namespace streetonomics;
using support::read_file;
using support::ScratchDir;
using support::write_file;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = STREETONOMICS_FIXTURES;
const fs::path kData = STREETONOMICS_DATA;

const std::string kDatasetHeader =
    "city,street_name,district,denomination_year,honoree_name,gender,occupation_raw,"
    "occupation_group,country,birth_year,death_year\n";

std::string minimal_config(const fs::path& dataset, const std::string& extra = "") {
  return "offline: false\nprompt: false\n" + extra +
         "cities:\n  - id: x\n    home_country: FR\n    start_decade: 1860\n    dataset: " +
         dataset.string() + "\n";
}

RunConfig demo(const ScratchDir& dir) {
  fs::create_directories(dir / "archive");
  const auto path = dir / "demo.yaml";
  write_file(path, support::demo_config(kFixtures, kData, dir / "out", dir / "archive"));
  return load_config(path);
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + STREETONOMICS_CLI + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

const std::string kOneCity = "cities:\n  - id: x\n    home_country: FR\n    start_decade: 1860\n";

TEST(Config, RejectsUnknownKeysAndMissingFields) {
  EXPECT_NO_THROW(parse_config(kOneCity, "/"));
  EXPECT_THROW(parse_config("cities: []\n", "/"), UsageError);
  EXPECT_THROW(parse_config("colour: blue\n" + kOneCity, "/"), UsageError);
  EXPECT_THROW(parse_config(kOneCity + "    tint: red\n", "/"), UsageError);
  EXPECT_THROW(parse_config("cities:\n  - id: x\n    start_decade: 1860\n", "/"), UsageError);
  EXPECT_THROW(parse_config("cities:\n  - id: x\n    home_country: FR\n", "/"), UsageError);
  EXPECT_THROW(parse_config("cities:\n  - id: x\n    home_country: FR\n    start_decade: 1860\n"
                            "  - id: x\n    home_country: FR\n    start_decade: 1860\n", "/"),
               UsageError);
  EXPECT_THROW(parse_config("bins: 1\n" + kOneCity, "/"), UsageError);
  EXPECT_THROW(parse_config("seed: banana\n" + kOneCity, "/"), UsageError);
  EXPECT_THROW(parse_config("metrics: [f_prop, vibes]\n" + kOneCity, "/"), UsageError);
}

TEST(Config, ResolvesRelativePathsAndDefaults) {
  const auto cfg = parse_config(
      "cities:\n  - id: paris\n    home_country: France\n    start_decade: 1860\n    dataset: d/p.csv\n",
      "/base");
  EXPECT_EQ(cfg.output_dir, fs::path("/base/out"));
  EXPECT_EQ(*cfg.cities[0].dataset, fs::path("/base/d/p.csv"));
  EXPECT_EQ(cfg.cities[0].city.home_country.code, "FR");
  EXPECT_EQ(cfg.ranking_mode, RankingMode::cumulative);
  EXPECT_TRUE(cfg.metric_enabled("fhd"));
}

TEST(Config, OverridesChangeTheHash) {
  auto cfg = parse_config(kOneCity, "/");
  const auto before = cfg.hash();
  cfg.overrides.push_back("seed=3");
  EXPECT_NE(cfg.hash(), before);
  EXPECT_NE(cfg.echo().find("# override: seed=3"), std::string::npos);
}

TEST(Config, PathResolutionOrder) {
  EXPECT_EQ(resolve_config_path(std::string("a.yaml")), fs::path("a.yaml"));
  ::setenv(std::string(kConfigEnvVar).c_str(), "/etc/from_env.yaml", 1);
  EXPECT_EQ(resolve_config_path(std::nullopt), fs::path("/etc/from_env.yaml"));
  EXPECT_EQ(resolve_config_path(std::string("b.yaml")), fs::path("b.yaml"));
  ::unsetenv(std::string(kConfigEnvVar).c_str());
  EXPECT_EQ(resolve_config_path(std::nullopt).filename(), fs::path(kDefaultConfigFile));
}

TEST(Pipeline, MissingConfiguredFileIsUsageError) {
  ScratchDir dir("missing_file");
  write_file(dir / "c.yaml", minimal_config(dir / "nope.csv"));
  std::ostringstream log;
  EXPECT_THROW(Pipeline(load_config(dir / "c.yaml"), log), UsageError);
}

TEST(Pipeline, MissingUpstreamNamesTheCommand) {
  ScratchDir dir("upstream");
  std::ostringstream log;
  Pipeline p(demo(dir), log);
  try {
    p.metrics();
    FAIL() << "expected a data error";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("streetonomics enrich"), std::string::npos) << e.what();
  }
  try {
    p.enrich();
    FAIL() << "expected a data error";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("streetonomics ingest"), std::string::npos) << e.what();
  }
}

TEST(Pipeline, EmptyDatasetWritesEmptyFilesAndWarns) {
  ScratchDir dir("empty");
  write_file(dir / "x.csv", kDatasetHeader);
  write_file(dir / "c.yaml", minimal_config(dir / "x.csv"));
  std::ostringstream log;
  Pipeline p(load_config(dir / "c.yaml"), log);
  p.ingest();
  p.enrich();
  p.metrics();
  EXPECT_GT(p.warnings(), 0u);
  EXPECT_TRUE(fs::exists(dir / "out/x/metrics/f_prop_by_decade.csv"));
  EXPECT_NE(log.str().find("no usable records"), std::string::npos);
}

TEST(Pipeline, UnchangedRerunIsSkippedAndChangedInputReruns) {
  ScratchDir dir("stamps");
  write_file(dir / "x.csv", kDatasetHeader + "x,Rue A,,1900,Anne A,f,poet,,FR,1800,1870\n");
  write_file(dir / "c.yaml", minimal_config(dir / "x.csv"));
  std::ostringstream log;
  {
    Pipeline p(load_config(dir / "c.yaml"), log);
    EXPECT_FALSE(p.ingest().at(0).skipped);
    EXPECT_TRUE(p.ingest().at(0).skipped);
  }
  EXPECT_NE(log.str().find("up to date"), std::string::npos);

  write_file(dir / "x.csv", kDatasetHeader + "x,Rue B,,1900,Bea B,f,poet,,FR,1800,1870\n");
  Pipeline p(load_config(dir / "c.yaml"), log);
  EXPECT_FALSE(p.ingest().at(0).skipped);

  // A hand-edited output also forces a rerun.
  write_file(dir / "out/x/records.csv", "tampered\n");
  EXPECT_FALSE(p.ingest().at(0).skipped);
  EXPECT_NE(read_file(dir / "out/x/records.csv"), "tampered\n");
}

TEST(Pipeline, OutputsCarryMetadata) {
  ScratchDir dir("metadata");
  std::ostringstream log;
  Pipeline p(demo(dir), log);
  p.ingest();
  p.enrich();
  p.metrics();
  const auto csv = read_file(dir / "out/alpha/metrics/f_prop_by_decade.csv");
  EXPECT_EQ(csv.rfind("# generator: streetonomics ", 0), 0u);
  EXPECT_NE(csv.find("# config_sha256: " + p.config().hash()), std::string::npos);
  EXPECT_NE(csv.find("# input: "), std::string::npos);
  EXPECT_NE(csv.find("#   seed: 7"), std::string::npos);

  const auto report = nlohmann::json::parse(read_file(dir / "out/alpha/metrics/report.json"));
  EXPECT_EQ(report["metadata"]["config_sha256"], p.config().hash());
  EXPECT_TRUE(report["metrics"].contains("fhd"));
}

TEST(Pipeline, TwoRunsAreByteIdentical) {
  ScratchDir dir("twice");
  const auto cfg = demo(dir);
  std::ostringstream log;
  std::map<std::string, std::string> first;
  for (int run = 0; run < 2; ++run) {
    fs::remove_all(dir / "out");
    Pipeline p(cfg, log);
    p.ingest();
    p.enrich();
    p.metrics();
    p.map();
    p.validate_sample();
    for (const auto& e : fs::recursive_directory_iterator(dir / "out")) {
      if (!e.is_regular_file()) continue;
      const auto rel = fs::relative(e.path(), dir / "out").string();
      if (run == 0) first[rel] = read_file(e.path());
      else { EXPECT_EQ(read_file(e.path()), first.at(rel)) << rel; }
    }
  }
  EXPECT_GT(first.size(), 10u);
}

TEST(Pipeline, MetricsSelectionLimitsOutputs) {
  ScratchDir dir("selection");
  fs::create_directories(dir / "archive");
  auto text = support::demo_config(kFixtures, kData, dir / "out", dir / "archive");
  write_file(dir / "c.yaml", "metrics: [fhd]\n" + text);
  std::ostringstream log;
  Pipeline p(load_config(dir / "c.yaml"), log);
  p.ingest();
  p.enrich();
  p.metrics();
  EXPECT_TRUE(fs::exists(dir / "out/alpha/metrics/fhd.csv"));
  EXPECT_FALSE(fs::exists(dir / "out/alpha/metrics/f_prop_by_decade.csv"));
}

TEST(Cli, ExitCodes) {
  ScratchDir dir("cli");
  EXPECT_EQ(run_cli("--version"), 0);
  EXPECT_EQ(run_cli("--no-such-flag ingest"), 1);
  EXPECT_EQ(run_cli("--config " + (dir / "absent.yaml").string() + " ingest"), 1);

  // Malformed dataset.
  write_file(dir / "bad.csv", "city,street_name\nx,Rue A\n");
  write_file(dir / "bad.yaml", minimal_config(dir / "bad.csv"));
  EXPECT_EQ(run_cli("--config " + (dir / "bad.yaml").string() + " ingest"), 2);

  // Offline with a lookup that the archive cannot serve.
  fs::create_directories(dir / "archive");
  write_file(dir / "gap.csv", kDatasetHeader + "x,Rue A,,1900,Anne Incomplete,,,,,,\n");
  write_file(dir / "gap.yaml", minimal_config(dir / "gap.csv", "archive: " + (dir / "archive").string() + "\n"));
  const auto gap = "--config " + (dir / "gap.yaml").string();
  EXPECT_EQ(run_cli(gap + " ingest"), 0);
  EXPECT_EQ(run_cli(gap + " --offline enrich"), 3);
  EXPECT_EQ(run_cli(gap + " metrics"), 2);  // nothing enriched yet
}
