// streetonomics: command-line entry point.
//
//   streetonomics [global flags] <ingest|enrich|metrics|map|validate|reproduce>
//
// Exit codes: 0 ok, 1 usage, 2 data, 3 network.

#include <unistd.h>

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "streetonomics/config.hpp"
#include "streetonomics/error.hpp"
#include "streetonomics/pipeline.hpp"

using namespace streetonomics;

int main(int argc, char** argv) {
  CLI::App app{"Street-name analytics: ingest, enrich, metrics, maps and validation"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  std::optional<std::string> config_flag;
  std::optional<std::uint64_t> seed;
  bool offline = false, strict = false, no_prompt = false, within = false;
  app.add_option("--config", config_flag, "Config file (default: $STREETONOMICS_CONFIG, then ./streetonomics.yaml)");
  app.add_option("--seed", seed, "Sampling seed (overrides the config)");
  app.add_flag("--offline", offline, "Forbid network access; replay the response archive");
  app.add_flag("--strict-formulae", strict, "Foreigner share with the numerator counted over all decades");
  app.add_flag("--no-prompt", no_prompt, "Never ask about ambiguous honorees; rely on the decisions file");
  app.add_flag("--within-district", within, "District shares relative to each district's own streets");

  auto* ingest = app.add_subcommand("ingest", "Validate and normalise the curated dataset and road extract");
  auto* enrich = app.add_subcommand("enrich", "Fill honoree fields from the knowledge base");
  bool discover = false;
  enrich->add_flag("--discover", discover, "Also list streets with a named-after link in the city");
  auto* metrics = app.add_subcommand("metrics", "Compute decade, district and occupation metrics");
  auto* map = app.add_subcommand("map", "Write district choropleths as GeoJSON");
  auto* validate = app.add_subcommand("validate", "Coverage audit");
  validate->require_subcommand(1);
  auto* sample = validate->add_subcommand("sample", "Draw the stratified street sample to annotate");
  auto* report = validate->add_subcommand("report", "Estimate coverage from the annotated sample");
  auto* reproduce = app.add_subcommand("reproduce", "Run every stage and write the figure/table bundle");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return static_cast<int>(ExitCode::usage);
  }

  try {
    RunConfig cfg = load_config(resolve_config_path(config_flag));
    if (seed) {
      cfg.seed = *seed;
      cfg.overrides.push_back("seed=" + std::to_string(*seed));
    }
    if (offline) {
      cfg.offline = true;
      cfg.overrides.push_back("offline=true");
    }
    if (strict) {
      cfg.strict_formulae = true;
      cfg.overrides.push_back("strict_formulae=true");
    }
    if (within) {
      cfg.within_district = true;
      cfg.overrides.push_back("within_district=true");
    }
    if (no_prompt) cfg.prompt = false;  // interaction only; results do not change

    const bool interactive = cfg.prompt && isatty(STDIN_FILENO);
    Pipeline pipeline(std::move(cfg), std::cerr, interactive ? &std::cin : nullptr);

    if (*ingest) pipeline.ingest();
    else if (*enrich) pipeline.enrich(discover);
    else if (*metrics) pipeline.metrics();
    else if (*map) pipeline.map();
    else if (*sample) pipeline.validate_sample();
    else if (*report) pipeline.validate_report();
    else if (*reproduce) std::cout << pipeline.reproduce().string() << "\n";
    return static_cast<int>(ExitCode::ok);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::data);
  }
}
