#pragma once

// Stage runner behind the command-line tool. Every stage reads its upstream
// artifacts from <output_dir>/<city>/, writes its own, and records a stamp of
// input and output hashes so an unchanged rerun only hashes.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "streetonomics/config.hpp"

namespace streetonomics {

inline constexpr std::string_view kToolVersion = STREETONOMICS_VERSION;

class Transport;

struct StageResult {
  std::string stage;
  std::string city_id;
  bool skipped = false;  // stamp matched, nothing recomputed
  std::vector<std::filesystem::path> outputs;
};

class Pipeline {
 public:
  /// Validates every path the config references. `prompt_in` is used for
  /// ambiguous-honoree questions when prompting is enabled.
  Pipeline(RunConfig config, std::ostream& log, std::istream* prompt_in = nullptr);

  /// Replaces the network stack (tests use a replay transport).
  void set_transport(Transport* transport) { transport_override_ = transport; }

  std::vector<StageResult> ingest();
  std::vector<StageResult> enrich(bool discover = false);
  std::vector<StageResult> metrics();
  std::vector<StageResult> map();
  std::vector<StageResult> validate_sample();
  std::vector<StageResult> validate_report();
  /// Runs every stage, then writes <output_dir>/bundle with the data behind
  /// the summary tables and figure series plus a SHA-256 manifest. Returns the bundle dir.
  std::filesystem::path reproduce();

  const RunConfig& config() const noexcept { return config_; }
  std::filesystem::path city_dir(const CitySettings& city) const;
  std::size_t warnings() const noexcept { return warnings_; }

 private:
  struct Input {
    std::string label;
    std::string sha256;
  };
  using StageBody = std::vector<std::filesystem::path> (Pipeline::*)(const CitySettings&,
                                                                      const std::vector<Input>&);

  StageResult run_stage(const CitySettings& city, const std::string& stage,
                        const std::vector<std::filesystem::path>& input_files, StageBody body);

  std::vector<std::filesystem::path> do_ingest(const CitySettings&, const std::vector<Input>&);
  std::vector<std::filesystem::path> do_enrich(const CitySettings&, const std::vector<Input>&);
  std::vector<std::filesystem::path> do_metrics(const CitySettings&, const std::vector<Input>&);
  std::vector<std::filesystem::path> do_map(const CitySettings&, const std::vector<Input>&);
  std::vector<std::filesystem::path> do_sample(const CitySettings&, const std::vector<Input>&);
  std::vector<std::filesystem::path> do_report(const CitySettings&, const std::vector<Input>&);

  std::filesystem::path require(const CitySettings& city, const std::string& file,
                                const std::string& producer) const;
  std::string csv_header(const std::string& stage, const std::string& city,
                         const std::vector<Input>& inputs) const;
  std::string json_metadata(const std::string& stage, const std::string& city,
                            const std::vector<Input>& inputs) const;
  void warn(const std::string& city, const std::string& message);

  RunConfig config_;
  std::string config_hash_;
  std::ostream& log_;
  std::istream* prompt_in_;
  Transport* transport_override_ = nullptr;
  bool discover_ = false;
  std::size_t warnings_ = 0;
};

}  // namespace streetonomics
