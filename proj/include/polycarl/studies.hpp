#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "polycarl/errors.hpp"

namespace polycarl {

inline constexpr const char* kVersionTag = "polycarl 0.1.0";

// Bad config text or value; carries the offending field.
class ConfigError : public InvalidInput {
 public:
  ConfigError(std::string field, const std::string& what)
      : InvalidInput("config field '" + field + "': " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Unset optionals take the study's default when the config is resolved.
struct ExperimentConfig {
  std::string study;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "out";
  bool json_only = false;

  std::optional<int> dim, degree, k_max, grid_bits, cell_bits;
  double bound_factor = 4.0;
  double step_factor = 0.5;
  bool empty_window = false;

  int exponent = 10;           // N
  double c0 = 4.0;             // C0
  double counting_bound = 8.0; // D
  double tilde_factor = 3.0;

  std::optional<int> trials;
  std::optional<std::size_t> samples;
};

const std::vector<std::string>& study_names();

// `key = value` lines under optional `[section]` headers; '#' and ';' start
// comments.  Keys may also be given as section.key.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);
void set_config_value(ExperimentConfig& config, std::string_view key, std::string_view value);

// Fills study defaults, then checks ranges (ConfigError) and the desk-scale
// budget (ResourceLimit with the estimate).
ExperimentConfig resolve(const ExperimentConfig& config);

struct Table {
  std::string name;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row);
};

struct Plot {
  std::string name;
  std::string title;
  std::string x_label, y_label;
  std::vector<std::pair<double, double>> points;  // drawn on log-log axes
};

struct StudyResult {
  std::string study;
  std::vector<Table> tables;
  nlohmann::ordered_json summary = nlohmann::ordered_json::object();
  std::vector<Plot> plots;
  std::vector<std::string> failures;  // hard assertions that did not hold

  bool pass() const { return failures.empty(); }
  void require(bool ok, const std::string& what);
};

// Runs a study on a resolved config.
StudyResult run_study(const ExperimentConfig& config);

std::string format_number(double x);
std::string to_csv(const Table& table);
nlohmann::ordered_json config_json(const ExperimentConfig& config);
std::string to_json(const StudyResult& result, const ExperimentConfig& config);
std::string to_svg(const Plot& plot);

// Writes <study>.json plus, unless json_only, one CSV per table and one SVG
// per plot into config.out_dir.  Returns the paths written.
std::vector<std::string> write_artifacts(const StudyResult& result, const ExperimentConfig& config);

}  // namespace polycarl
