#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

namespace stcli {

/// Flat experiment configuration. Keys in text form match the long flag
/// names ("grid-m", "m-max", ...). Optional fields left empty are filled
/// with potential- and kernel-specific defaults by the driver.
struct ExperimentConfig {
  std::string command;
  std::string target;  // family, moment scheme or kernel name, depending on the command
  std::string potential = "quartic";
  std::string kernel = "order4-discrete";
  int nu = 3;
  std::optional<double> beta;
  std::optional<double> grid_a;
  std::optional<double> grid_b;
  std::optional<int> grid_m;
  std::optional<int> m_max;
  int gh_points = 10;
  std::uint64_t seed = 2024;
  long samples = 1000000;
  int truncation = 1023;
  int levels = 3;
  double x = 0.0;
  double xp = 0.0;
  int n_ref = 511;
  std::optional<double> tol;
  std::string out;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Parses "key = value" lines; '#' starts a comment. Unknown keys and
/// malformed values throw std::invalid_argument naming the line.
ExperimentConfig parse_config(const std::string& text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {});

/// Inverse of parse_config: one key per line, doubles with 17 significant
/// digits, empty optionals omitted.
std::string to_text(const ExperimentConfig& cfg);

nlohmann::json to_json(const ExperimentConfig& cfg);

}  // namespace stcli
