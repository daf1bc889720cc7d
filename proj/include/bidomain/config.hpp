#pragma once

// Run configuration in INI form. Sections: [run], [model], [stimulus],
// [multiresolution], [time], [solver]. Every key is optional; unknown
// sections or keys are rejected.

#include <string>
#include <vector>

#include "bidomain/simulation.hpp"

namespace bidomain {

struct RunConfig {
  SimulationOptions sim;
  double t_final = 0.5;
  std::vector<double> snapshot_times{0.1, 0.2, 0.3, 0.4, 0.5};
  std::string output_dir = "run";
  std::string reference_run;  // optional directory of a reference run

  /// Throws ConfigError naming the offending field.
  void validate() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Parse INI text. Syntax errors carry the line number; `origin` names the source.
RunConfig parse_config(const std::string& text, const std::string& origin = "<config>");
RunConfig load_config(const std::string& path);

/// Full INI rendering of every key; parse_config(format_config(c)) == c.
std::string format_config(const RunConfig& config);
void save_config(const RunConfig& config, const std::string& path);

}  // namespace bidomain
