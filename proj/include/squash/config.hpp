#pragma once

#include <cstdint>
#include <string>

#include "squash/params.hpp"

namespace squash {

struct RunConfig {
  ModelParams model;
  int dim = 30;
  double dt = 0.05;
  double t_final = 50.0;
  int n_traj = 2000;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  std::string format = "csv";  // csv | json
  int workers = 0;             // 0: hardware concurrency
  int checkpoints = 20;

  /// Throws ConfigError describing the first invalid field.
  void validate() const;
};

/// Parses flat `key = value` text. `#` starts a comment; unknown or repeated keys are errors.
RunConfig parse_config(const std::string& text);

RunConfig load_config(const std::string& path);

/// Inverse of parse_config; reals are written with 17 significant digits.
std::string format_config(const RunConfig& c);

}  // namespace squash
