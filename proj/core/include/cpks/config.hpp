#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <numbers>
#include <string>

#include "cpks/diagnostics.hpp"
#include "cpks/dynamics.hpp"
#include "cpks/grid.hpp"

namespace cpks {

/// Initial-condition preset and its parameters.
struct InitSpec {
  std::string preset = "gaussian_bump";  ///< gaussian_bump | stripe | restart
  double mass = 0.3;
  double width = 0.5;
  double sy = 4.0;  ///< y stretch of the bump exponent
  double center_x = std::numbers::pi;
  double center_z = std::numbers::pi;
  /// Velocity perturbation amplitude on modes (+-1,0), (0,+-1).
  double u_amp = 0.0;
  /// When > 0, overrides u_amp so that A (|u2,0| + |u3,0|) equals this value.
  double u_product = 0.0;
  /// Relative amplitude of a seeded smooth multiplicative perturbation of n.
  double noise = 0.0;
  std::string restart_path;
};

struct OutputSpec {
  std::string dir;  ///< empty: no files
  int cadence = 10;
  int checkpoint_every = 0;  ///< in samples; 0 disables intermediate checkpoints
};

struct RunConfig {
  int nx = 32;
  int ny = 65;
  int nz = 32;
  Params params;
  InitSpec init;
  OutputSpec output;
  std::uint64_t seed = 1;
  diagnostics::BlowupThresholds blowup;

  /// Throws std::invalid_argument on inconsistent values.
  void validate() const;
  Grid grid() const { return make_grid(nx, ny, nz); }
};

/// Sets one key (same names as the file grammar). Throws
/// std::invalid_argument on an unknown key or a malformed value.
void set_key(RunConfig& config, const std::string& key, const std::string& value);

/// Parses `key = value` lines. `#` starts a comment; blank lines are
/// ignored. Errors carry `source:line`.
RunConfig parse_config(std::istream& in, const std::string& source = "<config>");
RunConfig load_config(const std::filesystem::path& path);

/// Writes every key, in a form parse_config reads back to the same config.
std::string to_text(const RunConfig& config);

}  // namespace cpks
