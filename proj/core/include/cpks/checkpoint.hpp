#pragma once

#include <cstdint>
#include <filesystem>

#include "cpks/dynamics.hpp"
#include "cpks/grid.hpp"

namespace cpks {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Binary checkpoint layout, all little-endian:
///
///   "CPKS"                       4 bytes
///   version                      u32
///   nx, ny, nz                   u32 each
///   t, A, a                      f64 each
///   n, omega2, delta_u2          f64, modes in (i1, i3, y) order, re/im interleaved
///   mean_u1, mean_u3             f64, ny values each
struct Checkpoint {
  int nx = 0, ny = 0, nz = 0;
  double A = 0.0;
  double a = 0.0;
  State state;
};

/// Throws std::runtime_error with the path on I/O failure.
void save_checkpoint(const State& state, const Grid& grid, const Params& params,
                     const std::filesystem::path& path);

/// Throws std::runtime_error on a missing file, bad magic, version mismatch,
/// or truncation.
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// As above, and additionally rejects a checkpoint whose grid differs from `grid`.
Checkpoint load_checkpoint(const std::filesystem::path& path, const Grid& grid);

}  // namespace cpks
