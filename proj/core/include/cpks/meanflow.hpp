#pragma once

#include <span>
#include <vector>

#include "cpks/finite_difference.hpp"
#include "cpks/grid.hpp"

namespace cpks {
struct Params;
}

namespace cpks::meanflow {

/// The (0,0) slice of u1 and u3. The (0,0) slice of u2 vanishes
/// identically (incompressibility plus impermeable walls).
struct MeanProfiles {
  std::vector<double> u1_00;
  std::vector<double> u3_00;

  static MeanProfiles zero(const Grid& grid) {
    return {std::vector<double>(grid.ny(), 0.0), std::vector<double>(grid.ny(), 0.0)};
  }
};

/// Crank-Nicolson factorization of (I - dt/(2A) d_yy) with Dirichlet rows.
class HeatStepper {
 public:
  HeatStepper(const Grid& grid, double A, double dt);

  double dt() const { return dt_; }

  /// One step of d_t u - (1/A) d_yy u = source, u(+-1) = 0, with the source
  /// held fixed over the step.
  std::vector<double> advance(std::span<const double> u, std::span<const double> source) const;

 private:
  double h_ = 0.0;
  double A_ = 1.0;
  double dt_ = 0.0;
  TridiagonalLU<double> lu_;
};

/// Advances the mean profiles by dt:
///   d_t u1 - (1/A) d_yy u1 + u2_00 = (1/A) n_00
///   d_t u3 - (1/A) d_yy u3 = 0
/// u2_00_forcing is identically zero for this system; it is accepted so the
/// lift-up coupling reads as in the full zero-mode equations.
MeanProfiles step(const MeanProfiles& mean, std::span<const double> n_00,
                  std::span<const double> u2_00_forcing, const Grid& grid, const Params& params,
                  double dt);

}  // namespace cpks::meanflow
