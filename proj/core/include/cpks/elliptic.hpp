#pragma once

#include <span>
#include <utility>
#include <vector>

#include "cpks/finite_difference.hpp"
#include "cpks/grid.hpp"
#include "cpks/spec_field.hpp"

namespace cpks::elliptic {

/// Factorized (d^2/dy^2 - eta^2 - shift) with homogeneous Dirichlet rows.
///
/// shift = 1 is the chemoattractant problem, shift = 0 inverts the Fourier
/// Laplacian for u2. The (0,0) mode with shift = 0 is singular and rejected.
class HelmholtzOperator {
 public:
  HelmholtzOperator() = default;
  HelmholtzOperator(ModeIndex mode, double shift, const Grid& grid);

  ModeIndex mode() const { return mode_; }
  double shift() const { return shift_; }

  /// Solves op(u) = rhs at interior points with u(+-1) = 0.
  Profile solve(std::span<const Complex> rhs) const;
  void solve_into(std::span<const Complex> rhs, std::span<Complex> out) const;

 private:
  ModeIndex mode_{};
  double shift_ = 0.0;
  TridiagonalLU<double> lu_;
};

/// Chemoattractant per mode: (d_yy - eta^2 - 1) c = -n, c(+-1) = 0.
Profile solve_chemo(std::span<const Complex> n_mode, ModeIndex mode, const Grid& grid);

/// Dirichlet inversion of the Fourier Laplacian: (d_yy - eta^2) u2 = q,
/// u2(+-1) = 0. Requires eta > 0; throws std::invalid_argument otherwise.
/// The Neumann half of the clamped condition is enforced by the stepper.
Profile solve_u2_from_laplacian(std::span<const Complex> q_mode, ModeIndex mode,
                                const Grid& grid);

/// Horizontal velocities from u2 and omega2 = d_z u1 - d_x u3 via the
/// pointwise 2x2 system
///   i k1 u1 + i k3 u3 = -d_y u2
///   i k3 u1 - i k1 u3 = omega2.
/// Requires eta > 0.
std::pair<Profile, Profile> reconstruct_u1_u3(std::span<const Complex> u2_mode,
                                              std::span<const Complex> omega2_mode,
                                              ModeIndex mode, const Grid& grid);

/// Per-grid cache of the Dirichlet factorizations (one per mode and shift).
class OperatorCache {
 public:
  explicit OperatorCache(const Grid& grid);

  const HelmholtzOperator& chemo(int i1, int i3) const { return chemo_[index(i1, i3)]; }
  /// Only valid for eta > 0.
  const HelmholtzOperator& laplacian(int i1, int i3) const { return lap_[index(i1, i3)]; }

 private:
  std::size_t index(int i1, int i3) const { return static_cast<std::size_t>(i1) * nz_ + i3; }

  int nz_ = 0;
  std::vector<HelmholtzOperator> chemo_;
  std::vector<HelmholtzOperator> lap_;
};

}  // namespace cpks::elliptic
