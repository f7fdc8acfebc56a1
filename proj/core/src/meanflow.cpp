#include "cpks/meanflow.hpp"

#include <stdexcept>

#include "cpks/dynamics.hpp"

namespace cpks::meanflow {

HeatStepper::HeatStepper(const Grid& grid, double A, double dt) : h_(grid.h()), A_(A), dt_(dt) {
  const int ny = grid.ny();
  const double r = 0.5 * dt / (A * h_ * h_);
  std::vector<double> lower(ny, -r), diag(ny, 1.0 + 2.0 * r), upper(ny, -r);
  lower[0] = upper[0] = lower[ny - 1] = upper[ny - 1] = 0.0;
  diag[0] = diag[ny - 1] = 1.0;
  lu_ = TridiagonalLU<double>(std::move(lower), std::move(diag), std::move(upper));
}

std::vector<double> HeatStepper::advance(std::span<const double> u,
                                         std::span<const double> source) const {
  const std::size_t n = u.size();
  const double r = 0.5 * dt_ / (A_ * h_ * h_);
  std::vector<double> rhs(n, 0.0);
  for (std::size_t j = 1; j + 1 < n; ++j)
    rhs[j] = u[j] + r * (u[j + 1] - 2.0 * u[j] + u[j - 1]) + dt_ * source[j];
  lu_.solve_in_place<double>(rhs);
  return rhs;
}

MeanProfiles step(const MeanProfiles& mean, std::span<const double> n_00,
                  std::span<const double> u2_00_forcing, const Grid& grid, const Params& params,
                  double dt) {
  const std::size_t ny = static_cast<std::size_t>(grid.ny());
  if (mean.u1_00.size() != ny || mean.u3_00.size() != ny || n_00.size() != ny ||
      u2_00_forcing.size() != ny)
    throw std::invalid_argument("meanflow::step: profile length must equal ny");

  const HeatStepper heat(grid, params.A, dt);
  std::vector<double> src1(ny), zero(ny, 0.0);
  for (std::size_t j = 0; j < ny; ++j) src1[j] = n_00[j] / params.A - u2_00_forcing[j];
  return {heat.advance(mean.u1_00, src1), heat.advance(mean.u3_00, zero)};
}

}  // namespace cpks::meanflow
