#include "cpks/elliptic.hpp"

#include <stdexcept>
#include <string>

namespace cpks::elliptic {

HelmholtzOperator::HelmholtzOperator(ModeIndex mode, double shift, const Grid& grid)
    : mode_(mode), shift_(shift) {
  if (shift < 0.0) throw std::invalid_argument("HelmholtzOperator: shift must be >= 0");
  if (mode.is_mean() && shift == 0.0)
    throw std::invalid_argument("HelmholtzOperator: (0,0) mode with zero shift is singular");

  const int ny = grid.ny();
  const double inv_h2 = 1.0 / (grid.h() * grid.h());
  std::vector<double> lower(ny, inv_h2), diag(ny, -2.0 * inv_h2 - mode.eta2() - shift),
      upper(ny, inv_h2);
  lower[0] = upper[0] = 0.0;
  diag[0] = 1.0;
  lower[ny - 1] = upper[ny - 1] = 0.0;
  diag[ny - 1] = 1.0;
  lu_ = TridiagonalLU<double>(std::move(lower), std::move(diag), std::move(upper));
}

void HelmholtzOperator::solve_into(std::span<const Complex> rhs, std::span<Complex> out) const {
  const std::size_t n = lu_.size();
  for (std::size_t j = 1; j + 1 < n; ++j) out[j] = rhs[j];
  out[0] = out[n - 1] = Complex{};
  lu_.solve_in_place(out);
}

Profile HelmholtzOperator::solve(std::span<const Complex> rhs) const {
  Profile out(lu_.size());
  solve_into(rhs, out);
  return out;
}

Profile solve_chemo(std::span<const Complex> n_mode, ModeIndex mode, const Grid& grid) {
  if (static_cast<int>(n_mode.size()) != grid.ny())
    throw std::invalid_argument("solve_chemo: profile length must equal ny");
  Profile rhs(n_mode.size());
  for (std::size_t j = 0; j < rhs.size(); ++j) rhs[j] = -n_mode[j];
  return HelmholtzOperator(mode, 1.0, grid).solve(rhs);
}

Profile solve_u2_from_laplacian(std::span<const Complex> q_mode, ModeIndex mode,
                                const Grid& grid) {
  if (mode.is_mean())
    throw std::invalid_argument("solve_u2_from_laplacian: eta must be > 0 (mode (0,0))");
  if (static_cast<int>(q_mode.size()) != grid.ny())
    throw std::invalid_argument("solve_u2_from_laplacian: profile length must equal ny");
  return HelmholtzOperator(mode, 0.0, grid).solve(q_mode);
}

std::pair<Profile, Profile> reconstruct_u1_u3(std::span<const Complex> u2_mode,
                                              std::span<const Complex> omega2_mode,
                                              ModeIndex mode, const Grid& grid) {
  if (mode.is_mean())
    throw std::invalid_argument("reconstruct_u1_u3: eta must be > 0 (mode (0,0))");
  const std::size_t n = u2_mode.size();
  Profile d(n);
  ddy_into<Complex>(u2_mode, grid.h(), d);

  const double k1 = mode.k1;
  const double k3 = mode.k3;
  const double inv_eta2 = 1.0 / mode.eta2();
  const Complex I{0.0, 1.0};
  Profile u1(n), u3(n);
  for (std::size_t j = 0; j < n; ++j) {
    u1[j] = I * (k1 * d[j] - k3 * omega2_mode[j]) * inv_eta2;
    u3[j] = I * (k3 * d[j] + k1 * omega2_mode[j]) * inv_eta2;
  }
  return {std::move(u1), std::move(u3)};
}

OperatorCache::OperatorCache(const Grid& grid) : nz_(grid.nz()) {
  chemo_.reserve(grid.mode_count());
  lap_.resize(grid.mode_count());
  for (int i1 = 0; i1 < grid.nx(); ++i1)
    for (int i3 = 0; i3 < grid.nz(); ++i3) {
      const auto m = grid.mode(i1, i3);
      chemo_.emplace_back(m, 1.0, grid);
      if (!m.is_mean()) lap_[index(i1, i3)] = HelmholtzOperator(m, 0.0, grid);
    }
}

}  // namespace cpks::elliptic
