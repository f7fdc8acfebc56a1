#include "cpks/grid.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace cpks {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

double Grid::h_min() const { return std::min({hx(), h_, hz()}); }

Grid make_grid(int nx, int ny, int nz) {
  if (!is_power_of_two(nx) || nx < 8)
    throw std::invalid_argument("make_grid: nx must be a power of two >= 8, got " +
                                std::to_string(nx));
  if (!is_power_of_two(nz) || nz < 8)
    throw std::invalid_argument("make_grid: nz must be a power of two >= 8, got " +
                                std::to_string(nz));
  if (ny < 17)
    throw std::invalid_argument("make_grid: ny must be >= 17, got " + std::to_string(ny));
  if (ny % 2 == 0)
    throw std::invalid_argument("make_grid: ny must be odd, got " + std::to_string(ny));

  Grid g;
  g.nx_ = nx;
  g.ny_ = ny;
  g.nz_ = nz;
  g.h_ = 2.0 / (ny - 1);
  g.y_.resize(ny);
  g.w_.assign(ny, g.h_);
  for (int j = 0; j < ny; ++j) g.y_[j] = -1.0 + j * g.h_;
  // exact endpoints and a symmetric grid
  g.y_.front() = -1.0;
  g.y_.back() = 1.0;
  for (int j = 0; j < ny / 2; ++j) g.y_[ny - 1 - j] = -g.y_[j];
  g.y_[ny / 2] = 0.0;
  g.w_.front() = g.w_.back() = 0.5 * g.h_;
  return g;
}

double integrate_y(std::span<const double> f, const Grid& grid) {
  const auto w = grid.trapezoid_weights();
  double s = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) s += w[j] * f[j];
  return s;
}

}  // namespace cpks
