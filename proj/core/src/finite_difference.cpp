#include "cpks/finite_difference.hpp"

#include <cmath>

namespace cpks {

Profile ddy(std::span<const Complex> f, const Grid& grid) {
  Profile out(f.size());
  ddy_into<Complex>(f, grid.h(), out);
  return out;
}

RealProfile ddy(std::span<const double> f, const Grid& grid) {
  RealProfile out(f.size());
  ddy_into<double>(f, grid.h(), out);
  return out;
}

Profile d2y(std::span<const Complex> f, const Grid& grid) {
  Profile out(f.size());
  d2y_into<Complex>(f, grid.h(), out);
  return out;
}

RealProfile d2y(std::span<const double> f, const Grid& grid) {
  RealProfile out(f.size());
  d2y_into<double>(f, grid.h(), out);
  return out;
}

SpecField ddy(const SpecField& f, const Grid& grid) {
  SpecField out(grid);
  for (int i1 = 0; i1 < grid.nx(); ++i1)
    for (int i3 = 0; i3 < grid.nz(); ++i3)
      ddy_into<Complex>(f.profile(i1, i3), grid.h(), out.profile(i1, i3));
  return out;
}

double l2_squared_y(std::span<const Complex> f, const Grid& grid) {
  const auto w = grid.trapezoid_weights();
  double s = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) s += w[j] * std::norm(f[j]);
  return s;
}

double l2_squared_y(std::span<const double> f, const Grid& grid) {
  const auto w = grid.trapezoid_weights();
  double s = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) s += w[j] * f[j] * f[j];
  return s;
}

}  // namespace cpks
