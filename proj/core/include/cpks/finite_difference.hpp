#pragma once

#include <complex>
#include <span>
#include <stdexcept>
#include <vector>

#include "cpks/grid.hpp"
#include "cpks/spec_field.hpp"

namespace cpks {

// Wall-normal finite differences on the uniform y grid.
//
// ddy: second-order centered differences at interior points and one-sided
// second-order stencils at the walls. It is exact for quadratics everywhere.

template <class T>
void ddy_into(std::span<const T> f, double h, std::span<T> out) {
  const std::size_t n = f.size();
  const double inv2h = 0.5 / h;
  out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) * inv2h;
  for (std::size_t j = 1; j + 1 < n; ++j) out[j] = (f[j + 1] - f[j - 1]) * inv2h;
  out[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) * inv2h;
}

/// Adjoint of ddy_into with respect to the plain dot product.
template <class T>
void ddy_transpose_into(std::span<const T> g, double h, std::span<T> out) {
  const std::size_t n = g.size();
  const double inv2h = 0.5 / h;
  for (auto& v : out) v = T{};
  out[0] += -3.0 * g[0] * inv2h;
  out[1] += 4.0 * g[0] * inv2h;
  out[2] += -1.0 * g[0] * inv2h;
  for (std::size_t j = 1; j + 1 < n; ++j) {
    out[j + 1] += g[j] * inv2h;
    out[j - 1] -= g[j] * inv2h;
  }
  out[n - 1] += 3.0 * g[n - 1] * inv2h;
  out[n - 2] += -4.0 * g[n - 1] * inv2h;
  out[n - 3] += 1.0 * g[n - 1] * inv2h;
}

/// Centered second difference; wall rows use the one-sided second-order
/// stencil (2f0 - 5f1 + 4f2 - f3)/h^2.
template <class T>
void d2y_into(std::span<const T> f, double h, std::span<T> out) {
  const std::size_t n = f.size();
  const double inv = 1.0 / (h * h);
  out[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) * inv;
  for (std::size_t j = 1; j + 1 < n; ++j) out[j] = (f[j + 1] - 2.0 * f[j] + f[j - 1]) * inv;
  out[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) * inv;
}

Profile ddy(std::span<const Complex> f, const Grid& grid);
RealProfile ddy(std::span<const double> f, const Grid& grid);
Profile d2y(std::span<const Complex> f, const Grid& grid);
RealProfile d2y(std::span<const double> f, const Grid& grid);

/// ddy applied to every mode profile.
SpecField ddy(const SpecField& f, const Grid& grid);

/// Trapezoid integral of |f|^2 over I.
double l2_squared_y(std::span<const Complex> f, const Grid& grid);
double l2_squared_y(std::span<const double> f, const Grid& grid);

/// LU factorization of a tridiagonal matrix without pivoting.
///
/// Used for the diagonally dominant Helmholtz and Crank-Nicolson operators,
/// where pivoting is never needed. Coefficients may be real or complex; the
/// right-hand side may be complex either way.
template <class C>
class TridiagonalLU {
 public:
  TridiagonalLU() = default;

  /// lower[j] multiplies x[j-1] in row j, upper[j] multiplies x[j+1].
  TridiagonalLU(std::vector<C> lower, std::vector<C> diag, std::vector<C> upper)
      : lower_(std::move(lower)), diag_(std::move(diag)), upper_(std::move(upper)) {
    const std::size_t n = diag_.size();
    for (std::size_t j = 1; j < n; ++j) {
      if (diag_[j - 1] == C{}) throw std::runtime_error("TridiagonalLU: zero pivot");
      lower_[j] /= diag_[j - 1];
      diag_[j] -= lower_[j] * upper_[j - 1];
    }
    if (diag_[n - 1] == C{}) throw std::runtime_error("TridiagonalLU: zero pivot");
    for (auto& d : diag_) d = C(1) / d;  // stored inverted
  }

  std::size_t size() const { return diag_.size(); }

  template <class T>
  void solve_in_place(std::span<T> x) const {
    const std::size_t n = diag_.size();
    for (std::size_t j = 1; j < n; ++j) x[j] -= lower_[j] * x[j - 1];
    x[n - 1] *= diag_[n - 1];
    for (std::size_t j = n - 1; j-- > 0;) x[j] = (x[j] - upper_[j] * x[j + 1]) * diag_[j];
  }

 private:
  std::vector<C> lower_;
  std::vector<C> diag_;
  std::vector<C> upper_;
};

}  // namespace cpks
