#pragma once

#include <complex>
#include <span>
#include <vector>

#include "cpks/grid.hpp"

namespace cpks {

using Complex = std::complex<double>;
using Profile = std::vector<Complex>;
using RealProfile = std::vector<double>;

/// Scalar field stored per Fourier mode (k1, k3) as a complex y-profile.
///
/// Storage is dense over the full nx x nz rectangle in FFT order, row-major
/// by (i1, i3, y): the profile of one mode is contiguous.
class SpecField {
 public:
  SpecField() = default;
  SpecField(int nx, int ny, int nz);
  explicit SpecField(const Grid& grid) : SpecField(grid.nx(), grid.ny(), grid.nz()) {}

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int nz() const { return nz_; }
  bool empty() const { return data_.empty(); }

  std::span<Complex> profile(int i1, int i3) {
    return {data_.data() + offset(i1, i3), static_cast<std::size_t>(ny_)};
  }
  std::span<const Complex> profile(int i1, int i3) const {
    return {data_.data() + offset(i1, i3), static_cast<std::size_t>(ny_)};
  }
  /// Profile addressed by signed wavenumbers.
  std::span<Complex> profile(ModeIndex m);
  std::span<const Complex> profile(ModeIndex m) const;

  Complex& operator()(int i1, int i3, int j) { return data_[offset(i1, i3) + j]; }
  const Complex& operator()(int i1, int i3, int j) const { return data_[offset(i1, i3) + j]; }

  std::span<Complex> data() { return data_; }
  std::span<const Complex> data() const { return data_; }

  bool same_shape(const SpecField& o) const {
    return nx_ == o.nx_ && ny_ == o.ny_ && nz_ == o.nz_;
  }

  SpecField& operator+=(const SpecField& o);
  SpecField& operator-=(const SpecField& o);
  SpecField& operator*=(Complex s);

  friend SpecField operator+(SpecField a, const SpecField& b) { return a += b; }
  friend SpecField operator-(SpecField a, const SpecField& b) { return a -= b; }
  friend SpecField operator*(Complex s, SpecField a) { return a *= s; }

  /// Largest absolute coefficient.
  double max_abs() const;
  bool all_finite() const;

  /// Largest |f(k) - conj(f(-k))| over all non-Nyquist modes.
  double hermitian_defect() const;

  friend bool operator==(const SpecField&, const SpecField&) = default;

 private:
  std::size_t offset(int i1, int i3) const {
    return (static_cast<std::size_t>(i1) * nz_ + i3) * ny_;
  }

  int nx_ = 0;
  int ny_ = 0;
  int nz_ = 0;
  std::vector<Complex> data_;
};

/// Real physical-space samples on the (x, y, z) collocation points.
/// Layout mirrors SpecField: (ix, iz, iy) with y fastest.
class PhysField {
 public:
  PhysField() = default;
  PhysField(int nx, int ny, int nz)
      : nx_(nx), ny_(ny), nz_(nz), data_(static_cast<std::size_t>(nx) * ny * nz, 0.0) {}
  explicit PhysField(const Grid& grid) : PhysField(grid.nx(), grid.ny(), grid.nz()) {}

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int nz() const { return nz_; }

  double& operator()(int ix, int iy, int iz) { return data_[index(ix, iy, iz)]; }
  double operator()(int ix, int iy, int iz) const { return data_[index(ix, iy, iz)]; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  double max_abs() const;
  double min() const;
  double max() const;

 private:
  std::size_t index(int ix, int iy, int iz) const {
    return (static_cast<std::size_t>(ix) * nz_ + iz) * ny_ + iy;
  }

  int nx_ = 0;
  int ny_ = 0;
  int nz_ = 0;
  std::vector<double> data_;
};

/// Samples f(x, y, z) on the grid.
template <class F>
PhysField sample(const Grid& grid, F&& f) {
  PhysField out(grid);
  const auto y = grid.y();
  for (int ix = 0; ix < grid.nx(); ++ix)
    for (int iz = 0; iz < grid.nz(); ++iz)
      for (int j = 0; j < grid.ny(); ++j)
        out(ix, j, iz) = f(ix * grid.hx(), y[j], iz * grid.hz());
  return out;
}

}  // namespace cpks
