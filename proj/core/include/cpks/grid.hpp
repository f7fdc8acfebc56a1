#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

namespace cpks {

/// Length of the periodic directions x and z.
inline constexpr double kPeriod = 2.0 * std::numbers::pi;

/// Fourier wavenumber pair (k1 along x, k3 along z).
struct ModeIndex {
  int k1 = 0;
  int k3 = 0;

  double eta() const { return std::sqrt(static_cast<double>(k1 * k1 + k3 * k3)); }
  double eta2() const { return static_cast<double>(k1 * k1 + k3 * k3); }
  bool is_mean() const { return k1 == 0 && k3 == 0; }
  friend bool operator==(const ModeIndex&, const ModeIndex&) = default;
};

/// Channel T x I x T with T = [0, 2pi) and I = [-1, 1].
///
/// x and z are Fourier-collocated with nx, nz points; y is a uniform grid
/// of ny points including both walls. Spectral storage uses FFT ordering,
/// index i holds wavenumber i for i < n/2 and i - n otherwise.
class Grid {
 public:
  Grid() = default;

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int nz() const { return nz_; }

  std::span<const double> y() const { return y_; }
  /// Wall-normal spacing.
  double h() const { return h_; }
  double hx() const { return kPeriod / nx_; }
  double hz() const { return kPeriod / nz_; }
  /// Smallest of hx, h, hz.
  double h_min() const;

  int mode_count() const { return nx_ * nz_; }

  int k1_of(int i1) const { return i1 < nx_ / 2 ? i1 : i1 - nx_; }
  int k3_of(int i3) const { return i3 < nz_ / 2 ? i3 : i3 - nz_; }
  ModeIndex mode(int i1, int i3) const { return {k1_of(i1), k3_of(i3)}; }
  int i1_of(int k1) const { return ((k1 % nx_) + nx_) % nx_; }
  int i3_of(int k3) const { return ((k3 % nz_) + nz_) % nz_; }

  /// True for modes that sit on the x or z Nyquist wavenumber. These have
  /// no conjugate partner and are kept at zero by the solver.
  bool is_nyquist(int i1, int i3) const { return i1 == nx_ / 2 || i3 == nz_ / 2; }

  /// Composite trapezoid weights in y.
  std::span<const double> trapezoid_weights() const { return w_; }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.nx_ == b.nx_ && a.ny_ == b.ny_ && a.nz_ == b.nz_;
  }

 private:
  friend Grid make_grid(int nx, int ny, int nz);

  int nx_ = 0;
  int ny_ = 0;
  int nz_ = 0;
  double h_ = 0.0;
  std::vector<double> y_;
  std::vector<double> w_;
};

/// Builds a channel grid. nx and nz must be powers of two >= 8; ny must be
/// odd and >= 17 so that y = 0 is a grid point. Throws std::invalid_argument.
Grid make_grid(int nx, int ny, int nz);

/// Trapezoid integral over I of a sampled real profile.
double integrate_y(std::span<const double> f, const Grid& grid);

}  // namespace cpks
