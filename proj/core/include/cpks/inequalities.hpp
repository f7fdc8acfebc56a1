#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cpks/grid.hpp"
#include "cpks/spec_field.hpp"

namespace cpks::inequalities {

/// Uniform grid on I x T: ny points in y including both walls, nz periodic
/// points in z.
class PlaneGrid {
 public:
  PlaneGrid() = default;
  /// Throws std::invalid_argument unless ny is odd and >= 5 and nz is even and >= 4.
  PlaneGrid(int ny, int nz);

  int ny() const { return ny_; }
  int nz() const { return nz_; }
  double h() const { return h_; }
  double hz() const { return kPeriod / nz_; }
  std::span<const double> y() const { return y_; }
  /// Quadrature weight of grid point (j, iz): trapezoid in y, uniform in z.
  double weight(int j) const { return wy_[j] * hz(); }
  std::size_t size() const { return static_cast<std::size_t>(ny_) * nz_; }

  friend bool operator==(const PlaneGrid& a, const PlaneGrid& b) {
    return a.ny_ == b.ny_ && a.nz_ == b.nz_;
  }

 private:
  int ny_ = 0;
  int nz_ = 0;
  double h_ = 0.0;
  std::vector<double> y_;
  std::vector<double> wy_;
};

/// Real function sampled on a PlaneGrid, stored row by row (z fastest).
///
/// The constructor projects onto the declared constraints: dirichlet_y zeroes
/// the wall rows, zero_z_mean removes the z-average of every row.
class TestFunction2D {
 public:
  TestFunction2D() = default;
  TestFunction2D(PlaneGrid grid, std::vector<double> values, bool dirichlet_y, bool zero_z_mean);

  /// Samples f(y, z) on the grid, then projects.
  template <class F>
  static TestFunction2D sample(const PlaneGrid& grid, F&& f, bool dirichlet_y, bool zero_z_mean) {
    std::vector<double> v(grid.size());
    const auto y = grid.y();
    for (int j = 0; j < grid.ny(); ++j)
      for (int iz = 0; iz < grid.nz(); ++iz)
        v[static_cast<std::size_t>(j) * grid.nz() + iz] = f(y[j], iz * grid.hz());
    return TestFunction2D(grid, std::move(v), dirichlet_y, zero_z_mean);
  }

  const PlaneGrid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  double operator()(int j, int iz) const {
    return values_[static_cast<std::size_t>(j) * grid_.nz() + iz];
  }
  bool dirichlet_y() const { return dirichlet_; }
  bool zero_z_mean() const { return zero_mean_; }

  TestFunction2D scaled(double alpha) const;

 private:
  PlaneGrid grid_;
  std::vector<double> values_;
  bool dirichlet_ = false;
  bool zero_mean_ = false;
};

// --- discrete norms on I x T -------------------------------------------------

double lp_norm(const TestFunction2D& f, double p);
double linf_norm(const TestFunction2D& f);
/// d_y by finite differences, d_z spectrally.
std::vector<double> dy(const TestFunction2D& f);
std::vector<double> dz(const TestFunction2D& f);
double grad_l2(const TestFunction2D& f);

// --- ratios --------------------------------------------------------------------
//
// All ratios throw std::invalid_argument on a zero function or when a
// required constraint flag is missing.

/// ||f||_3 / (||f||_1^{1/3} ||grad f||_2^{2/3}). Needs both constraints.
double gn_l3_ratio(const TestFunction2D& f);

/// ||f||_3^3 / (||f||_1 ||grad f||_2^2). Needs both constraints.
double lemma_a3_ratio(const TestFunction2D& f);

/// Upper bound lemma_a3_ratio is checked against: 9/4 (1 + 5h).
double lemma_a3_bound(const PlaneGrid& grid);

/// ||(f1 f2)_(0,0)||_2 / (||f1||_2 (||f2||_2^{1/2} ||d_y f2||_2^{1/2} + ||f2||_2)).
/// When f2 carries dirichlet_y the trailing ||f2||_2 term is dropped.
double lemma_a1_ratio(const TestFunction2D& f1, const TestFunction2D& f2);

/// ||f||_inf / (||grad f||_2^{1-eps} ||d_z grad f||_2^eps), eps in (0, 1].
/// Needs zero_z_mean.
double lemma_a2_ratio(const TestFunction2D& f, double eps);

enum class NashVariant { Interval1D, Strip2D, Channel3D };

std::string to_string(NashVariant v);
/// L1 exponent theta: 2/3, 1/2, 2/5.
double nash_theta(NashVariant v);

/// ||f||_2 / (||f||_1^theta ||f'||_2^{1-theta}) on I for a profile on the
/// uniform grid with spacing 2/(n-1). f must vanish at both ends.
double nash_ratio_1d(std::span<const double> f);
/// Same on I x T; f must carry dirichlet_y.
double nash_ratio_2d(const TestFunction2D& f);
/// Same on the channel; f must vanish on both walls.
double nash_ratio_3d(const PhysField& f, const Grid& grid);

// --- random admissible functions ----------------------------------------------

struct RandomSpec {
  int modes_y = 8;
  int modes_z = 6;
  double decay = 2.0;  ///< coefficient of (m^2 + k^2)^{-decay/2}
};

/// Sine series in y times a zero-mean trigonometric polynomial in z, both
/// constraints set.
TestFunction2D random_test_function(const PlaneGrid& grid, std::uint64_t seed,
                                    const RandomSpec& spec = {});
/// Sine series on I.
std::vector<double> random_profile(int ny, std::uint64_t seed, const RandomSpec& spec = {});
/// Sine series in y times a trigonometric polynomial in x and z.
PhysField random_channel_function(const Grid& grid, std::uint64_t seed,
                                  const RandomSpec& spec = {});

// --- sharp constant estimate ---------------------------------------------------

struct CStarOptions {
  int resolution = 65;  ///< ny; nz = resolution - 1
  int iterations = 1000;
  int modes_y = 10;
  int modes_z = 8;
  std::uint64_t seed = 1;
  /// Start from the projection of this function instead of a random draw.
  bool seed_with_profile = false;
};

struct CStarResult {
  double best = 0.0;
  double initial = 0.0;
  std::vector<double> history;  ///< ratio after every accepted iterate, non-decreasing
  /// 1 / C*^3, the mass below which the suppression threshold is met.
  double implied_mass() const { return 1.0 / (best * best * best); }
};

/// L-BFGS ascent of gn_l3_ratio, normalized after every step, over the span of
/// sin(m pi (y+1)/2) {cos, sin}(k z), m <= modes_y, 1 <= k <= modes_z.
/// With seed_with_profile the start is (1 - y^2) sin z projected onto that span.
CStarResult estimate_cstar(const CStarOptions& options);

// --- randomized suites -------------------------------------------------------

struct TrialRow {
  std::string operation;
  std::uint64_t seed = 0;
  int resolution = 0;
  double ratio = 0.0;
};

/// Known suite names: a3, gn, a1, a2, nash, cstar, all.
std::vector<std::string> suite_names();

/// Runs `trials` seeded trials per operation of the suite on a ny x nz plane
/// (seeds seed, seed + 1, ...). Trials run in parallel; row order is fixed.
/// Throws std::invalid_argument for an unknown suite.
std::vector<TrialRow> run_suite(const std::string& suite, int trials, std::uint64_t seed,
                                int ny = 129, int nz = 64);

void write_csv(std::ostream& out, std::span<const TrialRow> rows);

}  // namespace cpks::inequalities
