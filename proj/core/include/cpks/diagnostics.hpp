#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cpks/dynamics.hpp"
#include "cpks/grid.hpp"
#include "cpks/spec_field.hpp"

namespace cpks::diagnostics {

// --- mode projections -------------------------------------------------------

/// P0 f: keeps the k1 = 0 modes (the x-average).
SpecField project_x_zero(const SpecField& f);
/// P_neq f = f - P0 f.
SpecField project_x_nonzero(const SpecField& f);

/// f_(0,0): the z-average of an x-averaged field. Throws std::invalid_argument
/// if f carries k1 != 0 energy above 1e-12.
RealProfile project_00(const SpecField& f0, const Grid& grid);
/// f_(0,neq) = f0 - f_(0,0). Same precondition as project_00.
SpecField project_0neq(const SpecField& f0, const Grid& grid);

// --- norms -----------------------------------------------------------------

/// L2 norm over T x I x T: sqrt(|T|^2 sum_k integral |f_k|^2 dy).
double l2_norm(const SpecField& f, const Grid& grid);
/// Total mass |T|^2 * integral of n_(0,0) dy.
double mass(const SpecField& n, const Grid& grid);
/// Diffusive mass flux out through both walls, (1/A) |T|^2 (-n'(1) + n'(-1)).
double wall_flux(const SpecField& n, const Grid& grid, double A);
/// Max |n| over the physical collocation points.
double linf(const SpecField& f, const Grid& grid);

/// Fraction of the density's spectral energy in the top third of the
/// retained x/z wavenumbers.
double spectral_tail_fraction(const SpecField& n, const Grid& grid, bool dealias_on);

// --- weighted space-time norms ------------------------------------------------

/// Running X_a / Y_a accumulators over the k1 != 0 modes.
///
/// For a mode profile f with weight w(t) = e^{a A^{-1/3} t}:
///   Y^2 = sup w^2 |f|^2 + A^{-1} int w^2 |f'|^2 + ((k1^2/A)^{1/3} + eta^2/A) int w^2 |f|^2
///   X^2 = eta|k1| int w^2 G + A^{-1} eta^2 int w^2 |Lf|^2 + A^{-3/2} int w^2 |(Lf)'|^2
///         + eta^2 sup w^2 G + A^{-1/2} sup w^2 |Lf|^2
/// where G = |f'|^2 + eta^2 |f|^2 and L = d_yy - eta^2. Time integrals use
/// the trapezoid rule over the update times; the total norms sum the
/// per-mode squares.
class WeightedNorms {
 public:
  WeightedNorms() = default;
  WeightedNorms(const Grid& grid, const Params& params);

  /// Adds one sample. `u2` is the Dirichlet inversion of state.delta_u2.
  void update(double t, const SpecField& n, const SpecField& omega2, const SpecField& u2,
              const SpecField& delta_u2);

  double ya_n() const;          ///< ||n_neq||_{Y_a}
  double ya_dx_omega2() const;  ///< ||d_x omega2_neq||_{Y_a}
  double xa_u2() const;         ///< ||u2_neq||_{X_a}
  double energy() const { return ya_dx_omega2() + ya_n() + xa_u2(); }

  /// L2L2 part of Y_a for n: sum over modes of int w^2 |n_k|^2 dt.
  double n_l2l2_squared() const;

 private:
  struct Running {
    double sup = 0.0;
    double integral = 0.0;
    double last = 0.0;
  };
  struct ModeAcc {
    int i1 = 0, i3 = 0;
    double y_coef = 0.0;  // (k1^2/A)^{1/3} + eta^2/A
    Running n0, n1, w0, w1;
    Running g, p, r;  // X_a pieces: G, |Lf|^2, |(Lf)'|^2
  };
  void push(Running& acc, double value, double dt, bool first) const;

  Grid grid_;
  double A_ = 1.0;
  double rate_ = 0.0;  // a A^{-1/3}
  bool started_ = false;
  double t_last_ = 0.0;
  std::vector<ModeAcc> modes_;
};

/// E(t) recomputed from scratch over a stored state history (same
/// definitions as WeightedNorms, no running state).
double energy_from_history(std::span<const State> history, const Grid& grid, const Params& params);

/// Time series collected during a run.
class NormLedger {
 public:
  NormLedger() = default;
  NormLedger(const Grid& grid, const Params& params, std::vector<ModeIndex> tracked_modes = {});

  void update(const State& state, const DerivedFields& derived);

  const std::vector<ModeIndex>& tracked_modes() const { return tracked_; }
  std::size_t size() const { return t_samples.size(); }
  const WeightedNorms& norms() const { return norms_; }

  std::vector<double> t_samples;
  std::vector<double> mass_series;
  std::vector<double> linf_n_series;
  std::vector<double> e_series;
  std::vector<double> ya_n;
  std::vector<double> ya_dxomega2;
  std::vector<double> xa_u2;
  std::vector<double> wallflux_series;
  std::vector<double> n_neq_l2_series;
  std::vector<double> u1_zero_l2_series;  ///< ||P0 u1||, the streamwise lift-up signal
  std::vector<double> u2_zero_l2_series;
  std::vector<double> u3_zero_l2_series;
  /// mode_energy_series[i][s]: y-L2 norm of n at tracked mode i, sample s.
  std::vector<std::vector<double>> mode_energy_series;

 private:
  Grid grid_;
  Params params_;
  std::vector<ModeIndex> tracked_;
  WeightedNorms norms_;
};

/// Functional form of NormLedger::update.
NormLedger update_ledger(NormLedger ledger, const State& state, const DerivedFields& derived);

// --- decay fitting ----------------------------------------------------------

/// Least-squares slope of log(value) against t over samples with
/// t in [t0, t1]; returns lambda = -slope. Throws std::invalid_argument on a
/// nonpositive value inside the window or fewer than two samples.
double fit_decay_rate(std::span<const double> t, std::span<const double> value, double t0,
                      double t1);

/// Window from the first sample at which the series has dropped 10% below its
/// running maximum to the last sample.
std::pair<double, double> default_decay_window(std::span<const double> t,
                                               std::span<const double> value);

// --- blow-up detection ------------------------------------------------------

struct BlowupThresholds {
  double threshold_abs = 1e6;
  double growth_factor = 100.0;
  double tail_frac = 0.2;
  double initial_linf = 0.0;  ///< reference for growth_factor; ignored when 0
  bool dealias_on = true;
};

struct BlowupStatus {
  bool blowup = false;
  std::string reason;
  double value = 0.0;
};

BlowupStatus detect_blowup(const State& state, const DerivedFields& derived, const Grid& grid,
                           const BlowupThresholds& thresholds);

}  // namespace cpks::diagnostics
