#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cpks/elliptic.hpp"
#include "cpks/finite_difference.hpp"
#include "cpks/grid.hpp"
#include "cpks/meanflow.hpp"
#include "cpks/spec_field.hpp"

namespace cpks {

/// Parameters of the rescaled (t -> t/A) system.
struct Params {
  double A = 1e4;        ///< Couette amplitude
  double a = 0.0;        ///< exponent coefficient of the e^{a A^{-1/3} t} diagnostic weight
  double dt = 0.01;      ///< time step in rescaled time
  double t_end = 1.0;    ///< final rescaled time
  bool dealias_on = true;
  bool linear_only = false;  ///< drop the quadratic transport/chemotaxis terms
  bool coupling_on = true;   ///< density forcing of the velocity (n e_1 body force)

  /// Throws std::invalid_argument unless A > 0, dt > 0, t_end >= 0, a >= 0.
  void validate() const;
};

/// Prognostic variables at one instant.
struct State {
  double t = 0.0;
  SpecField n;
  SpecField omega2;    ///< d_z u1 - d_x u3
  SpecField delta_u2;  ///< Laplacian of u2; the (0,0) profile is unused and kept zero
  std::vector<double> mean_u1;
  std::vector<double> mean_u3;

  static State zero(const Grid& grid);
  friend bool operator==(const State&, const State&) = default;
};

/// Diagnostic fields reconstructed from a State.
struct DerivedFields {
  SpecField c;
  SpecField u1;
  SpecField u2;
  SpecField u3;
};

enum class RunStatus { Completed, BlowupDetected, StepRejected };

std::string to_string(RunStatus s);

/// Why a step or run stopped early.
struct StepFailure {
  RunStatus status = RunStatus::BlowupDetected;
  double t = 0.0;
  std::string reason;
  double value = 0.0;         ///< offending norm, or the violated CFL number
  double suggested_dt = 0.0;  ///< set for StepRejected
};

struct StepResult {
  State state;
  std::optional<StepFailure> failure;
};

/// Default time step: min(0.5 A h^2, 0.1 h / max|u|, 0.01), h = h_min.
double default_dt(const Grid& grid, const Params& params, double max_u);

/// c from n, and (u1, u2, u3) from (omega2, delta_u2) plus the mean profiles.
DerivedFields derive(const State& state, const Grid& grid, const Params& params);

/// -i k1 y f, the Couette tilt term (applied to every mode).
SpecField couette_tilt(const SpecField& f, const Grid& grid);

struct NonlinearInfo {
  bool clipped = false;
  double max_drift = 0.0;  ///< max over the grid of |u| + |grad c|
};

/// -(1/A) [div(u n) + div(n grad c)], products formed in physical space.
/// Zero when params.linear_only is set.
SpecField nonlinear_n(const State& state, const DerivedFields& derived, const Grid& grid,
                      const Params& params, NonlinearInfo* info = nullptr);

/// -i k3 u2 + (1/A) i k3 n (the second term only with coupling_on).
SpecField coupling_omega2(const State& state, const DerivedFields& derived, const Grid& grid,
                          const Params& params);

/// -(1/A) i k1 d_y n on eta > 0 modes (zero without coupling_on).
SpecField coupling_delta_u2(const State& state, const Grid& grid, const Params& params);

/// Full explicit tendencies (everything except the 1/A diffusion).
SpecField rhs_n(const State& state, const DerivedFields& derived, const Grid& grid,
                const Params& params);
SpecField rhs_omega2(const State& state, const DerivedFields& derived, const Grid& grid,
                     const Params& params);
SpecField rhs_delta_u2(const State& state, const Grid& grid, const Params& params);

/// IMEX stepper: Crank-Nicolson on (1/A)(d_yy - eta^2) - i k1 y, AB2 on the
/// explicit terms (Euler on the first step after construction or reset).
///
/// delta_u2 is closed with an influence matrix: per eta > 0 mode the two
/// homogeneous responses to unit wall values of delta_u2 are precomputed, and
/// each step picks the combination for which d_y u2(+-1) = 0.
class Stepper {
 public:
  Stepper(const Grid& grid, const Params& params, double dt);

  double dt() const { return dt_; }
  const Grid& grid() const { return grid_; }
  const Params& params() const { return params_; }

  DerivedFields derive(const State& state) const;

  StepResult step(const State& state, const DerivedFields& derived);
  StepResult step(const State& state) { return step(state, derive(state)); }

  /// Forgets the AB2 history; the next step is forward Euler.
  void reset_history();

  /// Number of steps in which negative density was clipped before forming n grad c.
  int clip_events() const { return clip_events_; }

 private:
  struct Influence {
    Profile q_plus, q_minus;  // homogeneous responses, unit value at y = +1 / -1
    Profile u_plus, u_minus;  // their Dirichlet inversions
    // inverse of [[g0(u+), g0(u-)], [gN(u+), gN(u-)]], g = one-sided d_y at the walls
    Complex inv[2][2];
  };

  std::size_t index(int i1, int i3) const { return static_cast<std::size_t>(i1) * grid_.nz() + i3; }
  void explicit_rhs(std::span<const Complex> f, ModeIndex m, std::span<const Complex> forcing,
                    std::span<Complex> out) const;

  Grid grid_;
  Params params_;
  double dt_;
  elliptic::OperatorCache ops_;
  meanflow::HeatStepper heat_;
  std::vector<TridiagonalLU<Complex>> implicit_;
  std::vector<Influence> influence_;

  bool have_history_ = false;
  SpecField prev_n_, prev_w_, prev_q_;
  std::vector<double> prev_n00_;
  int clip_events_ = 0;
};

/// One step from `state` with a fresh stepper (forward Euler on the explicit terms).
StepResult step_imex(const State& state, const Grid& grid, const Params& params);

struct RunHooks {
  int cadence = 1;
  /// Called on the initial state, every `cadence` steps, and on the last state.
  std::function<void(const State&, const DerivedFields&)> on_sample;
  /// Called after every accepted step.
  std::function<void(const State&)> on_step;
  /// Returns a failure description when the state should be declared blown up.
  std::function<std::optional<StepFailure>(const State&, const DerivedFields&)> health;
};

struct RunResult {
  State final_state;
  RunStatus status = RunStatus::Completed;
  std::optional<StepFailure> failure;
  int steps = 0;
  int clip_events = 0;
  double dt = 0.0;
};

/// Integrates to params.t_end with a constant step t_end / ceil(t_end / dt).
RunResult run(const State& initial, const Grid& grid, const Params& params,
              const RunHooks& hooks = {});

}  // namespace cpks
