#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cpks/config.hpp"
#include "cpks/diagnostics.hpp"
#include "cpks/dynamics.hpp"

namespace cpks {

/// Initial State for the configured preset. Throws std::invalid_argument
/// for an unknown preset and std::runtime_error for an unreadable restart file.
State build_initial(const RunConfig& config, const Grid& grid);

/// A (|P0 u2|_2 + |P0 u3|_2), the size of the x-averaged initial velocity
/// measured against the flow amplitude.
double lift_product(const State& state, const Grid& grid, const Params& params);

/// Velocity perturbation used by the presets: on modes (+-1,0) and (0,+-1),
/// u2 = amp (1-y^2)^2 cos, omega2 = amp (1-y^2) cos. Adds into `state`.
void add_velocity_perturbation(State& state, const Grid& grid, double amp);

/// Seeded random State: Hermitian-symmetric n, omega2 and delta_u2 on modes
/// with |k1|, |k3| <= kmax, Dirichlet walls for n and omega2, random mean
/// profiles vanishing at the walls. n carries the (0,0) profile 2(1-y^2).
State random_state(const Grid& grid, std::uint64_t seed, int kmax = 4);

/// Time step used for a config: params.dt, or default_dt when params.dt == 0.
double resolve_dt(const RunConfig& config, const State& initial, const Grid& grid);

struct ExperimentSummary {
  RunStatus status = RunStatus::Completed;
  std::optional<StepFailure> failure;
  double t_final = 0.0;
  int steps = 0;
  double dt = 0.0;
  int clip_events = 0;
  double initial_mass = 0.0;
  double final_mass = 0.0;
  double initial_linf = 0.0;
  double sup_linf = 0.0;
  double e_final = 0.0;
  double e_sup = 0.0;
  double lift_product = 0.0;
  /// Fitted exponential decay rate of |n_neq|_2 (NaN when the fit is not possible).
  double lambda_n = 0.0;
  /// Same for |P0 u1|_2.
  double lambda_u1 = 0.0;
};

struct ExperimentResult {
  ExperimentSummary summary;
  diagnostics::NormLedger ledger;
  State final_state;
};

struct ExperimentHooks {
  /// Called after every accepted step.
  std::function<void(const State&)> on_step;
  /// Replaces build_initial when set.
  std::optional<State> initial;
};

/// build_initial -> run with diagnostics -> files in config.output.dir (when
/// non-empty): timeseries.csv, summary.json, final.cpks and, with
/// checkpoint_every > 0, checkpoint_<sample>.cpks.
ExperimentResult run_experiment(const RunConfig& config, const ExperimentHooks& hooks = {});

/// Header and rows of timeseries.csv (17 significant digits).
void write_timeseries(std::ostream& out, const diagnostics::NormLedger& ledger);
void write_summary_json(std::ostream& out, const ExperimentSummary& summary, const RunConfig& config);

struct SweepAxis {
  std::vector<double> A;
  std::vector<double> M;
};

struct SweepRow {
  double A = 0.0;
  double M = 0.0;
  bool failed = false;
  std::string error;
  ExperimentSummary summary;
};

/// One run per (A, M) pair, A outer. Runs execute in parallel on up to
/// `workers` threads; a throwing run marks its row failed and the sweep
/// continues. When base.output.dir is non-empty each row writes into
/// <dir>/A<A>_M<M>/ and sweep.csv is written to <dir>.
std::vector<SweepRow> sweep(const RunConfig& base, const SweepAxis& axis, int workers);

/// Parses "A=1e3,1e4" or "M=0.3,8" into the axis. Throws std::invalid_argument.
void parse_axis(const std::string& text, SweepAxis& axis);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

}  // namespace cpks
