#include "cpks/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cpks/parallel.hpp"
#include "cpks/transforms.hpp"

namespace cpks {

namespace {

constexpr Complex kI{0.0, 1.0};

// Transport by u and by grad c is explicit; a step is rejected when the
// drift moves material more than this many cells.
constexpr double kDriftCfl = 1.0;

DerivedFields derive_with(const State& state, const Grid& grid,
                          const elliptic::OperatorCache& ops) {
  DerivedFields d{SpecField(grid), SpecField(grid), SpecField(grid), SpecField(grid)};
  const int ny = grid.ny();
  parallel_for(grid.mode_count(), [&](int idx) {
    const int i1 = idx / grid.nz();
    const int i3 = idx % grid.nz();
    const auto m = grid.mode(i1, i3);

    Profile rhs(ny);
    const auto n = state.n.profile(i1, i3);
    for (int j = 0; j < ny; ++j) rhs[j] = -n[j];
    ops.chemo(i1, i3).solve_into(rhs, d.c.profile(i1, i3));

    if (m.is_mean()) {
      auto u1 = d.u1.profile(i1, i3);
      auto u3 = d.u3.profile(i1, i3);
      for (int j = 0; j < ny; ++j) {
        u1[j] = state.mean_u1[j];
        u3[j] = state.mean_u3[j];
      }
      return;
    }
    auto u2 = d.u2.profile(i1, i3);
    ops.laplacian(i1, i3).solve_into(state.delta_u2.profile(i1, i3), u2);
    auto [u1, u3] = elliptic::reconstruct_u1_u3(u2, state.omega2.profile(i1, i3), m, grid);
    std::copy(u1.begin(), u1.end(), d.u1.profile(i1, i3).begin());
    std::copy(u3.begin(), u3.end(), d.u3.profile(i1, i3).begin());
  });
  return d;
}

SpecField spectral_dx(const SpecField& f, const Grid& grid) {
  SpecField out(grid);
  for (int i1 = 0; i1 < grid.nx(); ++i1)
    for (int i3 = 0; i3 < grid.nz(); ++i3) {
      if (grid.is_nyquist(i1, i3)) continue;
      const Complex s = kI * static_cast<double>(grid.k1_of(i1));
      auto src = f.profile(i1, i3);
      auto dst = out.profile(i1, i3);
      for (int j = 0; j < grid.ny(); ++j) dst[j] = s * src[j];
    }
  return out;
}

SpecField spectral_dz(const SpecField& f, const Grid& grid) {
  SpecField out(grid);
  for (int i1 = 0; i1 < grid.nx(); ++i1)
    for (int i3 = 0; i3 < grid.nz(); ++i3) {
      if (grid.is_nyquist(i1, i3)) continue;
      const Complex s = kI * static_cast<double>(grid.k3_of(i3));
      auto src = f.profile(i1, i3);
      auto dst = out.profile(i1, i3);
      for (int j = 0; j < grid.ny(); ++j) dst[j] = s * src[j];
    }
  return out;
}

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

void Params::validate() const {
  if (!(A > 0.0)) throw std::invalid_argument("Params: A must be > 0");
  if (!(dt > 0.0)) throw std::invalid_argument("Params: dt must be > 0");
  if (!(t_end >= 0.0)) throw std::invalid_argument("Params: t_end must be >= 0");
  if (!(a >= 0.0)) throw std::invalid_argument("Params: a must be >= 0");
}

State State::zero(const Grid& grid) {
  State s;
  s.n = SpecField(grid);
  s.omega2 = SpecField(grid);
  s.delta_u2 = SpecField(grid);
  s.mean_u1.assign(grid.ny(), 0.0);
  s.mean_u3.assign(grid.ny(), 0.0);
  return s;
}

std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Completed:
      return "Completed";
    case RunStatus::BlowupDetected:
      return "BlowupDetected";
    case RunStatus::StepRejected:
      return "StepRejected";
  }
  return "Unknown";
}

double default_dt(const Grid& grid, const Params& params, double max_u) {
  const double h = grid.h_min();
  double dt = std::min(0.5 * params.A * h * h, 0.01);
  if (max_u > 0.0) dt = std::min(dt, 0.1 * h / max_u);
  return dt;
}

DerivedFields derive(const State& state, const Grid& grid, const Params&) {
  return derive_with(state, grid, elliptic::OperatorCache(grid));
}

SpecField couette_tilt(const SpecField& f, const Grid& grid) {
  SpecField out(grid);
  const auto y = grid.y();
  for (int i1 = 0; i1 < grid.nx(); ++i1) {
    const double k1 = grid.k1_of(i1);
    for (int i3 = 0; i3 < grid.nz(); ++i3) {
      auto src = f.profile(i1, i3);
      auto dst = out.profile(i1, i3);
      for (int j = 0; j < grid.ny(); ++j) dst[j] = -kI * k1 * y[j] * src[j];
    }
  }
  return out;
}

SpecField nonlinear_n(const State& state, const DerivedFields& derived, const Grid& grid,
                      const Params& params, NonlinearInfo* info) {
  if (info) *info = {};
  if (params.linear_only) return SpecField(grid);

  const PhysField n = transform_to_physical(state.n, grid);
  const PhysField u1 = transform_to_physical(derived.u1, grid);
  const PhysField u2 = transform_to_physical(derived.u2, grid);
  const PhysField u3 = transform_to_physical(derived.u3, grid);
  const PhysField cx = transform_to_physical(spectral_dx(derived.c, grid), grid);
  const PhysField cy = transform_to_physical(ddy(derived.c, grid), grid);
  const PhysField cz = transform_to_physical(spectral_dz(derived.c, grid), grid);

  const double n_max = n.max();
  const bool clip = n_max > 0.0 && n.min() < -1e-8 * n_max;

  PhysField fx(grid), fy(grid), fz(grid);
  double drift = 0.0;
  const auto nd = n.data();
  for (std::size_t i = 0; i < nd.size(); ++i) {
    const double nv = nd[i];
    const double nc = clip ? std::max(nv, 0.0) : nv;
    const double a = u1.data()[i], b = u2.data()[i], c = u3.data()[i];
    const double gx = cx.data()[i], gy = cy.data()[i], gz = cz.data()[i];
    fx.data()[i] = a * nv + nc * gx;
    fy.data()[i] = b * nv + nc * gy;
    fz.data()[i] = c * nv + nc * gz;
    drift = std::max(drift, std::sqrt(a * a + b * b + c * c) + std::sqrt(gx * gx + gy * gy + gz * gz));
  }
  if (info) {
    info->clipped = clip;
    info->max_drift = drift;
  }

  SpecField Fx = transform_to_spectral(fx, grid);
  SpecField Fy = transform_to_spectral(fy, grid);
  SpecField Fz = transform_to_spectral(fz, grid);
  if (params.dealias_on) {
    dealias_in_place(Fx);
    dealias_in_place(Fy);
    dealias_in_place(Fz);
  }

  SpecField out = spectral_dx(Fx, grid);
  out += ddy(Fy, grid);
  out += spectral_dz(Fz, grid);
  zero_nyquist(out);
  out *= -1.0 / params.A;
  return out;
}

SpecField coupling_omega2(const State& state, const DerivedFields& derived, const Grid& grid,
                          const Params& params) {
  SpecField out(grid);
  const double fn = params.coupling_on ? 1.0 / params.A : 0.0;
  for (int i1 = 0; i1 < grid.nx(); ++i1)
    for (int i3 = 0; i3 < grid.nz(); ++i3) {
      if (grid.is_nyquist(i1, i3)) continue;
      const double k3 = grid.k3_of(i3);
      auto u2 = derived.u2.profile(i1, i3);
      auto n = state.n.profile(i1, i3);
      auto dst = out.profile(i1, i3);
      for (int j = 0; j < grid.ny(); ++j) dst[j] = -kI * k3 * u2[j] + fn * kI * k3 * n[j];
    }
  return out;
}

SpecField coupling_delta_u2(const State& state, const Grid& grid, const Params& params) {
  SpecField out(grid);
  if (!params.coupling_on) return out;
  Profile dn(grid.ny());
  for (int i1 = 0; i1 < grid.nx(); ++i1)
    for (int i3 = 0; i3 < grid.nz(); ++i3) {
      const auto m = grid.mode(i1, i3);
      if (m.is_mean() || grid.is_nyquist(i1, i3) || m.k1 == 0) continue;
      ddy_into<Complex>(state.n.profile(i1, i3), grid.h(), dn);
      auto dst = out.profile(i1, i3);
      for (int j = 0; j < grid.ny(); ++j) dst[j] = -kI * (m.k1 / params.A) * dn[j];
    }
  return out;
}

SpecField rhs_n(const State& state, const DerivedFields& derived, const Grid& grid,
                const Params& params) {
  return couette_tilt(state.n, grid) + nonlinear_n(state, derived, grid, params);
}

SpecField rhs_omega2(const State& state, const DerivedFields& derived, const Grid& grid,
                     const Params& params) {
  return couette_tilt(state.omega2, grid) + coupling_omega2(state, derived, grid, params);
}

SpecField rhs_delta_u2(const State& state, const Grid& grid, const Params& params) {
  SpecField out = couette_tilt(state.delta_u2, grid) + coupling_delta_u2(state, grid, params);
  auto p = out.profile(0, 0);
  std::fill(p.begin(), p.end(), Complex{});
  return out;
}

// ---------------------------------------------------------------------------

Stepper::Stepper(const Grid& grid, const Params& params, double dt)
    : grid_(grid), params_(params), dt_(dt), ops_(grid), heat_(grid, params.A, dt) {
  params_.validate();
  if (!(dt > 0.0)) throw std::invalid_argument("Stepper: dt must be > 0");

  const int ny = grid.ny();
  const double h = grid.h();
  const double r = 0.5 * dt / (params.A * h * h);
  const auto y = grid.y();

  implicit_.resize(grid.mode_count());
  influence_.resize(grid.mode_count());
  parallel_for(grid.mode_count(), [&](int idx) {
    const int i1 = idx / grid.nz();
    const int i3 = idx % grid.nz();
    const auto m = grid.mode(i1, i3);

    std::vector<Complex> lower(ny, -r), diag(ny), upper(ny, -r);
    for (int j = 0; j < ny; ++j)
      diag[j] = 1.0 + 2.0 * r + 0.5 * dt * m.eta2() / params.A + 0.5 * dt * kI * (m.k1 * y[j]);
    lower[0] = upper[0] = lower[ny - 1] = upper[ny - 1] = 0.0;
    diag[0] = diag[ny - 1] = 1.0;
    implicit_[idx] = TridiagonalLU<Complex>(std::move(lower), std::move(diag), std::move(upper));

    if (m.is_mean() || grid.is_nyquist(i1, i3)) return;

    Influence& inf = influence_[idx];
    inf.q_plus.assign(ny, Complex{});
    inf.q_minus.assign(ny, Complex{});
    inf.q_plus[ny - 1] = 1.0;
    inf.q_minus[0] = 1.0;
    implicit_[idx].solve_in_place<Complex>(inf.q_plus);
    implicit_[idx].solve_in_place<Complex>(inf.q_minus);
    inf.u_plus = ops_.laplacian(i1, i3).solve(inf.q_plus);
    inf.u_minus = ops_.laplacian(i1, i3).solve(inf.q_minus);

    const auto g0 = [h](const Profile& u) { return (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h); };
    const auto gN = [h](const Profile& u) {
      const std::size_t n = u.size();
      return (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) / (2.0 * h);
    };
    const Complex a = g0(inf.u_plus), b = g0(inf.u_minus);
    const Complex c = gN(inf.u_plus), d = gN(inf.u_minus);
    const Complex det = a * d - b * c;
    if (std::abs(det) == 0.0) throw std::runtime_error("Stepper: singular influence matrix");
    inf.inv[0][0] = d / det;
    inf.inv[0][1] = -b / det;
    inf.inv[1][0] = -c / det;
    inf.inv[1][1] = a / det;
  });
}

DerivedFields Stepper::derive(const State& state) const { return derive_with(state, grid_, ops_); }

void Stepper::reset_history() { have_history_ = false; }

void Stepper::explicit_rhs(std::span<const Complex> f, ModeIndex m,
                           std::span<const Complex> forcing, std::span<Complex> out) const {
  const int ny = grid_.ny();
  const double h = grid_.h();
  const double nu = 1.0 / params_.A;
  const auto y = grid_.y();
  for (int j = 1; j < ny - 1; ++j) {
    const Complex lap = (f[j + 1] - 2.0 * f[j] + f[j - 1]) / (h * h) - m.eta2() * f[j];
    const Complex L = nu * lap - kI * (m.k1 * y[j]) * f[j];
    out[j] = f[j] + 0.5 * dt_ * L + dt_ * forcing[j];
  }
  out[0] = out[ny - 1] = Complex{};
}

StepResult Stepper::step(const State& state, const DerivedFields& derived) {
  const int ny = grid_.ny();
  StepResult result;

  NonlinearInfo info;
  SpecField Nn = nonlinear_n(state, derived, grid_, params_, &info);
  if (!params_.linear_only && info.max_drift > 0.0) {
    const double cfl = dt_ * info.max_drift / (params_.A * grid_.h_min());
    if (!std::isfinite(cfl) || cfl > kDriftCfl) {
      StepFailure f;
      f.status = RunStatus::StepRejected;
      f.t = state.t;
      f.reason = "explicit transport/chemotaxis CFL exceeded";
      f.value = cfl;
      f.suggested_dt = 0.5 * kDriftCfl * params_.A * grid_.h_min() / info.max_drift;
      result.failure = f;
      return result;
    }
  }
  if (info.clipped) ++clip_events_;
  SpecField Nw = coupling_omega2(state, derived, grid_, params_);
  SpecField Nq = coupling_delta_u2(state, grid_, params_);

  std::vector<double> n00(ny);
  {
    auto p = state.n.profile(0, 0);
    const double fn = params_.coupling_on ? 1.0 / params_.A : 0.0;
    for (int j = 0; j < ny; ++j) n00[j] = fn * p[j].real();
  }

  // AB2 extrapolation of the explicit terms
  SpecField En = Nn, Ew = Nw, Eq = Nq;
  std::vector<double> e00 = n00;
  if (have_history_) {
    const auto ab2 = [](SpecField& cur, const SpecField& prev) {
      auto c = cur.data();
      auto p = prev.data();
      for (std::size_t i = 0; i < c.size(); ++i) c[i] = 1.5 * c[i] - 0.5 * p[i];
    };
    ab2(En, prev_n_);
    ab2(Ew, prev_w_);
    ab2(Eq, prev_q_);
    for (int j = 0; j < ny; ++j) e00[j] = 1.5 * n00[j] - 0.5 * prev_n00_[j];
  }

  State next;
  next.t = state.t + dt_;
  next.n = SpecField(grid_);
  next.omega2 = SpecField(grid_);
  next.delta_u2 = SpecField(grid_);

  parallel_for(grid_.mode_count(), [&](int idx) {
    const int i1 = idx / grid_.nz();
    const int i3 = idx % grid_.nz();
    if (grid_.is_nyquist(i1, i3)) return;
    const auto m = grid_.mode(i1, i3);
    const auto& lu = implicit_[idx];

    auto n_new = next.n.profile(i1, i3);
    explicit_rhs(state.n.profile(i1, i3), m, En.profile(i1, i3), n_new);
    lu.solve_in_place(n_new);

    auto w_new = next.omega2.profile(i1, i3);
    explicit_rhs(state.omega2.profile(i1, i3), m, Ew.profile(i1, i3), w_new);
    lu.solve_in_place(w_new);

    if (m.is_mean()) return;
    auto q_new = next.delta_u2.profile(i1, i3);
    explicit_rhs(state.delta_u2.profile(i1, i3), m, Eq.profile(i1, i3), q_new);
    lu.solve_in_place(q_new);

    const Influence& inf = influence_[idx];
    const Profile u_p = ops_.laplacian(i1, i3).solve(q_new);
    const double h = grid_.h();
    const Complex g0 = (-3.0 * u_p[0] + 4.0 * u_p[1] - u_p[2]) / (2.0 * h);
    const Complex gN = (3.0 * u_p[ny - 1] - 4.0 * u_p[ny - 2] + u_p[ny - 3]) / (2.0 * h);
    const Complex alpha = -(inf.inv[0][0] * g0 + inf.inv[0][1] * gN);
    const Complex beta = -(inf.inv[1][0] * g0 + inf.inv[1][1] * gN);
    for (int j = 0; j < ny; ++j) q_new[j] += alpha * inf.q_plus[j] + beta * inf.q_minus[j];
  });

  next.mean_u1 = heat_.advance(state.mean_u1, e00);
  next.mean_u3 = heat_.advance(state.mean_u3, std::vector<double>(ny, 0.0));

  prev_n_ = std::move(Nn);
  prev_w_ = std::move(Nw);
  prev_q_ = std::move(Nq);
  prev_n00_ = std::move(n00);
  have_history_ = true;

  const auto non_finite = [&](const char* what, double value) {
    StepFailure f;
    f.status = RunStatus::BlowupDetected;
    f.t = next.t;
    f.reason = std::string("non-finite values in ") + what;
    f.value = value;
    result.failure = f;
  };
  if (!next.n.all_finite())
    non_finite("n", next.n.max_abs());
  else if (!next.omega2.all_finite())
    non_finite("omega2", next.omega2.max_abs());
  else if (!next.delta_u2.all_finite())
    non_finite("delta_u2", next.delta_u2.max_abs());
  else if (!all_finite(next.mean_u1) || !all_finite(next.mean_u3))
    non_finite("mean profiles", std::numeric_limits<double>::quiet_NaN());

  result.state = std::move(next);
  return result;
}

StepResult step_imex(const State& state, const Grid& grid, const Params& params) {
  Stepper stepper(grid, params, params.dt);
  return stepper.step(state);
}

RunResult run(const State& initial, const Grid& grid, const Params& params,
              const RunHooks& hooks) {
  params.validate();
  RunResult out;
  const long nsteps =
      params.t_end > 0.0 ? static_cast<long>(std::ceil(params.t_end / params.dt - 1e-9)) : 0;
  const double dt = nsteps > 0 ? params.t_end / nsteps : params.dt;
  out.dt = dt;
  const int cadence = std::max(1, hooks.cadence);

  Stepper stepper(grid, params, dt);
  State state = initial;
  const double t0 = initial.t;

  for (long k = 0;; ++k) {
    const DerivedFields derived = stepper.derive(state);
    std::optional<StepFailure> unhealthy;
    if (hooks.health) unhealthy = hooks.health(state, derived);
    if (hooks.on_sample && (k % cadence == 0 || k == nsteps || unhealthy))
      hooks.on_sample(state, derived);
    if (unhealthy) {
      out.status = RunStatus::BlowupDetected;
      out.failure = unhealthy;
      break;
    }
    if (k == nsteps) break;

    StepResult r = stepper.step(state, derived);
    if (r.failure) {
      out.status = r.failure->status;
      out.failure = r.failure;
      break;
    }
    state = std::move(r.state);
    state.t = t0 + static_cast<double>(k + 1) * dt;
    ++out.steps;
    if (hooks.on_step) hooks.on_step(state);
  }
  out.clip_events = stepper.clip_events();
  out.final_state = std::move(state);
  return out;
}

}  // namespace cpks
