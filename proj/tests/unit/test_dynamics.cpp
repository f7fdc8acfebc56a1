#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "cpks/dynamics.hpp"
#include "cpks/elliptic.hpp"
#include "cpks/experiment.hpp"
#include "cpks/finite_difference.hpp"
#include "cpks/meanflow.hpp"
#include "cpks/transforms.hpp"

using namespace cpks;

namespace {

constexpr double pi = std::numbers::pi;

Params linear_params(double A, double dt) {
  Params p;
  p.A = A;
  p.dt = dt;
  p.t_end = 1.0;
  p.linear_only = true;
  p.coupling_on = false;
  return p;
}

void set_pair(SpecField& f, const Grid& g, ModeIndex m, const Profile& p) {
  auto a = f.profile(g.i1_of(m.k1), g.i3_of(m.k3));
  auto b = f.profile(g.i1_of(-m.k1), g.i3_of(-m.k3));
  for (std::size_t j = 0; j < p.size(); ++j) {
    a[j] = p[j];
    b[j] = std::conj(p[j]);
  }
}

Profile bump(const Grid& g, double amp = 1.0) {
  Profile p(g.ny());
  for (int j = 0; j < g.ny(); ++j) p[j] = amp * (1 - g.y()[j] * g.y()[j]);
  return p;
}

}  // namespace

TEST(Params, Validation) {
  Params p;
  EXPECT_NO_THROW(p.validate());
  p.A = 0.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = Params{};
  p.dt = -1.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = Params{};
  p.a = -0.1;
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(Derive, ZeroStateGivesZeroFields) {
  const Grid g = make_grid(8, 17, 8);
  const DerivedFields d = derive(State::zero(g), g, Params{});
  for (const SpecField* f : {&d.c, &d.u1, &d.u2, &d.u3}) EXPECT_EQ(f->max_abs(), 0.0);
}

TEST(Derive, MeanModeReducesToOneDimension) {
  const Grid g = make_grid(8, 33, 8);
  State s = State::zero(g);
  const Profile n = bump(g, 2.0);
  for (int j = 0; j < 33; ++j) {
    s.n(0, 0, j) = n[j];
    s.mean_u1[j] = 0.3 * (1 - g.y()[j] * g.y()[j]);
    s.mean_u3[j] = -0.1 * std::sin(pi * g.y()[j]);
  }
  const DerivedFields d = derive(s, g, Params{});
  const Profile c = elliptic::solve_chemo(n, {0, 0}, g);
  for (int j = 0; j < 33; ++j) {
    EXPECT_NEAR(std::abs(d.c(0, 0, j) - c[j]), 0.0, 1e-15);
    EXPECT_NEAR(d.u1(0, 0, j).real(), s.mean_u1[j], 1e-15);
    EXPECT_NEAR(d.u3(0, 0, j).real(), s.mean_u3[j], 1e-15);
  }
  EXPECT_EQ(d.u2.max_abs(), 0.0);
}

TEST(Derive, DivergenceAndCurlConsistency) {
  const Grid g = make_grid(16, 33, 16);
  const State s = random_state(g, 42);
  const DerivedFields d = derive(s, g, Params{});
  const Complex i(0, 1);
  for (int i1 = 0; i1 < 16; ++i1)
    for (int i3 = 0; i3 < 16; ++i3) {
      const ModeIndex m = g.mode(i1, i3);
      const Profile du2 = ddy(d.u2.profile(i1, i3), g);
      for (int j = 0; j < 33; ++j) {
        const Complex div = i * double(m.k1) * d.u1(i1, i3, j) + du2[j] + i * double(m.k3) * d.u3(i1, i3, j);
        EXPECT_LT(std::abs(div), 1e-10);
        if (!m.is_mean()) {
          const Complex curl = i * double(m.k3) * d.u1(i1, i3, j) - i * double(m.k1) * d.u3(i1, i3, j);
          EXPECT_LT(std::abs(curl - s.omega2(i1, i3, j)), 1e-10);
        }
      }
    }
  // c vanishes at the walls
  for (int i1 = 0; i1 < 16; ++i1)
    for (int i3 = 0; i3 < 16; ++i3) {
      EXPECT_EQ(d.c(i1, i3, 0), Complex(0.0));
      EXPECT_EQ(d.c(i1, i3, 32), Complex(0.0));
    }
}

TEST(Rhs, LinearDensityTendencyIsCouetteTilt) {
  const Grid g = make_grid(8, 33, 8);
  State s = State::zero(g);
  Profile prof(33);
  for (int j = 0; j < 33; ++j) prof[j] = Complex(std::cos(g.y()[j]), 0.2);
  set_pair(s.n, g, {1, 0}, prof);
  Params p = linear_params(1e3, 0.01);
  const SpecField r = rhs_n(s, derive(s, g, p), g, p);
  for (int j = 0; j < 33; ++j) EXPECT_NEAR(std::abs(r(1, 0, j) - Complex(0, -g.y()[j]) * prof[j]), 0.0, 1e-15);
}

TEST(Rhs, ZeroDensityGivesZeroTendency) {
  const Grid g = make_grid(8, 17, 8);
  const State s = State::zero(g);
  const Params p;
  EXPECT_EQ(rhs_n(s, derive(s, g, p), g, p).max_abs(), 0.0);
}

TEST(Rhs, ChemotaxisOnMeanModeMatchesOneDimensionalOracle) {
  // u = 0 and n = n(y): the tendency is -(1/A) d_y(n d_y c).
  const Grid g = make_grid(8, 129, 8);
  State s = State::zero(g);
  Profile n(129);
  for (int j = 0; j < 129; ++j) n[j] = 2.0 * std::cos(pi * g.y()[j] / 2);
  for (int j = 0; j < 129; ++j) s.n(0, 0, j) = n[j];
  Params p;
  p.A = 10.0;
  const DerivedFields d = derive(s, g, p);
  const SpecField r = nonlinear_n(s, d, g, p);
  const Profile dc = ddy(d.c.profile(0, 0), g);
  Profile flux(129);
  for (int j = 0; j < 129; ++j) flux[j] = n[j] * dc[j];
  const Profile div = ddy(flux, g);
  for (int j = 1; j < 128; ++j) EXPECT_NEAR(std::abs(r(0, 0, j) + div[j] / p.A), 0.0, 1e-10);
}

TEST(Rhs, Omega2Forcing) {
  const Grid g = make_grid(8, 33, 8);
  State s = State::zero(g);
  Params p = linear_params(10.0, 0.01);
  p.coupling_on = true;
  // u2 at mode (0,1) only: tendency -i u2
  Profile u2(33), q(33);
  for (int j = 0; j < 33; ++j) u2[j] = std::pow(1 - g.y()[j] * g.y()[j], 2);
  const Profile d2 = d2y(u2, g);
  for (int j = 0; j < 33; ++j) q[j] = d2[j] - u2[j];
  set_pair(s.delta_u2, g, {0, 1}, q);
  const DerivedFields d = derive(s, g, p);
  const SpecField r = rhs_omega2(s, d, g, p);
  for (int j = 0; j < 33; ++j)
    EXPECT_NEAR(std::abs(r(0, 1, j) - Complex(0, -1) * d.u2(0, 1, j)), 0.0, 1e-14);

  // k3 = 0 modes: only the tilt survives
  State t = State::zero(g);
  set_pair(t.n, g, {2, 0}, bump(g));
  set_pair(t.omega2, g, {2, 0}, bump(g, 0.5));
  const SpecField r2 = rhs_omega2(t, derive(t, g, p), g, p);
  for (int j = 0; j < 33; ++j)
    EXPECT_NEAR(std::abs(r2(2, 0, j) - Complex(0, -2 * g.y()[j]) * t.omega2(2, 0, j)), 0.0, 1e-15);
}

TEST(Rhs, DeltaU2Forcing) {
  const Grid g = make_grid(8, 33, 8);
  Params p = linear_params(10.0, 0.01);
  p.coupling_on = true;
  State s = State::zero(g);
  set_pair(s.delta_u2, g, {1, 1}, bump(g));
  const SpecField r = rhs_delta_u2(s, g, p);
  for (int j = 0; j < 33; ++j)
    EXPECT_NEAR(std::abs(r(1, 1, j) - Complex(0, -g.y()[j]) * s.delta_u2(1, 1, j)), 0.0, 1e-15);

  // k1 = 0: neither tilt nor forcing
  State t = State::zero(g);
  set_pair(t.n, g, {0, 2}, bump(g));
  set_pair(t.delta_u2, g, {0, 2}, bump(g));
  EXPECT_EQ(rhs_delta_u2(t, g, p).max_abs(), 0.0);
}

TEST(Step, ZeroStateIsFixedPoint) {
  const Grid g = make_grid(8, 17, 8);
  Params p;
  p.dt = 0.01;
  Stepper st(g, p, p.dt);
  State s = State::zero(g);
  for (int k = 0; k < 5; ++k) {
    auto r = st.step(s);
    ASSERT_FALSE(r.failure);
    s = r.state;
  }
  EXPECT_EQ(s.n.max_abs(), 0.0);
  EXPECT_EQ(s.omega2.max_abs(), 0.0);
  EXPECT_EQ(s.delta_u2.max_abs(), 0.0);
  EXPECT_NEAR(s.t, 0.05, 1e-15);
}

TEST(Step, LinearModeEnergyDecaysMonotonically) {
  const Grid g = make_grid(8, 65, 8);
  const Params p = linear_params(1e3, 0.1);
  State s = State::zero(g);
  set_pair(s.n, g, {1, 0}, bump(g));
  Stepper st(g, p, p.dt);
  double prev = l2_squared_y(s.n.profile(1, 0), g);
  for (int k = 0; k < 200; ++k) {
    s = st.step(s).state;
    const double e = l2_squared_y(s.n.profile(1, 0), g);
    EXPECT_LE(e, prev * (1 + 1e-8)) << "step " << k;
    prev = e;
  }
}

TEST(Step, PureDiffusionMatchesHeatSeries) {
  // k1 = 0 mode (0,1): d_t n = (1/A)(n'' - n), n(0) = sin(pi(y+1)/2).
  // Exact: exp(-(pi^2/4 + 1) t / A) sin(pi(y+1)/2).
  const double A = 1.0, t_end = 0.2;
  double prev = 0.0;
  for (int level = 0; level < 3; ++level) {
    const Grid g = make_grid(8, 32 * (1 << level) + 1, 8);
    Params p = linear_params(A, 0.01 / (1 << level));
    p.t_end = t_end;
    State s = State::zero(g);
    Profile prof(g.ny());
    for (int j = 0; j < g.ny(); ++j) prof[j] = std::sin(pi * (g.y()[j] + 1) / 2);
    set_pair(s.n, g, {0, 1}, prof);
    const RunResult r = run(s, g, p);
    const double decay = std::exp(-(pi * pi / 4 + 1) * t_end / A);
    double err = 0.0;
    for (int j = 0; j < g.ny(); ++j) err = std::max(err, std::abs(r.final_state.n(0, 1, j) - decay * prof[j]));
    if (prev > 0.0) EXPECT_NEAR(prev / err, 4.0, 0.5);
    prev = err;
  }
  EXPECT_LT(prev, 1e-4);
}

TEST(Step, ClampedConditionsAfterEveryStep) {
  const Grid g = make_grid(16, 33, 16);
  Params p;
  p.A = 100.0;
  p.dt = 0.01;
  State s = random_state(g, 3);
  const elliptic::OperatorCache ops(g);
  Stepper st(g, p, p.dt);
  for (int k = 0; k < 10; ++k) {
    s = st.step(s).state;
    for (int i1 = 0; i1 < 16; ++i1)
      for (int i3 = 0; i3 < 16; ++i3) {
        if (g.mode(i1, i3).is_mean()) continue;
        const Profile u2 = ops.laplacian(i1, i3).solve(s.delta_u2.profile(i1, i3));
        const Profile du2 = ddy(u2, g);
        EXPECT_LT(std::abs(u2.front()) + std::abs(u2.back()), 1e-12);
        EXPECT_LT(std::abs(du2.front()) + std::abs(du2.back()), 1e-8);
        EXPECT_EQ(s.n(i1, i3, 0), Complex(0.0));
        EXPECT_EQ(s.omega2(i1, i3, 32), Complex(0.0));
      }
  }
}

TEST(Step, StaysHermitian) {
  const Grid g = make_grid(16, 33, 16);
  Params p;
  p.A = 50.0;
  p.dt = 0.01;
  State s = random_state(g, 5);
  Stepper st(g, p, p.dt);
  for (int k = 0; k < 5; ++k) s = st.step(s).state;
  EXPECT_LT(s.n.hermitian_defect(), 1e-13);
  EXPECT_LT(s.omega2.hermitian_defect(), 1e-13);
  EXPECT_LT(s.delta_u2.hermitian_defect(), 1e-12);
}

TEST(Run, ZeroEndTimeReturnsInitial) {
  const Grid g = make_grid(8, 17, 8);
  Params p;
  p.t_end = 0.0;
  const State s = random_state(g, 2);
  int samples = 0;
  RunHooks hooks;
  hooks.on_sample = [&](const State&, const DerivedFields&) { ++samples; };
  const RunResult r = run(s, g, p, hooks);
  EXPECT_EQ(r.status, RunStatus::Completed);
  EXPECT_EQ(r.steps, 0);
  EXPECT_EQ(r.final_state, s);
  EXPECT_EQ(samples, 1);
}

TEST(Run, HugeStepNeverFailsSilently) {
  const Grid g = make_grid(16, 33, 16);
  Params p;
  p.A = 1.0;
  p.dt = 10.0;
  p.t_end = 100.0;
  State s = random_state(g, 7);
  for (auto& v : s.n.data()) v *= 1e3;
  const RunResult r = run(s, g, p);
  EXPECT_NE(r.status, RunStatus::Completed);
  ASSERT_TRUE(r.failure);
  EXPECT_FALSE(r.failure->reason.empty());
  if (r.status == RunStatus::StepRejected) EXPECT_GT(r.failure->suggested_dt, 0.0);
}

TEST(Run, DefaultStepFormula) {
  const Grid g = make_grid(8, 65, 8);
  Params p;
  p.A = 1.0;
  EXPECT_DOUBLE_EQ(default_dt(g, p, 0.0), std::min(0.5 * g.h() * g.h(), 0.01));
  p.A = 1e4;
  EXPECT_DOUBLE_EQ(default_dt(g, p, 0.0), 0.01);
  EXPECT_DOUBLE_EQ(default_dt(g, p, 100.0), 0.1 * g.h() / 100.0);
}

TEST(MeanFlow, HeatEigenmodeDecay) {
  const Grid g = make_grid(8, 257, 8);
  Params p;
  p.A = 2.0;
  const double dt = 0.01;
  meanflow::MeanProfiles m = meanflow::MeanProfiles::zero(g);
  for (int j = 0; j < g.ny(); ++j) m.u1_00[j] = std::sin(pi * g.y()[j]);
  const std::vector<double> zero(g.ny(), 0.0);
  const auto next = meanflow::step(m, zero, zero, g, p, dt);
  const double factor = std::exp(-pi * pi * dt / p.A);
  for (int j = 0; j < g.ny(); ++j) EXPECT_NEAR(next.u1_00[j], factor * m.u1_00[j], 1e-5);
  const auto z = meanflow::step(meanflow::MeanProfiles::zero(g), zero, zero, g, p, dt);
  for (int j = 0; j < g.ny(); ++j) EXPECT_EQ(z.u1_00[j], 0.0);
}

TEST(MeanFlow, SteadyStateSolvesForcedProblem) {
  // -(1/A) u'' = (1/A) n with n = pi^2 sin(pi y) gives u = sin(pi y).
  const Grid g = make_grid(8, 129, 8);
  Params p;
  p.A = 1.0;
  std::vector<double> n(g.ny()), zero(g.ny(), 0.0);
  for (int j = 0; j < g.ny(); ++j) n[j] = pi * pi * std::sin(pi * g.y()[j]);
  meanflow::MeanProfiles m = meanflow::MeanProfiles::zero(g);
  for (int k = 0; k < 400; ++k) m = meanflow::step(m, n, zero, g, p, 0.05);
  for (int j = 0; j < g.ny(); ++j) EXPECT_NEAR(m.u1_00[j], std::sin(pi * g.y()[j]), 1e-3);
}

TEST(MeanFlow, SpanwiseMeanNormNonIncreasing) {
  const Grid g = make_grid(8, 65, 8);
  Params p;
  p.A = 5.0;
  std::vector<double> zero(g.ny(), 0.0);
  meanflow::MeanProfiles m = meanflow::MeanProfiles::zero(g);
  for (int j = 0; j < g.ny(); ++j) m.u3_00[j] = (1 - g.y()[j] * g.y()[j]) * (1 + g.y()[j]);
  double prev = l2_squared_y(std::span<const double>(m.u3_00), g);
  for (int k = 0; k < 50; ++k) {
    m = meanflow::step(m, zero, zero, g, p, 0.1);
    const double e = l2_squared_y(std::span<const double>(m.u3_00), g);
    EXPECT_LE(e, prev);
    prev = e;
    EXPECT_EQ(m.u3_00.front(), 0.0);
    EXPECT_EQ(m.u3_00.back(), 0.0);
  }
}
