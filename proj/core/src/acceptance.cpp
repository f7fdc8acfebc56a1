#include "cpks/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <memory>
#include <optional>
#include <sstream>

#include "cpks/elliptic.hpp"
#include "cpks/experiment.hpp"
#include "cpks/inequalities.hpp"
#include "cpks/transforms.hpp"

namespace cpks::acceptance {

namespace fs = std::filesystem;

namespace {

std::string printf_string(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

// --- 1: elliptic convergence -------------------------------------------------

CriterionResult elliptic_convergence() {
  CriterionResult r{1, "elliptic convergence", false, "", 0.0};
  const double pi = std::acos(-1.0);
  const int sizes[] = {33, 65, 129, 257};
  const ModeIndex modes[] = {{0, 0}, {1, 1}, {2, 3}};
  std::vector<double> errors;
  for (int ny : sizes) {
    const Grid grid = make_grid(8, ny, 8);
    const auto y = grid.y();
    double err = 0.0;
    for (const auto mode : modes)
      for (int m = 1; m <= 2; ++m) {
        // c = sin(m pi (y+1)/2) solves (d_yy - eta^2 - 1) c = -n for
        // n = ((m pi / 2)^2 + eta^2 + 1) c.
        const double k = m * pi / 2.0;
        const double lambda = k * k + mode.eta2() + 1.0;
        Profile n(ny);
        for (int j = 0; j < ny; ++j) n[j] = lambda * std::sin(k * (y[j] + 1.0));
        const Profile c = elliptic::solve_chemo(n, mode, grid);
        for (int j = 0; j < ny; ++j) err = std::max(err, std::abs(c[j] - std::sin(k * (y[j] + 1.0))));
      }
    errors.push_back(err);
  }
  double min_order = 1e9, max_order = -1e9;
  for (std::size_t i = 1; i < errors.size(); ++i) {
    const double p = std::log2(errors[i - 1] / errors[i]);
    min_order = std::min(min_order, p);
    max_order = std::max(max_order, p);
  }
  r.passed = min_order >= 1.7 && max_order <= 2.3 && errors.back() < 1e-4;
  r.detail = printf_string("observed order %.3f..%.3f (need 2.0 +- 0.3), max error %.3g at ny=257 (need < 1e-4)",
                           min_order, max_order, errors.back());
  return r;
}

// --- 2: divergence-free reconstruction --------------------------------------

CriterionResult divergence_free() {
  CriterionResult r{2, "divergence-free reconstruction", false, "", 0.0};
  const Grid grid = make_grid(32, 65, 32);
  const Params params;
  const elliptic::OperatorCache ops(grid);
  double worst = 0.0, worst_rel = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const State s = random_state(grid, 1000 + trial, 6);
    const DerivedFields d = derive(s, grid, params);
    SpecField div(grid);
    for (int i1 = 0; i1 < grid.nx(); ++i1)
      for (int i3 = 0; i3 < grid.nz(); ++i3) {
        const auto m = grid.mode(i1, i3);
        const Profile du2 = ddy(d.u2.profile(i1, i3), grid);
        const auto u1 = d.u1.profile(i1, i3);
        const auto u3 = d.u3.profile(i1, i3);
        auto out = div.profile(i1, i3);
        for (int j = 0; j < grid.ny(); ++j)
          out[j] = Complex(0.0, m.k1) * u1[j] + du2[j] + Complex(0.0, m.k3) * u3[j];
      }
    const double dmax = transform_to_physical(div, grid).max_abs();
    double umax = 0.0;
    for (const SpecField* f : {&d.u1, &d.u2, &d.u3})
      umax = std::max(umax, transform_to_physical(*f, grid).max_abs());
    worst = std::max(worst, dmax);
    worst_rel = std::max(worst_rel, dmax / umax);
  }
  r.passed = worst < 1e-8;
  r.detail = printf_string("100 random states on 32x65x32: max |div u| = %.3g (need < 1e-8), relative to max |u|: %.3g",
                           worst, worst_rel);
  return r;
}

// --- 3: enhanced-dissipation scaling ------------------------------------------

CriterionResult enhanced_dissipation() {
  CriterionResult r{3, "enhanced-dissipation scaling", false, "", 0.0};
  const Grid grid = make_grid(32, 129, 16);
  const double As[] = {1e3, 1e4, 1e5};
  std::vector<double> lambdas;
  std::string rates;
  for (double A : As) {
    Params p;
    p.A = A;
    p.linear_only = true;
    p.coupling_on = false;
    // long enough to leave the shear-diffusion transient (~ A^{1/3}) well behind
    p.t_end = 14.0 * std::cbrt(A);
    p.dt = p.t_end / 1500.0;

    State s = State::zero(grid);
    const auto y = grid.y();
    for (int j = 0; j < grid.ny(); ++j) {
      const double b = 1.0 - y[j] * y[j];
      s.n(grid.i1_of(1), grid.i3_of(1), j) = b;
      s.n(grid.i1_of(-1), grid.i3_of(-1), j) = b;
    }
    std::vector<double> t, v;
    RunHooks hooks;
    hooks.cadence = 10;
    hooks.on_sample = [&](const State& st, const DerivedFields&) {
      t.push_back(st.t);
      v.push_back(std::sqrt(l2_squared_y(st.n.profile(grid.i1_of(1), grid.i3_of(1)), grid)));
    };
    const RunResult rr = cpks::run(s, grid, p, hooks);
    if (rr.status != RunStatus::Completed) {
      r.detail = "linear run at A=" + printf_string("%g", A) + " ended with " + to_string(rr.status);
      return r;
    }
    const double lam = diagnostics::fit_decay_rate(t, v, 0.5 * p.t_end, p.t_end);
    lambdas.push_back(lam);
    rates += printf_string("%s%g:%.4g", rates.empty() ? "" : ", ", A, lam);
  }
  // least-squares slope of log lambda against log A
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    const double x = std::log(As[i]), yv = std::log(lambdas[i]);
    sx += x;
    sy += yv;
    sxx += x * x;
    sxy += x * yv;
  }
  const double n = static_cast<double>(lambdas.size());
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const bool positive = std::all_of(lambdas.begin(), lambdas.end(), [](double l) { return l > 0.0; });
  r.passed = positive && std::abs(slope + 1.0 / 3.0) <= 0.1;
  r.detail = printf_string("lambda(A) = {%s}, log-log slope %.4f (need -1/3 +- 0.1)", rates.c_str(), slope);
  return r;
}

// --- 4, 7, 8, 9: the suppression run ------------------------------------------

struct SuppressionRun {
  ExperimentResult result;
  double wall_value = 0.0;  // max |u2(+-1)| over steps and modes
  double wall_slope = 0.0;  // max |d_y u2(+-1)|
  double slope_scale = 0.0; // max |d_y u2| anywhere, for context
  fs::path dir;
};

SuppressionRun run_suppression(const fs::path& dir) {
  RunConfig config = suppression_config();
  config.output.dir = dir.string();
  const Grid grid = config.grid();
  const elliptic::OperatorCache ops(grid);

  SuppressionRun out;
  out.dir = dir;
  ExperimentHooks hooks;
  hooks.on_step = [&](const State& s) {
    Profile u2(grid.ny());
    for (int i1 = 0; i1 < grid.nx(); ++i1)
      for (int i3 = 0; i3 < grid.nz(); ++i3) {
        if (grid.mode(i1, i3).is_mean()) continue;
        ops.laplacian(i1, i3).solve_into(s.delta_u2.profile(i1, i3), u2);
        const Profile d = ddy(u2, grid);
        out.wall_value = std::max({out.wall_value, std::abs(u2.front()), std::abs(u2.back())});
        out.wall_slope = std::max({out.wall_slope, std::abs(d.front()), std::abs(d.back())});
        for (const auto& v : d) out.slope_scale = std::max(out.slope_scale, std::abs(v));
      }
  };
  out.result = run_experiment(config, hooks);
  return out;
}

CriterionResult suppression(const SuppressionRun& run) {
  CriterionResult r{4, "suppression run", false, "", 0.0};
  const auto& s = run.result.summary;
  const auto& L = run.result.ledger;
  // E at the sample closest to t = 1
  std::size_t i1 = 0;
  for (std::size_t i = 0; i < L.size(); ++i)
    if (std::abs(L.t_samples[i] - 1.0) < std::abs(L.t_samples[i1] - 1.0)) i1 = i;
  const double e1 = L.e_series.empty() ? 0.0 : L.e_series[i1];
  const double ratio = s.sup_linf / s.initial_linf;
  const bool completed = s.status == RunStatus::Completed;
  const bool lift_ok = s.lift_product <= 1.0;
  const bool linf_ok = ratio <= 5.0;
  const bool e_ok = e1 > 0.0 && s.e_final <= 10.0 * e1;
  r.passed = completed && lift_ok && linf_ok && e_ok;
  r.detail = printf_string(
      "status %s at t=%g, A(|u2,0|+|u3,0|)=%.3g, sup|n|inf/|n_in|inf=%.4f (need <= 5), E(10)/E(1)=%.4f (need <= 10)",
      to_string(s.status).c_str(), s.t_final, s.lift_product, ratio, e1 > 0.0 ? s.e_final / e1 : 0.0);
  return r;
}

CriterionResult mass_accounting(const SuppressionRun& run) {
  CriterionResult r{7, "mass accounting", false, "", 0.0};
  const auto& L = run.result.ledger;
  const double m0 = L.mass_series.front();
  double drift_t1 = 0.0, worst_increase = 0.0;
  for (std::size_t i = 0; i < L.size(); ++i) {
    if (L.t_samples[i] <= 1.0 + 1e-12) drift_t1 = std::max(drift_t1, std::abs(L.mass_series[i] - m0) / m0);
    if (i > 0) worst_increase = std::max(worst_increase, (L.mass_series[i] - L.mass_series[i - 1]) / m0);
  }
  // Non-increasing up to roundoff in the quadrature of n_00.
  const bool monotone = worst_increase <= 1e-12;
  r.passed = drift_t1 < 1e-3 && monotone;
  r.detail = printf_string(
      "max |M(t)-M(0)|/M(0) for t<=1: %.3g (need < 1e-3); largest relative increase between samples: %.3g over %zu samples, final loss %.3g",
      drift_t1, worst_increase, L.size(), (m0 - L.mass_series.back()) / m0);
  return r;
}

CriterionResult clamped_boundary(const SuppressionRun& run) {
  CriterionResult r{8, "clamped boundary enforcement", false, "", 0.0};
  r.passed = run.result.summary.steps > 0 && run.wall_value < 1e-12 && run.wall_slope < 1e-8;
  r.detail = printf_string("over %d steps: max |u2(+-1)| = %.3g (need < 1e-12), max |d_y u2(+-1)| = %.3g (need < 1e-8; interior max %.3g)",
                           run.result.summary.steps, run.wall_value, run.wall_slope, run.slope_scale);
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

CriterionResult determinism(const SuppressionRun& first, const fs::path& rerun_dir) {
  CriterionResult r{9, "determinism", false, "", 0.0};
  const SuppressionRun second = run_suppression(rerun_dir);
  const std::string a = slurp(first.dir / "timeseries.csv");
  const std::string b = slurp(second.dir / "timeseries.csv");
  r.passed = !a.empty() && a == b;
  r.detail = printf_string("rerun timeseries.csv %s (%zu vs %zu bytes)", a == b ? "bit-identical" : "differs",
                           a.size(), b.size());
  return r;
}

// --- 5: blow-up contrast -------------------------------------------------------

CriterionResult blowup_contrast() {
  CriterionResult r{5, "blow-up contrast", false, "", 0.0};
  const RunConfig config = blowup_config();
  const ExperimentResult big = run_experiment(config);
  const auto& s = big.summary;
  const bool fired = s.status == RunStatus::BlowupDetected && s.failure && s.failure->t > 0.0;

  // Control: identical bump and grid with subcritical mass must stay healthy
  // well past the firing time.
  RunConfig control = config;
  control.init.mass = 0.3;
  control.params.t_end = fired ? std::max(0.02, 10.0 * s.failure->t) : 0.02;
  const ExperimentResult small = run_experiment(control);
  const bool control_ok = small.summary.status == RunStatus::Completed;

  r.passed = fired && control_ok;
  r.detail = printf_string(
      "M=8: %s at t=%.4g (%s, value %.3g; |n|inf %.4g -> %.4g); control M=0.3 to t=%.3g: %s",
      to_string(s.status).c_str(), s.failure ? s.failure->t : s.t_final,
      s.failure ? s.failure->reason.c_str() : "none", s.failure ? s.failure->value : 0.0, s.initial_linf,
      s.sup_linf, control.params.t_end, to_string(small.summary.status).c_str());
  return r;
}

// --- 6: 9/4 interpolation constant ------------------------------------------

CriterionResult a3_constant() {
  CriterionResult r{6, "9/4 interpolation constant", false, "", 0.0};
  const int ny = 129, nz = 64;
  const auto rows = inequalities::run_suite("a3", 1000, 20240601, ny, nz);
  double worst = 0.0;
  for (const auto& row : rows) worst = std::max(worst, row.ratio);
  const double bound = inequalities::lemma_a3_bound(inequalities::PlaneGrid(ny, nz));
  r.passed = rows.size() == 1000 && worst <= bound;
  r.detail = printf_string("1000 random functions on 129x64: max ratio %.6f (bound 9/4 (1+5h) = %.6f)", worst, bound);
  return r;
}

// --- 10: lift-up transient -----------------------------------------------------

CriterionResult lift_up() {
  CriterionResult r{10, "lift-up transient", false, "", 0.0};
  const Grid grid = make_grid(8, 65, 8);
  Params p;
  p.A = 1e3;
  p.t_end = 3000.0;
  p.dt = 0.5;

  State s = State::zero(grid);
  const auto y = grid.y();
  Profile u2(grid.ny());
  for (int j = 0; j < grid.ny(); ++j) u2[j] = 1e-3 * (1.0 - y[j] * y[j]) * (1.0 - y[j] * y[j]);
  const Profile d2 = d2y(u2, grid);
  for (int j = 0; j < grid.ny(); ++j) {
    const Complex q = d2[j] - u2[j];
    s.delta_u2(0, grid.i3_of(1), j) = q;
    s.delta_u2(0, grid.i3_of(-1), j) = std::conj(q);
  }

  std::vector<double> t, v;
  RunHooks hooks;
  hooks.cadence = 10;
  hooks.on_sample = [&](const State& st, const DerivedFields& d) {
    t.push_back(st.t);
    v.push_back(diagnostics::l2_norm(diagnostics::project_x_zero(d.u1), grid));
  };
  const RunResult rr = cpks::run(s, grid, p, hooks);
  const auto peak_it = std::max_element(v.begin(), v.end());
  const std::size_t ip = static_cast<std::size_t>(peak_it - v.begin());
  double t_decay = -1.0;
  for (std::size_t i = ip; i < v.size(); ++i)
    if (v[i] < 0.1 * *peak_it) {
      t_decay = t[i];
      break;
    }
  r.passed = rr.status == RunStatus::Completed && v.front() == 0.0 && *peak_it > 0.0 && t_decay > 0.0;
  r.detail = printf_string(
      "|u1,0| starts at %.3g, peaks at %.4g (t=%.4g), below 10%% of peak from t=%.5g (10 A^{1/3} = %.4g)",
      v.front(), *peak_it, t[ip], t_decay, 10.0 * std::cbrt(p.A));
  return r;
}

}  // namespace

RunConfig suppression_config() {
  RunConfig c;
  c.nx = 32;
  c.ny = 65;
  c.nz = 32;
  c.params.A = 1e4;
  c.params.t_end = 10.0;
  c.params.dt = 0.0;
  c.init.preset = "gaussian_bump";
  c.init.mass = 0.3;
  c.init.width = 0.5;
  c.init.sy = 4.0;
  c.init.u_product = 0.5;
  c.output.cadence = 1;
  c.seed = 1;
  return c;
}

RunConfig blowup_config() {
  RunConfig c;
  c.nx = 128;
  c.ny = 65;
  c.nz = 128;
  c.params.A = 1.0;
  c.params.t_end = 2.0;
  c.params.dt = 0.0;
  c.init.preset = "gaussian_bump";
  c.init.mass = 8.0;
  c.init.width = 0.1;
  c.init.sy = 1.0;
  c.init.u_product = 0.5;
  c.output.cadence = 1;
  c.seed = 1;
  return c;
}

std::vector<CriterionResult> run(const Options& options,
                                 const std::function<void(const CriterionResult&)>& on_result) {
  std::vector<int> ids = options.only;
  if (ids.empty())
    for (int i = 1; i <= 10; ++i) ids.push_back(i);
  std::sort(ids.begin(), ids.end());

  const fs::path scratch =
      options.scratch_dir.empty() ? fs::temp_directory_path() / "cpks-acceptance" : options.scratch_dir;
  std::unique_ptr<SuppressionRun> shared;
  std::string shared_error;
  const auto suppression_run = [&]() -> const SuppressionRun& {
    if (!shared && shared_error.empty()) {
      try {
        shared = std::make_unique<SuppressionRun>(run_suppression(scratch / "suppression"));
      } catch (const std::exception& e) {
        shared_error = e.what();
      }
    }
    if (!shared) throw std::runtime_error("suppression run failed: " + shared_error);
    return *shared;
  };

  static const char* names[] = {"",
                                "elliptic convergence",
                                "divergence-free reconstruction",
                                "enhanced-dissipation scaling",
                                "suppression run",
                                "blow-up contrast",
                                "9/4 interpolation constant",
                                "mass accounting",
                                "clamped boundary enforcement",
                                "determinism",
                                "lift-up transient"};

  std::vector<CriterionResult> results;
  for (int id : ids) {
    const auto start = std::chrono::steady_clock::now();
    CriterionResult r{id, id >= 1 && id <= 10 ? names[id] : "unknown", false, "", 0.0};
    try {
      switch (id) {
        case 1: r = elliptic_convergence(); break;
        case 2: r = divergence_free(); break;
        case 3: r = enhanced_dissipation(); break;
        case 4: r = suppression(suppression_run()); break;
        case 5: r = blowup_contrast(); break;
        case 6: r = a3_constant(); break;
        case 7: r = mass_accounting(suppression_run()); break;
        case 8: r = clamped_boundary(suppression_run()); break;
        case 9: r = determinism(suppression_run(), scratch / "suppression-rerun"); break;
        case 10: r = lift_up(); break;
        default: r.detail = "no such criterion";
      }
    } catch (const std::exception& e) {
      r.passed = false;
      r.detail = std::string("error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (on_result) on_result(r);
    results.push_back(std::move(r));
  }
  return results;
}

std::string format(const CriterionResult& r) {
  return printf_string("%s %2d  %s: %s [%.1f s]", r.passed ? "PASS" : "FAIL", r.id, r.name.c_str(),
                       r.detail.c_str(), r.seconds);
}

}  // namespace cpks::acceptance
