#include "cpks/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

#include "cpks/checkpoint.hpp"
#include "cpks/transforms.hpp"

namespace cpks {

namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Smooth seeded factor 1 + noise * r(x, z) with |r| <= 1.
PhysField noise_factor(const Grid& grid, double noise, std::uint64_t seed) {
  PhysField r(grid);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k1 = 0; k1 <= 2; ++k1)
    for (int k3 = 0; k3 <= 2; ++k3) {
      if (k1 == 0 && k3 == 0) continue;
      const double a = u(rng);
      const double phase = std::acos(-1.0) * u(rng);
      for (int ix = 0; ix < grid.nx(); ++ix)
        for (int iz = 0; iz < grid.nz(); ++iz) {
          const double v = a * std::cos(k1 * ix * grid.hx() + k3 * iz * grid.hz() + phase);
          for (int j = 0; j < grid.ny(); ++j) r(ix, j, iz) += v;
        }
    }
  const double m = r.max_abs();
  for (double& v : r.data()) v = 1.0 + noise * (m > 0.0 ? v / m : 0.0);
  return r;
}

State density_preset(const RunConfig& config, const Grid& grid) {
  const auto& in = config.init;
  const double w2 = in.width * in.width;
  PhysField n;
  if (in.preset == "gaussian_bump") {
    n = sample(grid, [&](double x, double y, double z) {
      const double dx = x - in.center_x;
      const double dz = z - in.center_z;
      const double wall = (1.0 - y * y) * (1.0 - y * y);
      return std::exp(-(dx * dx + in.sy * y * y + dz * dz) / w2) * wall;
    });
  } else {
    n = sample(grid, [&](double, double y, double z) {
      const double dz = z - in.center_z;
      const double wall = (1.0 - y * y) * (1.0 - y * y);
      return std::exp(-(in.sy * y * y + dz * dz) / w2) * wall;
    });
  }
  if (in.noise > 0.0) {
    const PhysField f = noise_factor(grid, in.noise, config.seed);
    for (std::size_t i = 0; i < n.data().size(); ++i) n.data()[i] *= f.data()[i];
  }

  State s = State::zero(grid);
  s.n = transform_to_spectral(n, grid);
  zero_nyquist(s.n);
  const double m = diagnostics::mass(s.n, grid);
  if (!(m > 0.0)) throw std::invalid_argument("build_initial: preset has no mass on this grid");
  s.n *= Complex(in.mass / m);
  return s;
}

double finite_or_nan(double v) { return std::isfinite(v) ? v : kNaN; }

double fit_or_nan(const std::vector<double>& t, const std::vector<double>& v) {
  try {
    const auto [t0, t1] = diagnostics::default_decay_window(t, v);
    return diagnostics::fit_decay_rate(t, v, t0, t1);
  } catch (const std::invalid_argument&) {
    return kNaN;
  }
}

}  // namespace

void add_velocity_perturbation(State& state, const Grid& grid, double amp) {
  if (amp == 0.0) return;
  const auto y = grid.y();
  const ModeIndex modes[] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  for (const auto m : modes) {
    const int i1 = grid.i1_of(m.k1);
    const int i3 = grid.i3_of(m.k3);
    Profile u2(grid.ny());
    for (int j = 0; j < grid.ny(); ++j) {
      const double b = 1.0 - y[j] * y[j];
      u2[j] = 0.5 * amp * b * b;
      state.omega2(i1, i3, j) += 0.5 * amp * b;
    }
    const Profile d2 = d2y(u2, grid);
    for (int j = 0; j < grid.ny(); ++j) state.delta_u2(i1, i3, j) += d2[j] - m.eta2() * u2[j];
  }
}

double lift_product(const State& state, const Grid& grid, const Params& params) {
  const DerivedFields d = derive(state, grid, params);
  return params.A * (diagnostics::l2_norm(diagnostics::project_x_zero(d.u2), grid) +
                     diagnostics::l2_norm(diagnostics::project_x_zero(d.u3), grid));
}

State build_initial(const RunConfig& config, const Grid& grid) {
  const auto& in = config.init;
  if (in.preset == "restart") return load_checkpoint(in.restart_path, grid).state;
  if (in.preset != "gaussian_bump" && in.preset != "stripe")
    throw std::invalid_argument("build_initial: unknown preset '" + in.preset + "'");

  State s = density_preset(config, grid);
  double amp = in.u_amp;
  if (in.u_product > 0.0) {
    State probe = State::zero(grid);
    add_velocity_perturbation(probe, grid, 1.0);
    amp = in.u_product / lift_product(probe, grid, config.params);
  }
  add_velocity_perturbation(s, grid, amp);
  return s;
}

State random_state(const Grid& grid, std::uint64_t seed, int kmax) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  State s = State::zero(grid);
  const auto y = grid.y();
  const int ny = grid.ny();
  const double pi = std::acos(-1.0);
  kmax = std::min({kmax, grid.nx() / 2 - 1, grid.nz() / 2 - 1});

  // Each (k1, k3) is drawn once and mirrored onto (-k1, -k3).
  const auto fill = [&](SpecField& f, int k1, int k3, bool walls, double scale) {
    const Complex a(normal(rng), normal(rng));
    const Complex b(normal(rng), normal(rng));
    const int i1 = grid.i1_of(k1), i3 = grid.i3_of(k3);
    const int c1 = grid.i1_of(-k1), c3 = grid.i3_of(-k3);
    for (int j = 0; j < ny; ++j) {
      Complex v = scale * (a * std::sin(pi * (y[j] + 1.0) / 2.0) + 0.5 * b * std::sin(pi * (y[j] + 1.0)));
      if (!walls) v += scale * 0.3 * b * y[j];
      f(i1, i3, j) = v;
      f(c1, c3, j) = std::conj(v);
    }
  };
  for (int k1 = 0; k1 <= kmax; ++k1)
    for (int k3 = -kmax; k3 <= kmax; ++k3) {
      if (k1 == 0 && k3 <= 0) continue;
      const double scale = 1.0 / (1.0 + k1 * k1 + k3 * k3);
      fill(s.n, k1, k3, true, 0.2 * scale);
      fill(s.omega2, k1, k3, true, scale);
      fill(s.delta_u2, k1, k3, false, scale);
    }
  const double a = normal(rng), b = normal(rng);
  for (int j = 0; j < ny; ++j) {
    const double w = 1.0 - y[j] * y[j];
    s.n(0, 0, j) = 2.0 * w;
    s.mean_u1[j] = 0.3 * a * w;
    s.mean_u3[j] = 0.1 * b * w * w;
  }
  // sin(pi (y+1)) is not exactly zero at y = 1 in floating point
  for (SpecField* f : {&s.n, &s.omega2})
    for (int i1 = 0; i1 < grid.nx(); ++i1)
      for (int i3 = 0; i3 < grid.nz(); ++i3) {
        (*f)(i1, i3, 0) = Complex{};
        (*f)(i1, i3, ny - 1) = Complex{};
      }
  return s;
}

double resolve_dt(const RunConfig& config, const State& initial, const Grid& grid) {
  if (config.params.dt > 0.0) return config.params.dt;
  const DerivedFields d = derive(initial, grid, config.params);
  double umax = 0.0;
  for (const SpecField* f : {&d.u1, &d.u2, &d.u3})
    umax = std::max(umax, transform_to_physical(*f, grid).max_abs());
  return default_dt(grid, config.params, umax);
}

// ---------------------------------------------------------------------------

void write_timeseries(std::ostream& out, const diagnostics::NormLedger& L) {
  out << "t,mass,linf_n,E,ya_n,ya_dxomega2,xa_u2,wall_flux,n_neq_l2,u1_0_l2,u2_0_l2,u3_0_l2";
  for (const auto& m : L.tracked_modes()) out << ",n_mode_" << m.k1 << "_" << m.k3;
  out << "\n";
  for (std::size_t s = 0; s < L.size(); ++s) {
    const double row[] = {L.t_samples[s],         L.mass_series[s],      L.linf_n_series[s],
                          L.e_series[s],          L.ya_n[s],             L.ya_dxomega2[s],
                          L.xa_u2[s],             L.wallflux_series[s],  L.n_neq_l2_series[s],
                          L.u1_zero_l2_series[s], L.u2_zero_l2_series[s], L.u3_zero_l2_series[s]};
    bool first = true;
    for (double v : row) {
      out << (first ? "" : ",") << fmt17(v);
      first = false;
    }
    for (const auto& series : L.mode_energy_series) out << "," << fmt17(series[s]);
    out << "\n";
  }
}

void write_summary_json(std::ostream& out, const ExperimentSummary& s, const RunConfig& config) {
  nlohmann::json j;
  j["status"] = to_string(s.status);
  if (s.failure) {
    j["failure"] = {{"t", s.failure->t},
                    {"reason", s.failure->reason},
                    {"value", finite_or_nan(s.failure->value)},
                    {"suggested_dt", s.failure->suggested_dt}};
  } else {
    j["failure"] = nullptr;
  }
  j["t_final"] = s.t_final;
  j["steps"] = s.steps;
  j["dt"] = s.dt;
  j["clip_events"] = s.clip_events;
  j["mass_initial"] = s.initial_mass;
  j["mass_final"] = finite_or_nan(s.final_mass);
  j["linf_initial"] = s.initial_linf;
  j["linf_sup"] = finite_or_nan(s.sup_linf);
  j["E_final"] = finite_or_nan(s.e_final);
  j["E_sup"] = finite_or_nan(s.e_sup);
  j["lift_product"] = s.lift_product;
  j["decay_rate_n_neq"] = finite_or_nan(s.lambda_n);
  j["decay_rate_u1_zero"] = finite_or_nan(s.lambda_u1);
  j["grid"] = {config.nx, config.ny, config.nz};
  j["A"] = config.params.A;
  j["seed"] = config.seed;
  out << j.dump(2) << "\n";
}

ExperimentResult run_experiment(const RunConfig& config, const ExperimentHooks& hooks) {
  config.validate();
  const Grid grid = config.grid();
  const State initial = hooks.initial ? *hooks.initial : build_initial(config, grid);
  Params params = config.params;
  params.dt = resolve_dt(config, initial, grid);

  const bool files = !config.output.dir.empty();
  const fs::path dir = config.output.dir;
  if (files) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
  }

  ExperimentResult result;
  result.ledger = diagnostics::NormLedger(grid, params);
  auto thresholds = config.blowup;
  thresholds.initial_linf = diagnostics::linf(initial.n, grid);
  thresholds.dealias_on = params.dealias_on;

  int sample_count = 0;
  RunHooks rh;
  rh.cadence = config.output.cadence;
  rh.on_sample = [&](const State& s, const DerivedFields& d) {
    result.ledger.update(s, d);
    ++sample_count;
    if (files && config.output.checkpoint_every > 0 && sample_count % config.output.checkpoint_every == 0)
      save_checkpoint(s, grid, params, dir / ("checkpoint_" + std::to_string(sample_count) + ".cpks"));
  };
  rh.health = [&](const State& s, const DerivedFields& d) -> std::optional<StepFailure> {
    const auto b = diagnostics::detect_blowup(s, d, grid, thresholds);
    if (!b.blowup) return std::nullopt;
    StepFailure f;
    f.status = RunStatus::BlowupDetected;
    f.t = s.t;
    f.reason = b.reason;
    f.value = b.value;
    return f;
  };
  if (hooks.on_step) rh.on_step = hooks.on_step;

  RunResult rr = run(initial, grid, params, rh);

  auto& S = result.summary;
  const auto& L = result.ledger;
  S.status = rr.status;
  S.failure = rr.failure;
  S.t_final = rr.final_state.t;
  S.steps = rr.steps;
  S.dt = rr.dt;
  S.clip_events = rr.clip_events;
  S.initial_mass = diagnostics::mass(initial.n, grid);
  S.final_mass = L.mass_series.empty() ? kNaN : L.mass_series.back();
  S.initial_linf = thresholds.initial_linf;
  S.sup_linf = L.linf_n_series.empty() ? kNaN
                                       : *std::max_element(L.linf_n_series.begin(), L.linf_n_series.end());
  S.e_final = L.e_series.empty() ? kNaN : L.e_series.back();
  S.e_sup = L.e_series.empty() ? kNaN : *std::max_element(L.e_series.begin(), L.e_series.end());
  S.lift_product = lift_product(initial, grid, params);
  S.lambda_n = fit_or_nan(L.t_samples, L.n_neq_l2_series);
  S.lambda_u1 = fit_or_nan(L.t_samples, L.u1_zero_l2_series);
  result.final_state = std::move(rr.final_state);

  if (files) {
    const auto open = [](const fs::path& p) {
      std::ofstream o(p);
      if (!o) throw std::runtime_error("cannot open " + p.string() + " for writing");
      return o;
    };
    {
      auto o = open(dir / "timeseries.csv");
      write_timeseries(o, L);
    }
    {
      auto o = open(dir / "summary.json");
      write_summary_json(o, S, config);
    }
    save_checkpoint(result.final_state, grid, params, dir / "final.cpks");
  }
  return result;
}

// ---------------------------------------------------------------------------

void parse_axis(const std::string& text, SweepAxis& axis) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw std::invalid_argument("axis '" + text + "': expected NAME=v1,v2,...");
  const std::string name = text.substr(0, eq);
  std::vector<double>* target = nullptr;
  if (name == "A") target = &axis.A;
  else if (name == "M") target = &axis.M;
  else throw std::invalid_argument("axis '" + text + "': name must be A or M");

  std::stringstream ss(text.substr(eq + 1));
  std::string item;
  std::vector<double> values;
  while (std::getline(ss, item, ',')) {
    double v = 0.0;
    const auto r = std::from_chars(item.data(), item.data() + item.size(), v);
    if (r.ec != std::errc() || r.ptr != item.data() + item.size() || !(v > 0.0))
      throw std::invalid_argument("axis '" + text + "': bad value '" + item + "'");
    values.push_back(v);
  }
  if (values.empty()) throw std::invalid_argument("axis '" + text + "': no values");
  *target = std::move(values);
}

namespace {

std::string shortest(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, r.ptr};
}

}  // namespace

std::vector<SweepRow> sweep(const RunConfig& base, const SweepAxis& axis, int workers) {
  const std::vector<double> As = axis.A.empty() ? std::vector<double>{base.params.A} : axis.A;
  const std::vector<double> Ms = axis.M.empty() ? std::vector<double>{base.init.mass} : axis.M;
  if (axis.A.empty() && axis.M.empty()) throw std::invalid_argument("sweep: both axes are empty");

  std::vector<SweepRow> rows;
  for (double A : As)
    for (double M : Ms) {
      SweepRow r;
      r.A = A;
      r.M = M;
      rows.push_back(r);
    }

  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i = next++; i < rows.size(); i = next++) {
      SweepRow& row = rows[i];
      try {
        RunConfig c = base;
        c.params.A = row.A;
        c.init.mass = row.M;
        if (!base.output.dir.empty())
          c.output.dir = (fs::path(base.output.dir) / ("A" + shortest(row.A) + "_M" + shortest(row.M))).string();
        row.summary = run_experiment(c).summary;
      } catch (const std::exception& e) {
        row.failed = true;
        row.error = e.what();
      }
    }
  };
  const int n = std::max(1, std::min<int>(workers, static_cast<int>(rows.size())));
  {
    std::vector<std::jthread> pool;
    for (int w = 1; w < n; ++w) pool.emplace_back(work);
    work();
  }

  if (!base.output.dir.empty()) {
    fs::create_directories(base.output.dir);
    const fs::path p = fs::path(base.output.dir) / "sweep.csv";
    std::ofstream o(p);
    if (!o) throw std::runtime_error("cannot open " + p.string() + " for writing");
    write_sweep_csv(o, rows);
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "A,M,status,t_final,linf_sup_over_initial,decay_rate_n_neq,E_sup,lift_product,error\n";
  for (const auto& r : rows) {
    const auto& s = r.summary;
    out << fmt17(r.A) << ',' << fmt17(r.M) << ',';
    if (r.failed) {
      std::string e = r.error;
      std::replace(e.begin(), e.end(), ',', ';');
      std::replace(e.begin(), e.end(), '\n', ' ');
      out << "failed,,,,,," << e << "\n";
      continue;
    }
    out << to_string(s.status) << ',' << fmt17(s.t_final) << ','
        << fmt17(s.sup_linf / s.initial_linf) << ',' << fmt17(s.lambda_n) << ',' << fmt17(s.e_sup)
        << ',' << fmt17(s.lift_product) << ",\n";
  }
}

}  // namespace cpks
