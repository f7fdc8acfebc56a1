#include "cpks/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cpks/finite_difference.hpp"
#include "cpks/transforms.hpp"

namespace cpks::diagnostics {

namespace {

constexpr double kTorusArea = kPeriod * kPeriod;

SpecField keep_modes(const SpecField& f, bool keep_k1_zero) {
  SpecField out(f.nx(), f.ny(), f.nz());
  for (int i3 = 0; i3 < f.nz(); ++i3)
    for (int i1 = 0; i1 < f.nx(); ++i1) {
      if ((i1 == 0) != keep_k1_zero) continue;
      auto src = f.profile(i1, i3);
      std::copy(src.begin(), src.end(), out.profile(i1, i3).begin());
    }
  return out;
}

void require_x_averaged(const SpecField& f0, const Grid& grid, const char* what) {
  double e = 0.0;
  for (int i1 = 1; i1 < f0.nx(); ++i1)
    for (int i3 = 0; i3 < f0.nz(); ++i3) e += l2_squared_y(f0.profile(i1, i3), grid);
  if (e > 1e-12)
    throw std::invalid_argument(std::string(what) + ": input carries k1 != 0 energy");
}

double weight2(double rate, double t) { return std::exp(2.0 * rate * t); }

}  // namespace

SpecField project_x_zero(const SpecField& f) { return keep_modes(f, true); }
SpecField project_x_nonzero(const SpecField& f) { return keep_modes(f, false); }

RealProfile project_00(const SpecField& f0, const Grid& grid) {
  require_x_averaged(f0, grid, "project_00");
  const auto p = f0.profile(0, 0);
  RealProfile out(p.size());
  for (std::size_t j = 0; j < p.size(); ++j) out[j] = p[j].real();
  return out;
}

SpecField project_0neq(const SpecField& f0, const Grid& grid) {
  require_x_averaged(f0, grid, "project_0neq");
  SpecField out = f0;
  auto p = out.profile(0, 0);
  std::fill(p.begin(), p.end(), Complex{});
  return out;
}

double l2_norm(const SpecField& f, const Grid& grid) {
  double s = 0.0;
  for (int i1 = 0; i1 < f.nx(); ++i1)
    for (int i3 = 0; i3 < f.nz(); ++i3) s += l2_squared_y(f.profile(i1, i3), grid);
  return std::sqrt(kTorusArea * s);
}

double mass(const SpecField& n, const Grid& grid) {
  const auto p = n.profile(0, 0);
  const auto w = grid.trapezoid_weights();
  double s = 0.0;
  for (int j = 0; j < grid.ny(); ++j) s += w[j] * p[j].real();
  return kTorusArea * s;
}

double wall_flux(const SpecField& n, const Grid& grid, double A) {
  const auto p = n.profile(0, 0);
  const Profile d = ddy(p, grid);
  return kTorusArea * (-d.back().real() + d.front().real()) / A;
}

double linf(const SpecField& f, const Grid& grid) {
  return transform_to_physical(f, grid).max_abs();
}

double spectral_tail_fraction(const SpecField& n, const Grid& grid, bool dealias_on) {
  const int k1c = dealias_on ? grid.nx() / 3 : grid.nx() / 2 - 1;
  const int k3c = dealias_on ? grid.nz() / 3 : grid.nz() / 2 - 1;
  double total = 0.0;
  double tail = 0.0;
  for (int i1 = 0; i1 < grid.nx(); ++i1)
    for (int i3 = 0; i3 < grid.nz(); ++i3) {
      const double e = l2_squared_y(n.profile(i1, i3), grid);
      total += e;
      const auto m = grid.mode(i1, i3);
      if (3 * std::abs(m.k1) > 2 * k1c || 3 * std::abs(m.k3) > 2 * k3c) tail += e;
    }
  return total > 0.0 ? tail / total : 0.0;
}

// ---------------------------------------------------------------------------

WeightedNorms::WeightedNorms(const Grid& grid, const Params& params)
    : grid_(grid), A_(params.A), rate_(params.a * std::cbrt(1.0 / params.A)) {
  for (int i1 = 0; i1 < grid.nx(); ++i1)
    for (int i3 = 0; i3 < grid.nz(); ++i3) {
      const auto m = grid.mode(i1, i3);
      if (m.k1 == 0 || grid.is_nyquist(i1, i3)) continue;
      ModeAcc acc;
      acc.i1 = i1;
      acc.i3 = i3;
      acc.y_coef = std::cbrt(m.k1 * m.k1 / params.A) + m.eta2() / params.A;
      modes_.push_back(acc);
    }
}

void WeightedNorms::push(Running& acc, double value, double dt, bool first) const {
  acc.sup = std::max(acc.sup, value);
  if (!first) acc.integral += 0.5 * dt * (acc.last + value);
  acc.last = value;
}

void WeightedNorms::update(double t, const SpecField& n, const SpecField& omega2,
                           const SpecField& u2, const SpecField& delta_u2) {
  const bool first = !started_;
  const double dt = first ? 0.0 : t - t_last_;
  if (dt < 0.0) throw std::invalid_argument("WeightedNorms::update: time must be monotone");
  const double W = weight2(rate_, t);
  Profile d(grid_.ny());
  for (auto& acc : modes_) {
    const auto m = grid_.mode(acc.i1, acc.i3);
    const double k1sq = static_cast<double>(m.k1) * m.k1;

    const auto np = n.profile(acc.i1, acc.i3);
    ddy_into<Complex>(np, grid_.h(), d);
    push(acc.n0, W * l2_squared_y(np, grid_), dt, first);
    push(acc.n1, W * l2_squared_y(d, grid_), dt, first);

    const auto wp = omega2.profile(acc.i1, acc.i3);
    ddy_into<Complex>(wp, grid_.h(), d);
    push(acc.w0, W * k1sq * l2_squared_y(wp, grid_), dt, first);
    push(acc.w1, W * k1sq * l2_squared_y(d, grid_), dt, first);

    const auto up = u2.profile(acc.i1, acc.i3);
    ddy_into<Complex>(up, grid_.h(), d);
    const double G = l2_squared_y(d, grid_) + m.eta2() * l2_squared_y(up, grid_);
    const auto qp = delta_u2.profile(acc.i1, acc.i3);
    ddy_into<Complex>(qp, grid_.h(), d);
    push(acc.g, W * G, dt, first);
    push(acc.p, W * l2_squared_y(qp, grid_), dt, first);
    push(acc.r, W * l2_squared_y(d, grid_), dt, first);
  }
  started_ = true;
  t_last_ = t;
}

double WeightedNorms::ya_n() const {
  double s = 0.0;
  for (const auto& a : modes_) s += a.n0.sup + a.n1.integral / A_ + a.y_coef * a.n0.integral;
  return std::sqrt(s);
}

double WeightedNorms::ya_dx_omega2() const {
  double s = 0.0;
  for (const auto& a : modes_) s += a.w0.sup + a.w1.integral / A_ + a.y_coef * a.w0.integral;
  return std::sqrt(s);
}

double WeightedNorms::xa_u2() const {
  double s = 0.0;
  for (const auto& a : modes_) {
    const auto m = grid_.mode(a.i1, a.i3);
    const double eta = m.eta();
    s += eta * std::abs(m.k1) * a.g.integral + m.eta2() / A_ * a.p.integral +
         std::pow(A_, -1.5) * a.r.integral + m.eta2() * a.g.sup + std::pow(A_, -0.5) * a.p.sup;
  }
  return std::sqrt(s);
}

double WeightedNorms::n_l2l2_squared() const {
  double s = 0.0;
  for (const auto& a : modes_) s += a.n0.integral;
  return s;
}

double energy_from_history(std::span<const State> history, const Grid& grid,
                           const Params& params) {
  if (history.empty()) return 0.0;
  const double rate = params.a * std::cbrt(1.0 / params.A);
  const double A = params.A;
  const std::size_t ns = history.size();

  std::vector<SpecField> u2s;
  u2s.reserve(ns);
  for (const auto& s : history) u2s.push_back(derive(s, grid, params).u2);

  const auto trap = [&](const std::vector<double>& v) {
    double s = 0.0;
    for (std::size_t i = 1; i < ns; ++i)
      s += 0.5 * (history[i].t - history[i - 1].t) * (v[i] + v[i - 1]);
    return s;
  };
  const auto sup = [](const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); };

  double yn = 0.0, yw = 0.0, xu = 0.0;
  std::vector<double> n0(ns), n1(ns), w0(ns), w1(ns), g(ns), p(ns), r(ns);
  for (int i1 = 0; i1 < grid.nx(); ++i1)
    for (int i3 = 0; i3 < grid.nz(); ++i3) {
      const auto m = grid.mode(i1, i3);
      if (m.k1 == 0 || grid.is_nyquist(i1, i3)) continue;
      const double k1sq = static_cast<double>(m.k1) * m.k1;
      for (std::size_t s = 0; s < ns; ++s) {
        const double W = std::exp(2.0 * rate * history[s].t);
        const auto np = history[s].n.profile(i1, i3);
        const auto wp = history[s].omega2.profile(i1, i3);
        const auto up = u2s[s].profile(i1, i3);
        const auto qp = history[s].delta_u2.profile(i1, i3);
        n0[s] = W * l2_squared_y(np, grid);
        n1[s] = W * l2_squared_y(ddy(np, grid), grid);
        w0[s] = W * k1sq * l2_squared_y(wp, grid);
        w1[s] = W * k1sq * l2_squared_y(ddy(wp, grid), grid);
        g[s] = W * (l2_squared_y(ddy(up, grid), grid) + m.eta2() * l2_squared_y(up, grid));
        p[s] = W * l2_squared_y(qp, grid);
        r[s] = W * l2_squared_y(ddy(qp, grid), grid);
      }
      const double yc = std::cbrt(k1sq / A) + m.eta2() / A;
      yn += sup(n0) + trap(n1) / A + yc * trap(n0);
      yw += sup(w0) + trap(w1) / A + yc * trap(w0);
      xu += m.eta() * std::abs(m.k1) * trap(g) + m.eta2() / A * trap(p) +
            std::pow(A, -1.5) * trap(r) + m.eta2() * sup(g) + std::pow(A, -0.5) * sup(p);
    }
  return std::sqrt(yw) + std::sqrt(yn) + std::sqrt(xu);
}

// ---------------------------------------------------------------------------

NormLedger::NormLedger(const Grid& grid, const Params& params, std::vector<ModeIndex> tracked_modes)
    : grid_(grid), params_(params), tracked_(std::move(tracked_modes)), norms_(grid, params) {
  if (tracked_.empty()) tracked_ = {{1, 0}, {0, 1}, {1, 1}};
  mode_energy_series.resize(tracked_.size());
}

void NormLedger::update(const State& state, const DerivedFields& derived) {
  if (!t_samples.empty() && state.t < t_samples.back())
    throw std::invalid_argument("NormLedger::update: time must be monotone");

  norms_.update(state.t, state.n, state.omega2, derived.u2, state.delta_u2);

  t_samples.push_back(state.t);
  mass_series.push_back(mass(state.n, grid_));
  linf_n_series.push_back(linf(state.n, grid_));
  ya_n.push_back(norms_.ya_n());
  ya_dxomega2.push_back(norms_.ya_dx_omega2());
  xa_u2.push_back(norms_.xa_u2());
  e_series.push_back(norms_.energy());
  wallflux_series.push_back(wall_flux(state.n, grid_, params_.A));
  n_neq_l2_series.push_back(l2_norm(project_x_nonzero(state.n), grid_));
  u1_zero_l2_series.push_back(l2_norm(project_x_zero(derived.u1), grid_));
  u2_zero_l2_series.push_back(l2_norm(project_x_zero(derived.u2), grid_));
  u3_zero_l2_series.push_back(l2_norm(project_x_zero(derived.u3), grid_));
  for (std::size_t i = 0; i < tracked_.size(); ++i)
    mode_energy_series[i].push_back(std::sqrt(l2_squared_y(state.n.profile(tracked_[i]), grid_)));
}

NormLedger update_ledger(NormLedger ledger, const State& state, const DerivedFields& derived) {
  ledger.update(state, derived);
  return ledger;
}

// ---------------------------------------------------------------------------

double fit_decay_rate(std::span<const double> t, std::span<const double> value, double t0,
                      double t1) {
  if (t.size() != value.size()) throw std::invalid_argument("fit_decay_rate: size mismatch");
  double st = 0.0, sl = 0.0, stt = 0.0, stl = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t0 || t[i] > t1) continue;
    if (!(value[i] > 0.0))
      throw std::invalid_argument("fit_decay_rate: nonpositive value in window");
    const double l = std::log(value[i]);
    st += t[i];
    sl += l;
    stt += t[i] * t[i];
    stl += t[i] * l;
    ++n;
  }
  if (n < 2) throw std::invalid_argument("fit_decay_rate: fewer than two samples in window");
  const double dn = static_cast<double>(n);
  const double denom = dn * stt - st * st;
  if (denom <= 0.0) throw std::invalid_argument("fit_decay_rate: degenerate time window");
  const double slope = (dn * stl - st * sl) / denom;
  return -slope;
}

std::pair<double, double> default_decay_window(std::span<const double> t,
                                               std::span<const double> value) {
  if (t.empty()) throw std::invalid_argument("default_decay_window: empty series");
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < t.size(); ++i) {
    peak = std::max(peak, value[i]);
    if (value[i] <= 0.9 * peak) return {t[i], t.back()};
  }
  return {t.front(), t.back()};
}

// ---------------------------------------------------------------------------

BlowupStatus detect_blowup(const State& state, const DerivedFields& derived, const Grid& grid,
                           const BlowupThresholds& th) {
  if (!state.n.all_finite() || !derived.c.all_finite() || !derived.u1.all_finite() ||
      !derived.u2.all_finite() || !derived.u3.all_finite())
    return {true, "non-finite values", std::numeric_limits<double>::quiet_NaN()};

  const double l = linf(state.n, grid);
  if (!std::isfinite(l)) return {true, "non-finite values", l};
  if (l > th.threshold_abs) return {true, "L-infinity above absolute threshold", l};
  if (th.initial_linf > 0.0 && l > th.growth_factor * th.initial_linf)
    return {true, "L-infinity growth factor exceeded", l / th.initial_linf};
  const double tail = spectral_tail_fraction(state.n, grid, th.dealias_on);
  if (tail > th.tail_frac) return {true, "spectral tail fraction exceeded", tail};
  return {};
}

}  // namespace cpks::diagnostics
