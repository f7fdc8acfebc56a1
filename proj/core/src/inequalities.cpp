#include "cpks/inequalities.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <deque>
#include <map>
#include <mutex>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>
#include <utility>

#include "cpks/finite_difference.hpp"
#include "cpks/parallel.hpp"
#include "cpks/transforms.hpp"

namespace cpks::inequalities {

namespace {

using std::numbers::pi;

struct RowPlans {
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
};

// Batched real transforms along z, one per y row.
RowPlans row_plans(int ny, int nz) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, RowPlans> cache;
  std::lock_guard lock(mutex);
  const auto key = std::make_pair(ny, nz);
  if (auto it = cache.find(key); it != cache.end()) return it->second;

  const int nc = nz / 2 + 1;
  auto* r = fftw_alloc_real(static_cast<std::size_t>(ny) * nz);
  auto* c = fftw_alloc_complex(static_cast<std::size_t>(ny) * nc);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  RowPlans p;
  p.r2c = fftw_plan_many_dft_r2c(1, &nz, ny, r, nullptr, 1, nz, c, nullptr, 1, nc, flags);
  p.c2r = fftw_plan_many_dft_c2r(1, &nz, ny, c, nullptr, 1, nc, r, nullptr, 1, nz, flags);
  fftw_free(r);
  fftw_free(c);
  if (!p.r2c || !p.c2r) throw std::runtime_error("FFTW planning failed");
  cache.emplace(key, p);
  return p;
}

// Spectral z derivative of `order` applied row by row.
std::vector<double> dz_rows(std::span<const double> v, int ny, int nz, int order) {
  const auto plans = row_plans(ny, nz);
  const int nc = nz / 2 + 1;
  std::vector<double> in(v.begin(), v.end());
  std::vector<std::complex<double>> spec(static_cast<std::size_t>(ny) * nc);
  auto* cs = reinterpret_cast<fftw_complex*>(spec.data());
  fftw_execute_dft_r2c(plans.r2c, in.data(), cs);
  for (int j = 0; j < ny; ++j)
    for (int k = 0; k < nc; ++k) {
      auto& s = spec[static_cast<std::size_t>(j) * nc + k];
      if (k == nz / 2) {
        s = 0.0;
        continue;
      }
      std::complex<double> factor = 1.0 / nz;
      for (int o = 0; o < order; ++o) factor *= std::complex<double>(0.0, k);
      s *= factor;
    }
  std::vector<double> out(v.size());
  fftw_execute_dft_c2r(plans.c2r, cs, out.data());
  return out;
}

std::vector<double> dy_columns(std::span<const double> v, int ny, int nz, double h) {
  std::vector<double> col(ny), d(ny), out(v.size());
  for (int iz = 0; iz < nz; ++iz) {
    for (int j = 0; j < ny; ++j) col[j] = v[static_cast<std::size_t>(j) * nz + iz];
    ddy_into<double>(col, h, d);
    for (int j = 0; j < ny; ++j) out[static_cast<std::size_t>(j) * nz + iz] = d[j];
  }
  return out;
}

double weighted_sum(const PlaneGrid& g, std::span<const double> v, double p) {
  double s = 0.0;
  for (int j = 0; j < g.ny(); ++j) {
    double row = 0.0;
    for (int iz = 0; iz < g.nz(); ++iz)
      row += std::pow(std::abs(v[static_cast<std::size_t>(j) * g.nz() + iz]), p);
    s += g.weight(j) * row;
  }
  return s;
}

void require_nonzero(const TestFunction2D& f, const char* what) {
  if (f.values().empty() || linf_norm(f) == 0.0)
    throw std::invalid_argument(std::string(what) + ": zero function");
}

void require_constraints(const TestFunction2D& f, bool dirichlet, bool zero_mean,
                         const char* what) {
  if (dirichlet && !f.dirichlet_y())
    throw std::invalid_argument(std::string(what) + ": requires dirichlet_y");
  if (zero_mean && !f.zero_z_mean())
    throw std::invalid_argument(std::string(what) + ": requires zero_z_mean");
}

double sine_mode(int m, double y) { return std::sin(m * pi * (y + 1.0) / 2.0); }

}  // namespace

PlaneGrid::PlaneGrid(int ny, int nz) : ny_(ny), nz_(nz) {
  if (ny < 5 || ny % 2 == 0) throw std::invalid_argument("PlaneGrid: ny must be odd and >= 5");
  if (nz < 4 || nz % 2 != 0) throw std::invalid_argument("PlaneGrid: nz must be even and >= 4");
  h_ = 2.0 / (ny - 1);
  y_.resize(ny);
  wy_.assign(ny, h_);
  for (int j = 0; j < ny; ++j) y_[j] = -1.0 + j * h_;
  y_.back() = 1.0;
  wy_.front() = wy_.back() = 0.5 * h_;
}

TestFunction2D::TestFunction2D(PlaneGrid grid, std::vector<double> values, bool dirichlet_y,
                               bool zero_z_mean)
    : grid_(std::move(grid)), values_(std::move(values)), dirichlet_(dirichlet_y),
      zero_mean_(zero_z_mean) {
  const int ny = grid_.ny();
  const int nz = grid_.nz();
  if (values_.size() != grid_.size())
    throw std::invalid_argument("TestFunction2D: value count does not match grid");
  if (zero_mean_)
    for (int j = 0; j < ny; ++j) {
      auto row = std::span(values_).subspan(static_cast<std::size_t>(j) * nz, nz);
      double mean = 0.0;
      for (double v : row) mean += v;
      mean /= nz;
      for (double& v : row) v -= mean;
    }
  if (dirichlet_)
    for (int iz = 0; iz < nz; ++iz) {
      values_[iz] = 0.0;
      values_[static_cast<std::size_t>(ny - 1) * nz + iz] = 0.0;
    }
}

TestFunction2D TestFunction2D::scaled(double alpha) const {
  TestFunction2D out = *this;
  for (double& v : out.values_) v *= alpha;
  return out;
}

double lp_norm(const TestFunction2D& f, double p) {
  return std::pow(weighted_sum(f.grid(), f.values(), p), 1.0 / p);
}

double linf_norm(const TestFunction2D& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

std::vector<double> dy(const TestFunction2D& f) {
  return dy_columns(f.values(), f.grid().ny(), f.grid().nz(), f.grid().h());
}

std::vector<double> dz(const TestFunction2D& f) {
  return dz_rows(f.values(), f.grid().ny(), f.grid().nz(), 1);
}

double grad_l2(const TestFunction2D& f) {
  return std::sqrt(weighted_sum(f.grid(), dy(f), 2.0) + weighted_sum(f.grid(), dz(f), 2.0));
}

double gn_l3_ratio(const TestFunction2D& f) {
  require_constraints(f, true, true, "gn_l3_ratio");
  require_nonzero(f, "gn_l3_ratio");
  return lp_norm(f, 3.0) / (std::cbrt(lp_norm(f, 1.0)) * std::pow(grad_l2(f), 2.0 / 3.0));
}

double lemma_a3_ratio(const TestFunction2D& f) {
  require_constraints(f, true, true, "lemma_a3_ratio");
  require_nonzero(f, "lemma_a3_ratio");
  const double g = grad_l2(f);
  return weighted_sum(f.grid(), f.values(), 3.0) / (lp_norm(f, 1.0) * g * g);
}

double lemma_a3_bound(const PlaneGrid& grid) { return 2.25 * (1.0 + 5.0 * grid.h()); }

double lemma_a1_ratio(const TestFunction2D& f1, const TestFunction2D& f2) {
  if (!(f1.grid() == f2.grid())) throw std::invalid_argument("lemma_a1_ratio: grid mismatch");
  require_nonzero(f1, "lemma_a1_ratio");
  require_nonzero(f2, "lemma_a1_ratio");
  const auto& g = f1.grid();
  const int nz = g.nz();

  // (f1 f2)_(0,0) is the z-average of the product; its L2 norm over I x T
  // carries the factor |T|.
  double lhs2 = 0.0;
  for (int j = 0; j < g.ny(); ++j) {
    double avg = 0.0;
    for (int iz = 0; iz < nz; ++iz) avg += f1(j, iz) * f2(j, iz);
    avg /= nz;
    lhs2 += g.weight(j) * nz * avg * avg;
  }
  const double n1 = lp_norm(f1, 2.0);
  const double n2 = lp_norm(f2, 2.0);
  const double d2 = std::sqrt(weighted_sum(g, dy(f2), 2.0));
  double rhs = n1 * std::sqrt(n2 * d2);
  if (!f2.dirichlet_y()) rhs += n1 * n2;
  return std::sqrt(lhs2) / rhs;
}

double lemma_a2_ratio(const TestFunction2D& f, double eps) {
  if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("lemma_a2_ratio: eps must lie in (0, 1]");
  require_constraints(f, false, true, "lemma_a2_ratio");
  require_nonzero(f, "lemma_a2_ratio");
  const auto& g = f.grid();
  const auto fy = dy(f);
  const auto fz = dz(f);
  const auto fzy = dz_rows(fy, g.ny(), g.nz(), 1);
  const auto fzz = dz_rows(f.values(), g.ny(), g.nz(), 2);
  const double grad = std::sqrt(weighted_sum(g, fy, 2.0) + weighted_sum(g, fz, 2.0));
  const double zgrad = std::sqrt(weighted_sum(g, fzy, 2.0) + weighted_sum(g, fzz, 2.0));
  return linf_norm(f) / (std::pow(grad, 1.0 - eps) * std::pow(zgrad, eps));
}

std::string to_string(NashVariant v) {
  switch (v) {
    case NashVariant::Interval1D: return "1D-interval";
    case NashVariant::Strip2D: return "2D-IxT";
    case NashVariant::Channel3D: return "3D-channel";
  }
  return "unknown";
}

double nash_theta(NashVariant v) {
  switch (v) {
    case NashVariant::Interval1D: return 2.0 / 3.0;
    case NashVariant::Strip2D: return 0.5;
    case NashVariant::Channel3D: return 0.4;
  }
  return 0.0;
}

namespace {

double nash_combine(double l2, double l1, double grad, NashVariant v) {
  const double theta = nash_theta(v);
  return l2 / (std::pow(l1, theta) * std::pow(grad, 1.0 - theta));
}

}  // namespace

double nash_ratio_1d(std::span<const double> f) {
  const int n = static_cast<int>(f.size());
  if (n < 5) throw std::invalid_argument("nash_ratio_1d: need at least 5 points");
  const double scale = *std::max_element(f.begin(), f.end(), [](double a, double b) {
    return std::abs(a) < std::abs(b);
  });
  if (scale == 0.0) throw std::invalid_argument("nash_ratio_1d: zero function");
  if (std::abs(f.front()) > 1e-12 * std::abs(scale) || std::abs(f.back()) > 1e-12 * std::abs(scale))
    throw std::invalid_argument("nash_ratio_1d: f must vanish at y = +-1");
  const double h = 2.0 / (n - 1);
  std::vector<double> d(n);
  ddy_into<double>(f, h, d);
  double l1 = 0.0, l2 = 0.0, g2 = 0.0;
  for (int j = 0; j < n; ++j) {
    const double w = (j == 0 || j == n - 1) ? 0.5 * h : h;
    l1 += w * std::abs(f[j]);
    l2 += w * f[j] * f[j];
    g2 += w * d[j] * d[j];
  }
  return nash_combine(std::sqrt(l2), l1, std::sqrt(g2), NashVariant::Interval1D);
}

double nash_ratio_2d(const TestFunction2D& f) {
  require_constraints(f, true, false, "nash_ratio_2d");
  require_nonzero(f, "nash_ratio_2d");
  return nash_combine(lp_norm(f, 2.0), lp_norm(f, 1.0), grad_l2(f), NashVariant::Strip2D);
}

double nash_ratio_3d(const PhysField& f, const Grid& grid) {
  const double scale = f.max_abs();
  if (scale == 0.0) throw std::invalid_argument("nash_ratio_3d: zero function");
  for (int ix = 0; ix < grid.nx(); ++ix)
    for (int iz = 0; iz < grid.nz(); ++iz)
      if (std::abs(f(ix, 0, iz)) > 1e-12 * scale || std::abs(f(ix, grid.ny() - 1, iz)) > 1e-12 * scale)
        throw std::invalid_argument("nash_ratio_3d: f must vanish on both walls");

  SpecField fs = transform_to_spectral(f, grid);
  zero_nyquist(fs);
  SpecField fx = fs, fz = fs;
  for (int i1 = 0; i1 < grid.nx(); ++i1)
    for (int i3 = 0; i3 < grid.nz(); ++i3) {
      const auto m = grid.mode(i1, i3);
      for (auto& v : fx.profile(i1, i3)) v *= Complex(0.0, m.k1);
      for (auto& v : fz.profile(i1, i3)) v *= Complex(0.0, m.k3);
    }
  const PhysField px = transform_to_physical(fx, grid);
  const PhysField pz = transform_to_physical(fz, grid);

  const auto w = grid.trapezoid_weights();
  const double cell = grid.hx() * grid.hz();
  std::vector<double> col(grid.ny()), d(grid.ny());
  double l1 = 0.0, l2 = 0.0, g2 = 0.0;
  for (int ix = 0; ix < grid.nx(); ++ix)
    for (int iz = 0; iz < grid.nz(); ++iz) {
      for (int j = 0; j < grid.ny(); ++j) col[j] = f(ix, j, iz);
      ddy_into<double>(col, grid.h(), d);
      for (int j = 0; j < grid.ny(); ++j) {
        const double wj = w[j] * cell;
        l1 += wj * std::abs(col[j]);
        l2 += wj * col[j] * col[j];
        g2 += wj * (d[j] * d[j] + px(ix, j, iz) * px(ix, j, iz) + pz(ix, j, iz) * pz(ix, j, iz));
      }
    }
  return nash_combine(std::sqrt(l2), l1, std::sqrt(g2), NashVariant::Channel3D);
}

// ---------------------------------------------------------------------------

TestFunction2D random_test_function(const PlaneGrid& grid, std::uint64_t seed,
                                    const RandomSpec& spec) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<double> v(grid.size(), 0.0);
  const auto y = grid.y();
  for (int m = 1; m <= spec.modes_y; ++m)
    for (int k = 1; k <= spec.modes_z; ++k) {
      const double amp = std::pow(m * m + k * k, -0.5 * spec.decay);
      const double a = amp * normal(rng);
      const double b = amp * normal(rng);
      for (int j = 0; j < grid.ny(); ++j) {
        const double s = sine_mode(m, y[j]);
        for (int iz = 0; iz < grid.nz(); ++iz) {
          const double z = iz * grid.hz();
          v[static_cast<std::size_t>(j) * grid.nz() + iz] +=
              s * (a * std::cos(k * z) + b * std::sin(k * z));
        }
      }
    }
  return TestFunction2D(grid, std::move(v), true, true);
}

std::vector<double> random_profile(int ny, std::uint64_t seed, const RandomSpec& spec) {
  if (ny < 5) throw std::invalid_argument("random_profile: ny must be >= 5");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const double h = 2.0 / (ny - 1);
  std::vector<double> v(ny, 0.0);
  for (int m = 1; m <= spec.modes_y; ++m) {
    const double a = std::pow(m * m, -0.5 * spec.decay) * normal(rng);
    for (int j = 1; j + 1 < ny; ++j) v[j] += a * sine_mode(m, -1.0 + j * h);
  }
  return v;
}

PhysField random_channel_function(const Grid& grid, std::uint64_t seed, const RandomSpec& spec) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  PhysField out(grid);
  const auto y = grid.y();
  const int kmax = std::min(spec.modes_z, std::min(grid.nx(), grid.nz()) / 3);
  for (int m = 1; m <= spec.modes_y; ++m)
    for (int k1 = 0; k1 <= kmax; ++k1)
      for (int k3 = 0; k3 <= kmax; ++k3) {
        const double amp = std::pow(m * m + k1 * k1 + k3 * k3, -0.5 * spec.decay);
        const double a = amp * normal(rng);
        const double phase = 2.0 * pi * std::uniform_real_distribution<double>()(rng);
        for (int ix = 0; ix < grid.nx(); ++ix)
          for (int iz = 0; iz < grid.nz(); ++iz) {
            const double t = a * std::cos(k1 * ix * grid.hx() + k3 * iz * grid.hz() + phase);
            for (int j = 1; j + 1 < grid.ny(); ++j) out(ix, j, iz) += t * sine_mode(m, y[j]);
          }
      }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

// f = sum c[(m, k, s)] sin(m pi (y+1)/2) trig_s(k z), s = 0 cos, 1 sin.
class CoefficientSpace {
 public:
  CoefficientSpace(const PlaneGrid& grid, int my, int kz) : grid_(grid), my_(my), kz_(kz) {
    sy_.resize(static_cast<std::size_t>(my) * grid.ny());
    for (int m = 1; m <= my; ++m)
      for (int j = 0; j < grid.ny(); ++j) sy_[idx_y(m, j)] = j == 0 || j == grid.ny() - 1 ? 0.0 : sine_mode(m, grid.y()[j]);
    tz_.resize(static_cast<std::size_t>(2 * kz) * grid.nz());
    for (int k = 1; k <= kz; ++k)
      for (int iz = 0; iz < grid.nz(); ++iz) {
        const double z = iz * grid.hz();
        tz_[idx_z(k, 0, iz)] = std::cos(k * z);
        tz_[idx_z(k, 1, iz)] = std::sin(k * z);
      }
  }

  std::size_t size() const { return static_cast<std::size_t>(my_) * kz_ * 2; }
  std::size_t coef(int m, int k, int s) const {
    return (static_cast<std::size_t>(m - 1) * kz_ + (k - 1)) * 2 + s;
  }

  std::vector<double> synthesize(std::span<const double> c) const {
    const int ny = grid_.ny(), nz = grid_.nz();
    std::vector<double> f(grid_.size(), 0.0);
    std::vector<double> row(2 * kz_);
    for (int j = 0; j < ny; ++j) {
      std::fill(row.begin(), row.end(), 0.0);
      for (int m = 1; m <= my_; ++m) {
        const double s = sy_[idx_y(m, j)];
        if (s == 0.0) continue;
        for (int k = 1; k <= kz_; ++k)
          for (int t = 0; t < 2; ++t) row[2 * (k - 1) + t] += c[coef(m, k, t)] * s;
      }
      for (int k = 1; k <= kz_; ++k)
        for (int t = 0; t < 2; ++t) {
          const double r = row[2 * (k - 1) + t];
          if (r == 0.0) continue;
          for (int iz = 0; iz < nz; ++iz) f[static_cast<std::size_t>(j) * nz + iz] += r * tz_[idx_z(k, t, iz)];
        }
    }
    return f;
  }

  // Transpose of synthesize.
  std::vector<double> analyze(std::span<const double> g) const {
    const int ny = grid_.ny(), nz = grid_.nz();
    std::vector<double> c(size(), 0.0);
    std::vector<double> row(2 * kz_);
    for (int j = 0; j < ny; ++j) {
      for (int k = 1; k <= kz_; ++k)
        for (int t = 0; t < 2; ++t) {
          double acc = 0.0;
          for (int iz = 0; iz < nz; ++iz) acc += g[static_cast<std::size_t>(j) * nz + iz] * tz_[idx_z(k, t, iz)];
          row[2 * (k - 1) + t] = acc;
        }
      for (int m = 1; m <= my_; ++m) {
        const double s = sy_[idx_y(m, j)];
        for (int k = 1; k <= kz_; ++k)
          for (int t = 0; t < 2; ++t) c[coef(m, k, t)] += s * row[2 * (k - 1) + t];
      }
    }
    return c;
  }

 private:
  std::size_t idx_y(int m, int j) const { return static_cast<std::size_t>(m - 1) * grid_.ny() + j; }
  std::size_t idx_z(int k, int t, int iz) const {
    return (static_cast<std::size_t>(k - 1) * 2 + t) * grid_.nz() + iz;
  }

  PlaneGrid grid_;
  int my_, kz_;
  std::vector<double> sy_, tz_;
};

// log of the GN ratio and its gradient with respect to the grid values.
double log_ratio_and_gradient(const PlaneGrid& g, std::span<const double> f, std::vector<double>* grad) {
  const int ny = g.ny(), nz = g.nz();
  const auto fy = dy_columns(f, ny, nz, g.h());
  const auto fz = dz_rows(f, ny, nz, 1);
  double n3 = 0.0, n1 = 0.0, gg = 0.0;
  for (int j = 0; j < ny; ++j)
    for (int iz = 0; iz < nz; ++iz) {
      const std::size_t i = static_cast<std::size_t>(j) * nz + iz;
      const double w = g.weight(j);
      const double a = std::abs(f[i]);
      n3 += w * a * a * a;
      n1 += w * a;
      gg += w * (fy[i] * fy[i] + fz[i] * fz[i]);
    }
  const double value = (std::log(n3) - std::log(n1) - std::log(gg)) / 3.0;
  if (!grad) return value;

  // d(gg)/df = 2 Dy^T (W fy) + 2 Dz^T (W fz); Dz is antisymmetric and W is
  // constant along z.
  std::vector<double> wfy(f.size()), wfz(f.size());
  for (int j = 0; j < ny; ++j)
    for (int iz = 0; iz < nz; ++iz) {
      const std::size_t i = static_cast<std::size_t>(j) * nz + iz;
      wfy[i] = g.weight(j) * fy[i];
      wfz[i] = g.weight(j) * fz[i];
    }
  std::vector<double> dgy(f.size());
  std::vector<double> col(ny), tcol(ny);
  for (int iz = 0; iz < nz; ++iz) {
    for (int j = 0; j < ny; ++j) col[j] = wfy[static_cast<std::size_t>(j) * nz + iz];
    ddy_transpose_into<double>(col, g.h(), tcol);
    for (int j = 0; j < ny; ++j) dgy[static_cast<std::size_t>(j) * nz + iz] = tcol[j];
  }
  const auto dgz = dz_rows(wfz, ny, nz, 1);

  grad->assign(f.size(), 0.0);
  for (int j = 0; j < ny; ++j)
    for (int iz = 0; iz < nz; ++iz) {
      const std::size_t i = static_cast<std::size_t>(j) * nz + iz;
      const double w = g.weight(j);
      const double sgn = f[i] > 0.0 ? 1.0 : (f[i] < 0.0 ? -1.0 : 0.0);
      const double d3 = 3.0 * w * std::abs(f[i]) * f[i];
      const double d1 = w * sgn;
      const double dg = 2.0 * (dgy[i] - dgz[i]);
      (*grad)[i] = (d3 / n3 - d1 / n1 - dg / gg) / 3.0;
    }
  return value;
}

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

CStarResult estimate_cstar(const CStarOptions& opt) {
  if (opt.resolution < 5 || opt.resolution % 2 == 0)
    throw std::invalid_argument("estimate_cstar: resolution must be odd and >= 5");
  if (opt.iterations < 0) throw std::invalid_argument("estimate_cstar: iterations must be >= 0");
  const PlaneGrid grid(opt.resolution, opt.resolution - 1);
  const int kz = std::min(opt.modes_z, grid.nz() / 2 - 1);
  const CoefficientSpace space(grid, opt.modes_y, kz);

  std::vector<double> c(space.size(), 0.0);
  if (opt.seed_with_profile) {
    // (1 - y^2) sin z projected onto the sine basis in y.
    const auto y = grid.y();
    for (int m = 1; m <= opt.modes_y; ++m) {
      double acc = 0.0;
      for (int j = 0; j < grid.ny(); ++j)
        acc += grid.weight(j) / grid.hz() * (1.0 - y[j] * y[j]) * sine_mode(m, y[j]);
      c[space.coef(m, 1, 1)] = acc;
    }
  } else {
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> normal;
    for (int m = 1; m <= opt.modes_y; ++m)
      for (int k = 1; k <= kz; ++k)
        for (int s = 0; s < 2; ++s) c[space.coef(m, k, s)] = normal(rng) / (m * m + k * k);
  }
  auto normalize = [](std::vector<double>& v) {
    const double n = norm2(v);
    for (double& x : v) x /= n;
  };
  normalize(c);

  std::vector<double> grad_f;
  double value = log_ratio_and_gradient(grid, space.synthesize(c), &grad_f);
  CStarResult result;
  result.initial = std::exp(value);
  result.history.push_back(result.initial);

  // L-BFGS on the coefficients. The log ratio is 0-homogeneous, so its
  // gradient is orthogonal to c and renormalizing an accepted step changes nothing.
  auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
  };
  constexpr std::size_t memory = 10;
  std::deque<std::pair<std::vector<double>, std::vector<double>>> pairs;  // (s, y) for -log ratio
  auto gc = space.analyze(grad_f);
  for (int it = 0; it < opt.iterations; ++it) {
    if (norm2(gc) < 1e-14) break;
    // two-loop recursion on the descent problem for -value
    std::vector<double> d(gc.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = gc[i];
    std::vector<double> alpha(pairs.size());
    for (std::size_t k = pairs.size(); k-- > 0;) {
      const auto& [sk, yk] = pairs[k];
      alpha[k] = dot(sk, d) / dot(yk, sk);
      for (std::size_t i = 0; i < d.size(); ++i) d[i] -= alpha[k] * yk[i];
    }
    if (!pairs.empty()) {
      const auto& [sk, yk] = pairs.back();
      const double gamma = dot(sk, yk) / dot(yk, yk);
      for (double& x : d) x *= gamma;
    } else {
      const double n = norm2(d);
      for (double& x : d) x *= 0.1 / n;
    }
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const auto& [sk, yk] = pairs[k];
      const double beta = dot(yk, d) / dot(yk, sk);
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += (alpha[k] - beta) * sk[i];
    }
    double slope = dot(d, gc);
    if (!(slope > 0.0)) {
      pairs.clear();
      const double n = norm2(gc);
      for (std::size_t i = 0; i < d.size(); ++i) d[i] = 0.1 * gc[i] / n;
      slope = dot(d, gc);
    }

    bool accepted = false;
    double t = 1.0;
    for (int tries = 0; tries < 40 && !accepted; ++tries, t *= 0.5) {
      std::vector<double> trial(c.size());
      for (std::size_t i = 0; i < c.size(); ++i) trial[i] = c[i] + t * d[i];
      const double scale = norm2(trial);
      for (double& x : trial) x /= scale;
      std::vector<double> trial_grad;
      const double v = log_ratio_and_gradient(grid, space.synthesize(trial), &trial_grad);
      if (std::isfinite(v) && v >= value + 1e-4 * t * slope / (scale * scale)) {
        auto g_new = space.analyze(trial_grad);
        std::vector<double> sk(c.size()), yk(c.size());
        for (std::size_t i = 0; i < c.size(); ++i) {
          sk[i] = trial[i] - c[i];
          yk[i] = gc[i] - g_new[i];
        }
        if (dot(sk, yk) > 1e-12 * norm2(sk) * norm2(yk)) {
          pairs.emplace_back(std::move(sk), std::move(yk));
          if (pairs.size() > memory) pairs.pop_front();
        }
        c = std::move(trial);
        gc = std::move(g_new);
        value = v;
        accepted = true;
      }
    }
    if (!accepted) break;
    result.history.push_back(std::exp(value));
  }
  result.best = std::exp(value);
  return result;
}

// ---------------------------------------------------------------------------

std::vector<std::string> suite_names() { return {"a3", "gn", "a1", "a2", "nash", "cstar", "all"}; }

std::vector<TrialRow> run_suite(const std::string& suite, int trials, std::uint64_t seed, int ny,
                                int nz) {
  const auto names = suite_names();
  if (std::find(names.begin(), names.end(), suite) == names.end())
    throw std::invalid_argument("unknown inequality suite '" + suite + "'");
  if (trials < 1) throw std::invalid_argument("run_suite: trials must be >= 1");
  const PlaneGrid grid(ny, nz);
  const bool all = suite == "all";

  using Rows = std::vector<TrialRow>;
  std::vector<Rows> per_trial(trials);
  const Grid channel = make_grid(16, 33, 16);

  parallel_for(
      trials,
      [&](int t) {
        const std::uint64_t s = seed + static_cast<std::uint64_t>(t);
        Rows& rows = per_trial[t];
        const auto f = random_test_function(grid, s);
        if (all || suite == "a3") rows.push_back({"lemma_a3", s, ny, lemma_a3_ratio(f)});
        if (all || suite == "gn") rows.push_back({"gn_l3", s, ny, gn_l3_ratio(f)});
        if (all || suite == "a1") {
          const auto f2 = random_test_function(grid, s + 1000003);
          const TestFunction2D f2_free(grid, {f2.values().begin(), f2.values().end()}, false, false);
          rows.push_back({"lemma_a1_form1", s, ny, lemma_a1_ratio(f, f2_free)});
          rows.push_back({"lemma_a1_form2", s, ny, lemma_a1_ratio(f, f2)});
        }
        if (all || suite == "a2")
          for (double eps : {0.25, 0.5, 1.0})
            rows.push_back({"lemma_a2_eps" + std::to_string(eps).substr(0, 4), s, ny, lemma_a2_ratio(f, eps)});
        if (all || suite == "nash") {
          rows.push_back({"nash_1D-interval", s, ny, nash_ratio_1d(random_profile(ny, s))});
          rows.push_back({"nash_2D-IxT", s, ny, nash_ratio_2d(f)});
          rows.push_back({"nash_3D-channel", s, channel.ny(),
                          nash_ratio_3d(random_channel_function(channel, s, {4, 3, 2.0}), channel)});
        }
        if ((all && t < 5) || suite == "cstar") {
          CStarOptions o;
          o.resolution = ny % 2 == 1 ? std::min(ny, 65) : 65;
          o.iterations = 1000;
          o.seed = s;
          rows.push_back({"cstar", s, o.resolution, estimate_cstar(o).best});
        }
      },
      1);

  Rows out;
  for (auto& r : per_trial) out.insert(out.end(), r.begin(), r.end());
  return out;
}

void write_csv(std::ostream& out, std::span<const TrialRow> rows) {
  out << "operation,seed,resolution,ratio\n";
  char buf[64];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g", r.ratio);
    out << r.operation << ',' << r.seed << ',' << r.resolution << ',' << buf << '\n';
  }
}

}  // namespace cpks::inequalities
