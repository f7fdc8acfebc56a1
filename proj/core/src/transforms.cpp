#include "cpks/transforms.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace cpks {

namespace {

// FFTW planning is not thread-safe; execution through the new-array
// interface is. Plans are created once per shape and never destroyed.
struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

PlanPair plans_for(int nx, int ny, int nz) {
  static std::mutex mutex;
  static std::map<std::tuple<int, int, int>, PlanPair> cache;

  std::lock_guard lock(mutex);
  const auto key = std::make_tuple(nx, ny, nz);
  if (auto it = cache.find(key); it != cache.end()) return it->second;

  fftw_iodim dims[2];
  dims[0].n = nx;
  dims[0].is = dims[0].os = nz * ny;
  dims[1].n = nz;
  dims[1].is = dims[1].os = ny;
  fftw_iodim batch;
  batch.n = ny;
  batch.is = batch.os = 1;

  const std::size_t n = static_cast<std::size_t>(nx) * ny * nz;
  auto* in = fftw_alloc_complex(n);
  auto* out = fftw_alloc_complex(n);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  PlanPair p;
  p.forward = fftw_plan_guru_dft(2, dims, 1, &batch, in, out, FFTW_FORWARD, flags);
  p.backward = fftw_plan_guru_dft(2, dims, 1, &batch, in, out, FFTW_BACKWARD, flags);
  fftw_free(in);
  fftw_free(out);
  if (!p.forward || !p.backward) throw std::runtime_error("FFTW planning failed");
  cache.emplace(key, p);
  return p;
}

fftw_complex* as_fftw(Complex* p) { return reinterpret_cast<fftw_complex*>(p); }

void check_shape(const Grid& grid, int nx, int ny, int nz, const char* what) {
  if (nx != grid.nx() || ny != grid.ny() || nz != grid.nz())
    throw std::invalid_argument(std::string(what) + ": dimensions do not match grid");
}

}  // namespace

SpecField transform_to_spectral(const PhysField& f, const Grid& grid) {
  check_shape(grid, f.nx(), f.ny(), f.nz(), "transform_to_spectral");
  const auto plans = plans_for(grid.nx(), grid.ny(), grid.nz());

  std::vector<Complex> in(f.data().begin(), f.data().end());
  SpecField out(grid);
  fftw_execute_dft(plans.forward, as_fftw(in.data()), as_fftw(out.data().data()));
  out *= 1.0 / (static_cast<double>(grid.nx()) * grid.nz());
  return out;
}

PhysField transform_to_physical(const SpecField& f, const Grid& grid) {
  check_shape(grid, f.nx(), f.ny(), f.nz(), "transform_to_physical");
  const auto plans = plans_for(grid.nx(), grid.ny(), grid.nz());

  std::vector<Complex> in(f.data().begin(), f.data().end());
  std::vector<Complex> out(in.size());
  fftw_execute_dft(plans.backward, as_fftw(in.data()), as_fftw(out.data()));

  PhysField phys(grid);
  auto dst = phys.data();
  double re_max = 0.0;
  double im_max = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    dst[i] = out[i].real();
    re_max = std::max(re_max, std::abs(out[i].real()));
    im_max = std::max(im_max, std::abs(out[i].imag()));
  }
  if (im_max > 1e-10 * std::max(re_max, 1e-300) && im_max > 0.0)
    throw std::domain_error("transform_to_physical: input is not Hermitian-symmetric (imaginary residual " +
                            std::to_string(im_max) + ")");
  return phys;
}

bool is_retained(const Grid& grid, int i1, int i3) {
  return 3 * std::abs(grid.k1_of(i1)) <= grid.nx() && 3 * std::abs(grid.k3_of(i3)) <= grid.nz();
}

void dealias_in_place(SpecField& f) {
  const int nx = f.nx();
  const int nz = f.nz();
  for (int i1 = 0; i1 < nx; ++i1) {
    const int k1 = i1 < nx / 2 ? i1 : i1 - nx;
    for (int i3 = 0; i3 < nz; ++i3) {
      const int k3 = i3 < nz / 2 ? i3 : i3 - nz;
      if (3 * std::abs(k1) > nx || 3 * std::abs(k3) > nz) {
        auto p = f.profile(i1, i3);
        std::fill(p.begin(), p.end(), Complex{});
      }
    }
  }
}

SpecField dealias(SpecField f) {
  dealias_in_place(f);
  return f;
}

void zero_nyquist(SpecField& f) {
  for (int i1 = 0; i1 < f.nx(); ++i1)
    for (int i3 = 0; i3 < f.nz(); ++i3)
      if (i1 == f.nx() / 2 || i3 == f.nz() / 2) {
        auto p = f.profile(i1, i3);
        std::fill(p.begin(), p.end(), Complex{});
      }
}

}  // namespace cpks
