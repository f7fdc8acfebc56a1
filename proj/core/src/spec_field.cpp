#include "cpks/spec_field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cpks {

SpecField::SpecField(int nx, int ny, int nz)
    : nx_(nx), ny_(ny), nz_(nz), data_(static_cast<std::size_t>(nx) * ny * nz) {}

std::span<Complex> SpecField::profile(ModeIndex m) {
  return profile(((m.k1 % nx_) + nx_) % nx_, ((m.k3 % nz_) + nz_) % nz_);
}

std::span<const Complex> SpecField::profile(ModeIndex m) const {
  return profile(((m.k1 % nx_) + nx_) % nx_, ((m.k3 % nz_) + nz_) % nz_);
}

SpecField& SpecField::operator+=(const SpecField& o) {
  if (!same_shape(o)) throw std::invalid_argument("SpecField: shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

SpecField& SpecField::operator-=(const SpecField& o) {
  if (!same_shape(o)) throw std::invalid_argument("SpecField: shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

SpecField& SpecField::operator*=(Complex s) {
  for (auto& v : data_) v *= s;
  return *this;
}

double SpecField::max_abs() const {
  double m = 0.0;
  for (const auto& v : data_) m = std::max(m, std::abs(v));
  return m;
}

bool SpecField::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](const Complex& v) {
    return std::isfinite(v.real()) && std::isfinite(v.imag());
  });
}

double SpecField::hermitian_defect() const {
  double d = 0.0;
  for (int i1 = 0; i1 < nx_; ++i1) {
    if (i1 == nx_ / 2) continue;
    const int j1 = (nx_ - i1) % nx_;
    for (int i3 = 0; i3 < nz_; ++i3) {
      if (i3 == nz_ / 2) continue;
      const int j3 = (nz_ - i3) % nz_;
      const auto a = profile(i1, i3);
      const auto b = profile(j1, j3);
      for (int j = 0; j < ny_; ++j) d = std::max(d, std::abs(a[j] - std::conj(b[j])));
    }
  }
  return d;
}

double PhysField::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

double PhysField::min() const { return *std::min_element(data_.begin(), data_.end()); }
double PhysField::max() const { return *std::max_element(data_.begin(), data_.end()); }

}  // namespace cpks
