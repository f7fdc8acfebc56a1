#pragma once

#include "cpks/grid.hpp"
#include "cpks/spec_field.hpp"

namespace cpks {

/// Forward Fourier transform in x and z on every y-plane, normalized so that
/// mode (0,0) is the (x,z)-average:
///   f^{k1,k3}(y) = (1/|T|^2) * integral of f e^{-i(k1 x + k3 z)} dx dz.
/// Throws std::invalid_argument on dimension mismatch.
SpecField transform_to_spectral(const PhysField& f, const Grid& grid);

/// Inverse of transform_to_spectral. The input must be Hermitian-symmetric;
/// an imaginary residual above 1e-10 (relative to the field scale) throws
/// std::domain_error.
PhysField transform_to_physical(const SpecField& f, const Grid& grid);

/// Zeros every mode with 3|k1| > nx or 3|k3| > nz (two-thirds rule).
SpecField dealias(SpecField f);
void dealias_in_place(SpecField& f);

/// True when the 2/3 rule keeps mode (i1, i3).
bool is_retained(const Grid& grid, int i1, int i3);

/// Zeros the x and z Nyquist modes.
void zero_nyquist(SpecField& f);

}  // namespace cpks
