#pragma once

// Spectral differential operators on periodic fields. Wavenumbers are k = pi*m
// on [-1,1]^dims. First derivatives zero the Nyquist mode (its sign is not
// representable); the Laplacian keeps it (k^2 is well defined there).

#include <cmath>
#include <complex>

#include "esnet/fft.hpp"
#include "esnet/grid.hpp"

namespace esnet {

enum class GInverseKind { identity, inverse_neg_laplacian };

inline const char* to_string(GInverseKind k) {
  return k == GInverseKind::identity ? "identity" : "inverse-neg-laplacian";
}

inline Field laplacian(const Field& u) {
  SpectralCoeffs sc = forward_fft(u);
  int n = u.grid.n;
  if (u.grid.dims == 1) {
    for (int c = 0; c <= n / 2; ++c) {
      double k = M_PI * c;
      sc.coeffs[c] *= -(k * k);
    }
  } else {
    int cols = sc.cols();
    for (int r = 0; r < n; ++r) {
      double kx = M_PI * mode_of_row(r, n);
      for (int c = 0; c < cols; ++c) {
        double ky = M_PI * c;
        sc.at(r, c) *= -(kx * kx + ky * ky);
      }
    }
    (void)cols;
  }
  return inverse_fft(sc);
}

// d/dx_axis; axis 0 is the slow (row) direction in 2D
inline Field spectral_derivative(const Field& u, int axis) {
  const Grid& g = u.grid;
  if (axis < 0 || axis >= g.dims) throw UsageError("spectral_derivative: bad axis");
  SpectralCoeffs sc = forward_fft(u);
  int n = g.n;
  const std::complex<double> I(0.0, 1.0);
  if (g.dims == 1) {
    for (int c = 0; c <= n / 2; ++c) sc.coeffs[c] *= I * (M_PI * c);
    sc.coeffs[n / 2] = 0.0;  // Nyquist
  } else {
    int cols = sc.cols();
    for (int r = 0; r < n; ++r) {
      int mx = mode_of_row(r, n);
      for (int c = 0; c < cols; ++c) {
        double k = axis == 0 ? M_PI * mx : M_PI * c;
        sc.at(r, c) *= I * k;
      }
    }
    if (axis == 0)
      for (int c = 0; c < cols; ++c) sc.at(n / 2, c) = 0.0;
    else
      for (int r = 0; r < n; ++r) sc.at(r, n / 2) = 0.0;
  }
  return inverse_fft(sc);
}

// |grad u|^2 evaluated pointwise
inline Field gradient_sq(const Field& u) {
  Field dx = spectral_derivative(u, 0);
  Field out(u.grid);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = dx[i] * dx[i];
  if (u.grid.dims == 2) {
    Field dy = spectral_derivative(u, 1);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += dy[i] * dy[i];
  }
  return out;
}

// G^{-1} for the mobility operator. identity passes through; the spectral
// (-Laplacian)^{-1} branch requires a zero-mean input and keeps the mean zero.
inline Field g_inverse(const Field& u, GInverseKind kind) {
  if (kind == GInverseKind::identity) return u;
  SpectralCoeffs sc = forward_fft(u);
  double mean_mag = std::abs(sc.coeffs[0]);
  if (mean_mag > 1e-12 * std::max(1.0, linf_norm(u)))
    throw DataError("g_inverse: inverse-neg-laplacian needs a zero-mean field (mean magnitude " +
                    std::to_string(mean_mag) + ")");
  int n = u.grid.n;
  if (u.grid.dims == 1) {
    sc.coeffs[0] = 0.0;
    for (int c = 1; c <= n / 2; ++c) {
      double k = M_PI * c;
      sc.coeffs[c] /= k * k;
    }
  } else {
    int cols = sc.cols();
    for (int r = 0; r < n; ++r) {
      double kx = M_PI * mode_of_row(r, n);
      for (int c = 0; c < cols; ++c) {
        double ky = M_PI * c;
        double k2 = kx * kx + ky * ky;
        if (k2 == 0.0)
          sc.at(r, c) = 0.0;
        else
          sc.at(r, c) /= k2;
      }
    }
  }
  return inverse_fft(sc);
}

// 2/3-rule dealiasing: keep modes with |m| <= n/3 on every axis, zero the rest
inline Field dealias_23(const Field& u) {
  SpectralCoeffs sc = forward_fft(u);
  int n = u.grid.n;
  int cut = n / 3;
  if (u.grid.dims == 1) {
    for (int c = cut + 1; c <= n / 2; ++c) sc.coeffs[c] = 0.0;
  } else {
    int cols = sc.cols();
    for (int r = 0; r < n; ++r) {
      bool kill_row = std::abs(mode_of_row(r, n)) > cut;
      for (int c = 0; c < cols; ++c)
        if (kill_row || c > cut) sc.at(r, c) = 0.0;
    }
  }
  return inverse_fft(sc);
}

}  // namespace esnet
