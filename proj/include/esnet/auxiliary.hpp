#pragma once

// Auxiliary-variable constructions for the double-well gradient flow
//   phi_t = eps^2 Lap(phi) - phi^3 + phi,   F(s) = (s^2-1)^2/4.
//
// Two flavors are used by the network blocks:
//   aux_u_init:      U = sqrt( phi^2/2 + (eps^2/2)|grad phi|^2 + F(phi) + C )
//   aux_utilde_init: U~ = sqrt(          (eps^2/2)|grad phi|^2 + F(phi) + C~ )
// For this F the first radicand is >= 1/4 + C pointwise, so C = 0 is safe.

#include <cmath>
#include <string>

#include "esnet/grid.hpp"
#include "esnet/spectral.hpp"

namespace esnet {

inline double double_well(double s) {
  double q = s * s - 1.0;
  return 0.25 * q * q;
}

namespace detail {
inline Field sqrt_radicand(const Field& rad, const char* who) {
  Field out(rad.grid);
  double mn = rad[0];
  std::size_t mn_i = 0;
  for (std::size_t i = 0; i < rad.size(); ++i)
    if (rad[i] < mn) {
      mn = rad[i];
      mn_i = i;
    }
  if (mn < 0.0)
    throw DataError(std::string(who) + ": negative radicand, min " + std::to_string(mn) +
                    " at flat index " + std::to_string(mn_i) +
                    " (increase the stabilizing shift)");
  for (std::size_t i = 0; i < rad.size(); ++i) out[i] = std::sqrt(rad[i]);
  return out;
}
}  // namespace detail

inline Field aux_u_init(const Field& phi, double eps, double C) {
  Field gs = gradient_sq(phi);
  Field rad(phi.grid);
  double half_e2 = 0.5 * eps * eps;
  for (std::size_t i = 0; i < rad.size(); ++i)
    rad[i] = 0.5 * phi[i] * phi[i] + half_e2 * gs[i] + double_well(phi[i]) + C;
  return detail::sqrt_radicand(rad, "aux_u_init");
}

inline Field aux_utilde_init(const Field& phi, double eps, double Ctilde) {
  Field gs = gradient_sq(phi);
  Field rad(phi.grid);
  double half_e2 = 0.5 * eps * eps;
  for (std::size_t i = 0; i < rad.size(); ++i)
    rad[i] = half_e2 * gs[i] + double_well(phi[i]) + Ctilde;
  return detail::sqrt_radicand(rad, "aux_utilde_init");
}

// H1(phi) = (G^{-1} phi + D phi + f(phi)) / U(phi) with G = identity,
// D = -eps^2 Lap and f(s) = s^3 - s; the numerator collapses to
// -eps^2 Lap(phi) + phi^3. Requires a strictly positive radicand.
inline Field h1_apply(const Field& phi, double eps, double C) {
  Field u = aux_u_init(phi, eps, C);
  double mn = u[0];
  for (std::size_t i = 0; i < u.size(); ++i) mn = std::min(mn, u[i]);
  if (mn <= 0.0)
    throw DataError("h1_apply: radicand must be strictly positive (min sqrt value " +
                    std::to_string(mn) + ")");
  Field lap = laplacian(phi);
  Field out(phi.grid);
  double e2 = eps * eps;
  for (std::size_t i = 0; i < out.size(); ++i) {
    double numer = phi[i] + (-e2 * lap[i]) + (phi[i] * phi[i] * phi[i] - phi[i]);
    out[i] = numer / u[i];
  }
  return out;
}

// || (phi - H1(phi) U(phi)) - (eps^2 Lap phi + phi - phi^3) || / max(1, ||rhs||):
// zero in exact arithmetic, so this measures only rounding in the two paths.
inline double equivalence_residual(const Field& phi, double eps, double C) {
  Field h1 = h1_apply(phi, eps, C);
  Field u = aux_u_init(phi, eps, C);
  Field lap = laplacian(phi);
  Field lhs(phi.grid), rhs(phi.grid);
  double e2 = eps * eps;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    lhs[i] = phi[i] - h1[i] * u[i];
    rhs[i] = e2 * lap[i] + phi[i] - phi[i] * phi[i] * phi[i];
  }
  Field diff(phi.grid);
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = lhs[i] - rhs[i];
  return l2_norm(diff) / std::max(1.0, l2_norm(rhs));
}

}  // namespace esnet
