#pragma once

// Discrete energies. The modified energies are the quantities the network
// blocks provably dissipate; original_energy is the physical functional.

#include "esnet/auxiliary.hpp"
#include "esnet/grid.hpp"
#include "esnet/spectral.hpp"

namespace esnet {

// E~(phi, U) = -<phi,phi>/2 + <U,U> - C|Omega|
inline double discrete_energy(const Field& phi, const Field& u, double C) {
  check_same_grid(phi.grid, u.grid, "discrete_energy");
  return -0.5 * inner_product(phi, phi) + inner_product(u, u) - C * phi.grid.volume();
}

// E~_new(U~) = <U~,U~> - C~|Omega|
inline double discrete_energy_new(const Field& utilde, double Ctilde) {
  return inner_product(utilde, utilde) - Ctilde * utilde.grid.volume();
}

// E(phi) = integral of (eps^2/2)|grad phi|^2 + F(phi), trapezoidal == h^d sum
// on a periodic grid
inline double original_energy(const Field& phi, double eps) {
  Field gs = gradient_sq(phi);
  Field density(phi.grid);
  double half_e2 = 0.5 * eps * eps;
  for (std::size_t i = 0; i < phi.size(); ++i)
    density[i] = half_e2 * gs[i] + double_well(phi[i]);
  return phi.grid.quad_weight() *
         detail::sum_pairwise(density.values.data(), density.size());
}

}  // namespace esnet
