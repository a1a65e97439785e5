#pragma once

// Reference solver: pseudo-spectral right-hand side + adaptive Dormand-Prince
// 5(4) with FSAL, PI-free step control (0.9*err^-1/5 clamped to [0.2, 5]) and
// exact step-hitting at requested snapshot times.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "esnet/energy.hpp"
#include "esnet/grid.hpp"
#include "esnet/spectral.hpp"

namespace esnet {

struct SolverConfig {
  double epsilon = 0.01;
  double t_end = 5.0;
  double rtol = 1e-3;
  double atol = 1e-6;
  bool dealias = true;             // 2/3 rule on the cubic term
  std::vector<double> snapshot_times;  // empty -> {t_end}
  bool linear_only = false;        // test hook: integrate phi_t = eps^2 Lap phi + ... nothing else
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Field> states;
  std::vector<double> energy;      // original_energy at each snapshot
  double error_estimate = 0.0;     // sum of accepted scaled local error estimates
  long steps_accepted = 0;
  long steps_rejected = 0;
};

// phi_t = eps^2 Lap(phi) - phi^3 + phi. With dealiasing the cubic is formed
// from the 2/3-truncated field and truncated again afterwards.
inline Field ac_rhs(const Field& phi, double eps, bool dealias = false, bool linear_only = false) {
  Field lap = laplacian(phi);
  Field out(phi.grid);
  double e2 = eps * eps;
  if (linear_only) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = e2 * lap[i];
    return out;
  }
  if (!dealias) {
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = e2 * lap[i] - phi[i] * phi[i] * phi[i] + phi[i];
    return out;
  }
  Field trunc = dealias_23(phi);
  Field cubic(phi.grid);
  for (std::size_t i = 0; i < cubic.size(); ++i) cubic[i] = trunc[i] * trunc[i] * trunc[i];
  cubic = dealias_23(cubic);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = e2 * lap[i] - cubic[i] + phi[i];
  return out;
}

namespace detail {

struct Dopri5 {
  // Dormand-Prince 5(4) tableau; row 7 of a equals b so stage 7 is FSAL
  static constexpr double a[7][6] = {
      {0, 0, 0, 0, 0, 0},
      {1.0 / 5, 0, 0, 0, 0, 0},
      {3.0 / 40, 9.0 / 40, 0, 0, 0, 0},
      {44.0 / 45, -56.0 / 15, 32.0 / 9, 0, 0, 0},
      {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729, 0, 0},
      {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656, 0},
      {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
  static constexpr double b[7] = {35.0 / 384,       0, 500.0 / 1113, 125.0 / 192,
                                  -2187.0 / 6784, 11.0 / 84, 0};
  // b - b_hat (embedded 4th order); weights the error estimate
  static constexpr double e[7] = {71.0 / 57600,        0,           -71.0 / 16695, 71.0 / 1920,
                                  -17253.0 / 339200, 22.0 / 525, -1.0 / 40};
};

inline double hairer_rms(const Field& v, const Field& y0, const Field& y1, double atol,
                         double rtol) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    double sc = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    double q = v[i] / sc;
    s += q * q;
  }
  return std::sqrt(s / double(v.size()));
}

}  // namespace detail

inline Trajectory integrate(const Field& phi0, const SolverConfig& cfg) {
  if (cfg.rtol <= 0 || cfg.atol <= 0) throw UsageError("integrate: tolerances must be positive");
  if (cfg.epsilon <= 0) throw UsageError("integrate: epsilon must be positive");
  if (cfg.t_end < 0) throw UsageError("integrate: t_end must be nonnegative");
  std::vector<double> stops = cfg.snapshot_times.empty()
                                  ? std::vector<double>{cfg.t_end}
                                  : cfg.snapshot_times;
  for (std::size_t i = 0; i < stops.size(); ++i) {
    if (stops[i] < 0 || stops[i] > cfg.t_end)
      throw UsageError("integrate: snapshot time outside [0, t_end]");
    if (i > 0 && stops[i] <= stops[i - 1])
      throw UsageError("integrate: snapshot times must be strictly increasing");
  }

  auto rhs = [&](const Field& y) {
    return ac_rhs(y, cfg.epsilon, cfg.dealias, cfg.linear_only);
  };

  Trajectory traj;
  auto record = [&](double t, const Field& y) {
    traj.times.push_back(t);
    traj.states.push_back(y);
    traj.energy.push_back(original_energy(y, cfg.epsilon));
  };

  Field y = phi0;
  double t = 0.0;
  std::size_t stop_idx = 0;
  while (stop_idx < stops.size() && stops[stop_idx] <= 1e-14) {
    record(0.0, y);
    ++stop_idx;
  }
  if (stop_idx >= stops.size()) return traj;

  Field f0 = rhs(y);

  // Hairer-Norsett-Wanner starting step heuristic
  double h;
  {
    double d0 = detail::hairer_rms(y, y, y, cfg.atol, cfg.rtol);
    double d1 = detail::hairer_rms(f0, y, y, cfg.atol, cfg.rtol);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * (d0 / d1);
    h0 = std::min(h0, cfg.t_end > 0 ? cfg.t_end : 1.0);
    Field y1(y.grid);
    for (std::size_t i = 0; i < y.size(); ++i) y1[i] = y[i] + h0 * f0[i];
    Field f1 = rhs(y1);
    Field df(y.grid);
    for (std::size_t i = 0; i < y.size(); ++i) df[i] = f1[i] - f0[i];
    double d2 = detail::hairer_rms(df, y, y, cfg.atol, cfg.rtol) / h0;
    double h1 = std::max(d1, d2) <= 1e-15 ? std::max(1e-6, h0 * 1e-3)
                                          : std::pow(0.01 / std::max(d1, d2), 0.2);
    h = std::min({100.0 * h0, h1, cfg.t_end > 0 ? cfg.t_end : 1.0});
  }

  std::vector<Field> k(7, Field(y.grid));
  k[0] = f0;
  Field ytmp(y.grid), y5(y.grid), errv(y.grid);
  const auto& A = detail::Dopri5::a;
  const auto& B = detail::Dopri5::b;
  const auto& E = detail::Dopri5::e;
  std::size_t npts = y.size();

  while (stop_idx < stops.size()) {
    double target = stops[stop_idx];
    if (t >= target - 1e-14 * std::max(1.0, target)) {
      record(target, y);
      ++stop_idx;
      continue;
    }
    double h_try = std::min(h, target - t);
    bool clipped = h_try < h;
    if (h_try < 1e-12)
      throw InvariantViolation("integrate: step size underflow at t=" + std::to_string(t) +
                               " (stiffness or instability)");

    for (int s = 1; s < 6; ++s) {
      for (std::size_t i = 0; i < npts; ++i) {
        double acc = 0.0;
        for (int j = 0; j < s; ++j) acc += A[s][j] * k[j][i];
        ytmp[i] = y[i] + h_try * acc;
      }
      k[s] = rhs(ytmp);
    }
    for (std::size_t i = 0; i < npts; ++i) {
      double acc = 0.0;
      for (int j = 0; j < 6; ++j) acc += B[j] * k[j][i];
      y5[i] = y[i] + h_try * acc;
    }
    k[6] = rhs(y5);
    for (std::size_t i = 0; i < npts; ++i) {
      double acc = 0.0;
      for (int j = 0; j < 7; ++j) acc += E[j] * k[j][i];
      errv[i] = h_try * acc;
    }
    double err = detail::hairer_rms(errv, y, y5, cfg.atol, cfg.rtol);
    if (!std::isfinite(err)) err = 10.0;  // force rejection and shrink

    if (err <= 1.0) {
      t = clipped ? target : t + h_try;
      std::swap(y.values, y5.values);
      std::swap(k[0].values, k[6].values);  // FSAL
      ++traj.steps_accepted;
      traj.error_estimate += err * (cfg.atol + cfg.rtol * linf_norm(y));
      if (!all_finite(y))
        throw InvariantViolation("integrate: nonfinite state at t=" + std::to_string(t));
      double fac = std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 5.0);
      if (!clipped) h = h_try * fac;
      // after a clipped step keep the controller's h for the next segment
    } else {
      ++traj.steps_rejected;
      double fac = std::clamp(0.9 * std::pow(err, -0.2), 0.2, 1.0);
      h = h_try * fac;
      // k[0] still holds f(t, y); nothing else to restore
    }
  }
  return traj;
}

}  // namespace esnet
