#pragma once

// Shared test utilities: independently-synthesized smooth fields (direct trig
// sums, no FFT involved) and low-tech oracles the implementation is checked
// against.

#include <cmath>
#include <cstdint>
#include <vector>

#include "esnet/grid.hpp"
#include "esnet/rng.hpp"

namespace testutil {

// 1D band-limited function u(x) = a0 + sum_m a_m cos(pi m x) + b_m sin(pi m x)
// with analytic derivative; evaluated pointwise, never through an FFT.
struct Trig1D {
  std::vector<double> a, b;  // index m = 1..band; a0 separate
  double a0 = 0.0;

  static Trig1D random(std::uint64_t seed, int band, double amp = 1.0) {
    esnet::SplitMix64 rng(seed);
    Trig1D t;
    t.a0 = amp * rng.uniform(-1.0, 1.0);
    for (int m = 1; m <= band; ++m) {
      t.a.push_back(amp * rng.uniform(-1.0, 1.0) / m);
      t.b.push_back(amp * rng.uniform(-1.0, 1.0) / m);
    }
    return t;
  }

  double value(double x) const {
    double s = a0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      double k = M_PI * double(i + 1);
      s += a[i] * std::cos(k * x) + b[i] * std::sin(k * x);
    }
    return s;
  }

  double deriv(double x) const {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      double k = M_PI * double(i + 1);
      s += -a[i] * k * std::sin(k * x) + b[i] * k * std::cos(k * x);
    }
    return s;
  }

  esnet::Field sample(const esnet::Grid& g) const {
    esnet::Field f(g);
    for (int i = 0; i < g.n; ++i) f[std::size_t(i)] = value(g.x(i));
    return f;
  }
};

struct Trig2D {
  struct Term {
    int mx, my;
    double axx, axy, ayx, ayy;  // coefficients of cos*cos, cos*sin, sin*cos, sin*sin
  };
  std::vector<Term> terms;
  double a0 = 0.0;

  static Trig2D random(std::uint64_t seed, int band, double amp = 1.0) {
    esnet::SplitMix64 rng(seed);
    Trig2D t;
    t.a0 = amp * rng.uniform(-1.0, 1.0);
    for (int mx = 0; mx <= band; ++mx)
      for (int my = 0; my <= band; ++my) {
        if (mx == 0 && my == 0) continue;
        double w = amp / double(1 + mx + my);
        t.terms.push_back({mx, my, w * rng.uniform(-1.0, 1.0), w * rng.uniform(-1.0, 1.0),
                           w * rng.uniform(-1.0, 1.0), w * rng.uniform(-1.0, 1.0)});
      }
    return t;
  }

  double value(double x, double y) const {
    double s = a0;
    for (const auto& tm : terms) {
      double kx = M_PI * tm.mx, ky = M_PI * tm.my;
      s += tm.axx * std::cos(kx * x) * std::cos(ky * y) +
           tm.axy * std::cos(kx * x) * std::sin(ky * y) +
           tm.ayx * std::sin(kx * x) * std::cos(ky * y) +
           tm.ayy * std::sin(kx * x) * std::sin(ky * y);
    }
    return s;
  }

  double dx(double x, double y) const {
    double s = 0.0;
    for (const auto& tm : terms) {
      double kx = M_PI * tm.mx, ky = M_PI * tm.my;
      s += kx * (-tm.axx * std::sin(kx * x) * std::cos(ky * y) -
                 tm.axy * std::sin(kx * x) * std::sin(ky * y) +
                 tm.ayx * std::cos(kx * x) * std::cos(ky * y) +
                 tm.ayy * std::cos(kx * x) * std::sin(ky * y));
    }
    return s;
  }

  double dy(double x, double y) const {
    double s = 0.0;
    for (const auto& tm : terms) {
      double kx = M_PI * tm.mx, ky = M_PI * tm.my;
      s += ky * (-tm.axx * std::cos(kx * x) * std::sin(ky * y) +
                 tm.axy * std::cos(kx * x) * std::cos(ky * y) -
                 tm.ayx * std::sin(kx * x) * std::sin(ky * y) +
                 tm.ayy * std::sin(kx * x) * std::cos(ky * y));
    }
    return s;
  }

  esnet::Field sample(const esnet::Grid& g) const {
    esnet::Field f(g);
    for (int i = 0; i < g.n; ++i)
      for (int j = 0; j < g.n; ++j) f.at(i, j) = value(g.x(i), g.x(j));
    return f;
  }
};

// 4th-order centered difference along one axis on the periodic grid
inline esnet::Field fd_derivative4(const esnet::Field& u, int axis) {
  const esnet::Grid& g = u.grid;
  esnet::Field out(g);
  double h = g.h();
  auto stencil = [&](auto fetch) {
    return (-fetch(2) + 8.0 * fetch(1) - 8.0 * fetch(-1) + fetch(-2)) / (12.0 * h);
  };
  if (g.dims == 1) {
    for (int i = 0; i < g.n; ++i)
      out[std::size_t(i)] =
          stencil([&](int d) { return u[std::size_t(((i + d) % g.n + g.n) % g.n)]; });
  } else {
    for (int i = 0; i < g.n; ++i)
      for (int j = 0; j < g.n; ++j)
        out.at(i, j) = stencil([&](int d) {
          int ii = axis == 0 ? ((i + d) % g.n + g.n) % g.n : i;
          int jj = axis == 1 ? ((j + d) % g.n + g.n) % g.n : j;
          return u.at(ii, jj);
        });
  }
  return out;
}

inline esnet::Field fd_gradient_sq4(const esnet::Field& u) {
  esnet::Field dx = fd_derivative4(u, 0);
  esnet::Field out(u.grid);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = dx[i] * dx[i];
  if (u.grid.dims == 2) {
    esnet::Field dy = fd_derivative4(u, 1);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += dy[i] * dy[i];
  }
  return out;
}

inline double max_abs_diff(const esnet::Field& a, const esnet::Field& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace testutil
