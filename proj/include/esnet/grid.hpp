#pragma once

// Periodic uniform grid on [-1,1]^dims and real fields sampled on it.
// Conventions used everywhere downstream:
//   h = 2/n, node x_i = -1 + i*h (the +1 endpoint is the periodic image of -1),
//   2D storage is row-major with x as the slow index: values[ix*n + iy],
//   <u,v> = h^dims * sum_i u_i v_i  (discrete L2 pairing).

#include <cmath>
#include <cstddef>
#include <vector>

#include "esnet/errors.hpp"

namespace esnet {

struct Grid {
  int dims = 1;
  int n = 0;

  Grid() = default;
  Grid(int dims_, int n_) : dims(dims_), n(n_) {
    if (dims != 1 && dims != 2) throw UsageError("grid: dims must be 1 or 2");
    if (n < 8 || n % 2 != 0) throw UsageError("grid: n must be even and >= 8");
  }

  double h() const { return 2.0 / n; }
  double volume() const { return dims == 1 ? 2.0 : 4.0; }
  double quad_weight() const { return dims == 1 ? h() : h() * h(); }
  std::size_t size() const {
    return dims == 1 ? std::size_t(n) : std::size_t(n) * std::size_t(n);
  }
  double x(int i) const { return -1.0 + h() * i; }

  bool operator==(const Grid&) const = default;
};

struct Field {
  Grid grid;
  std::vector<double> values;

  Field() = default;
  explicit Field(const Grid& g, double fill = 0.0) : grid(g), values(g.size(), fill) {}

  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  std::size_t size() const { return values.size(); }

  // 2D accessor; ix slow, iy fast
  double& at(int ix, int iy) { return values[std::size_t(ix) * grid.n + iy]; }
  double at(int ix, int iy) const { return values[std::size_t(ix) * grid.n + iy]; }
};

namespace detail {
// pairwise dot product: error grows like log2(n)*eps instead of n*eps, which
// keeps the energy-identity residuals far below their 1e-10 budget on 2D grids
inline double dot_pairwise(const double* a, const double* b, std::size_t n) {
  if (n <= 64) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
  }
  std::size_t half = n / 2;
  return dot_pairwise(a, b, half) + dot_pairwise(a + half, b + half, n - half);
}

inline double sum_pairwise(const double* a, std::size_t n) {
  if (n <= 64) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i];
    return s;
  }
  std::size_t half = n / 2;
  return sum_pairwise(a, half) + sum_pairwise(a + half, n - half);
}
}  // namespace detail

inline void check_same_grid(const Grid& a, const Grid& b, const char* what) {
  if (!(a == b))
    throw DataError(std::string(what) + ": grid mismatch (" + std::to_string(a.dims) + "D n=" +
                    std::to_string(a.n) + " vs " + std::to_string(b.dims) + "D n=" +
                    std::to_string(b.n) + ")");
}

inline double inner_product(const Field& u, const Field& v) {
  check_same_grid(u.grid, v.grid, "inner_product");
  return u.grid.quad_weight() * detail::dot_pairwise(u.values.data(), v.values.data(), u.size());
}

inline double l2_norm_sq(const Field& u) { return inner_product(u, u); }
inline double l2_norm(const Field& u) { return std::sqrt(l2_norm_sq(u)); }

inline double linf_norm(const Field& u) {
  double m = 0.0;
  for (double v : u.values) m = std::max(m, std::abs(v));
  return m;
}

inline bool all_finite(const Field& u) {
  for (double v : u.values)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace esnet
