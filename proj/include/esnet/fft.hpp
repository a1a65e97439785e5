#pragma once

// Real FFT front end over FFTW3 for periodic fields on [-1,1]^dims.
//
// Coefficient convention: the stored c_m are plain DFT coefficients in the
// grid index, u_j = sum_m c_m exp(2 pi i j m / n) per axis. The grid origin
// is x = -1, so c_m = (-1)^m times the coefficient of exp(i pi m x); every
// operator downstream multiplies mode m by a scalar, which commutes with
// that phase, and the phase cancels on the inverse transform.
// forward_fft returns c_m = raw_fft / N (N = total grid points); inverse_fft
// is FFTW's unnormalized c2r, so inverse_fft(forward_fft(u)) == u to rounding.
//
// Storage is FFTW r2c halfcomplex: 1D holds modes m = 0..n/2; 2D holds an
// n x (n/2+1) row-major block where rows map to m_x via mode_of_row and
// columns to m_y = 0..n/2. Negative m_y entries are implied by Hermitian
// symmetry.
//
// Plans use FFTW_ESTIMATE|FFTW_UNALIGNED: plan choice then depends only on
// the transform signature, never on runtime measurement, which keeps every
// downstream artifact bitwise reproducible. Plan creation is serialized; the
// new-array execute functions are thread-safe.

#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include "esnet/grid.hpp"

namespace esnet {

struct SpectralCoeffs {
  Grid grid;
  std::vector<std::complex<double>> coeffs;

  SpectralCoeffs() = default;
  explicit SpectralCoeffs(const Grid& g)
      : grid(g),
        coeffs(g.dims == 1 ? std::size_t(g.n / 2 + 1)
                           : std::size_t(g.n) * std::size_t(g.n / 2 + 1)) {}

  int cols() const { return grid.n / 2 + 1; }
  std::complex<double>& at(int row, int col) { return coeffs[std::size_t(row) * cols() + col]; }
  std::complex<double> at(int row, int col) const { return coeffs[std::size_t(row) * cols() + col]; }
};

// row index -> signed mode number for an n-point axis
inline int mode_of_row(int row, int n) { return row <= n / 2 ? row : row - n; }

namespace detail {

class PlanCache {
 public:
  fftw_plan get(int dims, int n, bool forward) {
    std::scoped_lock lk(mu_);
    auto key = std::make_tuple(dims, n, forward);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;

    std::size_t rn = dims == 1 ? std::size_t(n) : std::size_t(n) * n;
    std::size_t cn = dims == 1 ? std::size_t(n / 2 + 1) : std::size_t(n) * (n / 2 + 1);
    std::vector<double> rbuf(rn);
    std::vector<std::complex<double>> cbuf(cn);
    auto* c = reinterpret_cast<fftw_complex*>(cbuf.data());
    unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;

    fftw_plan p;
    if (dims == 1)
      p = forward ? fftw_plan_dft_r2c_1d(n, rbuf.data(), c, flags)
                  : fftw_plan_dft_c2r_1d(n, c, rbuf.data(), flags);
    else
      p = forward ? fftw_plan_dft_r2c_2d(n, n, rbuf.data(), c, flags)
                  : fftw_plan_dft_c2r_2d(n, n, c, rbuf.data(), flags);
    if (!p) throw Error("fftw plan creation failed");
    plans_.emplace(key, p);
    return p;
  }

 private:
  std::mutex mu_;
  std::map<std::tuple<int, int, bool>, fftw_plan> plans_;
};

inline PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

}  // namespace detail

inline SpectralCoeffs forward_fft(const Field& f) {
  const Grid& g = f.grid;
  SpectralCoeffs out(g);
  fftw_plan p = detail::plan_cache().get(g.dims, g.n, true);
  // out-of-place r2c preserves its input; FFTW's API just isn't const-correct
  fftw_execute_dft_r2c(p, const_cast<double*>(f.values.data()),
                       reinterpret_cast<fftw_complex*>(out.coeffs.data()));
  double scale = 1.0 / double(g.size());
  for (auto& c : out.coeffs) c *= scale;
  return out;
}

inline Field inverse_fft(const SpectralCoeffs& sc) {
  const Grid& g = sc.grid;
  Field out(g);
  // c2r destroys its input (unavoidable for dims > 1), so transform a scratch copy
  std::vector<std::complex<double>> scratch(sc.coeffs);
  fftw_plan p = detail::plan_cache().get(g.dims, g.n, false);
  fftw_execute_dft_c2r(p, reinterpret_cast<fftw_complex*>(scratch.data()), out.values.data());
  return out;
}

}  // namespace esnet
