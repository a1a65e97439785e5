#pragma once

// Initial-condition sampling, reference-solution generation, and the on-disk
// dataset container.
//
// File layout (all little-endian):
//   magic "ESNETDS1" | version u32 | dims u32 | n u32 | epsilon f64 |
//   t_end f64 | count u64 | base_seed u64 |
//   count * ( seed u64 | phi0 f64[n^dims] | phiT f64[n^dims] )   row-major.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "esnet/binio.hpp"
#include "esnet/fft.hpp"
#include "esnet/grid.hpp"
#include "esnet/rng.hpp"
#include "esnet/solver.hpp"
#include "esnet/threading.hpp"

namespace esnet {

struct Sample {
  std::uint64_t seed = 0;
  Field phi0;
  Field phiT;
};

struct Dataset {
  Grid grid;
  double epsilon = 0.0;
  double t_end = 0.0;
  std::uint64_t base_seed = 0;
  std::vector<Sample> samples;
};

// Band-limited random initial condition: iid standard-normal coefficients on
// modes with |m| < 8 on every axis (Hermitian-symmetric so the field is real),
// synthesized on the grid, then rescaled by 1/max(1, ||phi0||_inf).
//
// Draw order is part of the format: 1D dc, then m=1..7 as (re,im) pairs;
// 2D (0,0), then m_x=1..7 on the m_y=0 column as (re,im), then columns
// m_y=1..7 each scanning m_x=-7..7 as (re,im). `draws` (when given) receives
// every normal variate in that order, pre-synthesis — tests hook in here.
inline Field sample_ic(const Grid& g, std::uint64_t seed, std::vector<double>* draws = nullptr) {
  if (g.n < 16)
    throw UsageError("sample_ic: the |m|<8 band needs n >= 16 to be representable");
  SplitMix64 rng(seed);
  auto draw = [&] {
    double z = rng.normal();
    if (draws) draws->push_back(z);
    return z;
  };

  SpectralCoeffs sc(g);
  const int band = 7;  // highest populated |m|
  if (g.dims == 1) {
    sc.coeffs[0] = draw();
    for (int m = 1; m <= band; ++m) {
      double re = draw(), im = draw();
      sc.coeffs[m] = {re, im};
    }
  } else {
    int n = g.n;
    sc.at(0, 0) = draw();
    for (int mx = 1; mx <= band; ++mx) {
      double re = draw(), im = draw();
      sc.at(mx, 0) = {re, im};
      sc.at(n - mx, 0) = {re, -im};  // m_y = 0 column must be self-conjugate
    }
    for (int my = 1; my <= band; ++my)
      for (int mx = -band; mx <= band; ++mx) {
        double re = draw(), im = draw();
        sc.at((mx + n) % n, my) = {re, im};
      }
  }

  Field f = inverse_fft(sc);
  double m = linf_norm(f);
  if (m > 1.0)
    for (auto& v : f.values) v /= m;
  return f;
}

// Solve count initial conditions to t_end; sample i uses derive_seed(base, i),
// so any subset of the dataset is reproducible in isolation.
inline Dataset generate(const Grid& g, const SolverConfig& cfg, std::size_t count,
                        std::uint64_t base_seed, WorkerPool* pool = nullptr,
                        const std::function<void(std::size_t, std::size_t)>& progress = {}) {
  if (count == 0) throw UsageError("generate: count must be positive");
  Dataset ds;
  ds.grid = g;
  ds.epsilon = cfg.epsilon;
  ds.t_end = cfg.t_end;
  ds.base_seed = base_seed;
  ds.samples.resize(count);

  SolverConfig run = cfg;
  run.snapshot_times = {cfg.t_end};

  std::atomic<std::size_t> done{0};
  auto work = [&](std::size_t i) {
    std::uint64_t seed = derive_seed(base_seed, i);
    try {
      Field phi0 = sample_ic(g, seed);
      Trajectory traj = integrate(phi0, run);
      ds.samples[i] = Sample{seed, std::move(phi0), std::move(traj.states.back())};
    } catch (const Error& e) {
      throw DataError("generate: sample " + std::to_string(i) + " (seed " +
                      std::to_string(seed) + ") failed: " + e.what());
    }
    if (progress) progress(done.fetch_add(1) + 1, count);
  };
  if (pool)
    pool->for_each_index(count, work);
  else
    for (std::size_t i = 0; i < count; ++i) work(i);
  return ds;
}

inline void write_dataset(const std::string& path, const Dataset& ds) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("write_dataset: cannot open " + path);
  bin::put_magic(os, "ESNETDS1");
  bin::put_u32(os, 1);
  bin::put_u32(os, std::uint32_t(ds.grid.dims));
  bin::put_u32(os, std::uint32_t(ds.grid.n));
  bin::put_f64(os, ds.epsilon);
  bin::put_f64(os, ds.t_end);
  bin::put_u64(os, ds.samples.size());
  bin::put_u64(os, ds.base_seed);
  for (const auto& s : ds.samples) {
    bin::put_u64(os, s.seed);
    bin::put_f64_array(os, s.phi0.values.data(), s.phi0.size());
    bin::put_f64_array(os, s.phiT.values.data(), s.phiT.size());
  }
  if (!os) throw DataError("write_dataset: write failed for " + path);
}

inline Dataset read_dataset(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("read_dataset: cannot open " + path);
  bin::expect_magic(is, "ESNETDS1", "dataset");
  std::uint32_t version = bin::get_u32(is, "dataset version");
  if (version != 1)
    throw DataError("read_dataset: unsupported version " + std::to_string(version));
  int dims = int(bin::get_u32(is, "dims"));
  int n = int(bin::get_u32(is, "n"));
  Dataset ds;
  try {
    ds.grid = Grid(dims, n);
  } catch (const UsageError& e) {
    throw DataError(std::string("read_dataset: bad header: ") + e.what());
  }
  ds.epsilon = bin::get_f64(is, "epsilon");
  ds.t_end = bin::get_f64(is, "t_end");
  std::uint64_t count = bin::get_u64(is, "count");
  ds.base_seed = bin::get_u64(is, "base_seed");
  ds.samples.resize(count);
  for (auto& s : ds.samples) {
    s.seed = bin::get_u64(is, "sample seed");
    s.phi0 = Field(ds.grid);
    s.phiT = Field(ds.grid);
    bin::get_f64_array(is, s.phi0.values.data(), s.phi0.size(), "phi0");
    bin::get_f64_array(is, s.phiT.values.data(), s.phiT.size(), "phiT");
  }
  // must be exactly at EOF now
  char extra;
  if (is.read(&extra, 1))
    throw DataError("read_dataset: trailing bytes after " + std::to_string(count) + " samples");
  return ds;
}

// First floor(fraction*count) samples train, rest test. The tiny epsilon
// absorbs binary-representation error in fraction*count (0.7*1120 is
// 783.999... in doubles but means 784).
inline std::pair<std::size_t, std::size_t> split_counts(std::size_t count, double fraction) {
  if (fraction < 0.0 || fraction > 1.0)
    throw UsageError("split: fraction must be in [0,1]");
  auto train = std::size_t(std::floor(fraction * double(count) + 1e-9));
  if (train > count) train = count;
  return {train, count - train};
}

// Human-readable dump: sample, flat index, coordinates, phi0, phiT
inline void export_dataset_csv(const std::string& path, const Dataset& ds,
                               std::size_t max_samples = 0) {
  std::ofstream os(path);
  if (!os) throw DataError("export_dataset_csv: cannot open " + path);
  std::size_t count = ds.samples.size();
  if (max_samples > 0) count = std::min(count, max_samples);
  os.precision(17);
  if (ds.grid.dims == 1) {
    os << "sample,i,x,phi0,phiT\n";
    for (std::size_t s = 0; s < count; ++s)
      for (int i = 0; i < ds.grid.n; ++i)
        os << s << ',' << i << ',' << ds.grid.x(i) << ',' << ds.samples[s].phi0[i] << ','
           << ds.samples[s].phiT[i] << '\n';
  } else {
    os << "sample,i,j,x,y,phi0,phiT\n";
    for (std::size_t s = 0; s < count; ++s)
      for (int i = 0; i < ds.grid.n; ++i)
        for (int j = 0; j < ds.grid.n; ++j)
          os << s << ',' << i << ',' << j << ',' << ds.grid.x(i) << ',' << ds.grid.x(j) << ','
             << ds.samples[s].phi0.at(i, j) << ',' << ds.samples[s].phiT.at(i, j) << '\n';
  }
  if (!os) throw DataError("export_dataset_csv: write failed for " + path);
}

}  // namespace esnet
