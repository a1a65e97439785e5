#pragma once

// Per-block energy audits for trained or random networks. verify_decay checks
// the exact discrete identity
//   E~^{n+1} - E~^n = -||phi^{n+1}-phi^n||^2/2 - ||U^{n+1}-U^n||^2
// for estable-g blocks (residual tolerance 1e-10 absolute) and monotone
// E~_new for aux-tilde, and reports the physical energy alongside.

#include <fstream>
#include <iomanip>
#include <string>
#include <vector>

#include "esnet/energy.hpp"
#include "esnet/model.hpp"
#include "esnet/threading.hpp"

namespace esnet {

struct EnergyTrace {
  std::vector<double> modified;           // length M+1
  std::vector<double> original;           // length M+1
  std::vector<double> phi_increment_sq;   // length M: ||phi^{n+1}-phi^n||^2
  std::vector<double> u_increment_sq;     // length M
  std::vector<double> identity_residual;  // length M (estable-g; zeros otherwise)
};

struct DecayReport {
  std::vector<EnergyTrace> traces;
  bool pass = true;
  double max_identity_residual = 0.0;
  double max_modified_increase = 0.0;  // most positive E~ jump observed (<= tol when passing)
  std::size_t samples = 0;
  std::size_t blocks = 0;
  std::vector<std::string> violations;
};

inline EnergyTrace energy_trace(const EStableNet& net, const ForwardResult& r, int item) {
  EnergyTrace tr;
  std::size_t M = r.phi.size() - 1;
  std::vector<Field> phis, us;
  for (std::size_t n = 0; n <= M; ++n) {
    phis.push_back(tensor_item_field(r.phi[n], item));
    us.push_back(tensor_item_field(r.u[n], item));
  }
  for (std::size_t n = 0; n <= M; ++n) {
    double e = net.kind == NetKind::aux_tilde ? discrete_energy_new(us[n], net.C)
                                              : discrete_energy(phis[n], us[n], net.C);
    tr.modified.push_back(e);
    tr.original.push_back(original_energy(phis[n], net.epsilon));
  }
  for (std::size_t n = 0; n < M; ++n) {
    Field dphi(phis[0].grid), du(us[0].grid);
    for (std::size_t i = 0; i < dphi.size(); ++i) {
      dphi[i] = phis[n + 1][i] - phis[n][i];
      du[i] = us[n + 1][i] - us[n][i];
    }
    double dp = inner_product(dphi, dphi);
    double duu = inner_product(du, du);
    tr.phi_increment_sq.push_back(dp);
    tr.u_increment_sq.push_back(duu);
    double resid = 0.0;
    if (net.kind == NetKind::estable_g)
      resid = (tr.modified[n + 1] - tr.modified[n]) + 0.5 * dp + duu;
    tr.identity_residual.push_back(resid);
  }
  return tr;
}

inline DecayReport verify_decay(EStableNet& net, const std::vector<Field>& inputs,
                                double tol = 1e-10, WorkerPool* pool = nullptr) {
  if (net.kind == NetKind::plain)
    throw UsageError("verify_decay: plain networks carry no auxiliary state, nothing to verify");
  if (inputs.empty()) throw UsageError("verify_decay: no inputs");
  DecayReport rep;
  rep.samples = inputs.size();
  rep.blocks = std::size_t(net.block_count());
  rep.traces.resize(inputs.size());

  auto work = [&](std::size_t i) {
    ForwardResult r = forward(net, pack_field(inputs[i]), nullptr);
    rep.traces[i] = energy_trace(net, r, 0);
  };
  if (pool)
    pool->for_each_index(inputs.size(), work);
  else
    for (std::size_t i = 0; i < inputs.size(); ++i) work(i);

  for (std::size_t i = 0; i < rep.traces.size(); ++i) {
    const auto& tr = rep.traces[i];
    for (std::size_t n = 0; n + 1 < tr.modified.size(); ++n) {
      double jump = tr.modified[n + 1] - tr.modified[n];
      rep.max_modified_increase = std::max(rep.max_modified_increase, jump);
      double resid = std::abs(tr.identity_residual[n]);
      rep.max_identity_residual = std::max(rep.max_identity_residual, resid);
      // negated comparisons so nonfinite energies fail instead of slipping past
      bool jump_ok = jump <= tol;
      bool resid_ok = net.kind != NetKind::estable_g || resid <= tol;
      bool bad = !jump_ok || !resid_ok;
      if (bad) {
        rep.pass = false;
        if (rep.violations.size() < 32)
          rep.violations.push_back("sample " + std::to_string(i) + " block " +
                                   std::to_string(n + 1) + ": dE=" + std::to_string(jump) +
                                   " residual=" + std::to_string(resid));
      }
    }
  }
  return rep;
}

// CSV: one row per (sample, block state); block 0 rows carry zero residual.
inline void export_trace(const std::vector<EnergyTrace>& traces, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw DataError("export_trace: cannot open " + path);
  os << "sample,block,modified_energy,original_energy,phi_increment_sq,u_increment_sq,"
        "identity_residual\n";
  os << std::setprecision(17);
  for (std::size_t s = 0; s < traces.size(); ++s) {
    const auto& tr = traces[s];
    for (std::size_t n = 0; n < tr.modified.size(); ++n) {
      double dp = n > 0 ? tr.phi_increment_sq[n - 1] : 0.0;
      double du = n > 0 ? tr.u_increment_sq[n - 1] : 0.0;
      double resid = n > 0 ? tr.identity_residual[n - 1] : 0.0;
      os << s << ',' << n << ',' << tr.modified[n] << ',' << tr.original[n] << ',' << dp << ','
         << du << ',' << resid << '\n';
    }
  }
  if (!os) throw DataError("export_trace: write failed for " + path);
}

// Intermediate block states for plotting: one CSV per sample, a column per
// block state plus grid coordinates.
inline void export_block_fields(EStableNet& net, const std::vector<Field>& inputs,
                                const std::string& dir, std::size_t max_samples = 4) {
  std::size_t count = std::min(inputs.size(), max_samples);
  for (std::size_t s = 0; s < count; ++s) {
    ForwardResult r = forward(net, pack_field(inputs[s]), nullptr);
    std::string path = dir + "/sample" + std::to_string(s) + "_blocks.csv";
    std::ofstream os(path);
    if (!os) throw DataError("export_block_fields: cannot open " + path);
    os << std::setprecision(17);
    const Grid& g = inputs[s].grid;
    if (g.dims == 1) {
      os << "x";
      for (std::size_t n = 0; n < r.phi.size(); ++n) os << ",phi" << n;
      os << '\n';
      for (int i = 0; i < g.n; ++i) {
        os << g.x(i);
        for (auto& ph : r.phi) os << ',' << (*ph.data)[std::size_t(i)];
        os << '\n';
      }
    } else {
      os << "x,y";
      for (std::size_t n = 0; n < r.phi.size(); ++n) os << ",phi" << n;
      os << '\n';
      for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j) {
          os << g.x(i) << ',' << g.x(j);
          for (auto& ph : r.phi) os << ',' << (*ph.data)[std::size_t(i) * g.n + j];
          os << '\n';
        }
    }
    if (!os) throw DataError("export_block_fields: write failed for " + path);
  }
}

}  // namespace esnet
