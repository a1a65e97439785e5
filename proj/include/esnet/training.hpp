#pragma once

// Adam training with a halving/restart LR schedule, deterministic across
// worker counts: each batch item gets its own tape, per-item gradients land in
// per-item slots, and the reduction runs in item order on the calling thread.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "esnet/dataset.hpp"
#include "esnet/energy.hpp"
#include "esnet/model.hpp"
#include "esnet/rng.hpp"
#include "esnet/threading.hpp"

namespace esnet {

struct TrainConfig {
  double lr0 = 1e-3;
  double weight_decay = 1e-6;
  int batch_size = 16;
  int epochs = 1000;
  int halve_every = 50;    // epochs per LR halving inside a cycle
  int restart_every = 200; // cycle length; LR snaps back to lr0
  double beta = 0.0;       // consistency-penalty weight (0 disables it)
  double train_fraction = 0.7;
  int eval_every = 1;      // test-split evaluation cadence in epochs
  int energy_check_every = 0;  // optimizer steps between in-training decay audits; 0 = off
  std::uint64_t seed = 7;
  int workers = 1;
};

// lr(e) = lr0 * 2^-floor((e mod restart) / halve): halves inside a cycle,
// snaps back at each restart
inline double lr_at(int epoch, const TrainConfig& cfg) {
  if (epoch < 0) throw UsageError("lr_at: negative epoch");
  int e = cfg.restart_every > 0 ? epoch % cfg.restart_every : epoch;
  int halvings = cfg.halve_every > 0 ? e / cfg.halve_every : 0;
  return std::ldexp(cfg.lr0, -halvings);
}

inline ad::Tensor mse_loss(const ad::Tensor& pred, const ad::Tensor& truth) {
  return ad::mean_sq(ad::sub(pred, truth));
}

// ---- Adam ----

struct AdamState {
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  long long t = 0;
  std::vector<std::vector<double>> m, v;

  void init(const std::vector<ad::Parameter*>& params) {
    t = 0;
    m.clear();
    v.clear();
    for (auto* p : params) {
      m.emplace_back(p->size(), 0.0);
      v.emplace_back(p->size(), 0.0);
    }
  }
};

// coupled L2 weight decay: grad += wd * value before the moment updates
inline void adam_step(const std::vector<ad::Parameter*>& params, AdamState& st, double lr,
                      double weight_decay) {
  if (st.m.size() != params.size()) throw UsageError("adam_step: state not initialized");
  ++st.t;
  double bc1 = 1.0 - std::pow(st.beta1, double(st.t));
  double bc2 = 1.0 - std::pow(st.beta2, double(st.t));
  for (std::size_t k = 0; k < params.size(); ++k) {
    ad::Parameter& p = *params[k];
    auto& m = st.m[k];
    auto& v = st.v[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      double g = p.grad[i];
      if (!std::isfinite(g))
        throw InvariantViolation("adam_step: nonfinite gradient in " + p.name);
      g += weight_decay * p.value[i];
      m[i] = st.beta1 * m[i] + (1.0 - st.beta1) * g;
      v[i] = st.beta2 * v[i] + (1.0 - st.beta2) * g * g;
      double mhat = m[i] / bc1;
      double vhat = v[i] / bc2;
      p.value[i] -= lr * mhat / (std::sqrt(vhat) + st.eps);
    }
  }
}

// ---- consistency penalty ----

// The block update fixes H^n U^{n+1} = G^{-1} phi^n identically, so with the
// exact G the per-block residual phi^n - G(H^n U^{n+1}) is zero by
// construction. `g_hat` swaps in an approximate G to exercise the penalty;
// the returned value is beta * sum_blocks mean_batch ||residual||^2.
inline double g_residual_penalty(const ForwardResult& r, double beta, const EStableNet& net,
                                 const std::function<Field(const Field&)>& g_hat = {}) {
  if (beta == 0.0) return 0.0;
  if (net.kind != NetKind::estable_g)
    throw UsageError("g_residual_penalty: defined for estable-g networks only");
  auto apply_g_exact = [&](const Field& f) {
    if (net.g_inverse_kind == GInverseKind::identity) return f;
    Field lap = laplacian(f);
    Field out(f.grid);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = -lap[i];
    return out;
  };
  double total = 0.0;
  int B = r.phi[0].shape[0];
  for (std::size_t n = 0; n + 1 < r.phi.size(); ++n) {
    double block_acc = 0.0;
    for (int b = 0; b < B; ++b) {
      Field phin = tensor_item_field(r.phi[n], b);
      Field hu = g_inverse(phin, net.g_inverse_kind);  // == H^n U^{n+1} by the update rule
      Field back = g_hat ? g_hat(hu) : apply_g_exact(hu);
      Field resid(phin.grid);
      for (std::size_t i = 0; i < resid.size(); ++i) resid[i] = phin[i] - back[i];
      block_acc += l2_norm_sq(resid);
    }
    total += block_acc / double(B);
  }
  return beta * total;
}

// ---- evaluation ----

struct EvalMetrics {
  double mse = 0.0;     // mean over samples and grid points
  double rel_l2 = 0.0;  // mean over samples of ||pred-truth||_2 / ||truth||_2
  std::size_t count = 0;
  std::size_t skipped = 0;  // zero-norm truths excluded from rel_l2
};

inline EvalMetrics evaluate(EStableNet& net, const std::vector<const Sample*>& samples,
                            WorkerPool* pool = nullptr, std::vector<double>* per_sample_rel = nullptr,
                            std::vector<double>* per_sample_mse = nullptr) {
  if (samples.empty()) throw UsageError("evaluate: empty sample set");
  std::vector<double> mses(samples.size()), rels(samples.size());
  auto work = [&](std::size_t i) {
    const Sample& s = *samples[i];
    ForwardResult r = forward(net, pack_field(s.phi0), nullptr);
    const auto& pred = r.phiM().values();
    const auto& truth = s.phiT.values;
    double se = 0.0, tn = 0.0, dn = 0.0;
    for (std::size_t j = 0; j < truth.size(); ++j) {
      double d = pred[j] - truth[j];
      se += d * d;
      dn += d * d;
      tn += truth[j] * truth[j];
    }
    mses[i] = se / double(truth.size());
    rels[i] = tn > 0.0 ? std::sqrt(dn / tn) : -1.0;  // -1 marks a zero-norm truth
  };
  if (pool)
    pool->for_each_index(samples.size(), work);
  else
    for (std::size_t i = 0; i < samples.size(); ++i) work(i);

  EvalMetrics out;
  out.count = samples.size();
  double mse_acc = 0.0, rel_acc = 0.0;
  std::size_t rel_n = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    mse_acc += mses[i];
    if (rels[i] >= 0.0) {
      rel_acc += rels[i];
      ++rel_n;
    } else {
      ++out.skipped;
    }
  }
  out.mse = mse_acc / double(samples.size());
  out.rel_l2 = rel_n > 0 ? rel_acc / double(rel_n) : 0.0;
  if (per_sample_rel) *per_sample_rel = rels;
  if (per_sample_mse) *per_sample_mse = mses;
  return out;
}

// ---- training loop ----

struct EpochMetrics {
  int epoch = 0;
  double lr = 0.0;
  double train_mse = 0.0;
  bool evaluated = false;
  double test_mse = std::numeric_limits<double>::quiet_NaN();
  double test_rel_l2 = std::numeric_limits<double>::quiet_NaN();
};

struct TrainResult {
  std::vector<EpochMetrics> log;
  int best_epoch = -1;
  double best_test_mse = std::numeric_limits<double>::infinity();
  double final_test_mse = 0.0;   // of the restored best weights
  double final_test_rel_l2 = 0.0;
  std::size_t train_count = 0, test_count = 0;
};

namespace detail {
// in-training audit: the modified energy must not increase across any block
inline void audit_decay(const EStableNet& net, const ForwardResult& r, int b) {
  double tol = 1e-10;
  Grid g = grid_of_tensor(r.phi[0]);
  double prev = 0.0;
  for (std::size_t n = 0; n < r.phi.size(); ++n) {
    Field phi = tensor_item_field(r.phi[n], b);
    Field u = tensor_item_field(r.u[n], b);
    double e = net.kind == NetKind::estable_g ? discrete_energy(phi, u, net.C)
                                              : discrete_energy_new(u, net.C);
    if (n > 0 && e > prev + tol)
      throw InvariantViolation("training: modified energy increased across block " +
                               std::to_string(n) + " (" + std::to_string(prev) + " -> " +
                               std::to_string(e) + ")");
    prev = e;
  }
  (void)g;
}
}  // namespace detail

// Trains in place. Best-by-test weights are restored into `net` on return and
// saved to checkpoint_path (when nonempty) every time the best improves.
inline TrainResult train(EStableNet& net, const Dataset& data, const TrainConfig& cfg,
                         const std::string& checkpoint_path = "",
                         std::ostream* progress = nullptr) {
  if (cfg.lr0 <= 0) throw UsageError("train: lr0 must be positive");
  if (cfg.batch_size < 1) throw UsageError("train: batch_size must be >= 1");
  if (cfg.epochs < 1) throw UsageError("train: epochs must be >= 1");
  if (cfg.halve_every < 1 || cfg.restart_every < 1)
    throw UsageError("train: halve_every and restart_every must be >= 1");
  if (cfg.halve_every > cfg.restart_every)
    throw UsageError("train: halve_every must not exceed restart_every");
  if (cfg.eval_every < 1) throw UsageError("train: eval_every must be >= 1");
  if (data.grid.dims != net.dims) throw DataError("train: dataset/network dimension mismatch");

  auto [n_train, n_test] = split_counts(data.samples.size(), cfg.train_fraction);
  if (n_train == 0) throw UsageError("train: empty training split");
  if (n_test == 0) throw UsageError("train: empty test split");

  std::vector<const Sample*> test_set;
  for (std::size_t i = n_train; i < data.samples.size(); ++i) test_set.push_back(&data.samples[i]);

  // fixed per-sample input/target tensors
  std::vector<ad::Tensor> inputs(n_train), targets(n_train);
  for (std::size_t i = 0; i < n_train; ++i) {
    inputs[i] = pack_field(data.samples[i].phi0);
    targets[i] = pack_field(data.samples[i].phiT);
  }

  WorkerPool pool(cfg.workers);
  auto params = net.parameters();
  AdamState adam;
  adam.init(params);

  TrainResult result;
  result.train_count = n_train;
  result.test_count = n_test;
  std::vector<std::vector<double>> best_values;
  long long step = 0;

  std::vector<std::size_t> order(n_train);
  for (std::size_t i = 0; i < n_train; ++i) order[i] = i;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double lr = lr_at(epoch, cfg);
    seeded_shuffle(order, derive_seed(cfg.seed, std::uint64_t(epoch)));

    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n_train; start += std::size_t(cfg.batch_size)) {
      std::size_t bsz = std::min(std::size_t(cfg.batch_size), n_train - start);
      std::vector<double> item_loss(bsz);
      std::vector<std::vector<std::vector<double>>> item_grads(bsz);
      bool audit = cfg.energy_check_every > 0 && step % cfg.energy_check_every == 0 &&
                   net.kind != NetKind::plain;

      pool.for_each_index(bsz, [&](std::size_t bi) {
        std::size_t idx = order[start + bi];
        ad::Tape tape(false);  // unbound: gradients stay tape-local per item
        ForwardResult r = forward(net, inputs[idx], &tape);
        ad::Tensor loss = mse_loss(r.phiM(), targets[idx]);
        item_loss[bi] = loss.scalar();
        if (audit) detail::audit_decay(net, r, 0);
        tape.backward(loss);
        auto& slots = item_grads[bi];
        slots.reserve(tape.watched().size());
        for (const auto& [p, node] : tape.watched()) {
          const auto& g = tape.grad(node);
          slots.push_back(g.empty() ? std::vector<double>(p->size(), 0.0) : g);
        }
      });

      // item-order reduction keeps results identical for any worker count
      for (auto* p : params) p->zero_grad();
      double inv_b = 1.0 / double(bsz);
      for (std::size_t bi = 0; bi < bsz; ++bi) {
        auto& slots = item_grads[bi];
        if (slots.size() != params.size())
          throw InvariantViolation("train: per-item gradient slot mismatch");
        for (std::size_t k = 0; k < params.size(); ++k)
          for (std::size_t i = 0; i < slots[k].size(); ++i) params[k]->grad[i] += slots[k][i];
      }
      for (auto* p : params)
        for (auto& gi : p->grad) gi *= inv_b;

      double batch_loss = 0.0;
      for (std::size_t bi = 0; bi < bsz; ++bi) batch_loss += item_loss[bi];
      if (!std::isfinite(batch_loss)) {
        if (!best_values.empty() && !checkpoint_path.empty()) {
          restore_values(net, best_values);
          save_checkpoint(net, checkpoint_path);
        }
        throw InvariantViolation("train: nonfinite loss at epoch " + std::to_string(epoch) +
                                 ", step " + std::to_string(step) +
                                 " (best checkpoint preserved)");
      }
      epoch_loss += batch_loss;
      adam_step(params, adam, lr, cfg.weight_decay);
      ++step;
    }

    EpochMetrics em;
    em.epoch = epoch;
    em.lr = lr;
    em.train_mse = epoch_loss / double(n_train);

    if (epoch % cfg.eval_every == 0 || epoch == cfg.epochs - 1) {
      EvalMetrics ev = evaluate(net, test_set, &pool);
      em.evaluated = true;
      em.test_mse = ev.mse;
      em.test_rel_l2 = ev.rel_l2;
      if (ev.mse < result.best_test_mse) {
        result.best_test_mse = ev.mse;
        result.best_epoch = epoch;
        best_values = snapshot_values(net);
        if (!checkpoint_path.empty()) save_checkpoint(net, checkpoint_path);
      }
    }
    result.log.push_back(em);

    if (progress && (em.evaluated || epoch % 10 == 0)) {
      auto& os = *progress;
      os << "epoch " << std::setw(5) << epoch << "  lr " << std::scientific
         << std::setprecision(3) << lr << "  train " << em.train_mse;
      if (em.evaluated)
        os << "  test " << em.test_mse << "  rel " << em.test_rel_l2
           << (result.best_epoch == epoch ? "  *" : "");
      os << std::defaultfloat << '\n';
    }
  }

  if (!best_values.empty()) restore_values(net, best_values);
  EvalMetrics fin = evaluate(net, test_set, &pool);
  result.final_test_mse = fin.mse;
  result.final_test_rel_l2 = fin.rel_l2;
  return result;
}

}  // namespace esnet
