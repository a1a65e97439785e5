#pragma once

// Block networks. Every block carries a small conv net (circular padding,
// channels 1-16-1-16-1 by default, tanh between layers, linear last layer);
// the three update rules share that trunk and differ in how the block output
// enters the state update:
//
//   estable-g : g = net(phi^n), the learned reciprocal of the implicit-step
//               denominator, used in BOTH updates of the same block:
//                 U^{n+1}   = g .* G^{-1} phi^n
//                 phi^{n+1} = phi^n + 2 g .* (U^{n+1} - U^n)
//               This makes  E~^{n+1} - E~^n = -||phi^{n+1}-phi^n||^2/2
//                                             -||U^{n+1}-U^n||^2
//               an algebraic identity for ANY g.
//   aux-tilde : H = net(phi^n), denom = 1 + (dt/2) H^2,
//                 phi^{n+1} = phi^n - dt*(H/denom) .* U~^n
//                 U~^{n+1}  = U~^n ./ denom
//               |U~| shrinks pointwise, so E~_new is monotone by construction.
//   plain     : phi^{n+1} = net(phi^n), no auxiliary state, no guarantee.

#include <array>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "esnet/autodiff.hpp"
#include "esnet/auxiliary.hpp"
#include "esnet/binio.hpp"
#include "esnet/grid.hpp"
#include "esnet/rng.hpp"
#include "esnet/spectral.hpp"

namespace esnet {

enum class NetKind { estable_g, aux_tilde, plain };
enum class InitScheme { xavier_uniform, kaiming_uniform };

inline const char* to_string(NetKind k) {
  switch (k) {
    case NetKind::estable_g: return "estable-g";
    case NetKind::aux_tilde: return "aux-tilde";
    default: return "plain";
  }
}
inline NetKind net_kind_from(const std::string& s) {
  if (s == "estable-g") return NetKind::estable_g;
  if (s == "aux-tilde") return NetKind::aux_tilde;
  if (s == "plain") return NetKind::plain;
  throw UsageError("unknown network kind '" + s + "' (estable-g | aux-tilde | plain)");
}

inline const char* to_string(InitScheme s) {
  return s == InitScheme::xavier_uniform ? "xavier-uniform" : "kaiming-uniform";
}
inline InitScheme init_scheme_from(const std::string& s) {
  if (s == "xavier-uniform") return InitScheme::xavier_uniform;
  if (s == "kaiming-uniform") return InitScheme::kaiming_uniform;
  throw UsageError("unknown init scheme '" + s + "' (xavier-uniform | kaiming-uniform)");
}

inline GInverseKind g_inverse_from(const std::string& s) {
  if (s == "identity") return GInverseKind::identity;
  if (s == "inverse-neg-laplacian") return GInverseKind::inverse_neg_laplacian;
  throw UsageError("unknown g-inverse '" + s + "' (identity | inverse-neg-laplacian)");
}

struct ConvLayer {
  int in_ch = 0, out_ch = 0, k = 0;
  ad::Parameter w, b;
};

struct Block {
  std::vector<ConvLayer> layers;
};

struct EStableNet {
  NetKind kind = NetKind::estable_g;
  GInverseKind g_inverse_kind = GInverseKind::identity;
  int dims = 1;
  int kernel = 21;
  std::vector<int> channels{1, 16, 1, 16, 1};
  double epsilon = 0.01;
  double C = 0.0;        // stabilizing shift (doubles as C~ for aux-tilde)
  double dt = 1.25;      // t_end / M, used by the aux-tilde update
  std::vector<Block> blocks;

  int block_count() const { return int(blocks.size()); }

  std::vector<ad::Parameter*> parameters() {
    std::vector<ad::Parameter*> out;
    for (auto& blk : blocks)
      for (auto& l : blk.layers) {
        out.push_back(&l.w);
        out.push_back(&l.b);
      }
    return out;
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& blk : blocks)
      for (const auto& l : blk.layers) n += l.w.size() + l.b.size();
    return n;
  }
};

inline EStableNet make_net(NetKind kind, int dims, int M, int kernel, std::vector<int> channels,
                           double epsilon, double C, double t_end,
                           GInverseKind ginv = GInverseKind::identity) {
  if (dims != 1 && dims != 2) throw UsageError("make_net: dims must be 1 or 2");
  if (M < 1) throw UsageError("make_net: need at least one block");
  if (kernel < 1 || kernel % 2 == 0) throw UsageError("make_net: kernel size must be odd");
  if (channels.size() < 2 || channels.front() != 1 || channels.back() != 1)
    throw UsageError("make_net: channel list must start and end at 1 (scalar field in/out)");
  for (int c : channels)
    if (c < 1) throw UsageError("make_net: channel counts must be positive");
  if (epsilon <= 0) throw UsageError("make_net: epsilon must be positive");
  if (t_end <= 0) throw UsageError("make_net: t_end must be positive");

  EStableNet net;
  net.kind = kind;
  net.g_inverse_kind = ginv;
  net.dims = dims;
  net.kernel = kernel;
  net.channels = channels;
  net.epsilon = epsilon;
  net.C = C;
  net.dt = t_end / M;
  net.blocks.resize(std::size_t(M));
  for (int j = 0; j < M; ++j) {
    auto& blk = net.blocks[std::size_t(j)];
    blk.layers.resize(channels.size() - 1);
    for (std::size_t l = 0; l + 1 < channels.size(); ++l) {
      ConvLayer& cl = blk.layers[l];
      cl.in_ch = channels[l];
      cl.out_ch = channels[l + 1];
      cl.k = kernel;
      std::string base = "block" + std::to_string(j) + ".conv" + std::to_string(l);
      ad::Shape ws = dims == 1 ? ad::Shape{cl.out_ch, cl.in_ch, kernel}
                               : ad::Shape{cl.out_ch, cl.in_ch, kernel, kernel};
      cl.w = ad::Parameter(base + ".w", ws);
      cl.b = ad::Parameter(base + ".b", ad::Shape{cl.out_ch});
    }
  }
  return net;
}

// Seeded fan-based init. Each parameter gets its own derived stream, so the
// result is independent of how many parameters precede it numerically and is
// reproducible across platforms.
inline void init_params(EStableNet& net, InitScheme scheme, std::uint64_t seed) {
  auto params = net.parameters();
  int kvol = net.kernel;
  if (net.dims == 2) kvol *= net.kernel;
  std::size_t idx = 0;
  for (auto& blk : net.blocks)
    for (auto& l : blk.layers) {
      double fan_in = double(l.in_ch) * kvol;
      double fan_out = double(l.out_ch) * kvol;
      {
        SplitMix64 rng(derive_seed(seed, idx++));
        double a = scheme == InitScheme::xavier_uniform ? std::sqrt(6.0 / (fan_in + fan_out))
                                                        : std::sqrt(6.0 / fan_in);
        for (auto& v : l.w.value) v = rng.uniform(-a, a);
      }
      {
        SplitMix64 rng(derive_seed(seed, idx++));
        if (scheme == InitScheme::xavier_uniform) {
          std::fill(l.b.value.begin(), l.b.value.end(), 0.0);
        } else {
          double a = 1.0 / std::sqrt(fan_in);
          for (auto& v : l.b.value) v = rng.uniform(-a, a);
        }
      }
    }
  (void)params;
}

// ---- tensor <-> field bridges ----

inline ad::Tensor pack_fields(const std::vector<const Field*>& fields) {
  if (fields.empty()) throw UsageError("pack_fields: empty batch");
  const Grid& g = fields[0]->grid;
  std::size_t sp = g.size();
  std::vector<double> vals(fields.size() * sp);
  for (std::size_t b = 0; b < fields.size(); ++b) {
    check_same_grid(g, fields[b]->grid, "pack_fields");
    std::copy(fields[b]->values.begin(), fields[b]->values.end(), vals.begin() + b * sp);
  }
  ad::Shape shape = g.dims == 1 ? ad::Shape{int(fields.size()), 1, g.n}
                                : ad::Shape{int(fields.size()), 1, g.n, g.n};
  return ad::Tensor::from(std::move(shape), std::move(vals));
}

inline ad::Tensor pack_field(const Field& f) { return pack_fields({&f}); }

inline Grid grid_of_tensor(const ad::Tensor& t) {
  if (t.shape.size() == 3) return Grid(1, t.shape[2]);
  if (t.shape.size() == 4) {
    if (t.shape[2] != t.shape[3])
      throw DataError("grid_of_tensor: 2D tensors must be square, got " + ad::shape_str(t.shape));
    return Grid(2, t.shape[2]);
  }
  throw DataError("grid_of_tensor: expected rank 3 or 4, got " + ad::shape_str(t.shape));
}

// extract batch item b (channel 0) as a Field
inline Field tensor_item_field(const ad::Tensor& t, int b) {
  Grid g = grid_of_tensor(t);
  if (t.shape[1] != 1) throw DataError("tensor_item_field: expected a single channel");
  Field f(g);
  std::size_t sp = g.size();
  std::copy(t.data->begin() + std::size_t(b) * sp, t.data->begin() + (std::size_t(b) + 1) * sp,
            f.values.begin());
  return f;
}

// ---- G^{-1} as a differentiable op ----

namespace detail {
inline void apply_ginv_batch(const std::vector<double>& in, std::vector<double>& out,
                             const Grid& g, int batch, bool project_mean) {
  std::size_t sp = g.size();
  for (int b = 0; b < batch; ++b) {
    Field f(g);
    std::copy(in.begin() + std::size_t(b) * sp, in.begin() + (std::size_t(b) + 1) * sp,
              f.values.begin());
    if (project_mean) {
      double m = 0.0;
      for (double v : f.values) m += v;
      m /= double(sp);
      for (auto& v : f.values) v -= m;
    }
    Field r = g_inverse(f, GInverseKind::inverse_neg_laplacian);
    std::copy(r.values.begin(), r.values.end(), out.begin() + std::size_t(b) * sp);
  }
}
}  // namespace detail

// identity is a no-op; the spectral branch applies (-Lap)^{-1} per batch item.
// That operator is self-adjoint on the zero-mean subspace, so the pull-back is
// the same transform applied to the (mean-projected) upstream gradient.
inline ad::Tensor apply_g_inverse(const ad::Tensor& x, GInverseKind kind) {
  if (kind == GInverseKind::identity) return x;
  Grid g = grid_of_tensor(x);
  if (x.shape[1] != 1) throw DataError("apply_g_inverse: expected a single channel");
  int B = x.shape[0];
  auto vals = std::make_shared<std::vector<double>>(x.size());
  detail::apply_ginv_batch(*x.data, *vals, g, B, false);
  ad::Tape* tp = ad::detail::result_tape({&x}, "apply_g_inverse");
  int xn = x.node;
  auto back = [xn, g, B](ad::Tape& t, int self) {
    if (xn < 0) return;
    const auto& gr = t.grad_buffer(self);
    auto& gx = t.grad_buffer(xn);
    std::vector<double> tmp(gr.size());
    detail::apply_ginv_batch(gr, tmp, g, B, true);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += tmp[i];
  };
  return ad::detail::make_result(x.shape, std::move(vals), tp, std::move(back));
}

// ---- forward evaluation ----

// parameter tensors for one evaluation; tracked when a tape is supplied
struct BoundNet {
  EStableNet* net = nullptr;
  std::vector<std::vector<std::array<ad::Tensor, 2>>> wb;  // [block][layer] -> {w, b}
};

inline BoundNet bind(EStableNet& net, ad::Tape* tape) {
  BoundNet bn;
  bn.net = &net;
  bn.wb.resize(net.blocks.size());
  for (std::size_t j = 0; j < net.blocks.size(); ++j) {
    auto& blk = net.blocks[j];
    bn.wb[j].reserve(blk.layers.size());
    for (auto& l : blk.layers) {
      if (tape)
        bn.wb[j].push_back({tape->watch(l.w), tape->watch(l.b)});
      else
        bn.wb[j].push_back({ad::Tensor::from(l.w.shape, l.w.value),
                            ad::Tensor::from(l.b.shape, l.b.value)});
    }
  }
  return bn;
}

inline ad::Tensor block_net_forward(const BoundNet& bn, int block, const ad::Tensor& phi) {
  const auto& layers = bn.wb[std::size_t(block)];
  ad::Tensor h = phi;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    h = ad::conv_circular(h, layers[l][0], layers[l][1]);
    if (l + 1 < layers.size()) h = ad::tanh(h);
  }
  return h;
}

struct ForwardResult {
  std::vector<ad::Tensor> phi;  // M+1 states, phi[0] is the input
  std::vector<ad::Tensor> u;    // M+1 auxiliary states (zeros for plain)
  std::vector<ad::Tensor> g;    // M block-net outputs
  const ad::Tensor& phiM() const { return phi.back(); }
};

// initial auxiliary state, computed per batch item outside the graph (it is a
// function of the fixed input only)
inline ad::Tensor initial_aux(const EStableNet& net, const ad::Tensor& phi0) {
  if (net.kind == NetKind::plain) return ad::Tensor::zeros(phi0.shape);
  int B = phi0.shape[0];
  std::vector<double> vals(phi0.size());
  Grid g = grid_of_tensor(phi0);
  std::size_t sp = g.size();
  for (int b = 0; b < B; ++b) {
    Field f = tensor_item_field(phi0, b);
    Field u = net.kind == NetKind::estable_g ? aux_u_init(f, net.epsilon, net.C)
                                             : aux_utilde_init(f, net.epsilon, net.C);
    std::copy(u.values.begin(), u.values.end(), vals.begin() + std::size_t(b) * sp);
  }
  return ad::Tensor::from(phi0.shape, std::move(vals));
}

inline ForwardResult forward(EStableNet& net, const ad::Tensor& phi0, ad::Tape* tape = nullptr) {
  Grid g = grid_of_tensor(phi0);
  if (g.dims != net.dims)
    throw DataError("forward: " + std::to_string(g.dims) + "D input into a " +
                    std::to_string(net.dims) + "D network");
  if (phi0.shape[1] != 1) throw DataError("forward: expected a single input channel");

  BoundNet bn = bind(net, tape);
  ForwardResult r;
  r.phi.push_back(phi0);
  r.u.push_back(initial_aux(net, phi0));

  for (int j = 0; j < net.block_count(); ++j) {
    const ad::Tensor& phi = r.phi.back();
    const ad::Tensor& u = r.u.back();
    ad::Tensor out = block_net_forward(bn, j, phi);
    r.g.push_back(out);
    switch (net.kind) {
      case NetKind::estable_g: {
        // same g in both updates — that is what makes the decay exact
        ad::Tensor ginv_phi = apply_g_inverse(phi, net.g_inverse_kind);
        ad::Tensor u1 = ad::mul(out, ginv_phi);
        ad::Tensor phi1 = ad::add(phi, ad::scale(ad::mul(out, ad::sub(u1, u)), 2.0));
        r.u.push_back(std::move(u1));
        r.phi.push_back(std::move(phi1));
        break;
      }
      case NetKind::aux_tilde: {
        ad::Tensor denom = ad::add_scalar(ad::scale(ad::mul(out, out), 0.5 * net.dt), 1.0);
        ad::Tensor u1 = ad::div(u, denom);
        ad::Tensor phi1 =
            ad::sub(phi, ad::scale(ad::mul(ad::div(out, denom), u), net.dt));
        r.u.push_back(std::move(u1));
        r.phi.push_back(std::move(phi1));
        break;
      }
      case NetKind::plain: {
        r.u.push_back(ad::Tensor::zeros(phi0.shape));
        r.phi.push_back(out);
        break;
      }
    }
  }
  return r;
}

// ---- parameter snapshots (best-checkpoint bookkeeping) ----

inline std::vector<std::vector<double>> snapshot_values(EStableNet& net) {
  std::vector<std::vector<double>> out;
  for (auto* p : net.parameters()) out.push_back(p->value);
  return out;
}

inline void restore_values(EStableNet& net, const std::vector<std::vector<double>>& vals) {
  auto params = net.parameters();
  if (params.size() != vals.size()) throw UsageError("restore_values: snapshot size mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = vals[i];
}

// ---- checkpoints ----
// magic "ESNETCK1" | version | kind | g_inverse | dims | M | kernel |
// channel count + channels | epsilon | C | dt | param count | params
// (declaration order: blocks, layers, weight then bias)

inline void save_checkpoint(EStableNet& net, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("save_checkpoint: cannot open " + path);
  bin::put_magic(os, "ESNETCK1");
  bin::put_u32(os, 1);
  bin::put_u32(os, std::uint32_t(net.kind));
  bin::put_u32(os, std::uint32_t(net.g_inverse_kind));
  bin::put_u32(os, std::uint32_t(net.dims));
  bin::put_u32(os, std::uint32_t(net.blocks.size()));
  bin::put_u32(os, std::uint32_t(net.kernel));
  bin::put_u32(os, std::uint32_t(net.channels.size()));
  for (int c : net.channels) bin::put_u32(os, std::uint32_t(c));
  bin::put_f64(os, net.epsilon);
  bin::put_f64(os, net.C);
  bin::put_f64(os, net.dt);
  bin::put_u64(os, net.parameter_count());
  for (auto* p : net.parameters()) bin::put_f64_array(os, p->value.data(), p->size());
  if (!os) throw DataError("save_checkpoint: write failed for " + path);
}

inline EStableNet load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("load_checkpoint: cannot open " + path);
  bin::expect_magic(is, "ESNETCK1", "checkpoint");
  std::uint32_t version = bin::get_u32(is, "checkpoint version");
  if (version != 1)
    throw DataError("load_checkpoint: unsupported version " + std::to_string(version));
  auto kind = NetKind(bin::get_u32(is, "kind"));
  auto ginv = GInverseKind(bin::get_u32(is, "g_inverse"));
  int dims = int(bin::get_u32(is, "dims"));
  int M = int(bin::get_u32(is, "blocks"));
  int kernel = int(bin::get_u32(is, "kernel"));
  std::uint32_t nch = bin::get_u32(is, "channel count");
  if (nch < 2 || nch > 64) throw DataError("load_checkpoint: implausible channel count");
  std::vector<int> channels(nch);
  for (auto& c : channels) c = int(bin::get_u32(is, "channel"));
  double epsilon = bin::get_f64(is, "epsilon");
  double C = bin::get_f64(is, "C");
  double dt = bin::get_f64(is, "dt");
  std::uint64_t pcount = bin::get_u64(is, "param count");

  EStableNet net;
  try {
    net = make_net(kind, dims, M, kernel, channels, epsilon, C, dt * M, ginv);
  } catch (const UsageError& e) {
    throw DataError(std::string("load_checkpoint: bad header: ") + e.what());
  }
  net.dt = dt;  // keep the stored value bit-exactly
  if (net.parameter_count() != pcount)
    throw DataError("load_checkpoint: parameter count " + std::to_string(pcount) +
                    " does not match architecture (" + std::to_string(net.parameter_count()) +
                    ")");
  for (auto* p : net.parameters()) bin::get_f64_array(is, p->value.data(), p->size(), p->name.c_str());
  char extra;
  if (is.read(&extra, 1)) throw DataError("load_checkpoint: trailing bytes");
  return net;
}

}  // namespace esnet
