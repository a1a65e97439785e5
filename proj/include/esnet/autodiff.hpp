#pragma once

// Define-by-run reverse-mode autodiff. A Tape owns an append-only node list;
// creation order is already a topological order, so backward() is a single
// reverse sweep that calls each node's pull-back once. Gradient buffers are
// allocated lazily: nodes the loss never reached cost nothing and read as
// zero. Ops compute values identically whether or not a tape is attached —
// an untracked forward is bitwise equal to a tracked one.
//
// Tensors are dense f64, shape {batch, channels, n} or {batch, channels, n, n}
// (scalars use shape {}). conv_circular is cross-correlation with periodic
// wrap, odd kernels, stride 1 — output spatial size equals input size.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "esnet/errors.hpp"

namespace esnet::ad {

using Shape = std::vector<int>;

inline std::size_t numel(const Shape& s) {
  std::size_t n = 1;
  for (int d : s) n *= std::size_t(d);
  return n;
}

inline std::string shape_str(const Shape& s) {
  std::string out = "{";
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
  return out + "}";
}

class Tape;

struct Tensor {
  Shape shape;
  std::shared_ptr<std::vector<double>> data;
  Tape* tape = nullptr;
  int node = -1;

  Tensor() = default;

  static Tensor from(Shape s, std::vector<double> v) {
    if (numel(s) != v.size())
      throw DataError("Tensor::from: " + std::to_string(v.size()) + " values for shape " +
                      shape_str(s));
    Tensor t;
    t.shape = std::move(s);
    t.data = std::make_shared<std::vector<double>>(std::move(v));
    return t;
  }
  static Tensor zeros(Shape s) { return full(std::move(s), 0.0); }
  static Tensor full(Shape s, double v) {
    Tensor t;
    t.data = std::make_shared<std::vector<double>>(numel(s), v);
    t.shape = std::move(s);
    return t;
  }

  bool tracked() const { return node >= 0; }
  std::size_t size() const { return data ? data->size() : 0; }
  const std::vector<double>& values() const { return *data; }
  std::vector<double>& values() { return *data; }
  double scalar() const {
    if (size() != 1) throw DataError("Tensor::scalar on shape " + shape_str(shape));
    return (*data)[0];
  }
};

struct Parameter {
  std::string name;
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;

  Parameter() = default;
  Parameter(std::string n, Shape s)
      : name(std::move(n)), shape(std::move(s)), value(numel(shape), 0.0),
        grad(numel(shape), 0.0) {}

  std::size_t size() const { return value.size(); }
  void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }
};

class Tape {
 public:
  // bind=false records the (parameter, leaf) pairing but backward() will not
  // write into Parameter::grad — callers read per-tape gradients via grad()
  // instead. Worker threads use that to keep shared parameters read-only.
  explicit Tape(bool bind_parameters = true) : bind_(bind_parameters) {}

  Tensor watch(Parameter& p) {
    Tensor t = make_leaf(p.shape, p.value);
    watched_.emplace_back(&p, t.node);
    return t;
  }

  // tracked leaf copy of an arbitrary tensor (for gradient checks)
  Tensor watch(const Tensor& v) {
    if (!v.data) throw DataError("watch: empty tensor");
    return make_leaf(v.shape, *v.data);
  }

  void backward(const Tensor& loss) {
    if (!loss.tracked() || loss.tape != this)
      throw UsageError("backward: loss is not tracked on this tape");
    if (numel(loss.shape) != 1) throw UsageError("backward: loss must be scalar");
    if (swept_) throw UsageError("backward: tape already swept");
    swept_ = true;
    grad_buffer(loss.node)[0] = 1.0;
    for (int id = loss.node; id >= 0; --id) {
      Node& nd = nodes_[std::size_t(id)];
      if (!nd.grad.empty() && nd.back) nd.back(*this, id);
      nd.back = nullptr;  // release captured values as the sweep retires nodes
    }
    if (bind_)
      for (auto& [p, node] : watched_) {
        const auto& g = nodes_[std::size_t(node)].grad;
        if (g.empty()) continue;  // never reached by the loss: zero contribution
        for (std::size_t i = 0; i < g.size(); ++i) p->grad[i] += g[i];
      }
  }

  // gradient of a leaf/node after backward(); empty if the loss never reached it
  const std::vector<double>& grad(int node) const {
    return nodes_[std::size_t(node)].grad;
  }

  const std::vector<std::pair<Parameter*, int>>& watched() const { return watched_; }

  // --- graph construction (used by the op implementations) ---
  int add_node(std::size_t ne, std::function<void(Tape&, int)> back) {
    nodes_.push_back(Node{std::move(back), {}, ne});
    return int(nodes_.size()) - 1;
  }
  std::vector<double>& grad_buffer(int node) {
    Node& nd = nodes_[std::size_t(node)];
    if (nd.grad.empty()) nd.grad.assign(nd.numel, 0.0);
    return nd.grad;
  }

 private:
  Tensor make_leaf(const Shape& s, const std::vector<double>& v) {
    Tensor t;
    t.shape = s;
    t.data = std::make_shared<std::vector<double>>(v);
    t.tape = this;
    t.node = add_node(v.size(), nullptr);
    return t;
  }

  struct Node {
    std::function<void(Tape&, int)> back;  // null for leaves
    std::vector<double> grad;              // lazily allocated
    std::size_t numel = 0;
  };
  std::vector<Node> nodes_;
  std::vector<std::pair<Parameter*, int>> watched_;
  bool bind_ = true;
  bool swept_ = false;
};

namespace detail {

inline Tape* result_tape(std::initializer_list<const Tensor*> ins, const char* op) {
  Tape* t = nullptr;
  for (const Tensor* x : ins) {
    if (!x->tracked()) continue;
    if (t && t != x->tape) throw UsageError(std::string(op) + ": inputs from different tapes");
    t = x->tape;
  }
  return t;
}

inline Tensor make_result(Shape s, std::shared_ptr<std::vector<double>> vals, Tape* tape,
                          std::function<void(Tape&, int)> back) {
  Tensor out;
  out.shape = std::move(s);
  out.data = std::move(vals);
  if (tape) {
    out.tape = tape;
    out.node = tape->add_node(out.data->size(), std::move(back));
  }
  return out;
}

inline void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape != b.shape)
    throw DataError(std::string(op) + ": shape mismatch " + shape_str(a.shape) + " vs " +
                    shape_str(b.shape));
}

}  // namespace detail

// ---- elementwise ops ----

inline Tensor add(const Tensor& a, const Tensor& b) {
  detail::check_same_shape(a, b, "add");
  auto vals = std::make_shared<std::vector<double>>(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) (*vals)[i] = (*a.data)[i] + (*b.data)[i];
  Tape* tp = detail::result_tape({&a, &b}, "add");
  int an = a.node, bn = b.node;
  return detail::make_result(a.shape, std::move(vals), tp, [an, bn](Tape& t, int self) {
    const auto& g = t.grad_buffer(self);
    if (an >= 0) {
      auto& ga = t.grad_buffer(an);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    }
    if (bn >= 0) {
      auto& gb = t.grad_buffer(bn);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
    }
  });
}

inline Tensor sub(const Tensor& a, const Tensor& b) {
  detail::check_same_shape(a, b, "sub");
  auto vals = std::make_shared<std::vector<double>>(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) (*vals)[i] = (*a.data)[i] - (*b.data)[i];
  Tape* tp = detail::result_tape({&a, &b}, "sub");
  int an = a.node, bn = b.node;
  return detail::make_result(a.shape, std::move(vals), tp, [an, bn](Tape& t, int self) {
    const auto& g = t.grad_buffer(self);
    if (an >= 0) {
      auto& ga = t.grad_buffer(an);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    }
    if (bn >= 0) {
      auto& gb = t.grad_buffer(bn);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
    }
  });
}

inline Tensor mul(const Tensor& a, const Tensor& b) {
  detail::check_same_shape(a, b, "mul");
  auto vals = std::make_shared<std::vector<double>>(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) (*vals)[i] = (*a.data)[i] * (*b.data)[i];
  Tape* tp = detail::result_tape({&a, &b}, "mul");
  int an = a.node, bn = b.node;
  auto ad_ = a.data, bd_ = b.data;
  return detail::make_result(a.shape, std::move(vals), tp, [an, bn, ad_, bd_](Tape& t, int self) {
    const auto& g = t.grad_buffer(self);
    if (an >= 0) {
      auto& ga = t.grad_buffer(an);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * (*bd_)[i];
    }
    if (bn >= 0) {
      auto& gb = t.grad_buffer(bn);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * (*ad_)[i];
    }
  });
}

inline Tensor div(const Tensor& a, const Tensor& b) {
  detail::check_same_shape(a, b, "div");
  auto vals = std::make_shared<std::vector<double>>(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) (*vals)[i] = (*a.data)[i] / (*b.data)[i];
  Tape* tp = detail::result_tape({&a, &b}, "div");
  int an = a.node, bn = b.node;
  auto ad_ = a.data, bd_ = b.data;
  return detail::make_result(a.shape, std::move(vals), tp, [an, bn, ad_, bd_](Tape& t, int self) {
    const auto& g = t.grad_buffer(self);
    if (an >= 0) {
      auto& ga = t.grad_buffer(an);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] / (*bd_)[i];
    }
    if (bn >= 0) {
      auto& gb = t.grad_buffer(bn);
      for (std::size_t i = 0; i < g.size(); ++i) {
        double bi = (*bd_)[i];
        gb[i] -= g[i] * (*ad_)[i] / (bi * bi);
      }
    }
  });
}

inline Tensor tanh(const Tensor& a) {
  auto vals = std::make_shared<std::vector<double>>(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) (*vals)[i] = std::tanh((*a.data)[i]);
  Tape* tp = detail::result_tape({&a}, "tanh");
  int an = a.node;
  auto yd = vals;  // pull-back needs the output values
  return detail::make_result(a.shape, std::move(vals), tp, [an, yd](Tape& t, int self) {
    if (an < 0) return;
    const auto& g = t.grad_buffer(self);
    auto& ga = t.grad_buffer(an);
    for (std::size_t i = 0; i < g.size(); ++i) {
      double y = (*yd)[i];
      ga[i] += g[i] * (1.0 - y * y);
    }
  });
}

inline Tensor scale(const Tensor& a, double c) {
  auto vals = std::make_shared<std::vector<double>>(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) (*vals)[i] = c * (*a.data)[i];
  Tape* tp = detail::result_tape({&a}, "scale");
  int an = a.node;
  return detail::make_result(a.shape, std::move(vals), tp, [an, c](Tape& t, int self) {
    if (an < 0) return;
    const auto& g = t.grad_buffer(self);
    auto& ga = t.grad_buffer(an);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += c * g[i];
  });
}

inline Tensor add_scalar(const Tensor& a, double c) {
  auto vals = std::make_shared<std::vector<double>>(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) (*vals)[i] = (*a.data)[i] + c;
  Tape* tp = detail::result_tape({&a}, "add_scalar");
  int an = a.node;
  return detail::make_result(a.shape, std::move(vals), tp, [an](Tape& t, int self) {
    if (an < 0) return;
    const auto& g = t.grad_buffer(self);
    auto& ga = t.grad_buffer(an);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
  });
}

// mean of squares over every element; returns a scalar (shape {})
inline Tensor mean_sq(const Tensor& a) {
  if (a.size() == 0) throw DataError("mean_sq: empty tensor");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (*a.data)[i] * (*a.data)[i];
  auto vals = std::make_shared<std::vector<double>>(1, s / double(a.size()));
  Tape* tp = detail::result_tape({&a}, "mean_sq");
  int an = a.node;
  auto ad_ = a.data;
  return detail::make_result(Shape{}, std::move(vals), tp, [an, ad_](Tape& t, int self) {
    if (an < 0) return;
    double g0 = t.grad_buffer(self)[0];
    auto& ga = t.grad_buffer(an);
    double w = 2.0 * g0 / double(ad_->size());
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += w * (*ad_)[i];
  });
}

// ---- circular convolution ----

namespace detail {

// y[b,co,:] += sum_ci sum_t w[co,ci,t] * x[b,ci,(i+t-K/2) mod N]
// pad holds x wrapped so the inner loop is a straight fused multiply-add.
inline void conv1d_accumulate(const double* x, int B, int Ci, int N, const double* w, int Co,
                              int K, double* y) {
  int c = K / 2;
  std::vector<double> pad(std::size_t(N + K - 1));
  for (int b = 0; b < B; ++b) {
    for (int ci = 0; ci < Ci; ++ci) {
      const double* xr = x + (std::size_t(b) * Ci + ci) * N;
      for (int q = 0; q < N + K - 1; ++q) pad[std::size_t(q)] = xr[((q - c) % N + N) % N];
      for (int co = 0; co < Co; ++co) {
        const double* __restrict wr = w + (std::size_t(co) * Ci + ci) * K;
        double* __restrict yr = y + (std::size_t(b) * Co + co) * N;
        for (int t = 0; t < K; ++t) {
          double wt = wr[t];
          const double* __restrict xp = pad.data() + t;
          for (int i = 0; i < N; ++i) yr[i] += wt * xp[i];
        }
      }
    }
  }
}

// gw[co,ci,t] += sum_{b,i} gy[b,co,i] * x[b,ci,(i+t-K/2) mod N]
inline void conv1d_weight_grad(const double* x, const double* gy, int B, int Ci, int Co, int N,
                               int K, double* gw) {
  int c = K / 2;
  std::vector<double> pad(std::size_t(N + K - 1));
  for (int b = 0; b < B; ++b) {
    for (int ci = 0; ci < Ci; ++ci) {
      const double* xr = x + (std::size_t(b) * Ci + ci) * N;
      for (int q = 0; q < N + K - 1; ++q) pad[std::size_t(q)] = xr[((q - c) % N + N) % N];
      for (int co = 0; co < Co; ++co) {
        const double* __restrict gr = gy + (std::size_t(b) * Co + co) * N;
        double* gwr = gw + (std::size_t(co) * Ci + ci) * K;
        for (int t = 0; t < K; ++t) {
          const double* __restrict xp = pad.data() + t;
          double acc = 0.0;
          for (int i = 0; i < N; ++i) acc += gr[i] * xp[i];
          gwr[t] += acc;
        }
      }
    }
  }
}

inline void conv2d_accumulate(const double* x, int B, int Ci, int H, int W, const double* w,
                              int Co, int Kh, int Kw, double* y) {
  int ch = Kh / 2, cw = Kw / 2;
  int PH = H + Kh - 1, PW = W + Kw - 1;
  std::vector<double> pad(std::size_t(PH) * PW);
  for (int b = 0; b < B; ++b) {
    for (int ci = 0; ci < Ci; ++ci) {
      const double* xt = x + (std::size_t(b) * Ci + ci) * H * W;
      for (int r = 0; r < PH; ++r) {
        int sr = ((r - ch) % H + H) % H;
        double* pr = pad.data() + std::size_t(r) * PW;
        const double* xr = xt + std::size_t(sr) * W;
        for (int q = 0; q < PW; ++q) pr[q] = xr[((q - cw) % W + W) % W];
      }
      for (int co = 0; co < Co; ++co) {
        const double* wt = w + (std::size_t(co) * Ci + ci) * Kh * Kw;
        double* yt = y + (std::size_t(b) * Co + co) * H * W;
        for (int i = 0; i < H; ++i) {
          double* __restrict yr = yt + std::size_t(i) * W;
          for (int th = 0; th < Kh; ++th) {
            const double* pr = pad.data() + std::size_t(i + th) * PW;
            const double* wr = wt + std::size_t(th) * Kw;
            for (int tw = 0; tw < Kw; ++tw) {
              double wv = wr[tw];
              const double* __restrict xp = pr + tw;
              for (int j = 0; j < W; ++j) yr[j] += wv * xp[j];
            }
          }
        }
      }
    }
  }
}

inline void conv2d_weight_grad(const double* x, const double* gy, int B, int Ci, int Co, int H,
                               int W, int Kh, int Kw, double* gw) {
  int ch = Kh / 2, cw = Kw / 2;
  int PH = H + Kh - 1, PW = W + Kw - 1;
  std::vector<double> pad(std::size_t(PH) * PW);
  for (int b = 0; b < B; ++b) {
    for (int ci = 0; ci < Ci; ++ci) {
      const double* xt = x + (std::size_t(b) * Ci + ci) * H * W;
      for (int r = 0; r < PH; ++r) {
        int sr = ((r - ch) % H + H) % H;
        double* pr = pad.data() + std::size_t(r) * PW;
        const double* xr = xt + std::size_t(sr) * W;
        for (int q = 0; q < PW; ++q) pr[q] = xr[((q - cw) % W + W) % W];
      }
      for (int co = 0; co < Co; ++co) {
        const double* gt = gy + (std::size_t(b) * Co + co) * H * W;
        double* gwt = gw + (std::size_t(co) * Ci + ci) * Kh * Kw;
        for (int i = 0; i < H; ++i) {
          const double* __restrict gr = gt + std::size_t(i) * W;
          for (int th = 0; th < Kh; ++th) {
            const double* pr = pad.data() + std::size_t(i + th) * PW;
            double* gwr = gwt + std::size_t(th) * Kw;
            for (int tw = 0; tw < Kw; ++tw) {
              const double* __restrict xp = pr + tw;
              double acc = 0.0;
              for (int j = 0; j < W; ++j) acc += gr[j] * xp[j];
              gwr[tw] += acc;
            }
          }
        }
      }
    }
  }
}

// weights for the input-gradient pass: swap in/out channels and flip every
// spatial axis; then dx = conv(gy, w_flip)
inline std::vector<double> flip_transpose_weights(const std::vector<double>& w, int Co, int Ci,
                                                  int Kh, int Kw) {
  std::vector<double> out(w.size());
  for (int co = 0; co < Co; ++co)
    for (int ci = 0; ci < Ci; ++ci)
      for (int th = 0; th < Kh; ++th)
        for (int tw = 0; tw < Kw; ++tw)
          out[((std::size_t(ci) * Co + co) * Kh + (Kh - 1 - th)) * Kw + (Kw - 1 - tw)] =
              w[((std::size_t(co) * Ci + ci) * Kh + th) * Kw + tw];
  return out;
}

}  // namespace detail

// x {B,Ci,N} or {B,Ci,H,W}; w {Co,Ci,K} or {Co,Ci,Kh,Kw}; b {Co}.
// Periodic cross-correlation, odd kernels only, output spatial size == input.
inline Tensor conv_circular(const Tensor& x, const Tensor& w, const Tensor& b) {
  bool two_d = x.shape.size() == 4;
  if (x.shape.size() != 3 && x.shape.size() != 4)
    throw DataError("conv_circular: input must be {B,C,N} or {B,C,H,W}, got " +
                    shape_str(x.shape));
  if (w.shape.size() != x.shape.size())
    throw DataError("conv_circular: weight rank must match input rank");
  if (b.shape.size() != 1)
    throw DataError("conv_circular: bias must be rank 1");
  int B = x.shape[0], Ci = x.shape[1];
  int H = x.shape[2], W = two_d ? x.shape[3] : 1;
  int Co = w.shape[0];
  if (w.shape[1] != Ci)
    throw DataError("conv_circular: weight expects " + std::to_string(w.shape[1]) +
                    " input channels, input has " + std::to_string(Ci));
  int Kh = w.shape[2], Kw = two_d ? w.shape[3] : 1;
  if (Kh % 2 == 0 || (two_d && Kw % 2 == 0))
    throw DataError("conv_circular: kernel size must be odd");
  if (Kh > H || (two_d && Kw > W))
    throw DataError("conv_circular: kernel larger than the periodic domain");
  if (b.shape[0] != Co)
    throw DataError("conv_circular: bias size " + std::to_string(b.shape[0]) +
                    " != out channels " + std::to_string(Co));

  Shape out_shape = two_d ? Shape{B, Co, H, W} : Shape{B, Co, H};
  auto vals = std::make_shared<std::vector<double>>(numel(out_shape));
  std::size_t spatial = std::size_t(H) * W;
  for (int bi = 0; bi < B; ++bi)
    for (int co = 0; co < Co; ++co) {
      double bias = (*b.data)[std::size_t(co)];
      double* yr = vals->data() + (std::size_t(bi) * Co + co) * spatial;
      for (std::size_t i = 0; i < spatial; ++i) yr[i] = bias;
    }
  if (two_d)
    detail::conv2d_accumulate(x.data->data(), B, Ci, H, W, w.data->data(), Co, Kh, Kw,
                              vals->data());
  else
    detail::conv1d_accumulate(x.data->data(), B, Ci, H, w.data->data(), Co, Kh, vals->data());

  Tape* tp = detail::result_tape({&x, &w, &b}, "conv_circular");
  int xn = x.node, wn = w.node, bn = b.node;
  auto xd = x.data, wd = w.data;
  auto back = [=](Tape& t, int self) {
    const auto& g = t.grad_buffer(self);
    if (bn >= 0) {
      auto& gb = t.grad_buffer(bn);
      for (int bi = 0; bi < B; ++bi)
        for (int co = 0; co < Co; ++co) {
          const double* gr = g.data() + (std::size_t(bi) * Co + co) * spatial;
          double acc = 0.0;
          for (std::size_t i = 0; i < spatial; ++i) acc += gr[i];
          gb[std::size_t(co)] += acc;
        }
    }
    if (wn >= 0) {
      auto& gw = t.grad_buffer(wn);
      if (two_d)
        detail::conv2d_weight_grad(xd->data(), g.data(), B, Ci, Co, H, W, Kh, Kw, gw.data());
      else
        detail::conv1d_weight_grad(xd->data(), g.data(), B, Ci, Co, H, Kh, gw.data());
    }
    if (xn >= 0) {
      auto& gx = t.grad_buffer(xn);
      auto wt = detail::flip_transpose_weights(*wd, Co, Ci, Kh, Kw);
      if (two_d)
        detail::conv2d_accumulate(g.data(), B, Co, H, W, wt.data(), Ci, Kh, Kw, gx.data());
      else
        detail::conv1d_accumulate(g.data(), B, Co, H, wt.data(), Ci, Kh, gx.data());
    }
  };
  return detail::make_result(std::move(out_shape), std::move(vals), tp, std::move(back));
}

// ---- finite-difference gradient verification ----

struct GradCheckReport {
  double max_rel_err = 0.0;
  int worst_input = -1;
  std::size_t worst_coord = 0;
  double ad_grad = 0.0;
  double fd_grad = 0.0;
  bool passed(double tol) const { return max_rel_err <= tol; }
};

// f maps tensors to a scalar tensor. The AD gradient of every input coordinate
// is compared against central differences of an untracked evaluation.
inline GradCheckReport grad_check(
    const std::function<Tensor(const std::vector<Tensor>&)>& f, std::vector<Tensor> inputs,
    double step = 1e-5) {
  Tape tape;
  std::vector<Tensor> lifted;
  std::vector<int> leaves;
  lifted.reserve(inputs.size());
  for (const auto& in : inputs) {
    Tensor l = tape.watch(in);
    leaves.push_back(l.node);
    lifted.push_back(std::move(l));
  }
  Tensor loss = f(lifted);
  if (numel(loss.shape) != 1) throw UsageError("grad_check: f must return a scalar");
  tape.backward(loss);

  GradCheckReport rep;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const auto& gleaf = tape.grad(leaves[k]);
    for (std::size_t j = 0; j < inputs[k].size(); ++j) {
      double orig = (*inputs[k].data)[j];
      (*inputs[k].data)[j] = orig + step;
      double fp = f(inputs).scalar();
      (*inputs[k].data)[j] = orig - step;
      double fm = f(inputs).scalar();
      (*inputs[k].data)[j] = orig;
      double fd = (fp - fm) / (2.0 * step);
      double adg = gleaf.empty() ? 0.0 : gleaf[j];
      double rel = std::abs(adg - fd) / std::max({1.0, std::abs(adg), std::abs(fd)});
      if (rel > rep.max_rel_err) {
        rep.max_rel_err = rel;
        rep.worst_input = int(k);
        rep.worst_coord = j;
        rep.ad_grad = adg;
        rep.fd_grad = fd;
      }
    }
  }
  return rep;
}

}  // namespace esnet::ad
