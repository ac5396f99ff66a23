#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "dsmt/errors.hpp"
#include "dsmt/rng.hpp"
#include "dsmt/tensor.hpp"

namespace dsmt::ad {

struct NodeId {
    int32_t v = -1;
    bool valid() const { return v >= 0; }
};

enum class BnMode {
    Train,       // batch statistics, running statistics updated
    FrozenStats, // batch statistics, running statistics untouched (gradient checks)
    Eval         // running statistics only
};

enum class PadMode { Same, Valid };

// Reverse-mode tape over dense tensors. Ops append nodes in evaluation order,
// so the node list is already a topological order; backward() walks it once
// in reverse. Tensors are immutable once written.
template <class T>
class Tape {
    enum class Op : uint8_t {
        Input, Param, Add, Mul, Scale, Matmul, Conv1d, MaxPool1d,
        Gap, Relu, Tanh, Sigmoid, Concat, Slice, Dropout, BatchNorm, Reshape,
        ScatterRows, GatherRows, Sum, BceLoss, MseLoss
    };

    struct Node {
        Tensor<T> value;
        Tensor<T> grad;
        Op op = Op::Input;
        bool needs_grad = false;
        std::vector<int32_t> in;

        // op-specific attributes and saved state
        int64_t i0 = 0, i1 = 0, i2 = 0;
        double f0 = 0, f1 = 0;
        std::vector<int64_t> extents;  // reshape target / concat offsets
        std::vector<int32_t> idx;      // maxpool argmax, scatter rows
        std::vector<uint8_t> mask8;    // dropout mask
        std::vector<T> saved_a, saved_b, saved_c; // bn stats, loss labels/targets/masks
        T* ext_a = nullptr; // bn running mean
        T* ext_b = nullptr; // bn running var
    };

public:
    void clear() { nodes_.clear(); }
    int64_t size() const { return static_cast<int64_t>(nodes_.size()); }

    const Tensor<T>& value(NodeId id) const { return nodes_[id.v].value; }
    // Valid after backward(); zero-filled for unreached nodes.
    const Tensor<T>& grad(NodeId id) {
        Node& n = nodes_[id.v];
        if (n.grad.data.empty()) n.grad = Tensor<T>::zeros(n.value.shape);
        return n.grad;
    }
    // True when some backward() on this tape propagated into the node; nodes
    // the loss does not depend on are never reached. With one backward per
    // tape (the training convention) this distinguishes "gradient is zero"
    // from "gradient was never computed".
    bool reached(NodeId id) const { return !nodes_[static_cast<size_t>(id.v)].grad.data.empty(); }

    // Counts of op evaluations by loss kind, for training-isolation asserts.
    int64_t bce_nodes = 0;
    int64_t mse_nodes = 0;

    NodeId input(Tensor<T> v) {
        Node n;
        n.value = std::move(v);
        n.op = Op::Input;
        return push(std::move(n));
    }

    NodeId param(Tensor<T> v) {
        Node n;
        n.value = std::move(v);
        n.op = Op::Param;
        n.needs_grad = true;
        return push(std::move(n));
    }

    // elementwise add; also accepts a rank-1 bias broadcast over rows of a
    // rank-2 tensor, or a scalar ([1]) broadcast.
    NodeId add(NodeId a, NodeId b) {
        const Tensor<T>& ta = val(a);
        const Tensor<T>& tb = val(b);
        Node n;
        n.op = Op::Add;
        n.in = {a.v, b.v};
        if (ta.same_shape(tb)) {
            n.i0 = 0;
            n.value = ta;
            T* y = n.value.data.data();
            const T* x = tb.data.data();
            for (int64_t i = 0; i < tb.numel(); ++i) y[i] += x[i];
        } else if (ta.rank() == 2 && tb.rank() == 1 && ta.shape[1] == tb.shape[0]) {
            n.i0 = 1; // row-broadcast bias
            n.value = ta;
            const int64_t rows = ta.shape[0], cols = ta.shape[1];
            for (int64_t r = 0; r < rows; ++r) {
                T* y = n.value.data.data() + r * cols;
                const T* x = tb.data.data();
                for (int64_t c = 0; c < cols; ++c) y[c] += x[c];
            }
        } else if (tb.numel() == 1) {
            n.i0 = 2; // scalar broadcast
            n.value = ta;
            for (T& y : n.value.data) y += tb.data[0];
        } else {
            throw shape_error("add", ta, tb);
        }
        return push(std::move(n));
    }

    NodeId mul(NodeId a, NodeId b) {
        const Tensor<T>& ta = val(a);
        const Tensor<T>& tb = val(b);
        if (!ta.same_shape(tb)) throw shape_error("multiply", ta, tb);
        Node n;
        n.op = Op::Mul;
        n.in = {a.v, b.v};
        n.value = ta;
        for (int64_t i = 0; i < tb.numel(); ++i) n.value.data[i] *= tb.data[i];
        return push(std::move(n));
    }

    NodeId scale(NodeId a, double s) {
        Node n;
        n.op = Op::Scale;
        n.in = {a.v};
        n.f0 = s;
        n.value = val(a);
        for (T& y : n.value.data) y = static_cast<T>(y * s);
        return push(std::move(n));
    }

    // [N,A] x [A,B] -> [N,B]
    NodeId matmul(NodeId a, NodeId b) {
        const Tensor<T>& x = val(a);
        const Tensor<T>& w = val(b);
        if (x.rank() != 2 || w.rank() != 2 || x.shape[1] != w.shape[0])
            throw shape_error("matmul", x, w);
        const int64_t N = x.shape[0], A = x.shape[1], B = w.shape[1];
        Node n;
        n.op = Op::Matmul;
        n.in = {a.v, b.v};
        n.value = Tensor<T>::zeros({N, B});
        for (int64_t i = 0; i < N; ++i) {
            const T* xr = x.data.data() + i * A;
            T* yr = n.value.data.data() + i * B;
            for (int64_t k = 0; k < A; ++k) {
                const T xv = xr[k];
                const T* wr = w.data.data() + k * B;
                for (int64_t j = 0; j < B; ++j) yr[j] += xv * wr[j];
            }
        }
        return push(std::move(n));
    }

    // x: [N,Ci,L], w: [Co,Ci,K], bias: [Co]. stride >= 1.
    NodeId conv1d(NodeId xo, NodeId wo, NodeId bo, int64_t stride, PadMode pad) {
        const Tensor<T>& x = val(xo);
        const Tensor<T>& w = val(wo);
        const Tensor<T>& b = val(bo);
        if (x.rank() != 3 || w.rank() != 3 || x.shape[1] != w.shape[1])
            throw shape_error("conv1d", x, w);
        if (b.rank() != 1 || b.shape[0] != w.shape[0])
            throw shape_error("conv1d bias", w, b);
        if (stride < 1) throw Error::config("conv1d: stride must be >= 1");
        const int64_t N = x.shape[0], Ci = x.shape[1], L = x.shape[2];
        const int64_t Co = w.shape[0], K = w.shape[2];
        int64_t Lo, pl;
        if (pad == PadMode::Same) {
            Lo = (L + stride - 1) / stride;
            const int64_t total = std::max<int64_t>(0, (Lo - 1) * stride + K - L);
            pl = total / 2;
        } else {
            if (L < K)
                throw Error::config("conv1d: input length " + std::to_string(L) +
                                    " shorter than kernel " + std::to_string(K));
            Lo = (L - K) / stride + 1;
            pl = 0;
        }
        Node n;
        n.op = Op::Conv1d;
        n.in = {xo.v, wo.v, bo.v};
        n.i0 = stride;
        n.i1 = pl;
        n.value = Tensor<T>::zeros({N, Co, Lo});
        if (stride == 1 && K >= 1 && K <= 8) {
            switch (K) {
            case 1: conv_fwd_s1<1>(n.value, x, w, b, pl); break;
            case 2: conv_fwd_s1<2>(n.value, x, w, b, pl); break;
            case 3: conv_fwd_s1<3>(n.value, x, w, b, pl); break;
            case 4: conv_fwd_s1<4>(n.value, x, w, b, pl); break;
            case 5: conv_fwd_s1<5>(n.value, x, w, b, pl); break;
            case 6: conv_fwd_s1<6>(n.value, x, w, b, pl); break;
            case 7: conv_fwd_s1<7>(n.value, x, w, b, pl); break;
            case 8: conv_fwd_s1<8>(n.value, x, w, b, pl); break;
            }
            return push(std::move(n));
        }
        for (int64_t i = 0; i < N; ++i) {
            for (int64_t co = 0; co < Co; ++co) {
                T* y = &n.value.at(i, co, 0);
                const T bias = b.data[co];
                for (int64_t t = 0; t < Lo; ++t) y[t] = bias;
                for (int64_t ci = 0; ci < Ci; ++ci) {
                    const T* xr = &x.at(i, ci, 0);
                    const T* wr = &w.at(co, ci, 0);
                    if (stride == 1) {
                        for (int64_t k = 0; k < K; ++k) {
                            const T wv = wr[k];
                            const int64_t t0 = std::max<int64_t>(0, pl - k);
                            const int64_t t1 = std::min<int64_t>(Lo, L + pl - k);
                            const T* xs = xr + (t0 + k - pl);
                            for (int64_t t = t0; t < t1; ++t) y[t] += wv * xs[t - t0];
                        }
                    } else {
                        for (int64_t t = 0; t < Lo; ++t) {
                            const int64_t base = t * stride - pl;
                            T acc = 0;
                            for (int64_t k = 0; k < K; ++k) {
                                const int64_t s = base + k;
                                if (s >= 0 && s < L) acc += wr[k] * xr[s];
                            }
                            y[t] += acc;
                        }
                    }
                }
            }
        }
        return push(std::move(n));
    }

    NodeId max_pool1d(NodeId xo, int64_t kernel, int64_t stride) {
        const Tensor<T>& x = val(xo);
        if (x.rank() != 3) throw shape_error("max-pool1d", x);
        const int64_t N = x.shape[0], C = x.shape[1], L = x.shape[2];
        if (kernel < 1 || stride < 1 || L < kernel)
            throw Error::config("max-pool1d: invalid kernel/stride for length " + std::to_string(L));
        const int64_t Lo = (L - kernel) / stride + 1;
        Node n;
        n.op = Op::MaxPool1d;
        n.in = {xo.v};
        n.i0 = kernel;
        n.i1 = stride;
        n.value = Tensor<T>::zeros({N, C, Lo});
        n.idx.resize(static_cast<size_t>(N * C * Lo));
        int64_t o = 0;
        for (int64_t i = 0; i < N; ++i)
            for (int64_t c = 0; c < C; ++c) {
                const T* xr = &x.at(i, c, 0);
                for (int64_t t = 0; t < Lo; ++t, ++o) {
                    int64_t best = t * stride;
                    T bv = xr[best];
                    for (int64_t k = 1; k < kernel; ++k) {
                        const int64_t s = t * stride + k;
                        if (xr[s] > bv) { bv = xr[s]; best = s; }
                    }
                    n.value.data[static_cast<size_t>(o)] = bv;
                    n.idx[static_cast<size_t>(o)] = static_cast<int32_t>(best);
                }
            }
        return push(std::move(n));
    }

    // [N,C,L] -> [N,C] mean over time
    NodeId global_avg_pool(NodeId xo) {
        const Tensor<T>& x = val(xo);
        if (x.rank() != 3) throw shape_error("global-average-pool", x);
        const int64_t N = x.shape[0], C = x.shape[1], L = x.shape[2];
        Node n;
        n.op = Op::Gap;
        n.in = {xo.v};
        n.value = Tensor<T>::zeros({N, C});
        for (int64_t i = 0; i < N; ++i)
            for (int64_t c = 0; c < C; ++c) {
                const T* xr = &x.at(i, c, 0);
                T acc = 0;
                for (int64_t t = 0; t < L; ++t) acc += xr[t];
                n.value.at(i, c) = acc / static_cast<T>(L);
            }
        return push(std::move(n));
    }

    NodeId relu(NodeId a) { return unary(a, Op::Relu); }
    NodeId tanh_(NodeId a) { return unary(a, Op::Tanh); }
    NodeId sigmoid(NodeId a) { return unary(a, Op::Sigmoid); }

    // concat rank-2 tensors along axis 1
    NodeId concat(const std::vector<NodeId>& parts) {
        if (parts.empty()) throw Error::config("concat: no inputs");
        Node n;
        n.op = Op::Concat;
        int64_t rows = val(parts[0]).shape[0];
        int64_t cols = 0;
        for (NodeId p : parts) {
            const Tensor<T>& t = val(p);
            if (t.rank() != 2 || t.shape[0] != rows) throw shape_error("concat", t);
            n.extents.push_back(cols);
            cols += t.shape[1];
            n.in.push_back(p.v);
        }
        n.value = Tensor<T>::zeros({rows, cols});
        for (size_t pi = 0; pi < parts.size(); ++pi) {
            const Tensor<T>& t = val(parts[pi]);
            const int64_t off = n.extents[pi], w = t.shape[1];
            for (int64_t r = 0; r < rows; ++r)
                std::copy_n(t.data.data() + r * w, w, n.value.data.data() + r * cols + off);
        }
        return push(std::move(n));
    }

    // rank-2 slice along axis 1: columns [start, start+len)
    NodeId slice(NodeId xo, int64_t start, int64_t len) {
        const Tensor<T>& x = val(xo);
        if (x.rank() != 2 || start < 0 || len <= 0 || start + len > x.shape[1])
            throw shape_error("slice", x);
        Node n;
        n.op = Op::Slice;
        n.in = {xo.v};
        n.i0 = start;
        n.i1 = len;
        const int64_t rows = x.shape[0], cols = x.shape[1];
        n.value = Tensor<T>::zeros({rows, len});
        for (int64_t r = 0; r < rows; ++r)
            std::copy_n(x.data.data() + r * cols + start, len, n.value.data.data() + r * len);
        return push(std::move(n));
    }

    // Inverted dropout: scales kept units by 1/(1-rate) at train time so
    // inference is the identity. In eval mode callers skip the node entirely.
    NodeId dropout(NodeId xo, double rate, bool train, SplitRng& rng) {
        if (!train || rate <= 0.0) return xo;
        if (rate >= 1.0) throw Error::config("dropout: rate must be < 1");
        const Tensor<T>& x = val(xo);
        Node n;
        n.op = Op::Dropout;
        n.in = {xo.v};
        n.f0 = 1.0 / (1.0 - rate);
        n.value = x;
        n.mask8.resize(x.data.size());
        for (size_t i = 0; i < x.data.size(); ++i) {
            const bool keep = rng.uniform01() >= rate;
            n.mask8[i] = keep ? 1 : 0;
            n.value.data[i] = keep ? static_cast<T>(x.data[i] * n.f0) : T(0);
        }
        return push(std::move(n));
    }

    // Per-channel batch normalization. x is [N,F] (per-feature) or [N,C,L]
    // (per-channel over N*L). run_mean/run_var live outside the tape (in the
    // model's parameter store) and are updated only in Train mode.
    NodeId batch_norm(NodeId xo, NodeId go, NodeId bo, BnMode mode, double momentum,
                      T* run_mean, T* run_var, double eps = 1e-5) {
        const Tensor<T>& x = val(xo);
        const Tensor<T>& g = val(go);
        const Tensor<T>& b = val(bo);
        const bool dense = x.rank() == 2;
        if (!dense && x.rank() != 3) throw shape_error("batch-norm", x);
        const int64_t C = x.shape[1];
        if (g.numel() != C || b.numel() != C) throw shape_error("batch-norm gamma/beta", x, g);
        const int64_t N = x.shape[0];
        const int64_t L = dense ? 1 : x.shape[2];
        const int64_t m = N * L;
        Node n;
        n.op = Op::BatchNorm;
        n.in = {xo.v, go.v, bo.v};
        n.i0 = mode == BnMode::Eval ? 1 : 0;
        n.f0 = eps;
        n.ext_a = run_mean;
        n.ext_b = run_var;
        n.saved_a.resize(static_cast<size_t>(C)); // mean used
        n.saved_b.resize(static_cast<size_t>(C)); // inv std used
        n.value = Tensor<T>::zeros(x.shape);
        // Row base (i*C + c)*L covers both layouts: rank-2 is the L == 1 case.
        const T* xd = x.data.data();
        T* od = n.value.data.data();
        for (int64_t c = 0; c < C; ++c) {
            T mean, var;
            if (mode == BnMode::Eval) {
                mean = run_mean[c];
                var = run_var[c];
            } else {
                T acc = 0;
                for (int64_t i = 0; i < N; ++i) {
                    const T* p = xd + (i * C + c) * L;
                    for (int64_t l = 0; l < L; ++l) acc += p[l];
                }
                mean = acc / static_cast<T>(m);
                T vacc = 0;
                for (int64_t i = 0; i < N; ++i) {
                    const T* p = xd + (i * C + c) * L;
                    for (int64_t l = 0; l < L; ++l) {
                        const T d = p[l] - mean;
                        vacc += d * d;
                    }
                }
                var = vacc / static_cast<T>(m);
                if (mode == BnMode::Train) {
                    run_mean[c] = static_cast<T>(momentum * run_mean[c] + (1.0 - momentum) * mean);
                    run_var[c] = static_cast<T>(momentum * run_var[c] + (1.0 - momentum) * var);
                }
            }
            const T istd = static_cast<T>(1.0 / std::sqrt(static_cast<double>(var) + eps));
            n.saved_a[static_cast<size_t>(c)] = mean;
            n.saved_b[static_cast<size_t>(c)] = istd;
            const T scale = g.data[static_cast<size_t>(c)] * istd;
            const T shift = b.data[static_cast<size_t>(c)] - mean * scale;
            for (int64_t i = 0; i < N; ++i) {
                const T* p = xd + (i * C + c) * L;
                T* q = od + (i * C + c) * L;
                for (int64_t l = 0; l < L; ++l) q[l] = p[l] * scale + shift;
            }
        }
        return push(std::move(n));
    }

    NodeId reshape(NodeId xo, std::vector<int64_t> shape) {
        const Tensor<T>& x = val(xo);
        Tensor<T> v(shape, x.data);
        Node n;
        n.op = Op::Reshape;
        n.in = {xo.v};
        n.value = std::move(v);
        return push(std::move(n));
    }

    // x: [Bs,F], rows: Bs indices into [0,B) -> [B,F] with other rows zero
    NodeId scatter_rows(NodeId xo, const std::vector<int32_t>& rows, int64_t B) {
        const Tensor<T>& x = val(xo);
        if (x.rank() != 2 || static_cast<int64_t>(rows.size()) != x.shape[0])
            throw shape_error("scatter-rows", x);
        Node n;
        n.op = Op::ScatterRows;
        n.in = {xo.v};
        n.idx.assign(rows.begin(), rows.end());
        const int64_t F = x.shape[1];
        n.value = Tensor<T>::zeros({B, F});
        for (size_t r = 0; r < rows.size(); ++r) {
            const int64_t dst = rows[r];
            if (dst < 0 || dst >= B) throw Error::config("scatter-rows: row index out of range");
            std::copy_n(x.data.data() + static_cast<int64_t>(r) * F, F,
                        n.value.data.data() + dst * F);
        }
        return push(std::move(n));
    }

    // x: [B,F], rows: indices into [0,B) -> [len(rows),F] selecting those rows
    // in order. Adjoint of scatter_rows; rows may repeat.
    NodeId gather_rows(NodeId xo, const std::vector<int32_t>& rows) {
        const Tensor<T>& x = val(xo);
        if (x.rank() != 2 || rows.empty()) throw shape_error("gather-rows", x);
        const int64_t B = x.shape[0], F = x.shape[1];
        Node n;
        n.op = Op::GatherRows;
        n.in = {xo.v};
        n.idx.assign(rows.begin(), rows.end());
        n.value = Tensor<T>::zeros({static_cast<int64_t>(rows.size()), F});
        for (size_t r = 0; r < rows.size(); ++r) {
            const int64_t src = rows[r];
            if (src < 0 || src >= B) throw Error::config("gather-rows: row index out of range");
            std::copy_n(x.data.data() + src * F, F, n.value.data.data() + static_cast<int64_t>(r) * F);
        }
        return push(std::move(n));
    }

    NodeId sum(NodeId xo) {
        const Tensor<T>& x = val(xo);
        T acc = 0;
        for (const T& v : x.data) acc += v;
        Node n;
        n.op = Op::Sum;
        n.in = {xo.v};
        n.value = Tensor<T>::scalar(acc);
        return push(std::move(n));
    }

    NodeId mean(NodeId xo) { return scale(sum(xo), 1.0 / static_cast<double>(val(xo).numel())); }

    // Binary cross-entropy, mean over batch. probs in (0,1) are clamped to
    // [1e-7, 1-1e-7] before the log. labels must be exactly 0 or 1.
    NodeId bce_loss(NodeId po, const std::vector<T>& labels) {
        const Tensor<T>& p = val(po);
        if (p.numel() != static_cast<int64_t>(labels.size()))
            throw shape_error("bce", p);
        for (const T& y : labels)
            if (y != T(0) && y != T(1)) throw Error::data("bce: label outside {0,1}");
        ++bce_nodes;
        Node n;
        n.op = Op::BceLoss;
        n.in = {po.v};
        n.saved_a = labels;
        const int64_t B = p.numel();
        double acc = 0;
        for (int64_t i = 0; i < B; ++i) {
            const double pi = clamp_prob(p.data[static_cast<size_t>(i)]);
            const double y = labels[static_cast<size_t>(i)];
            acc += -(y * std::log(pi) + (1.0 - y) * std::log(1.0 - pi));
        }
        n.value = Tensor<T>::scalar(static_cast<T>(acc / static_cast<double>(B)));
        return push(std::move(n));
    }

    // Masked mean squared error: sum(mask*(pred-target)^2) / max(1, sum(mask)).
    NodeId mse_loss(NodeId po, const Tensor<T>& target, const Tensor<T>& mask) {
        const Tensor<T>& p = val(po);
        if (!p.same_shape(target) || !p.same_shape(mask))
            throw shape_error("mse", p, target);
        for (const T& m : mask.data)
            if (m != T(0) && m != T(1)) throw Error::data("mse: mask value outside {0,1}");
        ++mse_nodes;
        Node n;
        n.op = Op::MseLoss;
        n.in = {po.v};
        n.saved_a = target.data;
        n.saved_b = mask.data;
        double acc = 0, cnt = 0;
        for (int64_t i = 0; i < p.numel(); ++i) {
            const double d = p.data[static_cast<size_t>(i)] - target.data[static_cast<size_t>(i)];
            acc += mask.data[static_cast<size_t>(i)] * d * d;
            cnt += mask.data[static_cast<size_t>(i)];
        }
        n.f0 = std::max(1.0, cnt);
        n.value = Tensor<T>::scalar(static_cast<T>(acc / n.f0));
        return push(std::move(n));
    }

    // Populates gradients for every node reachable from the scalar loss.
    void backward(NodeId loss) {
        Node& ln = nodes_[loss.v];
        if (ln.value.numel() != 1)
            throw Error::config("backward: loss must be scalar, got " + ln.value.shape_str());
        for (Node& n : nodes_)
            if (!n.grad.data.empty()) std::fill(n.grad.data.begin(), n.grad.data.end(), T(0));
        ensure_grad(ln);
        ln.grad.data[0] = T(1);
        for (int32_t i = loss.v; i >= 0; --i) {
            Node& n = nodes_[static_cast<size_t>(i)];
            if (!n.needs_grad || n.grad.data.empty()) continue;
            backward_node(n);
        }
    }

private:
    std::vector<Node> nodes_;

    const Tensor<T>& val(NodeId id) const {
        if (!id.valid() || id.v >= static_cast<int32_t>(nodes_.size()))
            throw Error::config("tape: invalid node id");
        return nodes_[static_cast<size_t>(id.v)].value;
    }

    static double clamp_prob(double p) { return std::min(1.0 - 1e-7, std::max(1e-7, p)); }

    NodeId unary(NodeId a, Op op) {
        Node n;
        n.op = op;
        n.in = {a.v};
        n.value = val(a);
        switch (op) {
            case Op::Relu:
                for (T& v : n.value.data) v = v > T(0) ? v : T(0);
                break;
            case Op::Tanh:
                for (T& v : n.value.data) v = std::tanh(v);
                break;
            case Op::Sigmoid:
                for (T& v : n.value.data) v = static_cast<T>(1.0 / (1.0 + std::exp(-static_cast<double>(v))));
                break;
            default:
                throw Error::config("tape: bad unary op");
        }
        return push(std::move(n));
    }

    NodeId push(Node n) {
        if (n.op != Op::Param && n.op != Op::Input) {
            for (int32_t i : n.in)
                if (nodes_[static_cast<size_t>(i)].needs_grad) { n.needs_grad = true; break; }
        }
        nodes_.push_back(std::move(n));
        return NodeId{static_cast<int32_t>(nodes_.size() - 1)};
    }

    void ensure_grad(Node& n) {
        if (n.grad.data.empty()) n.grad = Tensor<T>::zeros(n.value.shape);
    }

    Node& in_node(const Node& n, size_t which) { return nodes_[static_cast<size_t>(n.in[which])]; }

    // accumulate into input's grad if it participates
    T* grad_of(const Node& n, size_t which) {
        Node& src = in_node(n, which);
        if (!src.needs_grad) return nullptr;
        ensure_grad(src);
        return src.grad.data.data();
    }

    static Error shape_error(const char* op, const Tensor<T>& a) {
        return Error::config(std::string(op) + ": bad shape " + a.shape_str());
    }
    static Error shape_error(const char* op, const Tensor<T>& a, const Tensor<T>& b) {
        return Error::config(std::string(op) + ": incompatible shapes " + a.shape_str() + " and " +
                             b.shape_str());
    }

    void backward_node(Node& n) {
        const T* dy = n.grad.data.data();
        switch (n.op) {
            case Op::Input:
            case Op::Param:
                break;
            case Op::Add: {
                if (T* da = grad_of(n, 0))
                    for (int64_t i = 0; i < n.value.numel(); ++i) da[i] += dy[i];
                if (T* db = grad_of(n, 1)) {
                    const Node& bsrc = in_node(n, 1);
                    if (n.i0 == 0) {
                        for (int64_t i = 0; i < n.value.numel(); ++i) db[i] += dy[i];
                    } else if (n.i0 == 1) {
                        const int64_t rows = n.value.shape[0], cols = n.value.shape[1];
                        for (int64_t r = 0; r < rows; ++r)
                            for (int64_t c = 0; c < cols; ++c) db[c] += dy[r * cols + c];
                    } else {
                        T acc = 0;
                        for (int64_t i = 0; i < n.value.numel(); ++i) acc += dy[i];
                        db[0] += acc;
                    }
                    (void)bsrc;
                }
                break;
            }
            case Op::Mul: {
                const Tensor<T>& a = in_node(n, 0).value;
                const Tensor<T>& b = in_node(n, 1).value;
                if (T* da = grad_of(n, 0))
                    for (int64_t i = 0; i < n.value.numel(); ++i) da[i] += dy[i] * b.data[i];
                if (T* db = grad_of(n, 1))
                    for (int64_t i = 0; i < n.value.numel(); ++i) db[i] += dy[i] * a.data[i];
                break;
            }
            case Op::Scale: {
                if (T* da = grad_of(n, 0))
                    for (int64_t i = 0; i < n.value.numel(); ++i)
                        da[i] += static_cast<T>(dy[i] * n.f0);
                break;
            }
            case Op::Matmul: {
                const Tensor<T>& x = in_node(n, 0).value;
                const Tensor<T>& w = in_node(n, 1).value;
                const int64_t N = x.shape[0], A = x.shape[1], B = w.shape[1];
                if (T* dx = grad_of(n, 0)) {
                    for (int64_t i = 0; i < N; ++i)
                        for (int64_t k = 0; k < A; ++k) {
                            const T* wr = w.data.data() + k * B;
                            const T* dyr = dy + i * B;
                            T acc = 0;
                            for (int64_t j = 0; j < B; ++j) acc += dyr[j] * wr[j];
                            dx[i * A + k] += acc;
                        }
                }
                if (T* dw = grad_of(n, 1)) {
                    for (int64_t i = 0; i < N; ++i) {
                        const T* xr = x.data.data() + i * A;
                        const T* dyr = dy + i * B;
                        for (int64_t k = 0; k < A; ++k) {
                            const T xv = xr[k];
                            T* dwr = dw + k * B;
                            for (int64_t j = 0; j < B; ++j) dwr[j] += xv * dyr[j];
                        }
                    }
                }
                break;
            }
            case Op::Conv1d:
                backward_conv(n);
                break;
            case Op::MaxPool1d: {
                if (T* dx = grad_of(n, 0)) {
                    const Tensor<T>& x = in_node(n, 0).value;
                    const int64_t L = x.shape[2];
                    const int64_t NC = x.shape[0] * x.shape[1];
                    const int64_t Lo = n.value.shape[2];
                    for (int64_t nc = 0; nc < NC; ++nc)
                        for (int64_t t = 0; t < Lo; ++t) {
                            const int64_t o = nc * Lo + t;
                            dx[nc * L + n.idx[static_cast<size_t>(o)]] += dy[o];
                        }
                }
                break;
            }
            case Op::Gap: {
                if (T* dx = grad_of(n, 0)) {
                    const Tensor<T>& x = in_node(n, 0).value;
                    const int64_t L = x.shape[2];
                    const int64_t NC = x.shape[0] * x.shape[1];
                    for (int64_t nc = 0; nc < NC; ++nc) {
                        const T g = dy[nc] / static_cast<T>(L);
                        T* dr = dx + nc * L;
                        for (int64_t t = 0; t < L; ++t) dr[t] += g;
                    }
                }
                break;
            }
            case Op::Relu: {
                if (T* dx = grad_of(n, 0)) {
                    const Tensor<T>& x = in_node(n, 0).value;
                    for (int64_t i = 0; i < n.value.numel(); ++i)
                        if (x.data[static_cast<size_t>(i)] > T(0)) dx[i] += dy[i];
                }
                break;
            }
            case Op::Tanh: {
                if (T* dx = grad_of(n, 0))
                    for (int64_t i = 0; i < n.value.numel(); ++i) {
                        const T y = n.value.data[static_cast<size_t>(i)];
                        dx[i] += dy[i] * (T(1) - y * y);
                    }
                break;
            }
            case Op::Sigmoid: {
                if (T* dx = grad_of(n, 0))
                    for (int64_t i = 0; i < n.value.numel(); ++i) {
                        const T y = n.value.data[static_cast<size_t>(i)];
                        dx[i] += dy[i] * y * (T(1) - y);
                    }
                break;
            }
            case Op::Concat: {
                const int64_t rows = n.value.shape[0], cols = n.value.shape[1];
                for (size_t pi = 0; pi < n.in.size(); ++pi) {
                    if (T* dp = grad_of(n, pi)) {
                        const int64_t off = n.extents[pi];
                        const int64_t w = in_node(n, pi).value.shape[1];
                        for (int64_t r = 0; r < rows; ++r)
                            for (int64_t c = 0; c < w; ++c) dp[r * w + c] += dy[r * cols + off + c];
                    }
                }
                break;
            }
            case Op::Slice: {
                if (T* dx = grad_of(n, 0)) {
                    const int64_t cols = in_node(n, 0).value.shape[1];
                    const int64_t rows = n.value.shape[0], len = n.i1, start = n.i0;
                    for (int64_t r = 0; r < rows; ++r)
                        for (int64_t c = 0; c < len; ++c) dx[r * cols + start + c] += dy[r * len + c];
                }
                break;
            }
            case Op::Dropout: {
                if (T* dx = grad_of(n, 0))
                    for (int64_t i = 0; i < n.value.numel(); ++i)
                        if (n.mask8[static_cast<size_t>(i)]) dx[i] += static_cast<T>(dy[i] * n.f0);
                break;
            }
            case Op::BatchNorm:
                backward_bn(n);
                break;
            case Op::Reshape: {
                if (T* dx = grad_of(n, 0))
                    for (int64_t i = 0; i < n.value.numel(); ++i) dx[i] += dy[i];
                break;
            }
            case Op::ScatterRows: {
                if (T* dx = grad_of(n, 0)) {
                    const int64_t F = n.value.shape[1];
                    for (size_t r = 0; r < n.idx.size(); ++r) {
                        const T* src = dy + static_cast<int64_t>(n.idx[r]) * F;
                        T* dst = dx + static_cast<int64_t>(r) * F;
                        for (int64_t c = 0; c < F; ++c) dst[c] += src[c];
                    }
                }
                break;
            }
            case Op::GatherRows: {
                if (T* dx = grad_of(n, 0)) {
                    const int64_t F = n.value.shape[1];
                    for (size_t r = 0; r < n.idx.size(); ++r) {
                        const T* src = dy + static_cast<int64_t>(r) * F;
                        T* dst = dx + static_cast<int64_t>(n.idx[r]) * F;
                        for (int64_t c = 0; c < F; ++c) dst[c] += src[c];
                    }
                }
                break;
            }
            case Op::Sum: {
                if (T* dx = grad_of(n, 0)) {
                    const T g = dy[0];
                    const int64_t m = in_node(n, 0).value.numel();
                    for (int64_t i = 0; i < m; ++i) dx[i] += g;
                }
                break;
            }
            case Op::BceLoss: {
                if (T* dp = grad_of(n, 0)) {
                    const Tensor<T>& p = in_node(n, 0).value;
                    const int64_t B = p.numel();
                    const double g = static_cast<double>(dy[0]) / static_cast<double>(B);
                    for (int64_t i = 0; i < B; ++i) {
                        const double pi = static_cast<double>(p.data[static_cast<size_t>(i)]);
                        if (pi <= 1e-7 || pi >= 1.0 - 1e-7) continue; // clamped region
                        const double y = n.saved_a[static_cast<size_t>(i)];
                        dp[i] += static_cast<T>(g * (-(y / pi) + (1.0 - y) / (1.0 - pi)));
                    }
                }
                break;
            }
            case Op::MseLoss: {
                if (T* dp = grad_of(n, 0)) {
                    const Tensor<T>& p = in_node(n, 0).value;
                    const double g = static_cast<double>(dy[0]) * 2.0 / n.f0;
                    for (int64_t i = 0; i < p.numel(); ++i) {
                        const size_t si = static_cast<size_t>(i);
                        dp[i] += static_cast<T>(g * n.saved_b[si] *
                                                (static_cast<double>(p.data[si]) - n.saved_a[si]));
                    }
                }
                break;
            }
        }
    }

    // --- stride-1 convolution kernels ---------------------------------------
    // Hot path of the whole library. Outputs are accumulated in 512-bit
    // vector registers across every (input channel, tap) pair, so each output
    // row is stored once instead of being re-read per pair; row edges where
    // the window leaves the input fall back to a checked scalar loop.
    //
    // The vector helpers never cross a translation-unit boundary, so the
    // calling-convention change -Wpsabi warns about cannot be observed.
#pragma GCC diagnostic push
#pragma GCC diagnostic ignored "-Wpsabi"

    using Vec __attribute__((vector_size(64))) = T;
    static constexpr int64_t kVL = static_cast<int64_t>(64 / sizeof(T));

    static Vec load_vec(const T* p) {
        Vec v;
        std::memcpy(&v, p, sizeof(Vec));
        return v;
    }
    static void store_vec(T* p, const Vec& v) { std::memcpy(p, &v, sizeof(Vec)); }
    static T hsum(const Vec& v) {
        T s = 0;
        for (int64_t l = 0; l < kVL; ++l) s += v[l];
        return s;
    }

    template <int KK>
    static void conv_fwd_s1(Tensor<T>& out, const Tensor<T>& x, const Tensor<T>& w,
                            const Tensor<T>& b, int64_t pl) {
        const int64_t N = x.shape[0], Ci = x.shape[1], L = x.shape[2];
        const int64_t Co = w.shape[0], Lo = out.shape[2];
        // Between these bounds every tap lands inside the input row.
        const int64_t body_lo = std::min(Lo, pl);
        const int64_t body_hi = std::max(body_lo, std::min(Lo, L + pl - KK + 1));
        for (int64_t i = 0; i < N; ++i) {
            const T* xi = &x.at(i, 0, 0);
            for (int64_t co = 0; co < Co; ++co) {
                T* y = &out.at(i, co, 0);
                const T bias = b.data[static_cast<size_t>(co)];
                const T* wc = &w.at(co, 0, 0);
                auto edge = [&](int64_t t) {
                    T acc = bias;
                    for (int64_t ci = 0; ci < Ci; ++ci) {
                        const T* xr = xi + ci * L;
                        const T* wr = wc + ci * KK;
                        for (int k = 0; k < KK; ++k) {
                            const int64_t s = t + k - pl;
                            if (s >= 0 && s < L) acc += wr[k] * xr[s];
                        }
                    }
                    y[t] = acc;
                };
                for (int64_t t = 0; t < body_lo; ++t) edge(t);
                for (int64_t t = body_hi; t < Lo; ++t) edge(t);
                int64_t t = body_lo;
                for (; t + 2 * kVL <= body_hi; t += 2 * kVL) {
                    Vec a0 = Vec{} + bias, a1 = a0;
                    for (int64_t ci = 0; ci < Ci; ++ci) {
                        const T* xs = xi + ci * L + (t - pl);
                        const T* wr = wc + ci * KK;
                        for (int k = 0; k < KK; ++k) {
                            const T wv = wr[k];
                            a0 += wv * load_vec(xs + k);
                            a1 += wv * load_vec(xs + k + kVL);
                        }
                    }
                    store_vec(y + t, a0);
                    store_vec(y + t + kVL, a1);
                }
                for (; t + kVL <= body_hi; t += kVL) {
                    Vec a0 = Vec{} + bias;
                    for (int64_t ci = 0; ci < Ci; ++ci) {
                        const T* xs = xi + ci * L + (t - pl);
                        const T* wr = wc + ci * KK;
                        for (int k = 0; k < KK; ++k) a0 += wr[k] * load_vec(xs + k);
                    }
                    store_vec(y + t, a0);
                }
                if (t < body_hi && body_hi - body_lo >= kVL) {
                    // Final vector overlaps already-written outputs; they are
                    // pure stores of identical values, so recomputing is safe.
                    const int64_t tl = body_hi - kVL;
                    Vec a0 = Vec{} + bias;
                    for (int64_t ci = 0; ci < Ci; ++ci) {
                        const T* xs = xi + ci * L + (tl - pl);
                        const T* wr = wc + ci * KK;
                        for (int k = 0; k < KK; ++k) a0 += wr[k] * load_vec(xs + k);
                    }
                    store_vec(y + tl, a0);
                } else {
                    for (; t < body_hi; ++t) edge(t);
                }
            }
        }
    }

    template <int KK>
    void conv_bwd_s1(Node& n, T* dx, T* dw) {
        const Tensor<T>& x = in_node(n, 0).value;
        const Tensor<T>& w = in_node(n, 1).value;
        const int64_t N = x.shape[0], Ci = x.shape[1], L = x.shape[2];
        const int64_t Co = w.shape[0], Lo = n.value.shape[2];
        const int64_t pl = n.i1;
        const T* dy = n.grad.data.data();
        if (dx) {
            // dx is the correlation of dy with the flipped kernel, summed over
            // output channels; same register-tiling as the forward pass.
            const int64_t body_lo = std::min(L, static_cast<int64_t>(KK) - 1 - pl);
            const int64_t body_hi = std::max(body_lo, std::min(L, Lo - pl));
            for (int64_t i = 0; i < N; ++i) {
                const T* dyi = dy + i * Co * Lo;
                for (int64_t ci = 0; ci < Ci; ++ci) {
                    T* dxr = dx + (i * Ci + ci) * L;
                    auto edge = [&](int64_t s) {
                        T acc = 0;
                        for (int64_t co = 0; co < Co; ++co) {
                            const T* dyr = dyi + co * Lo;
                            const T* wr = &w.at(co, ci, 0);
                            for (int k = 0; k < KK; ++k) {
                                const int64_t t = s + pl - k;
                                if (t >= 0 && t < Lo) acc += wr[k] * dyr[t];
                            }
                        }
                        dxr[s] += acc;
                    };
                    for (int64_t s = 0; s < body_lo; ++s) edge(s);
                    for (int64_t s = body_hi; s < L; ++s) edge(s);
                    int64_t s = body_lo;
                    for (; s + 2 * kVL <= body_hi; s += 2 * kVL) {
                        Vec a0{}, a1{};
                        for (int64_t co = 0; co < Co; ++co) {
                            const T* ds = dyi + co * Lo + (s + pl - (KK - 1));
                            const T* wr = &w.at(co, ci, 0);
                            for (int k = 0; k < KK; ++k) {
                                const T wv = wr[KK - 1 - k];
                                a0 += wv * load_vec(ds + k);
                                a1 += wv * load_vec(ds + k + kVL);
                            }
                        }
                        store_vec(dxr + s, load_vec(dxr + s) + a0);
                        store_vec(dxr + s + kVL, load_vec(dxr + s + kVL) + a1);
                    }
                    for (; s + kVL <= body_hi; s += kVL) {
                        Vec a0{};
                        for (int64_t co = 0; co < Co; ++co) {
                            const T* ds = dyi + co * Lo + (s + pl - (KK - 1));
                            const T* wr = &w.at(co, ci, 0);
                            for (int k = 0; k < KK; ++k) a0 += wr[KK - 1 - k] * load_vec(ds + k);
                        }
                        store_vec(dxr + s, load_vec(dxr + s) + a0);
                    }
                    if (s < body_hi && body_hi - body_lo >= kVL) {
                        // dx accumulates, so the overlapped final vector only
                        // commits the lanes not already added.
                        const int64_t sl = body_hi - kVL;
                        Vec a0{};
                        for (int64_t co = 0; co < Co; ++co) {
                            const T* ds = dyi + co * Lo + (sl + pl - (KK - 1));
                            const T* wr = &w.at(co, ci, 0);
                            for (int k = 0; k < KK; ++k) a0 += wr[KK - 1 - k] * load_vec(ds + k);
                        }
                        for (int64_t l = s - sl; l < kVL; ++l) dxr[sl + l] += a0[l];
                    } else {
                        for (; s < body_hi; ++s) edge(s);
                    }
                }
            }
        }
        if (dw) {
            // One sweep of dy per channel pair accumulates all KK taps at once.
            const int64_t body_lo = std::min(Lo, pl);
            const int64_t body_hi = std::max(body_lo, std::min(Lo, L + pl - KK + 1));
            for (int64_t i = 0; i < N; ++i)
                for (int64_t co = 0; co < Co; ++co) {
                    const T* dyr = dy + (i * Co + co) * Lo;
                    for (int64_t ci = 0; ci < Ci; ++ci) {
                        const T* xr = &x.at(i, ci, 0);
                        T* dwr = dw + (co * Ci + ci) * KK;
                        Vec acc[KK];
                        for (int k = 0; k < KK; ++k) acc[k] = Vec{};
                        int64_t t = body_lo;
                        for (; t + kVL <= body_hi; t += kVL) {
                            const Vec d = load_vec(dyr + t);
                            const T* xs = xr + (t - pl);
                            for (int k = 0; k < KK; ++k) acc[k] += d * load_vec(xs + k);
                        }
                        int64_t vec_end = t;
                        if (t < body_hi && body_hi - body_lo >= kVL) {
                            // Masked overlapped tail: count only unseen lanes.
                            const int64_t tl = body_hi - kVL;
                            Vec mask{};
                            for (int64_t l = 0; l < kVL; ++l)
                                mask[l] = tl + l >= vec_end ? T(1) : T(0);
                            const Vec d = mask * load_vec(dyr + tl);
                            const T* xs = xr + (tl - pl);
                            for (int k = 0; k < KK; ++k) acc[k] += d * load_vec(xs + k);
                            vec_end = body_hi;
                        }
                        for (int k = 0; k < KK; ++k) {
                            T s = hsum(acc[k]);
                            const int64_t t0k = std::max<int64_t>(0, pl - k);
                            const int64_t t1k = std::min<int64_t>(Lo, L + pl - k);
                            for (int64_t tt = t0k; tt < std::min(body_lo, t1k); ++tt)
                                s += dyr[tt] * xr[tt + k - pl];
                            for (int64_t tt = std::max(vec_end, t0k); tt < t1k; ++tt)
                                s += dyr[tt] * xr[tt + k - pl];
                            dwr[k] += s;
                        }
                    }
                }
        }
    }

#pragma GCC diagnostic pop

    void backward_conv(Node& n) {
        const Tensor<T>& x = in_node(n, 0).value;
        const Tensor<T>& w = in_node(n, 1).value;
        const int64_t N = x.shape[0], Ci = x.shape[1], L = x.shape[2];
        const int64_t Co = w.shape[0], K = w.shape[2];
        const int64_t Lo = n.value.shape[2];
        const int64_t stride = n.i0, pl = n.i1;
        const T* dy = n.grad.data.data();
        T* dx = grad_of(n, 0);
        T* dw = grad_of(n, 1);
        T* db = grad_of(n, 2);
        if (db) {
            for (int64_t i = 0; i < N; ++i)
                for (int64_t co = 0; co < Co; ++co) {
                    const T* dyr = dy + (i * Co + co) * Lo;
                    T acc = 0;
                    for (int64_t t = 0; t < Lo; ++t) acc += dyr[t];
                    db[co] += acc;
                }
        }
        if (stride == 1 && K >= 1 && K <= 8) {
            switch (K) {
            case 1: conv_bwd_s1<1>(n, dx, dw); break;
            case 2: conv_bwd_s1<2>(n, dx, dw); break;
            case 3: conv_bwd_s1<3>(n, dx, dw); break;
            case 4: conv_bwd_s1<4>(n, dx, dw); break;
            case 5: conv_bwd_s1<5>(n, dx, dw); break;
            case 6: conv_bwd_s1<6>(n, dx, dw); break;
            case 7: conv_bwd_s1<7>(n, dx, dw); break;
            case 8: conv_bwd_s1<8>(n, dx, dw); break;
            }
        } else if (stride == 1) {
            for (int64_t i = 0; i < N; ++i)
                for (int64_t co = 0; co < Co; ++co) {
                    const T* dyr = dy + (i * Co + co) * Lo;
                    for (int64_t ci = 0; ci < Ci; ++ci) {
                        const T* xr = &x.at(i, ci, 0);
                        const T* wr = &w.at(co, ci, 0);
                        T* dxr = dx ? dx + (i * Ci + ci) * L : nullptr;
                        T* dwr = dw ? dw + (co * Ci + ci) * K : nullptr;
                        for (int64_t k = 0; k < K; ++k) {
                            const int64_t t0 = std::max<int64_t>(0, pl - k);
                            const int64_t t1 = std::min<int64_t>(Lo, L + pl - k);
                            const int64_t sh = k - pl;
                            if (dxr) {
                                const T wv = wr[k];
                                for (int64_t t = t0; t < t1; ++t) dxr[t + sh] += wv * dyr[t];
                            }
                            if (dwr) {
                                T acc = 0;
                                for (int64_t t = t0; t < t1; ++t) acc += dyr[t] * xr[t + sh];
                                dwr[k] += acc;
                            }
                        }
                    }
                }
        } else {
            for (int64_t i = 0; i < N; ++i)
                for (int64_t co = 0; co < Co; ++co) {
                    const T* dyr = dy + (i * Co + co) * Lo;
                    for (int64_t ci = 0; ci < Ci; ++ci) {
                        const T* xr = &x.at(i, ci, 0);
                        const T* wr = &w.at(co, ci, 0);
                        T* dxr = dx ? dx + (i * Ci + ci) * L : nullptr;
                        T* dwr = dw ? dw + (co * Ci + ci) * K : nullptr;
                        for (int64_t t = 0; t < Lo; ++t) {
                            const int64_t base = t * stride - pl;
                            for (int64_t k = 0; k < K; ++k) {
                                const int64_t s = base + k;
                                if (s < 0 || s >= L) continue;
                                if (dxr) dxr[s] += wr[k] * dyr[t];
                                if (dwr) dwr[k] += dyr[t] * xr[s];
                            }
                        }
                    }
                }
        }
    }

    void backward_bn(Node& n) {
        const Tensor<T>& x = in_node(n, 0).value;
        const Tensor<T>& g = in_node(n, 1).value;
        const bool dense = x.rank() == 2;
        const int64_t N = x.shape[0];
        const int64_t C = x.shape[1];
        const int64_t L = dense ? 1 : x.shape[2];
        const int64_t m = N * L;
        const bool eval_mode = n.i0 == 1;
        const Tensor<T>& dyt = n.grad;
        T* dx = grad_of(n, 0);
        T* dg = grad_of(n, 1);
        T* db = grad_of(n, 2);
        // Row base (i*C + c)*L covers both layouts: rank-2 is the L == 1 case.
        const T* xd = x.data.data();
        const T* dyd = dyt.data.data();
        for (int64_t c = 0; c < C; ++c) {
            const T mean = n.saved_a[static_cast<size_t>(c)];
            const T istd = n.saved_b[static_cast<size_t>(c)];
            const T gc = g.data[static_cast<size_t>(c)];
            T sum_dy = 0, sum_dy_xhat = 0;
            for (int64_t i = 0; i < N; ++i) {
                const int64_t base = (i * C + c) * L;
                const T* py = dyd + base;
                const T* px = xd + base;
                for (int64_t l = 0; l < L; ++l) {
                    sum_dy += py[l];
                    sum_dy_xhat += py[l] * (px[l] - mean) * istd;
                }
            }
            if (dg) dg[c] += sum_dy_xhat;
            if (db) db[c] += sum_dy;
            if (!dx) continue;
            if (eval_mode) {
                const T a = gc * istd;
                for (int64_t i = 0; i < N; ++i) {
                    const int64_t base = (i * C + c) * L;
                    const T* py = dyd + base;
                    T* pdx = dx + base;
                    for (int64_t l = 0; l < L; ++l) pdx[l] += a * py[l];
                }
            } else {
                // batch statistics participate in the gradient
                const T inv_m = T(1) / static_cast<T>(m);
                const T a = gc * istd;
                const T mean_dy = inv_m * sum_dy;
                const T mean_dy_xhat = inv_m * sum_dy_xhat;
                for (int64_t i = 0; i < N; ++i) {
                    const int64_t base = (i * C + c) * L;
                    const T* py = dyd + base;
                    const T* px = xd + base;
                    T* pdx = dx + base;
                    for (int64_t l = 0; l < L; ++l) {
                        const T xhat = (px[l] - mean) * istd;
                        pdx[l] += a * (py[l] - mean_dy - xhat * mean_dy_xhat);
                    }
                }
            }
        }
    }
};

using TapeF = Tape<float>;
using TapeD = Tape<double>;

} // namespace dsmt::ad
