#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <numeric>
#include <string>
#include <unordered_set>
#include <vector>

#include "fishtank/util.hpp"

namespace fishtank {

// Dense row-major tensor. Templated on scalar so the training stack runs in
// float while gradient-check tests re-run the same graphs in double.
template <typename S>
struct TensorT {
    std::vector<int> shape;
    std::vector<S> data;

    TensorT() = default;
    explicit TensorT(std::vector<int> shp) : shape(std::move(shp)), data(numel_of(shape), S(0)) {}
    TensorT(std::vector<int> shp, std::vector<S> values) : shape(std::move(shp)), data(std::move(values)) {
        if (data.size() != numel_of(shape)) throw DimensionError("tensor data length does not match shape");
    }

    static size_t numel_of(const std::vector<int>& shp) {
        size_t n = 1;
        for (int d : shp) {
            if (d <= 0) throw DimensionError("tensor dimensions must be positive");
            n *= static_cast<size_t>(d);
        }
        return n;
    }

    size_t numel() const { return data.size(); }
    S* ptr() { return data.data(); }
    const S* ptr() const { return data.data(); }

    static TensorT zeros(std::vector<int> shp) { return TensorT(std::move(shp)); }
    static TensorT full(std::vector<int> shp, S v) {
        TensorT t(std::move(shp));
        std::fill(t.data.begin(), t.data.end(), v);
        return t;
    }
    static TensorT scalar(S v) { return TensorT({1}, {v}); }

    template <typename S2>
    TensorT<S2> cast() const {
        TensorT<S2> out;
        out.shape = shape;
        out.data.resize(data.size());
        for (size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<S2>(data[i]);
        return out;
    }
};

using Tensor = TensorT<float>;

namespace detail {

// C[m,n] += A[m,k] * B[k,n], fixed accumulation order.
template <typename S>
void gemm_nn(int m, int k, int n, const S* a, const S* b, S* c) {
    for (int i = 0; i < m; ++i) {
        const S* arow = a + static_cast<size_t>(i) * k;
        S* crow = c + static_cast<size_t>(i) * n;
        for (int p = 0; p < k; ++p) {
            S av = arow[p];
            if (av == S(0)) continue;
            const S* brow = b + static_cast<size_t>(p) * n;
            for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

// C[m,n] += A[m,k] * B[n,k]^T
template <typename S>
void gemm_nt(int m, int k, int n, const S* a, const S* b, S* c) {
    for (int i = 0; i < m; ++i) {
        const S* arow = a + static_cast<size_t>(i) * k;
        S* crow = c + static_cast<size_t>(i) * n;
        for (int j = 0; j < n; ++j) {
            const S* brow = b + static_cast<size_t>(j) * k;
            S acc = 0;
            for (int p = 0; p < k; ++p) acc += arow[p] * brow[p];
            crow[j] += acc;
        }
    }
}

// C[m,n] += A[k,m]^T * B[k,n]
template <typename S>
void gemm_tn(int m, int k, int n, const S* a, const S* b, S* c) {
    for (int p = 0; p < k; ++p) {
        const S* arow = a + static_cast<size_t>(p) * m;
        const S* brow = b + static_cast<size_t>(p) * n;
        for (int i = 0; i < m; ++i) {
            S av = arow[i];
            if (av == S(0)) continue;
            S* crow = c + static_cast<size_t>(i) * n;
            for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

}  // namespace detail

template <typename S>
struct NodeT {
    TensorT<S> value;
    std::vector<S> grad;  // allocated lazily, same numel as value
    bool requires_grad = false;
    std::vector<std::shared_ptr<NodeT<S>>> parents;
    std::function<void(NodeT<S>&)> backprop;  // scatters self.grad into parents

    void ensure_grad() {
        if (grad.size() != value.numel()) grad.assign(value.numel(), S(0));
    }
};

// Value-semantics handle to a graph node. Graphs are built by the free
// functions below; ownership is by shared_ptr from root towards leaves, so a
// held loss keeps its whole subgraph alive.
template <typename S>
class VarT {
  public:
    VarT() = default;
    explicit VarT(TensorT<S> value, bool requires_grad = false) : n_(std::make_shared<NodeT<S>>()) {
        n_->value = std::move(value);
        n_->requires_grad = requires_grad;
        if (requires_grad) n_->ensure_grad();
    }

    bool defined() const { return n_ != nullptr; }
    const TensorT<S>& value() const { return n_->value; }
    TensorT<S>& value() { return n_->value; }
    const std::vector<int>& shape() const { return n_->value.shape; }
    size_t numel() const { return n_->value.numel(); }
    bool requires_grad() const { return n_ && n_->requires_grad; }

    bool has_grad() const { return n_ && n_->grad.size() == n_->value.numel(); }
    std::vector<S>& grad() {
        if (!has_grad()) throw ContractError("grad buffer not populated");
        return n_->grad;
    }
    const std::vector<S>& grad() const {
        if (!has_grad()) throw ContractError("grad buffer not populated");
        return n_->grad;
    }
    void zero_grad() {
        if (n_ && n_->requires_grad) {
            n_->ensure_grad();
            std::fill(n_->grad.begin(), n_->grad.end(), S(0));
        }
    }

    // Same value, cut off from the graph.
    VarT detach() const { return VarT(n_->value, false); }

    std::shared_ptr<NodeT<S>> node() const { return n_; }

    // Reverse-mode sweep from a scalar. Leaf grads accumulate across calls
    // until zero_grad().
    void backward() const {
        if (!n_) throw ContractError("backward on empty var");
        if (n_->value.numel() != 1) throw ContractError("backward requires a scalar loss");
        // Iterative post-order topological sort over parents.
        std::vector<NodeT<S>*> order;
        std::unordered_set<NodeT<S>*> seen;
        std::vector<std::pair<NodeT<S>*, size_t>> stack;
        stack.emplace_back(n_.get(), 0);
        seen.insert(n_.get());
        while (!stack.empty()) {
            auto& [node, idx] = stack.back();
            if (idx < node->parents.size()) {
                NodeT<S>* p = node->parents[idx++].get();
                if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
            } else {
                order.push_back(node);
                stack.pop_back();
            }
        }
        n_->ensure_grad();
        n_->grad[0] += S(1);
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            NodeT<S>* node = *it;
            if (node->backprop) node->backprop(*node);
        }
    }

    static VarT from_node(std::shared_ptr<NodeT<S>> n) {
        VarT v;
        v.n_ = std::move(n);
        return v;
    }

  private:
    std::shared_ptr<NodeT<S>> n_;
};

using Var = VarT<float>;

namespace detail {

template <typename S>
std::shared_ptr<NodeT<S>> make_node(TensorT<S> value, std::vector<VarT<S>> parents) {
    auto n = std::make_shared<NodeT<S>>();
    n->value = std::move(value);
    for (auto& p : parents) {
        if (p.requires_grad()) n->requires_grad = true;
        n->parents.push_back(p.node());
    }
    if (n->requires_grad) {
        n->ensure_grad();
        for (auto& p : n->parents) p->ensure_grad();
    }
    return n;
}

template <typename S>
void check_same_shape(const VarT<S>& a, const VarT<S>& b, const char* op) {
    if (a.shape() != b.shape()) throw DimensionError(std::string(op) + ": shape mismatch");
}

}  // namespace detail

template <typename S>
VarT<S> add(const VarT<S>& a, const VarT<S>& b) {
    detail::check_same_shape(a, b, "add");
    TensorT<S> out = a.value();
    for (size_t i = 0; i < out.numel(); ++i) out.data[i] += b.value().data[i];
    auto n = detail::make_node<S>(std::move(out), {a, b});
    if (n->requires_grad) {
        n->backprop = [](NodeT<S>& self) {
            for (int k = 0; k < 2; ++k) {
                auto& p = self.parents[k];
                if (!p->requires_grad) continue;
                for (size_t i = 0; i < self.grad.size(); ++i) p->grad[i] += self.grad[i];
            }
        };
    }
    return VarT<S>::from_node(n);
}

template <typename S>
VarT<S> sub(const VarT<S>& a, const VarT<S>& b) {
    detail::check_same_shape(a, b, "sub");
    TensorT<S> out = a.value();
    for (size_t i = 0; i < out.numel(); ++i) out.data[i] -= b.value().data[i];
    auto n = detail::make_node<S>(std::move(out), {a, b});
    if (n->requires_grad) {
        n->backprop = [](NodeT<S>& self) {
            auto& pa = self.parents[0];
            auto& pb = self.parents[1];
            if (pa->requires_grad)
                for (size_t i = 0; i < self.grad.size(); ++i) pa->grad[i] += self.grad[i];
            if (pb->requires_grad)
                for (size_t i = 0; i < self.grad.size(); ++i) pb->grad[i] -= self.grad[i];
        };
    }
    return VarT<S>::from_node(n);
}

template <typename S>
VarT<S> hadamard(const VarT<S>& a, const VarT<S>& b) {
    detail::check_same_shape(a, b, "hadamard");
    TensorT<S> out = a.value();
    for (size_t i = 0; i < out.numel(); ++i) out.data[i] *= b.value().data[i];
    auto n = detail::make_node<S>(std::move(out), {a, b});
    if (n->requires_grad) {
        n->backprop = [](NodeT<S>& self) {
            auto& pa = self.parents[0];
            auto& pb = self.parents[1];
            if (pa->requires_grad)
                for (size_t i = 0; i < self.grad.size(); ++i) pa->grad[i] += self.grad[i] * pb->value.data[i];
            if (pb->requires_grad)
                for (size_t i = 0; i < self.grad.size(); ++i) pb->grad[i] += self.grad[i] * pa->value.data[i];
        };
    }
    return VarT<S>::from_node(n);
}

template <typename S>
VarT<S> scale(const VarT<S>& a, S c) {
    TensorT<S> out = a.value();
    for (auto& v : out.data) v *= c;
    auto n = detail::make_node<S>(std::move(out), {a});
    if (n->requires_grad) {
        n->backprop = [c](NodeT<S>& self) {
            auto& p = self.parents[0];
            for (size_t i = 0; i < self.grad.size(); ++i) p->grad[i] += c * self.grad[i];
        };
    }
    return VarT<S>::from_node(n);
}

template <typename S>
VarT<S> add_const(const VarT<S>& a, S c) {
    TensorT<S> out = a.value();
    for (auto& v : out.data) v += c;
    auto n = detail::make_node<S>(std::move(out), {a});
    if (n->requires_grad) {
        n->backprop = [](NodeT<S>& self) {
            auto& p = self.parents[0];
            for (size_t i = 0; i < self.grad.size(); ++i) p->grad[i] += self.grad[i];
        };
    }
    return VarT<S>::from_node(n);
}

template <typename S>
VarT<S> expv(const VarT<S>& a) {
    TensorT<S> out = a.value();
    for (auto& v : out.data) v = std::exp(v);
    auto n = detail::make_node<S>(std::move(out), {a});
    if (n->requires_grad) {
        n->backprop = [](NodeT<S>& self) {
            auto& p = self.parents[0];
            for (size_t i = 0; i < self.grad.size(); ++i) p->grad[i] += self.grad[i] * self.value.data[i];
        };
    }
    return VarT<S>::from_node(n);
}

template <typename S>
VarT<S> square(const VarT<S>& a) {
    TensorT<S> out = a.value();
    for (auto& v : out.data) v *= v;
    auto n = detail::make_node<S>(std::move(out), {a});
    if (n->requires_grad) {
        n->backprop = [](NodeT<S>& self) {
            auto& p = self.parents[0];
            for (size_t i = 0; i < self.grad.size(); ++i) p->grad[i] += S(2) * p->value.data[i] * self.grad[i];
        };
    }
    return VarT<S>::from_node(n);
}

template <typename S>
VarT<S> sumv(const VarT<S>& a) {
    S acc = 0;
    for (S v : a.value().data) acc += v;
    auto n = detail::make_node<S>(TensorT<S>::scalar(acc), {a});
    if (n->requires_grad) {
        n->backprop = [](NodeT<S>& self) {
            auto& p = self.parents[0];
            S g = self.grad[0];
            for (auto& pg : p->grad) pg += g;
        };
    }
    return VarT<S>::from_node(n);
}

template <typename S>
VarT<S> meanv(const VarT<S>& a) {
    return scale(sumv(a), S(1) / static_cast<S>(a.numel()));
}

template <typename S>
VarT<S> reshape(const VarT<S>& a, std::vector<int> new_shape) {
    if (TensorT<S>::numel_of(new_shape) != a.numel()) throw DimensionError("reshape: element count mismatch");
    TensorT<S> out(std::move(new_shape), a.value().data);
    auto n = detail::make_node<S>(std::move(out), {a});
    if (n->requires_grad) {
        n->backprop = [](NodeT<S>& self) {
            auto& p = self.parents[0];
            for (size_t i = 0; i < self.grad.size(); ++i) p->grad[i] += self.grad[i];
        };
    }
    return VarT<S>::from_node(n);
}

template <typename S>
VarT<S> concat(const VarT<S>& a, const VarT<S>& b) {
    std::vector<S> joined = a.value().data;
    joined.insert(joined.end(), b.value().data.begin(), b.value().data.end());
    TensorT<S> out({static_cast<int>(joined.size())}, std::move(joined));
    auto n = detail::make_node<S>(std::move(out), {a, b});
    if (n->requires_grad) {
        size_t na = a.numel();
        n->backprop = [na](NodeT<S>& self) {
            auto& pa = self.parents[0];
            auto& pb = self.parents[1];
            if (pa->requires_grad)
                for (size_t i = 0; i < na; ++i) pa->grad[i] += self.grad[i];
            if (pb->requires_grad)
                for (size_t i = na; i < self.grad.size(); ++i) pb->grad[i - na] += self.grad[i];
        };
    }
    return VarT<S>::from_node(n);
}

template <typename S>
VarT<S> pick(const VarT<S>& a, int index) {
    if (index < 0 || static_cast<size_t>(index) >= a.numel()) throw DimensionError("pick: index out of range");
    auto n = detail::make_node<S>(TensorT<S>::scalar(a.value().data[index]), {a});
    if (n->requires_grad) {
        n->backprop = [index](NodeT<S>& self) { self.parents[0]->grad[index] += self.grad[0]; };
    }
    return VarT<S>::from_node(n);
}

template <typename S>
VarT<S> leaky_relu(const VarT<S>& a, S slope) {
    TensorT<S> out = a.value();
    for (auto& v : out.data) v = v > S(0) ? v : slope * v;
    auto n = detail::make_node<S>(std::move(out), {a});
    if (n->requires_grad) {
        n->backprop = [slope](NodeT<S>& self) {
            auto& p = self.parents[0];
            for (size_t i = 0; i < self.grad.size(); ++i)
                p->grad[i] += self.grad[i] * (p->value.data[i] > S(0) ? S(1) : slope);
        };
    }
    return VarT<S>::from_node(n);
}

// x * sigmoid(x)
template <typename S>
VarT<S> swish(const VarT<S>& a) {
    TensorT<S> out = a.value();
    for (auto& v : out.data) v = v / (S(1) + std::exp(-v));
    auto n = detail::make_node<S>(std::move(out), {a});
    if (n->requires_grad) {
        n->backprop = [](NodeT<S>& self) {
            auto& p = self.parents[0];
            for (size_t i = 0; i < self.grad.size(); ++i) {
                S x = p->value.data[i];
                S sig = S(1) / (S(1) + std::exp(-x));
                p->grad[i] += self.grad[i] * (sig + x * sig * (S(1) - sig));
            }
        };
    }
    return VarT<S>::from_node(n);
}

// Numerically stable log-softmax over a 1-D tensor.
template <typename S>
VarT<S> log_softmax(const VarT<S>& a) {
    if (a.shape().size() != 1) throw DimensionError("log_softmax expects a 1-D tensor");
    TensorT<S> out = a.value();
    S m = out.data[0];
    for (S v : out.data) m = std::max(m, v);
    S lse = 0;
    for (S v : out.data) lse += std::exp(v - m);
    lse = m + std::log(lse);
    for (auto& v : out.data) v -= lse;
    auto n = detail::make_node<S>(std::move(out), {a});
    if (n->requires_grad) {
        n->backprop = [](NodeT<S>& self) {
            auto& p = self.parents[0];
            S gsum = 0;
            for (S g : self.grad) gsum += g;
            for (size_t i = 0; i < self.grad.size(); ++i)
                p->grad[i] += self.grad[i] - std::exp(self.value.data[i]) * gsum;
        };
    }
    return VarT<S>::from_node(n);
}

template <typename S>
VarT<S> softmax(const VarT<S>& a) {
    return expv(log_softmax(a));
}

// -log_softmax(logits)[target]
template <typename S>
VarT<S> softmax_cross_entropy(const VarT<S>& logits, int target) {
    return scale(pick(log_softmax(logits), target), S(-1));
}

template <typename S>
VarT<S> dense_op(const VarT<S>& x, const VarT<S>& W, const VarT<S>& b) {
    if (x.shape().size() != 1 || W.shape().size() != 2) throw DimensionError("dense: expects x[n], W[m,n]");
    int n_in = x.shape()[0];
    int n_out = W.shape()[0];
    if (W.shape()[1] != n_in || b.shape() != std::vector<int>{n_out})
        throw DimensionError("dense: dimension mismatch");
    TensorT<S> out({n_out});
    const S* wp = W.value().ptr();
    const S* xp = x.value().ptr();
    for (int i = 0; i < n_out; ++i) {
        const S* wrow = wp + static_cast<size_t>(i) * n_in;
        S acc = b.value().data[i];
        for (int j = 0; j < n_in; ++j) acc += wrow[j] * xp[j];
        out.data[i] = acc;
    }
    auto n = detail::make_node<S>(std::move(out), {x, W, b});
    if (n->requires_grad) {
        n->backprop = [n_in, n_out](NodeT<S>& self) {
            auto& px = self.parents[0];
            auto& pw = self.parents[1];
            auto& pb = self.parents[2];
            const S* g = self.grad.data();
            if (px->requires_grad) {
                const S* wp2 = pw->value.data.data();
                for (int i = 0; i < n_out; ++i) {
                    S gi = g[i];
                    if (gi == S(0)) continue;
                    const S* wrow = wp2 + static_cast<size_t>(i) * n_in;
                    for (int j = 0; j < n_in; ++j) px->grad[j] += gi * wrow[j];
                }
            }
            if (pw->requires_grad) {
                const S* xp2 = px->value.data.data();
                for (int i = 0; i < n_out; ++i) {
                    S gi = g[i];
                    if (gi == S(0)) continue;
                    S* grow = pw->grad.data() + static_cast<size_t>(i) * n_in;
                    for (int j = 0; j < n_in; ++j) grow[j] += gi * xp2[j];
                }
            }
            if (pb->requires_grad)
                for (int i = 0; i < n_out; ++i) pb->grad[i] += g[i];
        };
    }
    return VarT<S>::from_node(n);
}

namespace detail {

// Unrolls valid-conv patches of x[Cin,H,W] into col[Cin*kh*kw, oh*ow].
template <typename S>
void im2col(const S* x, int cin, int h, int w, int kh, int kw, int stride, int oh, int ow, S* col) {
    int patch = cin * kh * kw;
    for (int c = 0; c < cin; ++c) {
        for (int i = 0; i < kh; ++i) {
            for (int j = 0; j < kw; ++j) {
                int row = (c * kh + i) * kw + j;
                S* dst = col + static_cast<size_t>(row) * (oh * ow);
                const S* src = x + static_cast<size_t>(c) * h * w;
                for (int oy = 0; oy < oh; ++oy) {
                    const S* srow = src + static_cast<size_t>(oy * stride + i) * w + j;
                    for (int ox = 0; ox < ow; ++ox) dst[oy * ow + ox] = srow[ox * stride];
                }
            }
        }
    }
    (void)patch;
}

template <typename S>
void col2im_add(const S* col, int cin, int h, int w, int kh, int kw, int stride, int oh, int ow, S* x) {
    for (int c = 0; c < cin; ++c) {
        for (int i = 0; i < kh; ++i) {
            for (int j = 0; j < kw; ++j) {
                int row = (c * kh + i) * kw + j;
                const S* src = col + static_cast<size_t>(row) * (oh * ow);
                S* dst = x + static_cast<size_t>(c) * h * w;
                for (int oy = 0; oy < oh; ++oy) {
                    S* drow = dst + static_cast<size_t>(oy * stride + i) * w + j;
                    for (int ox = 0; ox < ow; ++ox) drow[ox * stride] += src[oy * ow + ox];
                }
            }
        }
    }
}

}  // namespace detail

// Valid (unpadded) 2-D convolution, x[Cin,H,W] * K[Cout,Cin,kh,kw] + b[Cout].
template <typename S>
VarT<S> conv2d(const VarT<S>& x, const VarT<S>& K, const VarT<S>& b, int stride) {
    if (x.shape().size() != 3 || K.shape().size() != 4) throw DimensionError("conv2d: expects x[C,H,W], K[Co,Ci,kh,kw]");
    int cin = x.shape()[0], h = x.shape()[1], w = x.shape()[2];
    int cout = K.shape()[0], kcin = K.shape()[1], kh = K.shape()[2], kw = K.shape()[3];
    if (kcin != cin) throw DimensionError("conv2d: input channels do not match kernel channels");
    if (h < kh || w < kw || stride < 1) throw DimensionError("conv2d: kernel larger than input or bad stride");
    if (b.shape() != std::vector<int>{cout}) throw DimensionError("conv2d: bias shape mismatch");
    int oh = (h - kh) / stride + 1;
    int ow = (w - kw) / stride + 1;
    int patch = cin * kh * kw;
    int npix = oh * ow;

    auto col = std::make_shared<std::vector<S>>(static_cast<size_t>(patch) * npix);
    detail::im2col(x.value().ptr(), cin, h, w, kh, kw, stride, oh, ow, col->data());

    TensorT<S> out({cout, oh, ow});
    for (int c = 0; c < cout; ++c) {
        S bias = b.value().data[c];
        S* orow = out.ptr() + static_cast<size_t>(c) * npix;
        for (int p = 0; p < npix; ++p) orow[p] = bias;
    }
    detail::gemm_nn(cout, patch, npix, K.value().ptr(), col->data(), out.ptr());

    auto n = detail::make_node<S>(std::move(out), {x, K, b});
    if (n->requires_grad) {
        n->backprop = [=](NodeT<S>& self) {
            auto& px = self.parents[0];
            auto& pk = self.parents[1];
            auto& pb = self.parents[2];
            const S* g = self.grad.data();
            if (pb->requires_grad) {
                for (int c = 0; c < cout; ++c) {
                    S acc = 0;
                    const S* grow = g + static_cast<size_t>(c) * npix;
                    for (int p = 0; p < npix; ++p) acc += grow[p];
                    pb->grad[c] += acc;
                }
            }
            if (pk->requires_grad) {
                // dK[co, patch] += g[co, npix] * col[patch, npix]^T
                detail::gemm_nt(cout, npix, patch, g, col->data(), pk->grad.data());
            }
            if (px->requires_grad) {
                std::vector<S> gcol(static_cast<size_t>(patch) * npix, S(0));
                // gcol[patch, npix] += K[cout, patch]^T * g[cout, npix]
                detail::gemm_tn(patch, cout, npix, pk->value.data.data(), g, gcol.data());
                detail::col2im_add(gcol.data(), cin, h, w, kh, kw, stride, oh, ow, px->grad.data());
            }
        };
    }
    return VarT<S>::from_node(n);
}

// min of two scalars; gradient follows the smaller branch (ties go to a).
template <typename S>
VarT<S> min2(const VarT<S>& a, const VarT<S>& b) {
    if (a.numel() != 1 || b.numel() != 1) throw ContractError("min2 expects scalars");
    bool take_a = a.value().data[0] <= b.value().data[0];
    auto n = detail::make_node<S>(TensorT<S>::scalar(take_a ? a.value().data[0] : b.value().data[0]), {a, b});
    if (n->requires_grad) {
        n->backprop = [take_a](NodeT<S>& self) {
            auto& p = self.parents[take_a ? 0 : 1];
            if (p->requires_grad) p->grad[0] += self.grad[0];
        };
    }
    return VarT<S>::from_node(n);
}

// Elementwise clamp; gradient passes where lo <= x <= hi.
template <typename S>
VarT<S> clampv(const VarT<S>& a, S lo, S hi) {
    TensorT<S> out = a.value();
    for (auto& v : out.data) v = std::min(hi, std::max(lo, v));
    auto n = detail::make_node<S>(std::move(out), {a});
    if (n->requires_grad) {
        n->backprop = [lo, hi](NodeT<S>& self) {
            auto& p = self.parents[0];
            for (size_t i = 0; i < self.grad.size(); ++i) {
                S x = p->value.data[i];
                if (x >= lo && x <= hi) p->grad[i] += self.grad[i];
            }
        };
    }
    return VarT<S>::from_node(n);
}

}  // namespace fishtank
