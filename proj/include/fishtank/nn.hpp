#pragma once

#include <cmath>
#include <vector>

#include "fishtank/rng.hpp"
#include "fishtank/tensor.hpp"

namespace fishtank {

// Scaled-uniform fan-based init (Glorot): U(-s, s), s = sqrt(6 / (fan_in + fan_out)).
template <typename S>
TensorT<S> glorot_uniform(std::vector<int> shape, int fan_in, int fan_out, RngStream& rng) {
    TensorT<S> t(std::move(shape));
    double s = std::sqrt(6.0 / (fan_in + fan_out));
    for (auto& v : t.data) v = static_cast<S>(rng.uniform(-s, s));
    return t;
}

template <typename S>
struct DenseLayer {
    VarT<S> W, b;

    DenseLayer() = default;
    DenseLayer(int n_in, int n_out, RngStream& rng)
        : W(glorot_uniform<S>({n_out, n_in}, n_in, n_out, rng), true),
          b(TensorT<S>::zeros({n_out}), true) {}

    VarT<S> forward(const VarT<S>& x) const { return dense_op(x, W, b); }

    void collect_params(std::vector<VarT<S>>& out) const {
        out.push_back(W);
        out.push_back(b);
    }
};

template <typename S>
struct ConvLayer {
    VarT<S> K, b;
    int stride = 1;

    ConvLayer() = default;
    ConvLayer(int c_in, int c_out, int ksize, int stride_, RngStream& rng)
        : K(glorot_uniform<S>({c_out, c_in, ksize, ksize}, c_in * ksize * ksize, c_out * ksize * ksize, rng), true),
          b(TensorT<S>::zeros({c_out}), true),
          stride(stride_) {}

    VarT<S> forward(const VarT<S>& x) const { return conv2d(x, K, b, stride); }

    void collect_params(std::vector<VarT<S>>& out) const {
        out.push_back(K);
        out.push_back(b);
    }
};

// Adam with bias correction; epsilon added outside the square root.
template <typename S>
class AdamT {
  public:
    static constexpr double kBeta1 = 0.9;
    static constexpr double kBeta2 = 0.999;
    static constexpr double kEps = 1e-8;

    explicit AdamT(std::vector<VarT<S>> params) : params_(std::move(params)) {
        slots_.resize(params_.size());
        for (size_t i = 0; i < params_.size(); ++i) {
            slots_[i].m.assign(params_[i].numel(), S(0));
            slots_[i].v.assign(params_[i].numel(), S(0));
        }
    }

    long step_count() const { return t_; }
    std::vector<VarT<S>>& params() { return params_; }

    void step(S lr) {
        ++t_;
        double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
        double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
        for (size_t i = 0; i < params_.size(); ++i) {
            auto& p = params_[i];
            const auto& g = p.grad();  // throws ContractError when missing
            auto& m = slots_[i].m;
            auto& v = slots_[i].v;
            S* data = p.value().ptr();
            for (size_t j = 0; j < g.size(); ++j) {
                m[j] = static_cast<S>(kBeta1 * m[j] + (1.0 - kBeta1) * g[j]);
                v[j] = static_cast<S>(kBeta2 * v[j] + (1.0 - kBeta2) * g[j] * g[j]);
                double mhat = m[j] / bc1;
                double vhat = v[j] / bc2;
                data[j] -= static_cast<S>(lr * mhat / (std::sqrt(vhat) + kEps));
            }
        }
    }

    void zero_grad() {
        for (auto& p : params_) p.zero_grad();
    }

    // Moment buffers in a fixed order, for checkpointing.
    struct SlotView {
        std::vector<S>* m;
        std::vector<S>* v;
    };
    std::vector<SlotView> slot_views() {
        std::vector<SlotView> out;
        for (auto& s : slots_) out.push_back({&s.m, &s.v});
        return out;
    }
    void set_step_count(long t) { t_ = t; }

  private:
    struct Slot {
        std::vector<S> m, v;
    };
    std::vector<VarT<S>> params_;
    std::vector<Slot> slots_;
    long t_ = 0;
};

using Adam = AdamT<float>;

// Draws from softmax(logits); returns the index and its log-probability.
// Probabilities are accumulated in double so the draw is reproducible across
// scalar types of the surrounding graph.
template <typename S>
std::pair<int, double> categorical_sample(const TensorT<S>& logits, RngStream& rng) {
    if (logits.shape.size() != 1) throw ContractError("categorical_sample expects a 1-D logits tensor");
    size_t k = logits.numel();
    if (k < 1) throw ContractError("categorical_sample: empty logits");
    double m = logits.data[0];
    for (S v : logits.data) {
        if (!std::isfinite(static_cast<double>(v))) throw ContractError("categorical_sample: non-finite logits");
        m = std::max(m, static_cast<double>(v));
    }
    double z = 0;
    for (S v : logits.data) z += std::exp(static_cast<double>(v) - m);
    double u = rng.uniform() * z;
    double acc = 0;
    size_t idx = k - 1;  // guard against trailing round-off
    for (size_t i = 0; i < k; ++i) {
        acc += std::exp(static_cast<double>(logits.data[i]) - m);
        if (u < acc) {
            idx = i;
            break;
        }
    }
    double logp = static_cast<double>(logits.data[idx]) - m - std::log(z);
    return {static_cast<int>(idx), logp};
}

}  // namespace fishtank
