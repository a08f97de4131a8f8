#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "seqens/ops.hpp"
#include "seqens/rng.hpp"
#include "seqens/tensor.hpp"

namespace seqens {

constexpr double kProbEps = 1e-12;

enum class Mode { train, eval };

// ---------------------------------------------------------------------------
// Parameter initialization
// ---------------------------------------------------------------------------

inline TensorPtr glorot_param(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    double stddev = std::sqrt(2.0 / static_cast<double>(fan_in + fan_out));
    auto t = make_tensor({fan_in, fan_out}, 0.0, /*requires_grad=*/true);
    for (auto& v : t->data) v = stddev * rng.normal();
    return t;
}

inline TensorPtr zeros_param(std::size_t n) {
    return make_tensor({n}, 0.0, /*requires_grad=*/true);
}

struct LinearLayer {
    TensorPtr w;  // [in, out]
    TensorPtr b;  // [out]

    LinearLayer() = default;
    LinearLayer(std::size_t in, std::size_t out, Rng& rng)
        : w(glorot_param(in, out, rng)), b(zeros_param(out)) {}

    TensorPtr forward(const TensorPtr& x) const { return add_rowwise(matmul(x, w), b); }
};

// ---------------------------------------------------------------------------
// Dual-head base classifier
// ---------------------------------------------------------------------------

// KL(m || a) with an epsilon floor inside the logarithms, clamped at zero so
// tiny negative round-off from the floor cannot leak out.
inline double kl_divergence(const std::vector<double>& m, const std::vector<double>& a) {
    double kl = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i)
        kl += m[i] * (std::log(m[i] + kProbEps) - std::log(a[i] + kProbEps));
    return kl > 0.0 ? kl : 0.0;
}

struct BaseOutput {
    std::vector<double> main_probs;
    std::vector<double> aux_probs;
    double kl_uncertainty = 0.0;
};

struct BaseModelConfig {
    std::size_t input_dim = 2;
    std::vector<std::size_t> hidden = {64, 64};
    std::size_t num_classes = 2;
};

// MLP trunk with tanh activations and two affine classification heads on the
// shared feature output. The auxiliary head exists to expose prediction
// uncertainty: its disagreement with the main head (KL) feeds the selector,
// and an L1 discrepancy term in the base loss keeps the heads from collapsing
// onto each other.
class BaseModel {
public:
    BaseModel() = default;

    BaseModel(const BaseModelConfig& cfg, Rng& rng) : cfg_(cfg) {
        std::size_t in = cfg.input_dim;
        for (std::size_t width : cfg.hidden) {
            trunk_.emplace_back(in, width, rng);
            in = width;
        }
        main_head_ = LinearLayer(in, cfg.num_classes, rng);
        aux_head_ = LinearLayer(in, cfg.num_classes, rng);
    }

    const BaseModelConfig& config() const { return cfg_; }

    std::vector<TensorPtr> params() const {
        std::vector<TensorPtr> out;
        for (const auto& l : trunk_) {
            out.push_back(l.w);
            out.push_back(l.b);
        }
        out.push_back(main_head_.w);
        out.push_back(main_head_.b);
        out.push_back(aux_head_.w);
        out.push_back(aux_head_.b);
        return out;
    }

    struct Forward {
        TensorPtr main_probs;  // [n, K]
        TensorPtr aux_probs;   // [n, K]
    };

    // Graph forward over a batch [n, input_dim].
    Forward forward(const TensorPtr& x) const {
        if (x->cols() != cfg_.input_dim) {
            throw std::invalid_argument("base model: input has " + std::to_string(x->cols()) +
                                        " features, expected " + std::to_string(cfg_.input_dim));
        }
        TensorPtr h = x;
        for (const auto& l : trunk_) h = tanh(l.forward(h));
        return {softmax_rows(main_head_.forward(h)), softmax_rows(aux_head_.forward(h))};
    }

    // Batched inference without gradient tracking.
    struct BatchOutput {
        std::vector<double> main;  // n x K row-major
        std::vector<double> aux;   // n x K row-major
        std::vector<double> kl;    // n
        std::size_t num_classes = 0;
    };

    BatchOutput predict_batch(const double* features, std::size_t n, std::size_t dim) const {
        auto x = make_tensor({n, dim}, std::vector<double>(features, features + n * dim));
        auto fw = forward(x);
        BatchOutput out;
        out.main = fw.main_probs->data;
        out.aux = fw.aux_probs->data;
        out.num_classes = cfg_.num_classes;
        out.kl.resize(n);
        const std::size_t k = cfg_.num_classes;
        std::vector<double> m(k), a(k);
        for (std::size_t i = 0; i < n; ++i) {
            std::copy_n(&out.main[i * k], k, m.begin());
            std::copy_n(&out.aux[i * k], k, a.begin());
            out.kl[i] = kl_divergence(m, a);
        }
        return out;
    }

    BaseOutput predict(const double* x, std::size_t dim) const {
        auto batch = predict_batch(x, 1, dim);
        BaseOutput out;
        out.main_probs.assign(batch.main.begin(), batch.main.end());
        out.aux_probs.assign(batch.aux.begin(), batch.aux.end());
        out.kl_uncertainty = batch.kl[0];
        return out;
    }

    BaseOutput predict(const std::vector<double>& x) const { return predict(x.data(), x.size()); }

private:
    BaseModelConfig cfg_;
    std::vector<LinearLayer> trunk_;
    LinearLayer main_head_;
    LinearLayer aux_head_;
};

// ---------------------------------------------------------------------------
// Selector input encoding
// ---------------------------------------------------------------------------

inline std::size_t selector_input_dim(std::size_t num_classes) { return 2 * num_classes + 1; }

// [main_probs || aux_probs || kl], length 2K + 1.
inline std::vector<double> encode_selector_input(const BaseOutput& out) {
    std::vector<double> e;
    e.reserve(out.main_probs.size() + out.aux_probs.size() + 1);
    e.insert(e.end(), out.main_probs.begin(), out.main_probs.end());
    e.insert(e.end(), out.aux_probs.begin(), out.aux_probs.end());
    e.push_back(out.kl_uncertainty);
    return e;
}

// Batched encoding from a BatchOutput; returns n x (2K+1) row-major.
inline std::vector<double> encode_selector_input_batch(const BaseModel::BatchOutput& b,
                                                       std::size_t n) {
    const std::size_t k = b.num_classes;
    const std::size_t w = selector_input_dim(k);
    std::vector<double> enc(n * w);
    for (std::size_t i = 0; i < n; ++i) {
        std::copy_n(&b.main[i * k], k, &enc[i * w]);
        std::copy_n(&b.aux[i * k], k, &enc[i * w + k]);
        enc[i * w + 2 * k] = b.kl[i];
    }
    return enc;
}

// ---------------------------------------------------------------------------
// Recurrent halting selector
// ---------------------------------------------------------------------------

struct SelectorConfig {
    std::size_t input_dim = 5;  // 2K + 1
    std::size_t hidden = 32;
    // Initial halt-head bias. Negative values start the cascade in a
    // "continue" regime so the survival-weighted losses keep gradient signal
    // while the halting policy differentiates; at 0 the initial halt
    // probability is 0.5, which the cost term saturates quickly.
    double halt_bias_init = -2.0;
};

// Single-layer GRU cell plus a sigmoid halt head on the new hidden state.
// One selector instance is shared across all cascade steps; the step index
// enters only through the recurrent state.
class Selector {
public:
    static constexpr const char* kCellVariant = "gru";

    Selector() = default;

    Selector(const SelectorConfig& cfg, Rng& rng) : cfg_(cfg) {
        const std::size_t in = cfg.input_dim, h = cfg.hidden;
        wr_ = glorot_param(in, h, rng);
        ur_ = glorot_param(h, h, rng);
        br_ = zeros_param(h);
        wz_ = glorot_param(in, h, rng);
        uz_ = glorot_param(h, h, rng);
        bz_ = zeros_param(h);
        wn_ = glorot_param(in, h, rng);
        bn_ = zeros_param(h);
        un_ = glorot_param(h, h, rng);
        bhn_ = zeros_param(h);
        halt_ = LinearLayer(h, 1, rng);
        halt_.b->data[0] = cfg.halt_bias_init;
    }

    const SelectorConfig& config() const { return cfg_; }

    std::vector<TensorPtr> params() const {
        return {wr_, ur_, br_, wz_, uz_, bz_, wn_, bn_, un_, bhn_, halt_.w, halt_.b};
    }

    TensorPtr initial_state(std::size_t n) const { return make_tensor({n, cfg_.hidden}); }

    // One recurrent step over a batch: e [n, input_dim], d_prev [n, hidden].
    // Returns the halt probability h_t [n] in (0,1) and the new state d_t.
    std::pair<TensorPtr, TensorPtr> step(const TensorPtr& e, const TensorPtr& d_prev) const {
        if (e->cols() != cfg_.input_dim) {
            throw std::invalid_argument("selector: input width " + std::to_string(e->cols()) +
                                        ", expected " + std::to_string(cfg_.input_dim));
        }
        auto r = sigmoid(add_rowwise(add(matmul(e, wr_), matmul(d_prev, ur_)), br_));
        auto z = sigmoid(add_rowwise(add(matmul(e, wz_), matmul(d_prev, uz_)), bz_));
        auto n = tanh(add(add_rowwise(matmul(e, wn_), bn_),
                          mul(r, add_rowwise(matmul(d_prev, un_), bhn_))));
        auto d = add(mul(one_minus(z), n), mul(z, d_prev));
        auto h = reshape(sigmoid(halt_.forward(d)), {d->rows()});
        return {h, d};
    }

    // Single-sample step on plain vectors (no gradient tracking).
    std::pair<double, std::vector<double>> step_plain(const std::vector<double>& e,
                                                      const std::vector<double>& d_prev) const {
        auto et = make_tensor({std::size_t{1}, e.size()}, e);
        auto dt = make_tensor({std::size_t{1}, d_prev.size()}, d_prev);
        auto [h, d] = step(et, dt);
        return {h->data[0], d->data};
    }

    std::vector<double> initial_state_plain() const {
        return std::vector<double>(cfg_.hidden, 0.0);
    }

private:
    SelectorConfig cfg_;
    TensorPtr wr_, ur_, br_;
    TensorPtr wz_, uz_, bz_;
    TensorPtr wn_, bn_, un_, bhn_;
    LinearLayer halt_;
};

// ---------------------------------------------------------------------------
// Gumbel-Softmax binarization
// ---------------------------------------------------------------------------

namespace detail {

struct GumbelSample {
    double hard;      // 0 or 1
    double soft;      // relaxed sample in (0, 1)
    double dsoft_dh;  // derivative of the relaxed sample w.r.t. h
};

// Binary concrete relaxation of Bernoulli(h): soft = sigmoid((logit(h) + L) / tau)
// with L logistic noise. P(soft >= 1/2) = h for every temperature.
inline GumbelSample gumbel_binarize_detail(double h, double tau, double logistic_noise) {
    double hc = std::min(std::max(h, kProbEps), 1.0 - kProbEps);
    double logit = std::log(hc) - std::log1p(-hc);
    double y = 1.0 / (1.0 + std::exp(-(logit + logistic_noise) / tau));
    double dsoft = y * (1.0 - y) / (tau * hc * (1.0 - hc));
    return {y >= 0.5 ? 1.0 : 0.0, y, dsoft};
}

inline void check_temperature(double tau) {
    if (!(tau > 0.0)) {
        throw std::invalid_argument("gumbel_binarize: temperature must be positive, got " +
                                    std::to_string(tau));
    }
}

}  // namespace detail

// Plain-value binarization of a halt probability. Train mode draws a relaxed
// Gumbel-Softmax sample and hard-thresholds it; eval mode thresholds h itself.
inline double gumbel_binarize(double h, double temperature, Mode mode, Rng* rng = nullptr) {
    detail::check_temperature(temperature);
    if (mode == Mode::eval) return h >= 0.5 ? 1.0 : 0.0;
    if (rng == nullptr) throw std::invalid_argument("gumbel_binarize: train mode needs an rng");
    return detail::gumbel_binarize_detail(h, temperature, rng->logistic()).hard;
}

// Graph version with a straight-through estimator: the forward value is the
// hard sample, the gradient is that of the underlying relaxed sample. Eval
// mode returns a detached constant.
inline TensorPtr gumbel_binarize(const TensorPtr& h, double temperature, Mode mode,
                                 Rng* rng = nullptr) {
    detail::check_temperature(temperature);
    if (mode == Mode::eval) {
        auto out = make_tensor(h->shape);
        for (std::size_t i = 0; i < h->size(); ++i) out->data[i] = h->data[i] >= 0.5 ? 1.0 : 0.0;
        return out;
    }
    if (rng == nullptr) throw std::invalid_argument("gumbel_binarize: train mode needs an rng");
    auto out = detail::op_result(h->shape, {h});
    std::vector<double> dsoft(h->size());
    for (std::size_t i = 0; i < h->size(); ++i) {
        auto s = detail::gumbel_binarize_detail(h->data[i], temperature, rng->logistic());
        out->data[i] = s.hard;
        dsoft[i] = s.dsoft_dh;
    }
    if (out->requires_grad) {
        out->backprop = [dsoft = std::move(dsoft)](Tensor& self) {
            Tensor& h = *self.parents[0];
            for (std::size_t i = 0; i < self.size(); ++i)
                detail::accumulate(h, i, self.grad[i] * dsoft[i]);
        };
    }
    return out;
}

}  // namespace seqens
