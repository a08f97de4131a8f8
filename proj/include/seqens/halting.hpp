#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "seqens/nets.hpp"
#include "seqens/ops.hpp"

namespace seqens {

// ---------------------------------------------------------------------------
// Halting-probability calculus on plain vectors
// ---------------------------------------------------------------------------

// Probability that no halt happened before step t (1-based): the product of
// (1 - h_i) for i < t. The empty product at t = 1 is 1.
inline double survival(const std::vector<double>& h, std::size_t t) {
    if (t < 1 || t > h.size()) {
        throw std::invalid_argument("survival: step " + std::to_string(t) + " out of [1, " +
                                    std::to_string(h.size()) + "]");
    }
    double s = 1.0;
    for (std::size_t i = 0; i + 1 < t; ++i) s *= 1.0 - h[i];
    return s;
}

// Halting distribution p_t = h_t * prod_{i<t}(1 - h_i) with the terminal
// entry forced to 1 so the distribution always sums to one.
inline std::vector<double> halting_pmf(std::vector<double> h) {
    if (h.empty()) throw std::invalid_argument("halting_pmf: empty input");
    h.back() = 1.0;
    std::vector<double> p(h.size());
    double s = 1.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        p[i] = h[i] * s;
        s *= 1.0 - h[i];
    }
    return p;
}

// First step (1-based) whose binarized halt decision is 1; the terminal step
// is treated as a forced halt, so the result always exists. With binary input
// this is exactly the argmax of the one-hot halting distribution.
inline std::size_t halting_step(const std::vector<double>& h_binary) {
    if (h_binary.empty()) throw std::invalid_argument("halting_step: empty input");
    for (std::size_t i = 0; i + 1 < h_binary.size(); ++i)
        if (h_binary[i] != 0.0) return i + 1;
    return h_binary.size();
}

// Mean of the first z predictions.
inline std::vector<double> ensemble_predict(const std::vector<std::vector<double>>& preds,
                                            std::size_t z) {
    if (preds.empty()) throw std::invalid_argument("ensemble_predict: empty prediction list");
    if (z < 1 || z > preds.size()) {
        throw std::invalid_argument("ensemble_predict: z = " + std::to_string(z) +
                                    " out of [1, " + std::to_string(preds.size()) + "]");
    }
    std::vector<double> out(preds[0].size(), 0.0);
    for (std::size_t t = 0; t < z; ++t)
        for (std::size_t j = 0; j < out.size(); ++j) out[j] += preds[t][j];
    for (double& v : out) v /= static_cast<double>(z);
    return out;
}

// Survival-weighted running average through step t = |S|:
// (sum_i S(i) y_i) / (sum_i S(i)). With S(1) = 1 the denominator is >= 1.
inline std::vector<double> soft_ensemble_at(const std::vector<std::vector<double>>& preds,
                                            const std::vector<double>& s) {
    if (s.empty() || preds.size() < s.size()) {
        throw std::invalid_argument("soft_ensemble_at: need one prediction per survival value");
    }
    std::vector<double> out(preds[0].size(), 0.0);
    double den = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        den += s[i];
        for (std::size_t j = 0; j < out.size(); ++j) out[j] += s[i] * preds[i][j];
    }
    for (double& v : out) v /= den;
    return out;
}

// ---------------------------------------------------------------------------
// Graph versions used during training
// ---------------------------------------------------------------------------

// Survival chain and halting pmf over a batch, built from per-step halt
// probabilities h[0..t-1], each of shape [n]. The terminal step is forced
// (p_t = S(t)), so h.back() carries no gradient at the current horizon.
struct SoftHalting {
    std::vector<TensorPtr> survival;  // S(1..t), each [n]
    std::vector<TensorPtr> pmf;       // p(1..t), each [n]
};

inline SoftHalting soft_halting_chain(const std::vector<TensorPtr>& h) {
    if (h.empty()) throw std::invalid_argument("soft_halting_chain: empty input");
    const std::size_t n = h[0]->size();
    SoftHalting out;
    out.survival.push_back(make_tensor({n}, 1.0));
    for (std::size_t i = 0; i + 1 < h.size(); ++i)
        out.survival.push_back(mul(out.survival.back(), one_minus(h[i])));
    for (std::size_t i = 0; i + 1 < h.size(); ++i)
        out.pmf.push_back(mul(h[i], out.survival[i]));
    out.pmf.push_back(out.survival.back());
    return out;
}

// Per-step survival-weighted ensembles over a batch. preds[i] is [n, K]
// (detached base predictions), s[i] is [n]; output i is the soft ensemble
// through step i + 1.
inline std::vector<TensorPtr> soft_ensembles(const std::vector<TensorPtr>& preds,
                                             const std::vector<TensorPtr>& s) {
    if (s.empty() || preds.size() < s.size()) {
        throw std::invalid_argument("soft_ensembles: need one prediction per survival value");
    }
    std::vector<TensorPtr> out;
    TensorPtr num = mul_colwise(preds[0], s[0]);
    TensorPtr den = s[0];
    out.push_back(div_colwise(num, den));
    for (std::size_t i = 1; i < s.size(); ++i) {
        num = add(num, mul_colwise(preds[i], s[i]));
        den = add(den, s[i]);
        out.push_back(div_colwise(num, den));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Per-sample sequential inference
// ---------------------------------------------------------------------------

struct HaltingTrace {
    std::vector<double> h;  // per-step halt probabilities (binary in eval mode)
    std::vector<double> S;  // survival values S(1..)
    std::vector<double> p;  // halting pmf with terminal forcing
    std::size_t z = 1;      // halting step, 1-based
};

struct EnsemblePrediction {
    std::vector<double> probs;
    std::size_t steps_used = 1;
    std::vector<std::vector<double>> per_step_probs;  // soft ensembles, train mode only
};

struct InferResult {
    EnsemblePrediction pred;
    HaltingTrace trace;
};

// Runs the cascade on one sample. Eval mode executes base models lazily and
// stops at the first binarized halt, so models past z are never run. Train
// mode executes every model, records the soft halting quantities needed by
// the losses, and samples the halting step with Gumbel-Softmax binarization.
inline InferResult infer(const std::vector<BaseModel>& models, const Selector& sel,
                         const double* x, std::size_t dim, Mode mode, Rng* rng = nullptr,
                         double gumbel_temperature = 1.0) {
    if (models.empty()) throw std::invalid_argument("infer: empty model list");
    const std::size_t T = models.size();
    InferResult res;
    std::vector<std::vector<double>> preds;
    std::vector<double> d = sel.initial_state_plain();

    if (mode == Mode::eval) {
        for (std::size_t t = 1; t <= T; ++t) {
            BaseOutput out = models[t - 1].predict(x, dim);
            preds.push_back(out.main_probs);
            auto [h, d_next] = sel.step_plain(encode_selector_input(out), d);
            d = std::move(d_next);
            double hard = t == T ? 1.0 : gumbel_binarize(h, gumbel_temperature, Mode::eval);
            res.trace.h.push_back(hard);
            if (hard != 0.0) break;
        }
        res.trace.z = halting_step(res.trace.h);
        res.trace.S.assign(res.trace.z, 1.0);  // no halt occurred before z
        res.trace.p.assign(res.trace.z, 0.0);
        res.trace.p.back() = 1.0;
        res.pred.steps_used = res.trace.z;
        res.pred.probs = ensemble_predict(preds, res.trace.z);
        return res;
    }

    std::vector<double> hard;
    for (std::size_t t = 1; t <= T; ++t) {
        BaseOutput out = models[t - 1].predict(x, dim);
        preds.push_back(out.main_probs);
        auto [h, d_next] = sel.step_plain(encode_selector_input(out), d);
        d = std::move(d_next);
        res.trace.h.push_back(h);
        hard.push_back(t == T ? 1.0 : gumbel_binarize(h, gumbel_temperature, Mode::train, rng));
    }
    for (std::size_t t = 1; t <= T; ++t) res.trace.S.push_back(survival(res.trace.h, t));
    res.trace.p = halting_pmf(res.trace.h);
    res.trace.z = halting_step(hard);
    res.pred.steps_used = res.trace.z;
    res.pred.probs = ensemble_predict(preds, res.trace.z);
    for (std::size_t t = 1; t <= T; ++t) {
        res.pred.per_step_probs.push_back(
            soft_ensemble_at(preds, {res.trace.S.begin(), res.trace.S.begin() + t}));
    }
    return res;
}

inline InferResult infer(const std::vector<BaseModel>& models, const Selector& sel,
                         const std::vector<double>& x, Mode mode, Rng* rng = nullptr,
                         double gumbel_temperature = 1.0) {
    return infer(models, sel, x.data(), x.size(), mode, rng, gumbel_temperature);
}

}  // namespace seqens
