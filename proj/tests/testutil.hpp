#pragma once

// Shared test fixtures: a miniature cascade and an explicit stage-t loss
// graph assembled from the public loss builders, so gradient routing and
// finite-difference checks can target each term in isolation.

#include <cstdint>
#include <vector>

#include "seqens/halting.hpp"
#include "seqens/losses.hpp"
#include "seqens/nets.hpp"
#include "seqens/rng.hpp"

namespace testutil {

struct MiniCascade {
    std::vector<seqens::BaseModel> models;
    seqens::Selector selector;
    std::size_t dim = 0;
    std::size_t classes = 0;
};

inline MiniCascade make_cascade(std::size_t T, std::size_t dim, std::size_t classes,
                                std::uint64_t seed,
                                std::vector<std::size_t> hidden = {6, 6},
                                std::size_t sel_hidden = 8) {
    MiniCascade c;
    c.dim = dim;
    c.classes = classes;
    seqens::BaseModelConfig mcfg{dim, std::move(hidden), classes};
    for (std::size_t t = 0; t < T; ++t) {
        seqens::Rng rng = seqens::Rng::derive(seed, "init", t + 1);
        c.models.emplace_back(mcfg, rng);
    }
    seqens::Rng rng = seqens::Rng::derive(seed, "init", 0);
    c.selector = seqens::Selector({seqens::selector_input_dim(classes), sel_hidden}, rng);
    return c;
}

struct StageParts {
    seqens::TensorPtr base, ens, cost, rank, total;
};

// Values the stage-t objective treats as constants: detached predictions,
// selector encodings, and the bootstrapped rank reference. Finite-difference
// oracles must hold these fixed while perturbing parameters, otherwise the
// oracle differentiates through the stop-gradient paths.
struct PinnedStage {
    std::vector<seqens::TensorPtr> preds;  // t blocks of [n, K]
    std::vector<seqens::TensorPtr> encs;   // t blocks of [n, 2K+1]
    seqens::TensorPtr ref;                 // [n]
};

// Builds the stage-t loss graph: frozen models enter as constants, the
// current model's predictions reach the selector detached, and the rank
// reference is a constant bootstrapped target. With `pinned`, the detached
// quantities are taken from the snapshot instead of being recomputed.
inline StageParts build_stage_loss(const MiniCascade& c, const std::vector<double>& x_rows,
                                   const std::vector<int>& labels, std::size_t t,
                                   const seqens::LossWeights& w, double lambda_dis = 0.01,
                                   const PinnedStage* pinned = nullptr) {
    using namespace seqens;
    const std::size_t n = labels.size();
    const std::size_t k = c.classes;
    auto x = make_tensor({n, c.dim}, x_rows);
    auto fw = c.models[t - 1].forward(x);

    StageParts parts;
    parts.base = base_loss(fw.main_probs, fw.aux_probs, labels, lambda_dis);
    if (t == 1) {
        auto total = total_loss(1, parts.base, nullptr, nullptr, nullptr, w);
        parts.total = total.total;
        return parts;
    }

    std::vector<TensorPtr> preds, encs;
    if (pinned != nullptr) {
        preds = pinned->preds;
        encs = pinned->encs;
    } else {
        for (std::size_t s = 0; s + 1 < t; ++s) {
            auto out = c.models[s].predict_batch(x_rows.data(), n, c.dim);
            preds.push_back(make_tensor({n, k}, out.main));
            encs.push_back(make_tensor({n, selector_input_dim(k)},
                                       encode_selector_input_batch(out, n)));
        }
        auto main_det = detach(fw.main_probs);
        auto aux_det = detach(fw.aux_probs);
        std::vector<double> kl_col(n);
        std::vector<double> m(k), a(k);
        for (std::size_t i = 0; i < n; ++i) {
            std::copy_n(&main_det->data[i * k], k, m.begin());
            std::copy_n(&aux_det->data[i * k], k, a.begin());
            kl_col[i] = kl_divergence(m, a);
        }
        encs.push_back(
            concat_cols({main_det, aux_det, make_tensor({n, std::size_t{1}}, kl_col)}));
        preds.push_back(main_det);
    }

    std::vector<TensorPtr> hs;
    TensorPtr d = c.selector.initial_state(n);
    for (std::size_t s = 0; s < t; ++s) {
        auto [h, d_next] = c.selector.step(encs[s], d);
        hs.push_back(h);
        d = d_next;
    }
    auto chain = soft_halting_chain(hs);
    auto soft_ens = soft_ensembles(preds, chain.survival);
    parts.ens = ensemble_loss(soft_ens, labels);
    parts.cost = cost_loss(chain.pmf);

    TensorPtr ref;
    if (pinned != nullptr) {
        ref = pinned->ref;
    } else {
        std::vector<double> ref_vals(n);
        std::vector<std::vector<double>> pv(t - 1, std::vector<double>(k));
        std::vector<double> sv(t - 1);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t s = 0; s + 1 < t; ++s) {
                std::copy_n(&preds[s]->data[i * k], k, pv[s].begin());
                sv[s] = chain.survival[s]->data[i];
            }
            ref_vals[i] = task_loss(labels[i], soft_ensemble_at(pv, sv));
        }
        ref = make_tensor({n}, ref_vals);
    }
    parts.rank = rank_loss(chain.survival[t - 1], cross_entropy_vec(fw.main_probs, labels), ref);
    auto total = total_loss(t, parts.base, parts.ens, parts.cost, parts.rank, w);
    parts.total = total.total;
    return parts;
}

// Snapshots the stop-gradient quantities of a stage under the current
// parameters, for use as the fixed constants of an FD oracle.
inline PinnedStage pin_stage(const MiniCascade& c, const std::vector<double>& x_rows,
                             const std::vector<int>& labels, std::size_t t) {
    using namespace seqens;
    const std::size_t n = labels.size();
    const std::size_t k = c.classes;
    PinnedStage pin;
    for (std::size_t s = 0; s < t; ++s) {
        auto out = c.models[s].predict_batch(x_rows.data(), n, c.dim);
        pin.preds.push_back(make_tensor({n, k}, out.main));
        pin.encs.push_back(
            make_tensor({n, selector_input_dim(k)}, encode_selector_input_batch(out, n)));
    }
    // Rank reference under the current selector.
    std::vector<TensorPtr> hs;
    TensorPtr d = c.selector.initial_state(n);
    for (std::size_t s = 0; s < t; ++s) {
        auto [h, d_next] = c.selector.step(pin.encs[s], d);
        hs.push_back(h);
        d = d_next;
    }
    auto chain = soft_halting_chain(hs);
    std::vector<double> ref_vals(n);
    std::vector<std::vector<double>> pv(t - 1, std::vector<double>(k));
    std::vector<double> sv(t - 1);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t s = 0; s + 1 < t; ++s) {
            std::copy_n(&pin.preds[s]->data[i * k], k, pv[s].begin());
            sv[s] = chain.survival[s]->data[i];
        }
        ref_vals[i] = task_loss(labels[i], soft_ensemble_at(pv, sv));
    }
    pin.ref = make_tensor({n}, ref_vals);
    return pin;
}

inline std::vector<seqens::TensorPtr> model_params(const MiniCascade& c, std::size_t t) {
    return c.models[t - 1].params();
}

// True when every gradient entry of every listed parameter is exactly zero
// (unallocated grads count as zero).
inline bool grads_exactly_zero(const std::vector<seqens::TensorPtr>& params) {
    for (const auto& p : params) {
        for (double g : p->grad) {
            if (g != 0.0) return false;
        }
    }
    return true;
}

inline std::vector<double> random_batch(std::size_t n, std::size_t dim, seqens::Rng& rng,
                                        double lo = -1.5, double hi = 1.5) {
    std::vector<double> x(n * dim);
    for (auto& v : x) v = rng.uniform(lo, hi);
    return x;
}

inline std::vector<int> random_labels(std::size_t n, std::size_t classes, seqens::Rng& rng) {
    std::vector<int> y(n);
    for (auto& v : y) v = static_cast<int>(rng.below(classes));
    return y;
}

}  // namespace testutil
