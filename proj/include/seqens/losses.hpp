#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "seqens/nets.hpp"
#include "seqens/ops.hpp"

namespace seqens {

// ---------------------------------------------------------------------------
// Task loss
// ---------------------------------------------------------------------------

// Cross-entropy against a hard label: -log(probs[y] + eps).
inline double task_loss(int label, const std::vector<double>& probs) {
    if (label < 0 || static_cast<std::size_t>(label) >= probs.size()) {
        throw std::invalid_argument("task_loss: label " + std::to_string(label) +
                                    " out of range [0, " + std::to_string(probs.size()) + ")");
    }
    return -std::log(probs[static_cast<std::size_t>(label)] + kProbEps);
}

// Per-sample cross-entropy column [n] over batched probabilities [n, K].
inline TensorPtr cross_entropy_vec(const TensorPtr& probs, const std::vector<int>& labels) {
    return mul_scalar(log(add_scalar(gather_rows(probs, labels), kProbEps)), -1.0);
}

inline TensorPtr cross_entropy_mean(const TensorPtr& probs, const std::vector<int>& labels) {
    return mean(cross_entropy_vec(probs, labels));
}

// ---------------------------------------------------------------------------
// Loss weights and reporting bundle
// ---------------------------------------------------------------------------

struct LossWeights {
    double w1 = 0.05;  // ensemble term
    double w2 = 0.01;  // cost term
    double w3 = 0.05;  // rank term

    void validate() const {
        if (w1 < 0 || w2 < 0 || w3 < 0) {
            throw std::invalid_argument("loss weights must be non-negative");
        }
    }
};

struct LossBundle {
    double base = 0.0;
    double ens = 0.0;
    double cost = 0.0;
    double rank = 0.0;
    double total = 0.0;
    LossWeights weights;
};

// ---------------------------------------------------------------------------
// Graph-level loss builders (training path)
// ---------------------------------------------------------------------------

// Task loss of both heads plus the head-discrepancy regularizer, averaged
// over the batch: CE(y, main) + CE(y, aux) - lambda_dis * L1(main, aux).
// Gradients reach only the parameters of the model that produced the probs.
inline TensorPtr base_loss(const TensorPtr& main_probs, const TensorPtr& aux_probs,
                           const std::vector<int>& labels, double lambda_dis) {
    auto ce = add(cross_entropy_vec(main_probs, labels), cross_entropy_vec(aux_probs, labels));
    if (lambda_dis != 0.0) {
        ce = sub(ce, mul_scalar(row_sum(abs_diff(main_probs, aux_probs)), lambda_dis));
    }
    return mean(ce);
}

// Task loss of the soft ensemble at the current step. Base predictions must
// enter the per-step ensembles detached, so this term optimizes the selector
// only (through the survival weights).
inline TensorPtr ensemble_loss(const std::vector<TensorPtr>& per_step_soft_ens,
                               const std::vector<int>& labels) {
    if (per_step_soft_ens.empty()) {
        throw std::invalid_argument("ensemble_loss: no per-step ensembles");
    }
    return cross_entropy_mean(per_step_soft_ens.back(), labels);
}

// Expected halting step sum_t t * p_t, averaged over the batch.
inline TensorPtr cost_loss(const std::vector<TensorPtr>& pmf) {
    if (pmf.empty()) throw std::invalid_argument("cost_loss: empty pmf");
    TensorPtr acc = mul_scalar(pmf[0], 1.0);
    for (std::size_t t = 1; t < pmf.size(); ++t)
        acc = add(acc, mul_scalar(pmf[t], static_cast<double>(t + 1)));
    return mean(acc);
}

// Plain-value expected cost of one halting distribution.
inline double cost_loss(const std::vector<double>& pmf) {
    double total = 0.0, cost = 0.0;
    for (std::size_t t = 0; t < pmf.size(); ++t) {
        total += pmf[t];
        cost += static_cast<double>(t + 1) * pmf[t];
    }
    if (std::abs(total - 1.0) > 1e-6) {
        throw std::invalid_argument("cost_loss: pmf sums to " + std::to_string(total));
    }
    return cost;
}

// Hinge on the loss improvement of the current model over the previous
// ensemble, gated by the survival probability of reaching this step:
// max(0, S_t * (loss_t - ref)). The reference is a bootstrapped target and
// must be passed in detached.
inline double rank_loss(double survival_t, double loss_t, double ref_loss_prev_ens) {
    double v = survival_t * (loss_t - ref_loss_prev_ens);
    return v > 0.0 ? v : 0.0;
}

inline TensorPtr rank_loss(const TensorPtr& survival_t, const TensorPtr& ce_t,
                           const TensorPtr& ref_ce) {
    return mean(relu(mul(survival_t, sub(ce_t, ref_ce))));
}

// ---------------------------------------------------------------------------
// Total
// ---------------------------------------------------------------------------

struct StageLoss {
    TensorPtr total;
    TensorPtr base;
    TensorPtr ens;   // null at stage 1
    TensorPtr cost;  // null at stage 1
    TensorPtr rank;  // null at stage 1

    LossBundle values(const LossWeights& w) const {
        LossBundle b;
        b.weights = w;
        b.base = base->value();
        b.ens = ens ? ens->value() : 0.0;
        b.cost = cost ? cost->value() : 0.0;
        b.rank = rank ? rank->value() : 0.0;
        b.total = total->value();
        return b;
    }
};

// total = base + w1 * ens + w2 * cost + w3 * rank; at stage 1 only the base
// term participates.
inline StageLoss total_loss(std::size_t stage, const TensorPtr& base, const TensorPtr& ens,
                            const TensorPtr& cost, const TensorPtr& rank, const LossWeights& w) {
    w.validate();
    if (stage < 1) throw std::invalid_argument("total_loss: stage must be >= 1");
    StageLoss out;
    out.base = base;
    if (stage == 1) {
        out.total = base;
        return out;
    }
    if (!ens || !cost || !rank) {
        throw std::invalid_argument("total_loss: stage >= 2 needs all loss terms");
    }
    out.ens = ens;
    out.cost = cost;
    out.rank = rank;
    out.total = add(base, add(mul_scalar(ens, w.w1),
                              add(mul_scalar(cost, w.w2), mul_scalar(rank, w.w3))));
    return out;
}

}  // namespace seqens
