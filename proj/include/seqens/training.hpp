#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "seqens/datahub.hpp"
#include "seqens/halting.hpp"
#include "seqens/losses.hpp"
#include "seqens/nets.hpp"
#include "seqens/optim.hpp"
#include "seqens/rng.hpp"

namespace seqens {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct TrainConfig {
    std::size_t stages = 3;      // cascade length T
    std::size_t epochs = 30;     // O, per stage
    std::size_t batch_size = 128;

    std::vector<std::size_t> hidden = {64, 64};
    std::size_t sel_hidden = 32;
    double sel_halt_bias_init = -2.0;

    // Base-model optimizer: SGD with Nesterov momentum and milestone decay.
    double base_lr = 0.1;
    double base_momentum = 0.9;
    double base_weight_decay = 5e-4;
    std::vector<double> milestone_fracs = {0.3, 0.6, 0.8};  // of epochs, lr /= 5 at each
    double milestone_factor = 0.2;

    // Selector optimizer: Adam, re-initialized per stage with a decayed lr.
    double sel_lr = 2e-3;
    double sel_weight_decay = 1e-5;
    double sel_stage_decay = 0.5;

    LossWeights weights;
    double lambda_dis = 0.01;

    double gumbel_tau_start = 1.0;
    double gumbel_tau_end = 1.0;

    std::uint64_t seed = 0;

    void validate() const {
        if (stages < 1 || epochs < 1 || batch_size < 1) {
            throw std::invalid_argument("train config: stages, epochs, batch_size must be >= 1");
        }
        if (!(base_lr > 0) || !(sel_lr > 0)) {
            throw std::invalid_argument("train config: learning rates must be > 0");
        }
        if (!(sel_stage_decay > 0)) {
            throw std::invalid_argument("train config: stage decay must be > 0");
        }
        weights.validate();
    }

    std::vector<std::size_t> milestones() const {
        std::vector<std::size_t> out;
        for (double f : milestone_fracs) {
            auto e = static_cast<std::size_t>(std::floor(f * static_cast<double>(epochs)));
            if (e >= 1 && e <= epochs) out.push_back(e);
        }
        return out;
    }

    double gumbel_tau_at(std::size_t epoch) const {
        if (epochs <= 1) return gumbel_tau_start;
        double f = static_cast<double>(epoch - 1) / static_cast<double>(epochs - 1);
        return gumbel_tau_start + f * (gumbel_tau_end - gumbel_tau_start);
    }
};

struct EpochLog {
    std::size_t stage = 0;
    std::size_t epoch = 0;
    LossBundle losses;  // epoch means of the batch losses
};

struct TrainResult {
    std::vector<BaseModel> models;
    Selector selector;
    std::vector<EpochLog> curve;
};

// ---------------------------------------------------------------------------
// Sequential stage-wise trainer
// ---------------------------------------------------------------------------
//
// Stage t trains model t and the shared selector jointly; models 1..t-1 are
// frozen and enter only through cached predictions, so no gradient can reach
// them. Selector inputs are detached from the current model as well: the
// ensemble and cost terms move only the selector, the base term only the
// current model, and the rank term moves both (each through its own factor).
class SequentialTrainer {
public:
    SequentialTrainer(TrainConfig cfg, const Dataset& data)
        : cfg_(std::move(cfg)), data_(data), train_idx_(data.indices_of(Dataset::Split::train)) {
        cfg_.validate();
        if (train_idx_.empty()) throw std::invalid_argument("trainer: dataset has no train split");
        if (data_.num_classes < 2) throw std::invalid_argument("trainer: need >= 2 classes");

        BaseModelConfig mcfg{data_.dim, cfg_.hidden, data_.num_classes};
        for (std::size_t t = 0; t < cfg_.stages; ++t) {
            Rng rng = Rng::derive(cfg_.seed, "init", t + 1);
            models_.emplace_back(mcfg, rng);
        }
        Rng rng = Rng::derive(cfg_.seed, "init", 0);
        SelectorConfig scfg{selector_input_dim(data_.num_classes), cfg_.sel_hidden,
                            cfg_.sel_halt_bias_init};
        selector_ = Selector(scfg, rng);
    }

    const std::vector<BaseModel>& models() const { return models_; }
    const Selector& selector() const { return selector_; }
    const std::vector<EpochLog>& curve() const { return curve_; }
    const TrainConfig& config() const { return cfg_; }

    void run_all() {
        for (std::size_t t = 1; t <= cfg_.stages; ++t) run_stage(t);
    }

    // Runs the O epochs of stage t (1-based). Stages must run in order.
    void run_stage(std::size_t t) {
        if (t < 1 || t > cfg_.stages) throw std::invalid_argument("run_stage: bad stage index");
        const std::size_t n_train = train_idx_.size();

        SgdConfig scfg;
        scfg.lr = cfg_.base_lr;
        scfg.momentum = cfg_.base_momentum;
        scfg.weight_decay = cfg_.base_weight_decay;
        scfg.milestones = cfg_.milestones();
        scfg.milestone_factor = cfg_.milestone_factor;
        Sgd base_opt(models_[t - 1].params(), scfg);

        // Fresh optimizer state per stage; the lr shrinks stage over stage.
        std::optional<Adam> sel_opt;
        if (t >= 2) {
            AdamConfig acfg;
            acfg.lr = cfg_.sel_lr * std::pow(cfg_.sel_stage_decay, static_cast<double>(t - 2));
            acfg.weight_decay = cfg_.sel_weight_decay;
            sel_opt.emplace(selector_.params(), acfg);
        }

        // Frozen-stage caches: predictions and selector encodings of models
        // 1..t-1 over the training split do not change within the stage.
        std::vector<std::vector<double>> frozen_main(t - 1), frozen_enc(t - 1);
        {
            std::vector<double> x(n_train * data_.dim);
            for (std::size_t i = 0; i < n_train; ++i)
                std::copy_n(data_.row(train_idx_[i]), data_.dim, &x[i * data_.dim]);
            for (std::size_t s = 0; s + 1 < t; ++s) {
                auto out = models_[s].predict_batch(x.data(), n_train, data_.dim);
                frozen_enc[s] = encode_selector_input_batch(out, n_train);
                frozen_main[s] = std::move(out.main);
            }
        }

        std::vector<std::size_t> order(n_train);
        for (std::size_t i = 0; i < n_train; ++i) order[i] = i;

        for (std::size_t epoch = 1; epoch <= cfg_.epochs; ++epoch) {
            base_opt.set_epoch(epoch);
            Rng shuffle_rng = Rng::derive(cfg_.seed, "data", t, epoch);
            shuffle_rng.shuffle(order);

            LossBundle sums;
            std::size_t batches = 0;
            for (std::size_t start = 0; start < n_train; start += cfg_.batch_size) {
                std::size_t bsz = std::min(cfg_.batch_size, n_train - start);
                LossBundle b = train_batch(t, {order.begin() + static_cast<std::ptrdiff_t>(start),
                                               order.begin() + static_cast<std::ptrdiff_t>(start + bsz)},
                                           frozen_main, frozen_enc, base_opt, sel_opt);
                if (!std::isfinite(b.total)) {
                    throw std::runtime_error("training diverged: stage " + std::to_string(t) +
                                             ", epoch " + std::to_string(epoch) +
                                             ", total loss = " + std::to_string(b.total));
                }
                sums.base += b.base;
                sums.ens += b.ens;
                sums.cost += b.cost;
                sums.rank += b.rank;
                sums.total += b.total;
                ++batches;
            }
            EpochLog log;
            log.stage = t;
            log.epoch = epoch;
            log.losses.weights = cfg_.weights;
            log.losses.base = sums.base / static_cast<double>(batches);
            log.losses.ens = sums.ens / static_cast<double>(batches);
            log.losses.cost = sums.cost / static_cast<double>(batches);
            log.losses.rank = sums.rank / static_cast<double>(batches);
            log.losses.total = sums.total / static_cast<double>(batches);
            curve_.push_back(log);
        }
    }

    TrainResult finish() && {
        return {std::move(models_), std::move(selector_), std::move(curve_)};
    }

private:
    LossBundle train_batch(std::size_t t, std::vector<std::size_t> batch,
                           const std::vector<std::vector<double>>& frozen_main,
                           const std::vector<std::vector<double>>& frozen_enc, Sgd& base_opt,
                           std::optional<Adam>& sel_opt) {
        const std::size_t n = batch.size();
        const std::size_t k = data_.num_classes;
        const std::size_t enc_w = selector_input_dim(k);

        std::vector<double> xb(n * data_.dim);
        std::vector<int> yb(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::copy_n(data_.row(train_idx_[batch[i]]), data_.dim, &xb[i * data_.dim]);
            yb[i] = data_.labels[train_idx_[batch[i]]];
        }

        auto x = make_tensor({n, data_.dim}, std::move(xb));
        auto fw = models_[t - 1].forward(x);
        TensorPtr l_base = base_loss(fw.main_probs, fw.aux_probs, yb, cfg_.lambda_dis);

        StageLoss stage_loss;
        if (t == 1) {
            stage_loss = total_loss(1, l_base, nullptr, nullptr, nullptr, cfg_.weights);
        } else {
            // Detached per-step predictions and selector encodings.
            std::vector<TensorPtr> preds;   // [n, K] constants
            std::vector<TensorPtr> encs;    // [n, 2K+1] constants
            for (std::size_t s = 0; s + 1 < t; ++s) {
                std::vector<double> pm(n * k), pe(n * enc_w);
                for (std::size_t i = 0; i < n; ++i) {
                    std::size_t src = batch[i];
                    std::copy_n(&frozen_main[s][src * k], k, &pm[i * k]);
                    std::copy_n(&frozen_enc[s][src * enc_w], enc_w, &pe[i * enc_w]);
                }
                preds.push_back(make_tensor({n, k}, std::move(pm)));
                encs.push_back(make_tensor({n, enc_w}, std::move(pe)));
            }
            TensorPtr main_det = detach(fw.main_probs);
            TensorPtr aux_det = detach(fw.aux_probs);
            {
                std::vector<double> kl_col(n);
                std::vector<double> m(k), a(k);
                for (std::size_t i = 0; i < n; ++i) {
                    std::copy_n(&main_det->data[i * k], k, m.begin());
                    std::copy_n(&aux_det->data[i * k], k, a.begin());
                    kl_col[i] = kl_divergence(m, a);
                }
                encs.push_back(concat_cols(
                    {main_det, aux_det, make_tensor({n, std::size_t{1}}, std::move(kl_col))}));
            }
            preds.push_back(main_det);

            // Selector pass over steps 1..t under the current parameters.
            std::vector<TensorPtr> hs;
            TensorPtr d = selector_.initial_state(n);
            for (std::size_t s = 0; s < t; ++s) {
                auto [h, d_next] = selector_.step(encs[s], d);
                hs.push_back(h);
                d = d_next;
            }
            SoftHalting chain = soft_halting_chain(hs);
            std::vector<TensorPtr> soft_ens = soft_ensembles(preds, chain.survival);

            TensorPtr l_ens = ensemble_loss(soft_ens, yb);
            TensorPtr l_cost = cost_loss(chain.pmf);

            // Bootstrapped rank reference: task loss of the previous soft
            // ensemble with survival weights taken as constants.
            std::vector<double> ref(n);
            {
                std::vector<std::vector<double>> pv(t - 1, std::vector<double>(k));
                std::vector<double> sv(t - 1);
                for (std::size_t i = 0; i < n; ++i) {
                    for (std::size_t s = 0; s + 1 < t; ++s) {
                        std::copy_n(&preds[s]->data[i * k], k, pv[s].begin());
                        sv[s] = chain.survival[s]->data[i];
                    }
                    ref[i] = task_loss(yb[i], soft_ensemble_at(pv, sv));
                }
            }
            TensorPtr l_rank = rank_loss(chain.survival[t - 1],
                                         cross_entropy_vec(fw.main_probs, yb),
                                         make_tensor({n}, std::move(ref)));
            stage_loss = total_loss(t, l_base, l_ens, l_cost, l_rank, cfg_.weights);
        }

        base_opt.zero_grad();
        if (sel_opt) sel_opt->zero_grad();
        backward(stage_loss.total);
        base_opt.step();
        if (sel_opt) sel_opt->step();
        return stage_loss.values(cfg_.weights);
    }

    TrainConfig cfg_;
    const Dataset& data_;
    std::vector<std::size_t> train_idx_;
    std::vector<BaseModel> models_;
    Selector selector_;
    std::vector<EpochLog> curve_;
};

inline TrainResult train_sequential(const TrainConfig& cfg, const Dataset& data) {
    SequentialTrainer trainer(cfg, data);
    trainer.run_all();
    return std::move(trainer).finish();
}

}  // namespace seqens
