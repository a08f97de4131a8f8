#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "seqens/tensor.hpp"

namespace seqens {

// ---------------------------------------------------------------------------
// SGD with momentum, weight decay and milestone learning-rate schedule
// ---------------------------------------------------------------------------

struct SgdConfig {
    double lr = 0.1;
    double momentum = 0.9;
    bool nesterov = true;
    double weight_decay = 5e-4;
    std::vector<std::size_t> milestones;   // 1-based epochs at which lr is scaled
    double milestone_factor = 0.2;         // lr multiplier per milestone crossed

    void validate() const {
        if (!(lr > 0)) throw std::invalid_argument("sgd: lr must be > 0");
        if (momentum < 0 || momentum >= 1) throw std::invalid_argument("sgd: momentum in [0,1)");
        if (weight_decay < 0) throw std::invalid_argument("sgd: weight decay must be >= 0");
        if (!(milestone_factor > 0)) throw std::invalid_argument("sgd: milestone factor > 0");
    }
};

class Sgd {
public:
    Sgd(std::vector<TensorPtr> params, SgdConfig cfg)
        : params_(std::move(params)), cfg_(std::move(cfg)) {
        cfg_.validate();
        velocity_.resize(params_.size());
        for (std::size_t i = 0; i < params_.size(); ++i)
            velocity_[i].assign(params_[i]->size(), 0.0);
    }

    // Applies the milestone schedule; epoch is 1-based.
    void set_epoch(std::size_t epoch) {
        double lr = cfg_.lr;
        for (std::size_t m : cfg_.milestones)
            if (epoch >= m) lr *= cfg_.milestone_factor;
        lr_ = lr;
    }

    double current_lr() const { return lr_; }

    void zero_grad() { zero_grads(params_); }

    void step() {
        for (std::size_t i = 0; i < params_.size(); ++i) {
            Tensor& p = *params_[i];
            if (p.grad.empty()) continue;
            for (std::size_t j = 0; j < p.data.size(); ++j) {
                double g = p.grad[j] + cfg_.weight_decay * p.data[j];
                double& v = velocity_[i][j];
                v = cfg_.momentum * v + g;
                double dir = cfg_.nesterov ? g + cfg_.momentum * v : v;
                p.data[j] -= lr_ * dir;
            }
        }
    }

private:
    std::vector<TensorPtr> params_;
    SgdConfig cfg_;
    double lr_ = 0.0;
    std::vector<std::vector<double>> velocity_;
};

// ---------------------------------------------------------------------------
// Adam with bias correction
// ---------------------------------------------------------------------------

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;  // L2, added to the gradient

    void validate() const {
        if (!(lr > 0)) throw std::invalid_argument("adam: lr must be > 0");
        if (beta1 < 0 || beta1 >= 1 || beta2 < 0 || beta2 >= 1)
            throw std::invalid_argument("adam: betas in [0,1)");
        if (!(eps > 0)) throw std::invalid_argument("adam: eps must be > 0");
        if (weight_decay < 0) throw std::invalid_argument("adam: weight decay must be >= 0");
    }
};

class Adam {
public:
    Adam(std::vector<TensorPtr> params, AdamConfig cfg)
        : params_(std::move(params)), cfg_(cfg) {
        cfg_.validate();
        m_.resize(params_.size());
        v_.resize(params_.size());
        for (std::size_t i = 0; i < params_.size(); ++i) {
            m_[i].assign(params_[i]->size(), 0.0);
            v_[i].assign(params_[i]->size(), 0.0);
        }
    }

    void zero_grad() { zero_grads(params_); }

    void step() {
        ++t_;
        const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
        for (std::size_t i = 0; i < params_.size(); ++i) {
            Tensor& p = *params_[i];
            if (p.grad.empty()) continue;
            for (std::size_t j = 0; j < p.data.size(); ++j) {
                double g = p.grad[j] + cfg_.weight_decay * p.data[j];
                double& m = m_[i][j];
                double& v = v_[i][j];
                m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * g;
                v = cfg_.beta2 * v + (1.0 - cfg_.beta2) * g * g;
                p.data[j] -= cfg_.lr * (m / bc1) / (std::sqrt(v / bc2) + cfg_.eps);
            }
        }
    }

private:
    std::vector<TensorPtr> params_;
    AdamConfig cfg_;
    std::size_t t_ = 0;
    std::vector<std::vector<double>> m_, v_;
};

}  // namespace seqens
