#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

#include "seqens/ops.hpp"
#include "seqens/optim.hpp"
#include "seqens/rng.hpp"

using namespace seqens;

namespace {

SgdConfig plain_sgd(double lr) {
    SgdConfig cfg;
    cfg.lr = lr;
    cfg.momentum = 0.0;
    cfg.nesterov = false;
    cfg.weight_decay = 0.0;
    return cfg;
}

TEST(Sgd, SingleStepOnQuadratic) {
    auto w = scalar_tensor(1.0, true);
    Sgd opt({w}, plain_sgd(0.1));
    opt.set_epoch(1);
    backward(mul_scalar(mul(w, w), 0.5));  // loss = w^2 / 2, grad = w
    opt.step();
    EXPECT_NEAR(w->data[0], 0.9, 1e-15);
}

TEST(Sgd, WeightDecayAugmentsGradient) {
    auto w = scalar_tensor(2.0, true);
    SgdConfig cfg = plain_sgd(0.1);
    cfg.weight_decay = 0.5;
    Sgd opt({w}, cfg);
    opt.set_epoch(1);
    w->ensure_grad();
    w->grad[0] = 1.0;
    opt.step();
    // w -= lr * (g + d * w) = 2 - 0.1 * (1 + 0.5 * 2) = 1.8
    EXPECT_NEAR(w->data[0], 1.8, 1e-15);
}

TEST(Sgd, MilestonesDivideOncePerCrossing) {
    auto w = scalar_tensor(1.0, true);
    SgdConfig cfg = plain_sgd(1.0);
    cfg.milestones = {3, 5};
    cfg.milestone_factor = 0.2;
    Sgd opt({w}, cfg);
    opt.set_epoch(1);
    EXPECT_DOUBLE_EQ(opt.current_lr(), 1.0);
    opt.set_epoch(2);
    EXPECT_DOUBLE_EQ(opt.current_lr(), 1.0);
    opt.set_epoch(3);
    EXPECT_DOUBLE_EQ(opt.current_lr(), 0.2);
    opt.set_epoch(4);
    EXPECT_DOUBLE_EQ(opt.current_lr(), 0.2);
    opt.set_epoch(5);
    EXPECT_NEAR(opt.current_lr(), 0.04, 1e-15);
    opt.set_epoch(9);
    EXPECT_NEAR(opt.current_lr(), 0.04, 1e-15);
}

TEST(Sgd, NesterovMatchesHandComputation) {
    auto w = scalar_tensor(1.0, true);
    SgdConfig cfg;
    cfg.lr = 0.1;
    cfg.momentum = 0.9;
    cfg.nesterov = true;
    cfg.weight_decay = 0.0;
    Sgd opt({w}, cfg);
    opt.set_epoch(1);

    // Constant gradient 1. Step 1: v = 1, dir = 1 + 0.9 = 1.9, w = 1 - 0.19.
    w->ensure_grad();
    w->grad[0] = 1.0;
    opt.step();
    EXPECT_NEAR(w->data[0], 1.0 - 0.19, 1e-15);
    // Step 2: v = 1.9, dir = 1 + 1.71 = 2.71.
    w->grad[0] = 1.0;
    opt.step();
    EXPECT_NEAR(w->data[0], 1.0 - 0.19 - 0.271, 1e-15);
}

TEST(Sgd, RejectsBadHyperparameters) {
    auto w = scalar_tensor(1.0, true);
    SgdConfig bad = plain_sgd(0.0);
    EXPECT_THROW(Sgd({w}, bad), std::invalid_argument);
    bad = plain_sgd(0.1);
    bad.momentum = 1.0;
    EXPECT_THROW(Sgd({w}, bad), std::invalid_argument);
    bad = plain_sgd(0.1);
    bad.weight_decay = -1.0;
    EXPECT_THROW(Sgd({w}, bad), std::invalid_argument);
}

TEST(Adam, FirstStepMovesByApproximatelyLr) {
    auto w = scalar_tensor(5.0, true);
    AdamConfig cfg;
    cfg.lr = 0.01;
    Adam opt({w}, cfg);
    w->ensure_grad();
    w->grad[0] = 3.0;  // any constant: first bias-corrected step is lr * sign(g)
    opt.step();
    EXPECT_NEAR(w->data[0], 5.0 - 0.01, 1e-8);
}

TEST(Adam, ZeroGradientLeavesParameterUnchanged) {
    auto w = scalar_tensor(1.5, true);
    Adam opt({w}, {});
    w->ensure_grad();
    opt.step();
    EXPECT_DOUBLE_EQ(w->data[0], 1.5);
}

TEST(Adam, DeterministicTrajectories) {
    auto run = [] {
        auto w = make_tensor({4}, std::vector<double>{1, -2, 3, -4}, true);
        Adam opt({w}, {});
        for (int i = 0; i < 25; ++i) {
            opt.zero_grad();
            backward(mean(mul(w, w)));
            opt.step();
        }
        return w->data;
    };
    EXPECT_EQ(run(), run());
}

TEST(Adam, ConvergesOnQuadratic) {
    auto w = scalar_tensor(4.0, true);
    AdamConfig cfg;
    cfg.lr = 0.1;
    Adam opt({w}, cfg);
    for (int i = 0; i < 300; ++i) {
        opt.zero_grad();
        backward(mul(w, w));
        opt.step();
    }
    EXPECT_NEAR(w->data[0], 0.0, 1e-2);
}

TEST(Adam, RejectsBadHyperparameters) {
    auto w = scalar_tensor(1.0, true);
    AdamConfig bad;
    bad.lr = -0.1;
    EXPECT_THROW(Adam({w}, bad), std::invalid_argument);
    bad = {};
    bad.beta1 = 1.0;
    EXPECT_THROW(Adam({w}, bad), std::invalid_argument);
    bad = {};
    bad.eps = 0.0;
    EXPECT_THROW(Adam({w}, bad), std::invalid_argument);
}

}  // namespace
