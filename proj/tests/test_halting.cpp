#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

#include "seqens/halting.hpp"
#include "seqens/rng.hpp"

using namespace seqens;

namespace {

std::vector<double> random_soft_h(std::size_t T, Rng& rng) {
    std::vector<double> h(T);
    for (auto& v : h) v = rng.uniform01();
    return h;
}

TEST(Survival, EmptyProductIsOne) {
    EXPECT_DOUBLE_EQ(survival({0.3, 0.9, 0.1}, 1), 1.0);
}

TEST(Survival, CertainHaltKillsLaterSteps) {
    EXPECT_DOUBLE_EQ(survival({1.0, 0.5, 0.5}, 2), 0.0);
}

TEST(Survival, DirectProduct) {
    EXPECT_DOUBLE_EQ(survival({0.5, 0.5, 1.0}, 3), 0.25);
}

TEST(Survival, RejectsOutOfRange) {
    EXPECT_THROW(survival({0.5, 0.5}, 0), std::invalid_argument);
    EXPECT_THROW(survival({0.5, 0.5}, 3), std::invalid_argument);
}

TEST(Survival, MonotoneNonIncreasing) {
    Rng rng(21);
    for (int it = 0; it < 100; ++it) {
        auto h = random_soft_h(5, rng);
        for (std::size_t t = 1; t < 5; ++t) EXPECT_LE(survival(h, t + 1), survival(h, t));
    }
}

TEST(HaltingPmf, NoEarlyHalt) {
    auto p = halting_pmf({0.0, 0.0, 1.0});
    EXPECT_DOUBLE_EQ(p[0], 0.0);
    EXPECT_DOUBLE_EQ(p[1], 0.0);
    EXPECT_DOUBLE_EQ(p[2], 1.0);
}

TEST(HaltingPmf, ImmediateHalt) {
    auto p = halting_pmf({1.0, 0.4, 0.6});
    EXPECT_DOUBLE_EQ(p[0], 1.0);
    EXPECT_DOUBLE_EQ(p[1], 0.0);
    EXPECT_DOUBLE_EQ(p[2], 0.0);
}

TEST(HaltingPmf, EnumeratedExample) {
    auto p = halting_pmf({0.2, 0.5, 1.0});
    EXPECT_NEAR(p[0], 0.2, 1e-15);
    EXPECT_NEAR(p[1], 0.4, 1e-15);
    EXPECT_NEAR(p[2], 0.4, 1e-15);
}

TEST(HaltingPmf, TerminalForcingOverridesLastEntry) {
    auto p = halting_pmf({0.0, 0.0, 0.25});
    EXPECT_DOUBLE_EQ(p[2], 1.0);
}

// Reconstruction identity p_t = S(t) - S(t+1) with terminal forcing, plus
// normalization, over random soft vectors.
TEST(HaltingPmf, ReconstructionIdentityOnRandomVectors) {
    Rng rng(22);
    for (int it = 0; it < 1000; ++it) {
        std::size_t T = 2 + static_cast<std::size_t>(rng.below(5));
        auto h = random_soft_h(T, rng);
        auto p = halting_pmf(h);
        auto forced = h;
        forced.back() = 1.0;
        double sum = 0.0;
        for (std::size_t t = 1; t <= T; ++t) {
            double s_next = t == T ? 0.0 : survival(forced, t + 1);
            EXPECT_NEAR(p[t - 1], survival(forced, t) - s_next, 1e-12);
            sum += p[t - 1];
        }
        EXPECT_NEAR(sum, 1.0, 1e-12);
    }
}

// Exhaustive binary check: the pmf is one-hot at the first 1, and
// halting_step coincides with the argmax of the pmf.
TEST(HaltingPmf, BinaryVectorsAreOneHot) {
    for (std::size_t T = 1; T <= 6; ++T) {
        for (std::size_t bits = 0; bits < (std::size_t{1} << T); ++bits) {
            std::vector<double> h(T);
            for (std::size_t i = 0; i < T; ++i) h[i] = (bits >> i) & 1 ? 1.0 : 0.0;
            auto p = halting_pmf(h);
            std::size_t z = halting_step(h);
            std::size_t argmax = 1;
            double ones = 0.0;
            for (std::size_t t = 0; t < T; ++t) {
                if (p[t] > p[argmax - 1]) argmax = t + 1;
                ones += p[t];
                EXPECT_TRUE(p[t] == 0.0 || p[t] == 1.0);
            }
            EXPECT_DOUBLE_EQ(ones, 1.0);
            EXPECT_EQ(argmax, z);
            EXPECT_DOUBLE_EQ(p[z - 1], 1.0);
        }
    }
}

TEST(HaltingStep, FirstOneWins) {
    EXPECT_EQ(halting_step({0.0, 1.0, 0.0}), 2u);
    EXPECT_EQ(halting_step({1.0, 1.0, 1.0}), 1u);
}

TEST(HaltingStep, ForcedTerminalHalt) {
    EXPECT_EQ(halting_step({0.0, 0.0, 0.0}), 3u);
}

TEST(EnsemblePredict, SingleStepIsIdentity) {
    auto out = ensemble_predict({{0.9, 0.1}, {0.2, 0.8}}, 1);
    EXPECT_DOUBLE_EQ(out[0], 0.9);
    EXPECT_DOUBLE_EQ(out[1], 0.1);
}

TEST(EnsemblePredict, SymmetricPair) {
    auto out = ensemble_predict({{1.0, 0.0}, {0.0, 1.0}}, 2);
    EXPECT_DOUBLE_EQ(out[0], 0.5);
    EXPECT_DOUBLE_EQ(out[1], 0.5);
}

TEST(EnsemblePredict, MatchesElementwiseMeanOracle) {
    Rng rng(23);
    std::vector<std::vector<double>> preds(3, std::vector<double>(4));
    for (auto& p : preds) {
        double s = 0;
        for (auto& v : p) {
            v = rng.uniform(0.01, 1.0);
            s += v;
        }
        for (auto& v : p) v /= s;
    }
    auto out = ensemble_predict(preds, 3);
    for (std::size_t j = 0; j < 4; ++j) {
        double m = (preds[0][j] + preds[1][j] + preds[2][j]) / 3.0;
        EXPECT_NEAR(out[j], m, 1e-15);
    }
}

TEST(EnsemblePredict, RejectsEmptyAndOutOfRange) {
    EXPECT_THROW(ensemble_predict({}, 1), std::invalid_argument);
    EXPECT_THROW(ensemble_predict({{0.5, 0.5}}, 2), std::invalid_argument);
    EXPECT_THROW(ensemble_predict({{0.5, 0.5}}, 0), std::invalid_argument);
}

TEST(SoftEnsemble, UniformSurvivalIsPlainMean) {
    std::vector<std::vector<double>> preds = {{0.9, 0.1}, {0.5, 0.5}, {0.1, 0.9}};
    auto out = soft_ensemble_at(preds, {1.0, 1.0, 1.0});
    EXPECT_NEAR(out[0], 0.5, 1e-15);
    EXPECT_NEAR(out[1], 0.5, 1e-15);
}

TEST(SoftEnsemble, DeadSecondModel) {
    auto out = soft_ensemble_at({{0.8, 0.2}, {0.1, 0.9}}, {1.0, 0.0});
    EXPECT_DOUBLE_EQ(out[0], 0.8);
    EXPECT_DOUBLE_EQ(out[1], 0.2);
}

TEST(SoftEnsemble, HalfWeightedSecondModel) {
    auto out = soft_ensemble_at({{1.0, 0.0}, {0.0, 1.0}}, {1.0, 0.5});
    EXPECT_NEAR(out[0], 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(out[1], 1.0 / 3.0, 1e-15);
}

// Dual route: the graph-built chain must agree with the plain calculus.
TEST(SoftHaltingChain, MatchesPlainCalculus) {
    Rng rng(24);
    const std::size_t n = 4, T = 4;
    std::vector<std::vector<double>> h_rows(n);
    std::vector<TensorPtr> h_cols;
    for (std::size_t t = 0; t < T; ++t) {
        auto col = make_tensor({n});
        for (std::size_t i = 0; i < n; ++i) {
            col->data[i] = rng.uniform01();
            h_rows[i].push_back(col->data[i]);
        }
        h_cols.push_back(col);
    }
    auto chain = soft_halting_chain(h_cols);
    for (std::size_t i = 0; i < n; ++i) {
        auto forced = h_rows[i];
        forced.back() = 1.0;
        auto p = halting_pmf(h_rows[i]);
        for (std::size_t t = 0; t < T; ++t) {
            EXPECT_NEAR(chain.survival[t]->data[i], survival(forced, t + 1), 1e-15);
            EXPECT_NEAR(chain.pmf[t]->data[i], p[t], 1e-15);
        }
    }
}

TEST(SoftEnsembles, MatchesPlainPerStep) {
    Rng rng(25);
    const std::size_t n = 3, T = 3, k = 2;
    std::vector<TensorPtr> preds, s_cols;
    std::vector<std::vector<std::vector<double>>> plain_preds(n);
    std::vector<std::vector<double>> plain_s(n);
    for (std::size_t t = 0; t < T; ++t) {
        auto pm = make_tensor({n, k});
        auto sc = make_tensor({n});
        for (std::size_t i = 0; i < n; ++i) {
            double a = rng.uniform(0.01, 0.99);
            pm->data[i * k] = a;
            pm->data[i * k + 1] = 1 - a;
            sc->data[i] = t == 0 ? 1.0 : rng.uniform01();
            plain_preds[i].push_back({a, 1 - a});
            plain_s[i].push_back(sc->data[i]);
        }
        preds.push_back(pm);
        s_cols.push_back(sc);
    }
    auto ens = soft_ensembles(preds, s_cols);
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t i = 0; i < n; ++i) {
            auto expect = soft_ensemble_at(
                plain_preds[i], {plain_s[i].begin(), plain_s[i].begin() + t + 1});
            EXPECT_NEAR(ens[t]->data[i * k], expect[0], 1e-14);
            EXPECT_NEAR(ens[t]->data[i * k + 1], expect[1], 1e-14);
        }
    }
}

// ---------------------------------------------------------------------------
// infer
// ---------------------------------------------------------------------------

struct Cascade {
    std::vector<BaseModel> models;
    Selector selector;
};

Cascade make_cascade(std::size_t T, std::size_t dim, std::size_t classes, std::uint64_t seed) {
    Cascade c;
    BaseModelConfig mcfg{dim, {6, 6}, classes};
    for (std::size_t t = 0; t < T; ++t) {
        Rng rng = Rng::derive(seed, "init", t + 1);
        c.models.emplace_back(mcfg, rng);
    }
    Rng rng = Rng::derive(seed, "init", 0);
    c.selector = Selector({selector_input_dim(classes), 8}, rng);
    return c;
}

void set_halt_bias(Selector& sel, double bias) {
    auto ps = sel.params();
    for (auto& p : ps) std::fill(p->data.begin(), p->data.end(), 0.0);
    ps.back()->data[0] = bias;  // halt head bias
}

TEST(Infer, AlwaysHaltingSelectorRunsExactlyOneModel) {
    auto c = make_cascade(3, 3, 2, 31);
    set_halt_bias(c.selector, 10.0);  // h = sigmoid(10) > 0.5 at every step
    // A model with a mismatched input dimension throws if it is ever run;
    // lazy evaluation must never reach it.
    Rng rng(32);
    c.models[1] = BaseModel({4, {6, 6}, 2}, rng);
    std::vector<double> x = {0.1, 0.2, 0.3};
    auto res = infer(c.models, c.selector, x, Mode::eval);
    EXPECT_EQ(res.pred.steps_used, 1u);
    EXPECT_EQ(res.trace.z, 1u);
    EXPECT_EQ(res.trace.h.size(), 1u);
    auto expect = c.models[0].predict(x).main_probs;
    EXPECT_EQ(res.pred.probs, expect);

    // Train mode executes every model and must hit the mismatch.
    Rng train_rng(33);
    EXPECT_THROW(infer(c.models, c.selector, x, Mode::train, &train_rng), std::invalid_argument);
}

TEST(Infer, NeverHaltingSelectorAveragesAllModels) {
    auto c = make_cascade(3, 3, 2, 34);
    set_halt_bias(c.selector, -10.0);
    std::vector<double> x = {0.5, -0.4, 1.2};
    auto res = infer(c.models, c.selector, x, Mode::eval);
    EXPECT_EQ(res.pred.steps_used, 3u);
    std::vector<std::vector<double>> preds;
    for (const auto& m : c.models) preds.push_back(m.predict(x).main_probs);
    EXPECT_EQ(res.pred.probs, ensemble_predict(preds, 3));
}

// Eval-mode lazy inference equals the full (train-mode style) pass binarized
// deterministically and truncated to the first halt.
TEST(Infer, LazyExecutionEquivalence) {
    Rng data(35);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto c = make_cascade(4, 3, 3, 100 + seed);
        std::vector<double> x(3);
        for (auto& v : x) v = data.uniform(-2, 2);

        auto lazy = infer(c.models, c.selector, x, Mode::eval);

        // Full pass: run every model, binarize h at 0.5, halt at the first 1.
        std::vector<std::vector<double>> preds;
        std::vector<double> hard;
        std::vector<double> d = c.selector.initial_state_plain();
        for (std::size_t t = 0; t < 4; ++t) {
            auto out = c.models[t].predict(x);
            preds.push_back(out.main_probs);
            auto [h, d_next] = c.selector.step_plain(encode_selector_input(out), d);
            d = d_next;
            hard.push_back(t + 1 == 4 ? 1.0 : (h >= 0.5 ? 1.0 : 0.0));
        }
        std::size_t z = halting_step(hard);
        EXPECT_EQ(lazy.trace.z, z);
        EXPECT_EQ(lazy.pred.probs, ensemble_predict(preds, z));
    }
}

TEST(Infer, TrainModeRecordsSoftQuantities) {
    auto c = make_cascade(3, 2, 2, 36);
    Rng rng(37);
    std::vector<double> x = {0.2, -0.2};
    auto res = infer(c.models, c.selector, x, Mode::train, &rng);
    EXPECT_EQ(res.trace.h.size(), 3u);
    EXPECT_EQ(res.trace.S.size(), 3u);
    EXPECT_EQ(res.trace.p.size(), 3u);
    EXPECT_EQ(res.pred.per_step_probs.size(), 3u);
    for (double h : res.trace.h) {
        EXPECT_GT(h, 0.0);
        EXPECT_LT(h, 1.0);
    }
    double sum = 0.0;
    for (double p : res.trace.p) sum += p;
    EXPECT_NEAR(sum, 1.0, 1e-12);
    EXPECT_GE(res.trace.z, 1u);
    EXPECT_LE(res.trace.z, 3u);
    // The soft ensemble at step 1 is just the first model's prediction.
    EXPECT_EQ(res.pred.per_step_probs[0], c.models[0].predict(x).main_probs);
}

TEST(Infer, EmptyModelListRejected) {
    Selector sel;
    EXPECT_THROW(infer({}, sel, std::vector<double>{1.0}, Mode::eval), std::invalid_argument);
}

}  // namespace
