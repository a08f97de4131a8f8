#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

#include "seqens/datahub.hpp"
#include "seqens/evalkit.hpp"
#include "testutil.hpp"

using namespace seqens;

namespace {

TEST(Utility, UnitCostAnchorReducesToPower) {
    UtilityConfig cfg;
    cfg.tau_v = 0.7;
    EXPECT_NEAR(raw_utility(93.1, 1.0, cfg), std::pow(93.1, 0.7), 1e-9);
}

TEST(Utility, RejectsNonPositiveCost) {
    UtilityConfig cfg;
    EXPECT_THROW(raw_utility(90.0, 0.0, cfg), std::invalid_argument);
    EXPECT_THROW(raw_utility(90.0, -2.0, cfg), std::invalid_argument);
}

TEST(Calibration, AnchorsScoreEquallyAfterCalibration) {
    auto cfg = make_utility_config(85.2, 88.9, 3.0);
    double single = raw_utility(85.2, 1.0, cfg);
    double full = raw_utility(88.9, 3.0, cfg);
    EXPECT_NEAR(single, full, 1e-9);
    EXPECT_TRUE(cfg.calibrated);
}

TEST(Calibration, LinearInTauC) {
    double a = calibrate_tau(85.0, 88.0, 3.0, 0.01);
    double b = calibrate_tau(85.0, 88.0, 3.0, 0.02);
    EXPECT_NEAR(b, 2.0 * a, 1e-12);
}

// Published anchor pair: top-1 93.10 at cost 1 vs 94.46 at cost 3 with
// tau_c = 0.01 calibrates to tau_v ~ 0.7575.
TEST(Calibration, ReferenceAnchorPair) {
    double tau_v = calibrate_tau(93.10, 94.46, 3.0, 0.01);
    double expect = 0.01 * std::log(3.0) / std::log(94.46 / 93.10);
    EXPECT_NEAR(tau_v, expect, 1e-12);
    EXPECT_NEAR(tau_v, 0.7576, 2e-4);
    auto cfg = make_utility_config(93.10, 94.46, 3.0, 0.01);
    EXPECT_NEAR(raw_utility(93.10, 1.0, cfg), raw_utility(94.46, 3.0, cfg), 1e-9);
}

TEST(Calibration, RejectsNonImprovingEnsemble) {
    EXPECT_THROW(calibrate_tau(90.0, 90.0, 3.0), std::invalid_argument);
    EXPECT_THROW(calibrate_tau(90.0, 88.0, 3.0), std::invalid_argument);
}

TEST(ReportedUtility, SingleModelIsExactlyOne) {
    auto cfg = make_utility_config(85.2, 88.9, 3.0);
    EXPECT_DOUBLE_EQ(reported_utility(raw_utility(85.2, 1.0, cfg), cfg), 1.0);
    // The calibrated full ensemble also reports 1.0.
    EXPECT_NEAR(reported_utility(raw_utility(88.9, 3.0, cfg), cfg), 1.0, 1e-9);
}

TEST(ReportedUtility, ExponentialOfDifference) {
    UtilityConfig cfg;
    cfg.single_ref_utility = 2.0;
    EXPECT_NEAR(reported_utility(2.1, cfg), std::exp(0.1), 1e-12);
}

TEST(ReportedUtility, ShiftInvariantRanking) {
    UtilityConfig a;
    a.single_ref_utility = 1.0;
    UtilityConfig b;
    b.single_ref_utility = 4.5;  // same utilities shifted by a constant
    std::vector<double> raws = {1.2, 0.9, 1.5, 1.1};
    for (std::size_t i = 0; i < raws.size(); ++i) {
        for (std::size_t j = 0; j < raws.size(); ++j) {
            bool order_a = reported_utility(raws[i], a) < reported_utility(raws[j], a);
            bool order_b =
                reported_utility(raws[i] + 3.5, b) < reported_utility(raws[j] + 3.5, b);
            EXPECT_EQ(order_a, order_b);
        }
    }
}

TEST(Evaluate, PerfectOracleScoresHundred) {
    TieredConfig dcfg;
    dcfg.classes = 3;
    dcfg.dim = 4;
    auto ds = gen_tiered_total(90, dcfg, 71);
    UtilityConfig cfg = make_utility_config(80.0, 90.0, 3.0);
    auto oracle = [&](const double* x, std::size_t) {
        // Label recovered from the dataset by matching the row pointer.
        MethodOutput out;
        out.probs.assign(3, 0.0);
        for (std::size_t i = 0; i < ds.size(); ++i) {
            if (ds.row(i) == x) {
                out.probs[static_cast<std::size_t>(ds.labels[i])] = 1.0;
                break;
            }
        }
        out.steps = 1;
        return out;
    };
    auto rec = evaluate("oracle", ds, Dataset::Split::train, oracle, cfg);
    EXPECT_DOUBLE_EQ(rec.top1, 100.0);
    EXPECT_DOUBLE_EQ(rec.avg_cost, 1.0);
}

TEST(Evaluate, TraceReplayReproducesRecord) {
    auto c = testutil::make_cascade(3, 4, 3, 72);
    TieredConfig dcfg;
    dcfg.classes = 3;
    dcfg.dim = 4;
    auto ds = gen_tiered_total(120, dcfg, 72);
    UtilityConfig cfg = make_utility_config(80.0, 90.0, 3.0);

    std::vector<TraceRow> traces;
    auto fn = [&](const double* x, std::size_t dim) {
        auto res = infer(c.models, c.selector, x, dim, Mode::eval);
        MethodOutput out;
        out.probs = res.pred.probs;
        out.steps = res.pred.steps_used;
        out.trace = res.trace;
        return out;
    };
    auto rec = evaluate("halting", ds, Dataset::Split::train, fn, cfg, &traces);
    ASSERT_EQ(traces.size(), ds.size());

    std::size_t correct = 0;
    double steps = 0.0;
    for (const auto& row : traces) {
        if (row.predicted == row.label) ++correct;
        steps += static_cast<double>(row.steps);
        EXPECT_EQ(row.steps, row.trace.z);
    }
    EXPECT_NEAR(rec.top1, 100.0 * correct / ds.size(), 1e-12);
    EXPECT_NEAR(rec.avg_cost, steps / ds.size(), 1e-12);
}

TEST(Evaluate, NeverHaltingCostsFullPool) {
    auto c = testutil::make_cascade(3, 4, 3, 73);
    auto ps = c.selector.params();
    for (auto& p : ps) std::fill(p->data.begin(), p->data.end(), 0.0);
    ps.back()->data[0] = -20.0;
    TieredConfig dcfg;
    dcfg.classes = 3;
    dcfg.dim = 4;
    auto ds = gen_tiered_total(60, dcfg, 73);
    UtilityConfig cfg = make_utility_config(80.0, 90.0, 3.0);
    auto fn = [&](const double* x, std::size_t dim) {
        auto res = infer(c.models, c.selector, x, dim, Mode::eval);
        return MethodOutput{res.pred.probs, res.pred.steps_used, res.trace};
    };
    auto rec = evaluate("never", ds, Dataset::Split::train, fn, cfg);
    EXPECT_DOUBLE_EQ(rec.avg_cost, 3.0);
}

TEST(Evaluate, EmptySplitRejected) {
    TieredConfig dcfg;
    dcfg.classes = 3;
    dcfg.dim = 4;
    auto ds = gen_tiered_total(10, dcfg, 74);
    UtilityConfig cfg;
    cfg.tau_v = 0.5;
    auto fn = [](const double*, std::size_t) { return MethodOutput{{1.0, 0.0, 0.0}, 1, {}}; };
    EXPECT_THROW(evaluate("x", ds, Dataset::Split::test, fn, cfg), std::invalid_argument);
}

TEST(Pareto, SinglePointNotDominated) {
    std::vector<ParetoPoint> pts = {{2.0, 90.0, "a", false}};
    flag_dominated(pts);
    EXPECT_FALSE(pts[0].dominated);
}

TEST(Pareto, StrictDominanceFlagsExactlyOne) {
    std::vector<ParetoPoint> pts = {{1.0, 92.0, "good", false}, {2.0, 91.0, "bad", false}};
    flag_dominated(pts);
    EXPECT_FALSE(pts[0].dominated);
    EXPECT_TRUE(pts[1].dominated);
}

TEST(Pareto, EqualPointsDoNotDominateEachOther) {
    std::vector<ParetoPoint> pts = {{1.0, 92.0, "a", false}, {1.0, 92.0, "b", false}};
    flag_dominated(pts);
    EXPECT_FALSE(pts[0].dominated);
    EXPECT_FALSE(pts[1].dominated);
}

// Independent quadratic re-check on random point sets.
TEST(Pareto, MatchesBruteForceOracle) {
    Rng rng(75);
    for (int it = 0; it < 20; ++it) {
        std::vector<ParetoPoint> pts;
        for (int i = 0; i < 12; ++i)
            pts.push_back({rng.uniform(1, 3), rng.uniform(80, 95), "", false});
        flag_dominated(pts);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            bool expect = false;
            for (std::size_t j = 0; j < pts.size(); ++j) {
                if (i == j) continue;
                if (pts[j].cost <= pts[i].cost && pts[j].top1 >= pts[i].top1 &&
                    (pts[j].cost < pts[i].cost || pts[j].top1 > pts[i].top1)) {
                    expect = true;
                }
            }
            EXPECT_EQ(pts[i].dominated, expect);
        }
    }
}

TEST(Pareto, SweepEvaluatesWholeGrid) {
    auto pts = pareto_sweep(
        {0.1, 0.2, 0.3},
        [](double g) { return std::pair<double, double>{1.0 + g, 90.0 + 10.0 * g}; },
        [](double g) { return "w=" + std::to_string(g); });
    ASSERT_EQ(pts.size(), 3u);
    for (const auto& p : pts) EXPECT_FALSE(p.dominated);  // an increasing frontier
}

TEST(MinSizeHistogram, PartitionsTheSplit) {
    auto c = testutil::make_cascade(3, 4, 3, 76);
    TieredConfig dcfg;
    dcfg.classes = 3;
    dcfg.dim = 4;
    auto ds = gen_tiered_total(150, dcfg, 76);
    auto hist = min_ensemble_size_histogram(c.models, ds, Dataset::Split::train);
    EXPECT_EQ(hist.by_size.size(), 3u);
    EXPECT_EQ(hist.total(), ds.size());
    EXPECT_EQ(hist.correctly_classifiable() + hist.never, ds.size());
}

TEST(MinSizeHistogram, IdenticalPoolPutsAllCorrectMassAtOne) {
    auto c = testutil::make_cascade(1, 4, 3, 77);
    std::vector<BaseModel> clones = {c.models[0], c.models[0], c.models[0]};
    TieredConfig dcfg;
    dcfg.classes = 3;
    dcfg.dim = 4;
    auto ds = gen_tiered_total(90, dcfg, 77);
    auto hist = min_ensemble_size_histogram(clones, ds, Dataset::Split::train);
    // Identical members: a sample is either correct at size 1 or never.
    EXPECT_EQ(hist.by_size[1], 0u);
    EXPECT_EQ(hist.by_size[2], 0u);
    EXPECT_EQ(hist.by_size[0] + hist.never, ds.size());
}

TEST(MinSizeHistogram, RejectsEmptyPool) {
    TieredConfig dcfg;
    dcfg.classes = 3;
    dcfg.dim = 4;
    auto ds = gen_tiered_total(10, dcfg, 78);
    EXPECT_THROW(min_ensemble_size_histogram({}, ds, Dataset::Split::train),
                 std::invalid_argument);
}

}  // namespace
