#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "seqens/datahub.hpp"
#include "seqens/halting.hpp"
#include "seqens/nets.hpp"

namespace seqens {

// ---------------------------------------------------------------------------
// Utility metric
// ---------------------------------------------------------------------------

// Weighted-product trade-off between performance and cost. The exponents are
// calibrated so that the two anchor points (single model at cost 1, full
// ensemble at cost T) score identically; reported values are exponentials of
// the difference from the single-model anchor, so the anchor reports 1.0.
struct UtilityConfig {
    double v = 1.0;   // target performance
    double c = 1.0;   // target cost
    double tau_v = 0.0;
    double tau_c = 0.01;
    double single_ref_utility = 0.0;
    bool calibrated = false;
};

// (top1/v)^tau_v / (cost/c)^tau_c, top1 in percent.
inline double raw_utility(double top1, double cost, const UtilityConfig& cfg) {
    if (!(cost > 0)) throw std::invalid_argument("raw_utility: cost must be > 0");
    return std::pow(top1 / cfg.v, cfg.tau_v) / std::pow(cost / cfg.c, cfg.tau_c);
}

// Solves for tau_v from the anchor equality
// single_top1^tau_v = full_top1^tau_v / T^tau_c.
inline double calibrate_tau(double single_top1, double full_top1, double full_cost,
                            double tau_c = 0.01) {
    if (!(full_top1 > single_top1)) {
        throw std::invalid_argument(
            "calibrate_tau: full ensemble must improve on the single model (got " +
            std::to_string(full_top1) + " vs " + std::to_string(single_top1) + ")");
    }
    if (!(full_cost > 1.0)) throw std::invalid_argument("calibrate_tau: full cost must be > 1");
    return tau_c * std::log(full_cost) / std::log(full_top1 / single_top1);
}

inline UtilityConfig make_utility_config(double single_top1, double full_top1, double full_cost,
                                         double tau_c = 0.01) {
    UtilityConfig cfg;
    cfg.tau_c = tau_c;
    cfg.tau_v = calibrate_tau(single_top1, full_top1, full_cost, tau_c);
    cfg.single_ref_utility = raw_utility(single_top1, 1.0, cfg);
    cfg.calibrated = true;
    return cfg;
}

inline double reported_utility(double raw, const UtilityConfig& cfg) {
    return std::exp(raw - cfg.single_ref_utility);
}

// ---------------------------------------------------------------------------
// Method evaluation
// ---------------------------------------------------------------------------

struct MethodOutput {
    std::vector<double> probs;
    std::size_t steps = 1;
    HaltingTrace trace;  // empty h for methods without halting traces
};

using MethodFn = std::function<MethodOutput(const double* x, std::size_t dim)>;

struct EvalRecord {
    std::string method;
    double top1 = 0.0;
    double avg_cost = 0.0;
    double raw_utility = 0.0;
    double reported_utility = 0.0;
    std::size_t samples = 0;
};

struct TraceRow {
    std::size_t index = 0;
    int label = 0;
    int predicted = 0;
    std::size_t steps = 1;
    HaltingTrace trace;
};

inline std::size_t argmax_index(const std::vector<double>& v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

inline EvalRecord evaluate(const std::string& method_name, const Dataset& data,
                           Dataset::Split split, const MethodFn& fn, const UtilityConfig& cfg,
                           std::vector<TraceRow>* traces = nullptr) {
    auto idx = data.indices_of(split);
    if (idx.empty()) throw std::invalid_argument("evaluate: empty evaluation split");
    std::size_t correct = 0;
    double steps = 0.0;
    for (std::size_t i : idx) {
        MethodOutput out = fn(data.row(i), data.dim);
        std::size_t pred = argmax_index(out.probs);
        if (static_cast<int>(pred) == data.labels[i]) ++correct;
        steps += static_cast<double>(out.steps);
        if (traces != nullptr) {
            traces->push_back({i, data.labels[i], static_cast<int>(pred), out.steps,
                               std::move(out.trace)});
        }
    }
    EvalRecord rec;
    rec.method = method_name;
    rec.samples = idx.size();
    rec.top1 = 100.0 * static_cast<double>(correct) / static_cast<double>(idx.size());
    rec.avg_cost = steps / static_cast<double>(idx.size());
    rec.raw_utility = raw_utility(rec.top1, rec.avg_cost, cfg);
    rec.reported_utility = reported_utility(rec.raw_utility, cfg);
    return rec;
}

// ---------------------------------------------------------------------------
// Pareto analysis
// ---------------------------------------------------------------------------

struct ParetoPoint {
    double cost = 0.0;
    double top1 = 0.0;
    std::string tag;
    bool dominated = false;
};

// A point is dominated if some other point is at least as good on both axes
// and strictly better on one.
inline void flag_dominated(std::vector<ParetoPoint>& points) {
    for (auto& p : points) p.dominated = false;
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = 0; j < points.size(); ++j) {
            if (i == j) continue;
            const auto& a = points[j];
            const auto& b = points[i];
            bool as_good = a.cost <= b.cost && a.top1 >= b.top1;
            bool better = a.cost < b.cost || a.top1 > b.top1;
            if (as_good && better) {
                points[i].dominated = true;
                break;
            }
        }
    }
}

// Evaluates a train+eval closure over a grid of cost-pressure settings and
// flags the dominated points.
inline std::vector<ParetoPoint> pareto_sweep(
    const std::vector<double>& grid,
    const std::function<std::pair<double, double>(double)>& cost_top1_at,
    const std::function<std::string(double)>& tag_of = nullptr) {
    std::vector<ParetoPoint> points;
    points.reserve(grid.size());
    for (double g : grid) {
        auto [cost, top1] = cost_top1_at(g);
        ParetoPoint p;
        p.cost = cost;
        p.top1 = top1;
        p.tag = tag_of ? tag_of(g) : std::to_string(g);
        points.push_back(std::move(p));
    }
    flag_dominated(points);
    return points;
}

// ---------------------------------------------------------------------------
// Minimum-ensemble-size histogram
// ---------------------------------------------------------------------------

struct MinSizeHistogram {
    std::vector<std::size_t> by_size;  // index k-1 -> samples first correct at prefix size k
    std::size_t never = 0;

    std::size_t total() const {
        std::size_t n = never;
        for (std::size_t c : by_size) n += c;
        return n;
    }

    std::size_t correctly_classifiable() const { return total() - never; }
};

// For each sample, the smallest prefix size k such that the average of the
// first k pool members predicts the label; prefix order is the pool's
// training order.
inline MinSizeHistogram min_ensemble_size_histogram(const std::vector<BaseModel>& pool,
                                                    const Dataset& data, Dataset::Split split) {
    if (pool.empty()) throw std::invalid_argument("min_ensemble_size_histogram: empty pool");
    MinSizeHistogram hist;
    hist.by_size.assign(pool.size(), 0);
    for (std::size_t i : data.indices_of(split)) {
        std::vector<double> sum;
        bool found = false;
        for (std::size_t t = 0; t < pool.size() && !found; ++t) {
            auto probs = pool[t].predict(data.row(i), data.dim).main_probs;
            if (sum.empty()) sum.assign(probs.size(), 0.0);
            for (std::size_t j = 0; j < probs.size(); ++j) sum[j] += probs[j];
            if (static_cast<int>(argmax_index(sum)) == data.labels[i]) {
                ++hist.by_size[t];
                found = true;
            }
        }
        if (!found) ++hist.never;
    }
    return hist;
}

}  // namespace seqens
