#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "seqens/evalkit.hpp"
#include "seqens/halting.hpp"
#include "seqens/nets.hpp"

namespace seqens {

// Mean of the main-head predictions of every pool member.
inline std::vector<double> average_ensemble_predict(const std::vector<BaseModel>& pool,
                                                    const double* x, std::size_t dim) {
    if (pool.empty()) throw std::invalid_argument("average_ensemble_predict: empty pool");
    std::vector<std::vector<double>> preds;
    preds.reserve(pool.size());
    for (const auto& m : pool) preds.push_back(m.predict(x, dim).main_probs);
    return ensemble_predict(preds, preds.size());
}

inline std::vector<double> average_ensemble_predict(const std::vector<BaseModel>& pool,
                                                    const std::vector<double>& x) {
    return average_ensemble_predict(pool, x.data(), x.size());
}

// Confidence-threshold cascade: run models in order, keep the running average
// of their predictions, and halt at the first step whose max-class confidence
// reaches the threshold (always halting at the last step).
struct ThresholdPolicy {
    double threshold = 0.5;
    const std::vector<BaseModel>* pool = nullptr;

    void validate() const {
        if (pool == nullptr || pool->empty()) {
            throw std::invalid_argument("threshold policy: empty pool");
        }
        if (threshold < 0.0 || threshold > 1.0) {
            throw std::invalid_argument("threshold policy: threshold must be in [0, 1]");
        }
    }
};

inline std::pair<std::vector<double>, std::size_t> threshold_cascade(const ThresholdPolicy& policy,
                                                                     const double* x,
                                                                     std::size_t dim) {
    policy.validate();
    const auto& pool = *policy.pool;
    std::vector<double> running;
    std::vector<double> sum;
    for (std::size_t t = 0; t < pool.size(); ++t) {
        auto probs = pool[t].predict(x, dim).main_probs;
        if (sum.empty()) sum.assign(probs.size(), 0.0);
        for (std::size_t j = 0; j < probs.size(); ++j) sum[j] += probs[j];
        running = sum;
        for (double& v : running) v /= static_cast<double>(t + 1);
        double conf = *std::max_element(running.begin(), running.end());
        if (conf >= policy.threshold || t + 1 == pool.size()) {
            return {running, t + 1};
        }
    }
    return {running, pool.size()};  // unreachable; the loop always returns
}

inline std::pair<std::vector<double>, std::size_t> threshold_cascade(const ThresholdPolicy& policy,
                                                                     const std::vector<double>& x) {
    return threshold_cascade(policy, x.data(), x.size());
}

// Precomputed per-sample running-average confidences, so a threshold sweep
// costs one pass over the pool instead of 101.
struct CascadeTable {
    std::size_t pool_size = 0;
    std::vector<int> prefix_argmax;    // n x T
    std::vector<double> prefix_conf;   // n x T
    std::vector<int> labels;

    std::size_t steps_at(std::size_t i, double threshold) const {
        for (std::size_t t = 0; t < pool_size; ++t) {
            if (prefix_conf[i * pool_size + t] >= threshold) return t + 1;
        }
        return pool_size;
    }

    std::pair<double, double> top1_and_cost(double threshold) const {
        const std::size_t n = labels.size();
        std::size_t correct = 0, steps = 0;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t z = steps_at(i, threshold);
            steps += z;
            if (prefix_argmax[i * pool_size + z - 1] == labels[i]) ++correct;
        }
        return {100.0 * static_cast<double>(correct) / static_cast<double>(n),
                static_cast<double>(steps) / static_cast<double>(n)};
    }
};

template <class FeatureAt>
CascadeTable build_cascade_table(const std::vector<BaseModel>& pool, FeatureAt&& feature_at,
                                 const std::vector<int>& labels, std::size_t n, std::size_t dim) {
    if (pool.empty()) throw std::invalid_argument("cascade table: empty pool");
    CascadeTable tbl;
    tbl.pool_size = pool.size();
    tbl.labels = labels;
    tbl.prefix_argmax.resize(n * pool.size());
    tbl.prefix_conf.resize(n * pool.size());
    std::vector<double> sum;
    for (std::size_t i = 0; i < n; ++i) {
        const double* x = feature_at(i);
        sum.clear();
        for (std::size_t t = 0; t < pool.size(); ++t) {
            auto probs = pool[t].predict(x, dim).main_probs;
            if (sum.empty()) sum.assign(probs.size(), 0.0);
            for (std::size_t j = 0; j < probs.size(); ++j) sum[j] += probs[j];
            std::size_t best = 0;
            for (std::size_t j = 1; j < probs.size(); ++j)
                if (sum[j] > sum[best]) best = j;
            tbl.prefix_argmax[i * pool.size() + t] = static_cast<int>(best);
            tbl.prefix_conf[i * pool.size() + t] =
                sum[best] / static_cast<double>(t + 1);
        }
    }
    return tbl;
}

// The 101-point threshold grid 0.00, 0.01, ..., 1.00.
inline std::vector<double> threshold_grid() {
    std::vector<double> grid(101);
    for (int i = 0; i <= 100; ++i) grid[static_cast<std::size_t>(i)] = i / 100.0;
    return grid;
}

struct ThresholdSearchResult {
    double best_threshold = 0.0;
    double best_utility = 0.0;
    struct Point {
        double threshold, top1, cost, reported_utility;
    };
    std::vector<Point> grid;
};

// Evaluates every grid threshold on a validation split and returns the
// utility argmax; ties resolve to the lowest threshold.
inline ThresholdSearchResult threshold_grid_search(const std::vector<BaseModel>& pool,
                                                   const Dataset& data, Dataset::Split split,
                                                   const UtilityConfig& cfg) {
    auto idx = data.indices_of(split);
    if (idx.empty()) throw std::invalid_argument("threshold_grid_search: empty split");
    std::vector<int> labels;
    labels.reserve(idx.size());
    for (std::size_t i : idx) labels.push_back(data.labels[i]);
    CascadeTable tbl = build_cascade_table(
        pool, [&](std::size_t i) { return data.row(idx[i]); }, labels, idx.size(), data.dim);

    ThresholdSearchResult res;
    bool first = true;
    for (double th : threshold_grid()) {
        auto [top1, cost] = tbl.top1_and_cost(th);
        double util = reported_utility(raw_utility(top1, cost, cfg), cfg);
        res.grid.push_back({th, top1, cost, util});
        if (first || util > res.best_utility) {
            res.best_threshold = th;
            res.best_utility = util;
            first = false;
        }
    }
    return res;
}

}  // namespace seqens
