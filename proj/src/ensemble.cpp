#include "mibids/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "mibids/error.hpp"
#include "mibids/rng.hpp"

namespace mibids {

std::size_t default_feature_sample_size(std::size_t num_features) {
    if (num_features == 0) return 0;
    const auto k = static_cast<std::size_t>(std::floor(std::log2(static_cast<double>(num_features)))) + 1;
    return std::clamp<std::size_t>(k, 1, num_features);
}

Forest::Forest(std::size_t num_features, std::size_t num_classes, std::vector<DecisionTree> trees)
    : num_features_(num_features), num_classes_(num_classes), trees_(std::move(trees)) {
    if (trees_.empty()) throw DataError("forest has no trees");
    for (const auto& t : trees_) {
        if (t.num_features() != num_features_ || t.num_classes() != num_classes_) {
            throw DataError("forest member has a different schema or class catalog");
        }
    }
}

std::vector<double> Forest::predict_proba(std::span<const double> x) const {
    std::vector<double> sum(num_classes_, 0.0);
    for (const auto& t : trees_) {
        const auto p = t.predict_proba(x);
        for (std::size_t c = 0; c < num_classes_; ++c) sum[c] += p[c];
    }
    for (auto& v : sum) v /= static_cast<double>(trees_.size());
    return sum;
}

std::size_t Forest::predict(std::span<const double> x) const { return argmax(predict_proba(x)); }

Forest train_forest(const Dataset& d, const ForestConfig& cfg) {
    if (d.empty()) throw UsageError("cannot train a forest on an empty dataset");
    if (cfg.n_trees < 1) throw UsageError("n_trees must be >= 1");
    const std::size_t m = d.num_features();
    const std::size_t k = cfg.feature_sample_size == 0 ? default_feature_sample_size(m) : cfg.feature_sample_size;
    if (k < 1 || k > m) throw UsageError("feature_sample_size must lie in [1, " + std::to_string(m) + "]");

    std::vector<DecisionTree> trees(cfg.n_trees);
    auto grow = [&](std::size_t t) {
        const std::uint64_t seed = derive_seed(cfg.seed, t);
        std::vector<double> weights(d.size(), 1.0);
        if (cfg.bootstrap) {
            std::fill(weights.begin(), weights.end(), 0.0);
            Rng rng(seed);
            for (std::size_t i = 0; i < d.size(); ++i) weights[rng.index(d.size())] += 1.0;
        }
        TreeConfig tc;
        tc.min_leaf_weight = 1.0;
        tc.pruning = false;
        tc.feature_sample_size = k;
        tc.seed = mix_seed(seed);
        trees[t] = train_tree(d, weights, tc);
    };

    std::size_t workers = cfg.workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : cfg.workers;
    workers = std::min(workers, cfg.n_trees);
    if (workers <= 1) {
        for (std::size_t t = 0; t < cfg.n_trees; ++t) grow(t);
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t t = next++; t < cfg.n_trees; t = next++) {
                    try {
                        grow(t);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                    }
                }
            });
        }
        pool.clear();
        if (failure) std::rethrow_exception(failure);
    }
    return Forest(m, d.num_classes(), std::move(trees));
}

BoostedEnsemble::BoostedEnsemble(std::size_t num_features, std::size_t num_classes, std::vector<BoostStage> stages)
    : num_features_(num_features), num_classes_(num_classes), stages_(std::move(stages)) {
    if (stages_.empty()) throw DataError("boosted ensemble has no stages");
    for (const auto& s : stages_) {
        if (!(s.alpha > 0.0) || !std::isfinite(s.alpha)) throw DataError("stage weight must be positive");
        if (s.tree.num_features() != num_features_ || s.tree.num_classes() != num_classes_) {
            throw DataError("boosting stage has a different schema or class catalog");
        }
    }
}

std::vector<double> BoostedEnsemble::predict_proba(std::span<const double> x) const {
    std::vector<double> votes(num_classes_, 0.0);
    double total = 0.0;
    for (const auto& s : stages_) {
        votes[s.tree.predict(x)] += s.alpha;
        total += s.alpha;
    }
    for (auto& v : votes) v /= total;
    return votes;
}

std::size_t BoostedEnsemble::predict(std::span<const double> x) const { return argmax(predict_proba(x)); }

double adaboost_reweight(std::vector<double>& weights, const std::vector<bool>& correct, double eps) {
    const double beta = eps / (1.0 - eps);
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (correct[i]) weights[i] *= beta;
    }
    const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
    for (auto& w : weights) w /= sum;
    return beta;
}

BoostedEnsemble train_adaboost_m1(const Dataset& d, const BoostConfig& cfg, const TreeConfig& base_cfg,
                                  BoostTrace* trace) {
    if (d.empty()) throw UsageError("cannot boost on an empty dataset");
    if (d.num_classes() < 2) throw UsageError("boosting needs at least two classes");
    if (cfg.n_rounds < 1) throw UsageError("n_rounds must be >= 1");

    const std::size_t n = d.size();
    std::vector<double> weights(n, 1.0 / static_cast<double>(n));
    std::vector<BoostStage> stages;
    std::vector<bool> correct(n);

    for (std::size_t round = 0; round < cfg.n_rounds; ++round) {
        TreeConfig tc = base_cfg;
        tc.seed = derive_seed(cfg.seed, round);
        DecisionTree tree = train_tree(d, weights, tc);

        double eps = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            correct[i] = tree.predict(d[i].values) == d[i].label;
            if (!correct[i]) eps += weights[i];
        }
        BoostRound info{eps, false, 0.0};

        if (eps >= 0.5) {
            if (stages.empty()) {
                stages.push_back({std::move(tree), 1.0});
                info.retained = true;
            }
            info.weight_sum = std::accumulate(weights.begin(), weights.end(), 0.0);
            if (trace) trace->rounds.push_back(info);
            break;
        }
        const bool perfect = eps == 0.0;
        const double clamped = perfect ? 1e-10 : eps;
        const double beta = adaboost_reweight(weights, correct, clamped);
        stages.push_back({std::move(tree), std::log(1.0 / beta)});
        info.retained = true;
        info.weight_sum = std::accumulate(weights.begin(), weights.end(), 0.0);
        if (trace) trace->rounds.push_back(info);
        if (perfect) break;
    }
    return BoostedEnsemble(d.num_features(), d.num_classes(), std::move(stages));
}

}  // namespace mibids
