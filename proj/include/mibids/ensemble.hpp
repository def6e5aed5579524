#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mibids/dataset.hpp"
#include "mibids/tree.hpp"

namespace mibids {

/// floor(log2(M)) + 1, clamped to [1, M].
std::size_t default_feature_sample_size(std::size_t num_features);

struct ForestConfig {
    std::size_t n_trees = 100;
    /// 0 selects default_feature_sample_size().
    std::size_t feature_sample_size = 0;
    bool bootstrap = true;
    std::uint64_t seed = 42;
    /// Training threads; 0 uses the hardware concurrency. Output does not depend on it.
    std::size_t workers = 0;
};

class Forest {
public:
    Forest() = default;
    Forest(std::size_t num_features, std::size_t num_classes, std::vector<DecisionTree> trees);

    const std::vector<DecisionTree>& trees() const noexcept { return trees_; }
    std::size_t num_features() const noexcept { return num_features_; }
    std::size_t num_classes() const noexcept { return num_classes_; }

    /// Mean of the member trees' leaf distributions.
    std::vector<double> predict_proba(std::span<const double> x) const;
    std::size_t predict(std::span<const double> x) const;

    bool operator==(const Forest&) const = default;

private:
    std::size_t num_features_ = 0;
    std::size_t num_classes_ = 0;
    std::vector<DecisionTree> trees_;
};

/// Tree t is seeded with derive_seed(cfg.seed, t), draws its own bootstrap
/// sample, and is grown unpruned with min leaf weight 1.
Forest train_forest(const Dataset& d, const ForestConfig& cfg);

struct BoostConfig {
    std::size_t n_rounds = 10;
    std::uint64_t seed = 42;
};

struct BoostStage {
    DecisionTree tree;
    double alpha = 0.0;

    bool operator==(const BoostStage&) const = default;
};

class BoostedEnsemble {
public:
    BoostedEnsemble() = default;
    BoostedEnsemble(std::size_t num_features, std::size_t num_classes, std::vector<BoostStage> stages);

    const std::vector<BoostStage>& stages() const noexcept { return stages_; }
    std::size_t num_features() const noexcept { return num_features_; }
    std::size_t num_classes() const noexcept { return num_classes_; }

    /// Alpha-weighted hard votes, normalized to sum 1.
    std::vector<double> predict_proba(std::span<const double> x) const;
    std::size_t predict(std::span<const double> x) const;

    bool operator==(const BoostedEnsemble&) const = default;

private:
    std::size_t num_features_ = 0;
    std::size_t num_classes_ = 0;
    std::vector<BoostStage> stages_;
};

/// Per-round diagnostics from AdaBoost.M1 training.
struct BoostRound {
    double error = 0.0;       ///< weighted error of the round's tree (before clamping)
    bool retained = false;
    double weight_sum = 0.0;  ///< sum of record weights after the update
};

struct BoostTrace {
    std::vector<BoostRound> rounds;
};

/// Multiplies weights of correctly classified records by beta = eps / (1 - eps)
/// and renormalizes to sum 1. Returns beta.
double adaboost_reweight(std::vector<double>& weights, const std::vector<bool>& correct, double eps);

/// AdaBoost.M1 by reweighting. If the very first round has error >= 0.5 its
/// tree is still kept (alpha 1) so the ensemble is never empty.
BoostedEnsemble train_adaboost_m1(const Dataset& d, const BoostConfig& cfg, const TreeConfig& base_cfg,
                                  BoostTrace* trace = nullptr);

}  // namespace mibids
