#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mibids/dataset.hpp"

namespace mibids {

/// Index of the largest entry; the lowest index wins ties.
std::size_t argmax(std::span<const double> v);

struct TreeConfig {
    /// Minimum weight per branch, in units of the mean record weight.
    double min_leaf_weight = 2.0;
    bool pruning = true;
    double prune_confidence = 0.25;
    /// When set, each node considers only this many randomly chosen features.
    std::optional<std::size_t> feature_sample_size;
    std::uint64_t seed = 1;

    /// Throws UsageError when a field is out of range for `num_features` inputs.
    void validate(std::size_t num_features) const;
};

/// One node of a flattened tree. Leaves have `feature == kLeaf` and carry a
/// class-probability vector; internal nodes send x[feature] <= threshold left.
struct TreeNode {
    static constexpr std::uint32_t kLeaf = 0xFFFFFFFFu;

    std::uint32_t feature = kLeaf;
    double threshold = 0.0;
    std::uint32_t left = 0;
    std::uint32_t right = 0;
    std::vector<double> distribution;

    bool is_leaf() const noexcept { return feature == kLeaf; }
    bool operator==(const TreeNode&) const = default;
};

/// Immutable binary classification tree stored in preorder (root at 0).
class DecisionTree {
public:
    DecisionTree() = default;

    /// Validates child offsets, feature indices and leaf distributions.
    DecisionTree(std::size_t num_features, std::size_t num_classes, std::vector<TreeNode> nodes);

    std::size_t num_features() const noexcept { return num_features_; }
    std::size_t num_classes() const noexcept { return num_classes_; }
    const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
    std::size_t node_count() const noexcept { return nodes_.size(); }
    std::size_t leaf_count() const;

    /// Index of the leaf reached by `x`.
    std::size_t leaf_for(std::span<const double> x) const;
    std::span<const double> predict_proba(std::span<const double> x) const;
    std::size_t predict(std::span<const double> x) const;

    bool operator==(const DecisionTree&) const = default;

private:
    std::size_t num_features_ = 0;
    std::size_t num_classes_ = 0;
    std::vector<TreeNode> nodes_;
};

/// Greedy gain-ratio tree over numeric features, optionally pruned by
/// pessimistic-error subtree replacement. `weights` has one entry per record.
DecisionTree train_tree(const Dataset& d, std::span<const double> weights, const TreeConfig& cfg);

/// Uniform weights.
DecisionTree train_tree(const Dataset& d, const TreeConfig& cfg);

/// Gain ratio of splitting on x[feature] <= threshold. Returns 0 when one side
/// is empty or the information gain is not positive.
double gain_ratio(const Dataset& d, std::span<const double> weights, std::size_t feature, double threshold);

/// Gain ratio from weighted class totals of the two sides.
double gain_ratio(std::span<const double> left, std::span<const double> right);

/// Upper-confidence extra errors for a leaf holding `n` weight with `e`
/// misclassified, at confidence `cf`.
double pessimistic_extra_errors(double n, double e, double cf);

/// Inverse of the standard normal CDF.
double normal_quantile(double p);

}  // namespace mibids
