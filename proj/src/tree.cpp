#include "mibids/tree.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <string>

#include "mibids/error.hpp"
#include "mibids/rng.hpp"

namespace mibids {

namespace {

double entropy(std::span<const double> counts, double total) {
    if (total <= 0.0) return 0.0;
    double h = 0.0;
    for (double c : counts) {
        if (c > 0.0) {
            const double p = c / total;
            h -= p * std::log2(p);
        }
    }
    return h;
}

// Information gains below this are treated as zero (floating noise on
// label-independent splits).
constexpr double kMinGain = 1e-12;

struct BuildNode {
    std::vector<double> class_weight;
    double total = 0.0;
    std::uint32_t feature = TreeNode::kLeaf;
    double threshold = 0.0;
    std::unique_ptr<BuildNode> left;
    std::unique_ptr<BuildNode> right;

    bool is_leaf() const { return !left; }
    double errors() const { return total - *std::max_element(class_weight.begin(), class_weight.end()); }
};

class Builder {
public:
    Builder(const Dataset& d, std::vector<double> weights, const TreeConfig& cfg)
        : data_(d), weights_(std::move(weights)), cfg_(cfg), rng_(cfg.seed) {}

    std::unique_ptr<BuildNode> build(std::vector<std::size_t> idx) {
        auto node = std::make_unique<BuildNode>();
        node->class_weight.assign(data_.num_classes(), 0.0);
        for (auto i : idx) node->class_weight[data_[i].label] += weights_[i];
        node->total = std::accumulate(node->class_weight.begin(), node->class_weight.end(), 0.0);

        const auto nonzero = std::count_if(node->class_weight.begin(), node->class_weight.end(),
                                           [](double w) { return w > 0.0; });
        if (nonzero <= 1 || node->total < 2.0 * cfg_.min_leaf_weight) return node;

        const auto features = candidate_features();
        double best_ratio = 0.0;
        std::uint32_t best_feature = TreeNode::kLeaf;
        double best_threshold = 0.0;

        std::vector<double> left(data_.num_classes());
        std::vector<double> right(data_.num_classes());
        std::vector<std::size_t> sorted = idx;
        for (auto f : features) {
            std::stable_sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
                return data_[a].values[f] < data_[b].values[f];
            });
            std::fill(left.begin(), left.end(), 0.0);
            double left_total = 0.0;
            for (std::size_t k = 0; k + 1 < sorted.size(); ++k) {
                const auto& rec = data_[sorted[k]];
                left[rec.label] += weights_[sorted[k]];
                left_total += weights_[sorted[k]];
                const double v = rec.values[f];
                const double next = data_[sorted[k + 1]].values[f];
                if (!(v < next)) continue;
                const double right_total = node->total - left_total;
                if (left_total < cfg_.min_leaf_weight || right_total < cfg_.min_leaf_weight) continue;
                for (std::size_t c = 0; c < right.size(); ++c) right[c] = node->class_weight[c] - left[c];
                const double ratio = gain_ratio(left, right);
                if (ratio > best_ratio) {
                    double t = v + (next - v) / 2.0;
                    if (!(t < next)) t = v;
                    best_ratio = ratio;
                    best_feature = static_cast<std::uint32_t>(f);
                    best_threshold = t;
                }
            }
        }
        if (best_feature == TreeNode::kLeaf) return node;

        std::vector<std::size_t> lo, hi;
        for (auto i : idx) {
            (data_[i].values[best_feature] <= best_threshold ? lo : hi).push_back(i);
        }
        idx.clear();
        idx.shrink_to_fit();
        node->feature = best_feature;
        node->threshold = best_threshold;
        node->left = build(std::move(lo));
        node->right = build(std::move(hi));
        return node;
    }

private:
    std::vector<std::size_t> candidate_features() {
        const std::size_t m = data_.num_features();
        std::vector<std::size_t> all(m);
        std::iota(all.begin(), all.end(), 0);
        if (!cfg_.feature_sample_size || *cfg_.feature_sample_size >= m) return all;
        const std::size_t k = *cfg_.feature_sample_size;
        for (std::size_t i = 0; i < k; ++i) std::swap(all[i], all[i + rng_.index(m - i)]);
        all.resize(k);
        std::sort(all.begin(), all.end());
        return all;
    }

    const Dataset& data_;
    std::vector<double> weights_;
    const TreeConfig& cfg_;
    Rng rng_;
};

/// Returns the estimated error of the (possibly collapsed) subtree.
double prune(BuildNode& node, double cf) {
    const double e = node.errors();
    const double as_leaf = e + pessimistic_extra_errors(node.total, e, cf);
    if (node.is_leaf()) return as_leaf;
    const double subtree = prune(*node.left, cf) + prune(*node.right, cf);
    if (as_leaf <= subtree + 0.1) {
        node.left.reset();
        node.right.reset();
        node.feature = TreeNode::kLeaf;
        return as_leaf;
    }
    return subtree;
}

void flatten(const BuildNode& node, std::vector<TreeNode>& out) {
    const std::size_t self = out.size();
    out.emplace_back();
    if (node.is_leaf()) {
        auto& leaf = out[self];
        leaf.distribution.resize(node.class_weight.size());
        for (std::size_t c = 0; c < node.class_weight.size(); ++c) {
            leaf.distribution[c] = node.class_weight[c] / node.total;
        }
        return;
    }
    out[self].feature = node.feature;
    out[self].threshold = node.threshold;
    out[self].left = static_cast<std::uint32_t>(out.size());
    flatten(*node.left, out);
    out[self].right = static_cast<std::uint32_t>(out.size());
    flatten(*node.right, out);
}

}  // namespace

std::size_t argmax(std::span<const double> v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[best]) best = i;
    }
    return best;
}

void TreeConfig::validate(std::size_t num_features) const {
    if (!(min_leaf_weight >= 1.0)) throw UsageError("min_leaf_weight must be >= 1");
    if (!(prune_confidence > 0.0 && prune_confidence < 1.0)) {
        throw UsageError("prune_confidence must lie in (0, 1)");
    }
    if (feature_sample_size && (*feature_sample_size < 1 || *feature_sample_size > num_features)) {
        throw UsageError("feature_sample_size must lie in [1, " + std::to_string(num_features) + "]");
    }
}

DecisionTree::DecisionTree(std::size_t num_features, std::size_t num_classes, std::vector<TreeNode> nodes)
    : num_features_(num_features), num_classes_(num_classes), nodes_(std::move(nodes)) {
    if (nodes_.empty()) throw DataError("tree has no nodes");
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const auto& n = nodes_[i];
        if (n.is_leaf()) {
            if (n.distribution.size() != num_classes_) throw DataError("leaf distribution has wrong width");
            double sum = 0.0;
            for (double p : n.distribution) {
                if (!(p >= 0.0) || !std::isfinite(p)) throw DataError("leaf distribution has a negative entry");
                sum += p;
            }
            if (std::abs(sum - 1.0) > 1e-9) throw DataError("leaf distribution does not sum to 1");
        } else {
            if (n.feature >= num_features_) throw DataError("split feature index out of range");
            if (!std::isfinite(n.threshold)) throw DataError("split threshold is not finite");
            if (n.left <= i || n.right <= i || n.left >= nodes_.size() || n.right >= nodes_.size()) {
                throw DataError("child offsets are not in preorder");
            }
        }
    }
}

std::size_t DecisionTree::leaf_count() const {
    return static_cast<std::size_t>(
        std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

std::size_t DecisionTree::leaf_for(std::span<const double> x) const {
    if (x.size() != num_features_) {
        throw DataError("feature vector has " + std::to_string(x.size()) + " values, tree expects " +
                        std::to_string(num_features_));
    }
    std::size_t i = 0;
    while (!nodes_[i].is_leaf()) {
        const auto& n = nodes_[i];
        i = x[n.feature] <= n.threshold ? n.left : n.right;
    }
    return i;
}

std::span<const double> DecisionTree::predict_proba(std::span<const double> x) const {
    return nodes_[leaf_for(x)].distribution;
}

std::size_t DecisionTree::predict(std::span<const double> x) const { return argmax(predict_proba(x)); }

double gain_ratio(std::span<const double> left, std::span<const double> right) {
    const double wl = std::accumulate(left.begin(), left.end(), 0.0);
    const double wr = std::accumulate(right.begin(), right.end(), 0.0);
    const double w = wl + wr;
    if (wl <= 0.0 || wr <= 0.0) return 0.0;
    std::vector<double> parent(left.size());
    for (std::size_t c = 0; c < parent.size(); ++c) parent[c] = left[c] + right[c];
    const double gain = entropy(parent, w) - (wl / w) * entropy(left, wl) - (wr / w) * entropy(right, wr);
    if (gain <= kMinGain) return 0.0;
    const double pl = wl / w;
    const double pr = wr / w;
    const double split_info = -pl * std::log2(pl) - pr * std::log2(pr);
    return gain / split_info;
}

double gain_ratio(const Dataset& d, std::span<const double> weights, std::size_t feature, double threshold) {
    if (weights.size() != d.size()) throw UsageError("weights length must equal record count");
    if (feature >= d.num_features()) throw UsageError("feature index out of range");
    std::vector<double> left(d.num_classes(), 0.0), right(d.num_classes(), 0.0);
    for (std::size_t i = 0; i < d.size(); ++i) {
        (d[i].values[feature] <= threshold ? left : right)[d[i].label] += weights[i];
    }
    return gain_ratio(left, right);
}

DecisionTree train_tree(const Dataset& d, std::span<const double> weights, const TreeConfig& cfg) {
    cfg.validate(d.num_features());
    if (weights.size() != d.size()) throw UsageError("weights length must equal record count");
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw UsageError("weights must be finite and non-negative");
        total += w;
    }
    if (!(total > 0.0)) throw UsageError("total weight must be positive");

    // Rescale to mean 1 so min_leaf_weight is independent of the weight scale.
    const double scale = static_cast<double>(d.size()) / total;
    std::vector<double> scaled(weights.size());
    std::vector<std::size_t> idx;
    idx.reserve(d.size());
    for (std::size_t i = 0; i < weights.size(); ++i) {
        scaled[i] = weights[i] * scale;
        if (weights[i] > 0.0) idx.push_back(i);
    }

    Builder builder(d, std::move(scaled), cfg);
    auto root = builder.build(std::move(idx));
    if (cfg.pruning) prune(*root, cfg.prune_confidence);
    std::vector<TreeNode> nodes;
    flatten(*root, nodes);
    return DecisionTree(d.num_features(), d.num_classes(), std::move(nodes));
}

DecisionTree train_tree(const Dataset& d, const TreeConfig& cfg) {
    std::vector<double> w(d.size(), 1.0);
    return train_tree(d, w, cfg);
}

double pessimistic_extra_errors(double n, double e, double cf) {
    if (n <= 0.0) return 0.0;
    if (e < 1.0) {
        const double base = n * (1.0 - std::pow(cf, 1.0 / n));
        if (e == 0.0) return base;
        return base + e * (pessimistic_extra_errors(n, 1.0, cf) - base);
    }
    if (e + 0.5 >= n) return std::max(n - e, 0.0);
    const double z = normal_quantile(1.0 - cf);
    const double f = (e + 0.5) / n;
    const double r = (f + z * z / (2.0 * n) + z * std::sqrt(f / n - f * f / n + z * z / (4.0 * n * n))) /
                     (1.0 + z * z / n);
    return r * n - e;
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw UsageError("normal_quantile needs p in (0, 1)");
    // Acklam's rational approximation, then one Halley refinement step.
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                   1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                   6.680131188771972e+01,  -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                   -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                   3.754408661907416e+00};
    constexpr double low = 0.02425;
    double x;
    if (p < low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double err = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
    const double u = err * std::sqrt(2.0 * 3.14159265358979323846) * std::exp(x * x / 2.0);
    return x - u / (1.0 + x * u / 2.0);
}

}  // namespace mibids
