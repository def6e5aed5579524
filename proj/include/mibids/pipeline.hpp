#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mibids/dataset.hpp"
#include "mibids/ensemble.hpp"
#include "mibids/eval.hpp"
#include "mibids/mlp.hpp"
#include "mibids/model.hpp"
#include "mibids/tree.hpp"

namespace mibids {

struct TrainOptions {
    ModelKind kind = ModelKind::Forest;
    /// Feature group name, or "all" to keep every column.
    std::string group = "interface";
    std::optional<std::filesystem::path> groups_file;
    /// Keep only the k best-ranked features (ranked on the training part); 0 keeps all.
    std::size_t top_k = 0;
    double split_fraction = 0.7;
    bool stratified = false;
    std::uint64_t seed = 42;
    /// MLP only: min-max scale inputs to [-1, 1].
    bool normalize = true;

    TreeConfig tree;
    ForestConfig forest;
    BoostConfig boost;
    MlpConfig mlp;
};

struct TrainResult {
    TrainedModel model;
    std::size_t train_size = 0;
    std::size_t test_size = 0;
    double seconds = 0.0;
    /// Accuracy on the held-out part, when it is non-empty.
    std::optional<double> test_accuracy;
};

/// Group selection, split, optional ranking and normalization, then training.
/// `data_label` is recorded in the model so the held-out split can be rebuilt.
TrainResult train_model(const Dataset& full, const TrainOptions& opts, const std::string& data_label = "");

/// Columns of `schema` in `available`; throws DataError naming missing (and extra) variables.
std::vector<std::size_t> match_schema(const FeatureSchema& schema, const FeatureSchema& available);

/// Projects a labeled dataset onto the model's schema and class catalog.
Dataset project_for_model(const TrainedModel& m, const Dataset& d);

/// Rebuilds the test partition recorded in the model from the full dataset.
Dataset heldout_part(const TrainedModel& m, const Dataset& full);

std::vector<std::size_t> predict_all(const TrainedModel& m, const Dataset& projected);

struct Evaluation {
    EvalReport report;
    std::vector<std::size_t> predicted;
};

/// `projected` must already match the model (see project_for_model).
Evaluation evaluate_model(const TrainedModel& m, const Dataset& projected);

}  // namespace mibids
