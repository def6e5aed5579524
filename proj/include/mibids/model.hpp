#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mibids/dataset.hpp"
#include "mibids/ensemble.hpp"
#include "mibids/mlp.hpp"
#include "mibids/tree.hpp"

namespace mibids {

enum class ModelKind : std::uint8_t { Tree = 1, Forest = 2, AdaBoost = 3, Mlp = 4 };

std::string_view to_string(ModelKind k);
/// Accepts tree, forest, adaboost, mlp; throws UsageError otherwise.
ModelKind parse_model_kind(std::string_view s);

/// A trained classifier plus everything needed to apply it to new rows.
struct TrainedModel {
    static constexpr std::uint32_t kFormatVersion = 1;

    ModelKind kind = ModelKind::Tree;
    FeatureSchema schema;
    std::vector<std::string> classes;
    std::optional<Normalizer> normalizer;
    std::variant<DecisionTree, Forest, BoostedEnsemble, Mlp> payload;
    /// Hyperparameters, split settings and data provenance, as text.
    std::map<std::string, std::string> config;
    std::uint64_t dataset_fingerprint = 0;

    /// `x` is in raw feature units; the normalizer, if any, is applied here.
    std::vector<double> predict_proba(std::span<const double> x) const;
    std::size_t predict(std::span<const double> x) const;

    /// Config value or nullopt.
    std::optional<std::string> setting(const std::string& key) const;

    bool operator==(const TrainedModel&) const = default;
};

/// Little-endian container: magic "MIBMODEL", u32 version, u32 section count,
/// then (4-byte tag, u64 length, payload) sections. Reals are IEEE-754 binary64.
std::vector<std::uint8_t> serialize(const TrainedModel& m);
TrainedModel deserialize(std::span<const std::uint8_t> bytes);

void save_model(const TrainedModel& m, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace mibids
