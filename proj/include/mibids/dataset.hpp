#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mibids {

/// Name of the label column in every labeled CSV.
inline constexpr std::string_view kClassColumn = "class";

/// Ordered, unique feature names. Record values align positionally with `names`.
struct FeatureSchema {
    std::vector<std::string> names;

    std::size_t size() const noexcept { return names.size(); }
    std::optional<std::size_t> index_of(std::string_view name) const;

    /// Throws DataError on empty or duplicate names.
    void validate() const;

    bool operator==(const FeatureSchema&) const = default;
};

/// One observation. `label` indexes the owning dataset's class catalog.
struct MibRecord {
    std::vector<double> values;
    std::size_t label = 0;

    bool operator==(const MibRecord&) const = default;
};

/// Labeled feature table. The class catalog is kept sorted so class indices
/// do not depend on row order.
class Dataset {
public:
    Dataset() = default;

    /// Validates schema, catalog, value finiteness and label indices; throws DataError.
    Dataset(FeatureSchema schema, std::vector<std::string> classes, std::vector<MibRecord> records);

    const FeatureSchema& schema() const noexcept { return schema_; }
    const std::vector<std::string>& classes() const noexcept { return classes_; }
    const std::vector<MibRecord>& records() const noexcept { return records_; }
    const MibRecord& operator[](std::size_t i) const { return records_[i]; }

    std::size_t size() const noexcept { return records_.size(); }
    bool empty() const noexcept { return records_.empty(); }
    std::size_t num_features() const noexcept { return schema_.size(); }
    std::size_t num_classes() const noexcept { return classes_.size(); }

    std::optional<std::size_t> class_index(std::string_view name) const;
    const std::string& label_name(const MibRecord& r) const { return classes_[r.label]; }

    /// Same schema and catalog, different records.
    Dataset with_records(std::vector<MibRecord> records) const;

    /// Record counts per catalog entry.
    std::vector<std::size_t> class_counts() const;

    bool operator==(const Dataset&) const = default;

private:
    FeatureSchema schema_;
    std::vector<std::string> classes_;
    std::vector<MibRecord> records_;
};

/// Builds a dataset from string labels; the catalog becomes the sorted unique label set.
Dataset make_dataset(FeatureSchema schema, std::vector<std::vector<double>> rows,
                     const std::vector<std::string>& labels);

/// Feature rows without labels (prediction input, collector output).
struct FeatureTable {
    FeatureSchema schema;
    std::vector<std::vector<double>> rows;

    bool operator==(const FeatureTable&) const = default;
};

/// Loads a labeled CSV whose last header column is "class". Any bad cell aborts the
/// whole load with a DataError naming the data row (1-based) and column.
Dataset load_csv(const std::filesystem::path& path,
                 const std::optional<FeatureSchema>& expected_schema = std::nullopt);
Dataset parse_csv(std::string_view text,
                  const std::optional<FeatureSchema>& expected_schema = std::nullopt);

void save_csv(const Dataset& d, const std::filesystem::path& path);
std::string format_csv(const Dataset& d);

/// Loads a CSV without a label column. A trailing "class" column, if present, is
/// dropped. A header-only file yields an empty table.
FeatureTable load_unlabeled_csv(const std::filesystem::path& path);
FeatureTable parse_unlabeled_csv(std::string_view text);
std::string format_unlabeled_csv(const FeatureTable& t);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_real(double v);

struct SplitResult {
    Dataset train;
    Dataset test;
};

/// Seeded shuffle, then the first floor(fraction * N) records go to train. With
/// `stratified`, the floor is taken per class and the shortfall is filled one
/// record per class in catalog order.
SplitResult split(const Dataset& d, double train_fraction, std::uint64_t seed, bool stratified = false);

/// Per-feature min/max fitted on training data; maps onto [-1, 1].
class Normalizer {
public:
    Normalizer() = default;
    Normalizer(FeatureSchema schema, std::vector<double> mins, std::vector<double> maxs);

    const FeatureSchema& schema() const noexcept { return schema_; }
    const std::vector<double>& mins() const noexcept { return mins_; }
    const std::vector<double>& maxs() const noexcept { return maxs_; }

    /// -1 + 2(x - min)/(max - min); constant features map to 0. No clamping.
    double transform(std::size_t feature, double x) const;
    double inverse(std::size_t feature, double y) const;
    std::vector<double> transform(std::span<const double> x) const;

    bool operator==(const Normalizer&) const = default;

private:
    FeatureSchema schema_;
    std::vector<double> mins_;
    std::vector<double> maxs_;
};

Normalizer fit_normalizer(const Dataset& train);

/// Throws DataError if `d`'s schema differs from the normalizer's.
Dataset apply_normalizer(const Normalizer& n, const Dataset& d);

/// FNV-1a 64 over schema, catalog, labels and the exact bits of every value.
std::uint64_t fingerprint(const Dataset& d);

}  // namespace mibids
