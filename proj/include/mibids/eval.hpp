#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace mibids {

/// counts[actual][predicted] over a fixed class catalog.
class ConfusionMatrix {
public:
    ConfusionMatrix() = default;
    explicit ConfusionMatrix(std::vector<std::string> catalog);
    ConfusionMatrix(std::vector<std::string> catalog, std::vector<std::vector<std::uint64_t>> counts);

    const std::vector<std::string>& catalog() const noexcept { return catalog_; }
    std::size_t num_classes() const noexcept { return catalog_.size(); }
    std::uint64_t count(std::size_t actual, std::size_t predicted) const { return counts_[actual][predicted]; }
    const std::vector<std::vector<std::uint64_t>>& counts() const noexcept { return counts_; }

    void add(std::size_t actual, std::size_t predicted, std::uint64_t n = 1);
    std::uint64_t total() const;
    std::uint64_t trace() const;

    /// Throws UsageError for labels outside the catalog.
    std::size_t index_of(std::string_view label) const;

    bool operator==(const ConfusionMatrix&) const = default;

private:
    std::vector<std::string> catalog_;
    std::vector<std::vector<std::uint64_t>> counts_;
};

ConfusionMatrix confusion_matrix(const std::vector<std::string>& actual, const std::vector<std::string>& predicted,
                                 const std::vector<std::string>& catalog);

/// Index-based variant used by the model pipeline.
ConfusionMatrix confusion_matrix(const std::vector<std::size_t>& actual, const std::vector<std::size_t>& predicted,
                                 const std::vector<std::string>& catalog);

/// One-vs-rest counts for a single class.
struct BinaryCounts {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fn = 0;

    std::uint64_t total() const noexcept { return tp + fp + tn + fn; }
    bool operator==(const BinaryCounts&) const = default;
};

BinaryCounts binary_counts(const ConfusionMatrix& cm, std::size_t cls);
BinaryCounts binary_counts(const ConfusionMatrix& cm, std::string_view cls);

struct PrecisionRecallF {
    double precision = 0.0;
    double recall = 0.0;
    double f_measure = 0.0;
    /// True when a 0/0 ratio was replaced by 0.
    bool degenerate = false;
};

/// precision = TP/(TP+FP), recall = TP/(TP+FN), F = harmonic mean; 0/0 -> 0.
PrecisionRecallF precision_recall_f(const BinaryCounts& bc);

/// trace / total. Throws UsageError on an empty matrix.
double accuracy(const ConfusionMatrix& cm);

/// (TP + FN) / total for one class: the share of records whose actual class is `cls`.
double prevalence(const ConfusionMatrix& cm, std::size_t cls);

struct ClassReport {
    std::string name;
    BinaryCounts counts;
    PrecisionRecallF metrics;
};

struct EvalReport {
    std::vector<ClassReport> classes;
    double accuracy = 0.0;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f_measure = 0.0;
    ConfusionMatrix matrix;
};

EvalReport make_report(const ConfusionMatrix& cm);

/// Human-readable per-class table, accuracy line and confusion matrix.
std::string format_report(const EvalReport& r);

/// Stable keys: classes[].{class, precision, recall, f_measure, tp, fp, tn, fn,
/// degenerate}, accuracy, macro{}, catalog, confusion (row-major, actual x predicted).
nlohmann::json report_to_json(const EvalReport& r);

}  // namespace mibids
