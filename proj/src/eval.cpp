#include "mibids/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "mibids/error.hpp"

namespace mibids {

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> catalog)
    : catalog_(std::move(catalog)), counts_(catalog_.size(), std::vector<std::uint64_t>(catalog_.size(), 0)) {}

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> catalog, std::vector<std::vector<std::uint64_t>> counts)
    : catalog_(std::move(catalog)), counts_(std::move(counts)) {
    if (counts_.size() != catalog_.size()) throw DataError("confusion matrix row count does not match catalog");
    for (const auto& row : counts_) {
        if (row.size() != catalog_.size()) throw DataError("confusion matrix is not square");
    }
}

void ConfusionMatrix::add(std::size_t actual, std::size_t predicted, std::uint64_t n) {
    if (actual >= catalog_.size() || predicted >= catalog_.size()) throw UsageError("class index out of range");
    counts_[actual][predicted] += n;
}

std::uint64_t ConfusionMatrix::total() const {
    std::uint64_t t = 0;
    for (const auto& row : counts_) {
        for (auto c : row) t += c;
    }
    return t;
}

std::uint64_t ConfusionMatrix::trace() const {
    std::uint64_t t = 0;
    for (std::size_t i = 0; i < counts_.size(); ++i) t += counts_[i][i];
    return t;
}

std::size_t ConfusionMatrix::index_of(std::string_view label) const {
    for (std::size_t i = 0; i < catalog_.size(); ++i) {
        if (catalog_[i] == label) return i;
    }
    throw UsageError("unknown class label '" + std::string(label) + "'");
}

ConfusionMatrix confusion_matrix(const std::vector<std::string>& actual, const std::vector<std::string>& predicted,
                                 const std::vector<std::string>& catalog) {
    if (actual.size() != predicted.size()) throw UsageError("actual and predicted label lists differ in length");
    ConfusionMatrix cm(catalog);
    for (std::size_t i = 0; i < actual.size(); ++i) cm.add(cm.index_of(actual[i]), cm.index_of(predicted[i]));
    return cm;
}

ConfusionMatrix confusion_matrix(const std::vector<std::size_t>& actual, const std::vector<std::size_t>& predicted,
                                 const std::vector<std::string>& catalog) {
    if (actual.size() != predicted.size()) throw UsageError("actual and predicted label lists differ in length");
    ConfusionMatrix cm(catalog);
    for (std::size_t i = 0; i < actual.size(); ++i) cm.add(actual[i], predicted[i]);
    return cm;
}

BinaryCounts binary_counts(const ConfusionMatrix& cm, std::size_t cls) {
    if (cls >= cm.num_classes()) throw UsageError("class index out of range");
    BinaryCounts bc;
    bc.tp = cm.count(cls, cls);
    for (std::size_t k = 0; k < cm.num_classes(); ++k) {
        if (k == cls) continue;
        bc.fp += cm.count(k, cls);
        bc.fn += cm.count(cls, k);
    }
    bc.tn = cm.total() - bc.tp - bc.fp - bc.fn;
    return bc;
}

BinaryCounts binary_counts(const ConfusionMatrix& cm, std::string_view cls) {
    return binary_counts(cm, cm.index_of(cls));
}

PrecisionRecallF precision_recall_f(const BinaryCounts& bc) {
    PrecisionRecallF m;
    const auto ratio = [&m](std::uint64_t num, std::uint64_t den) {
        if (den == 0) {
            m.degenerate = true;
            return 0.0;
        }
        return static_cast<double>(num) / static_cast<double>(den);
    };
    m.precision = ratio(bc.tp, bc.tp + bc.fp);
    m.recall = ratio(bc.tp, bc.tp + bc.fn);
    const double s = m.precision + m.recall;
    if (s > 0.0) {
        m.f_measure = 2.0 * m.precision * m.recall / s;
    } else {
        m.degenerate = true;
        m.f_measure = 0.0;
    }
    return m;
}

double accuracy(const ConfusionMatrix& cm) {
    const auto total = cm.total();
    if (total == 0) throw UsageError("accuracy of an empty confusion matrix");
    return static_cast<double>(cm.trace()) / static_cast<double>(total);
}

double prevalence(const ConfusionMatrix& cm, std::size_t cls) {
    const auto bc = binary_counts(cm, cls);
    if (bc.total() == 0) throw UsageError("prevalence of an empty confusion matrix");
    return static_cast<double>(bc.tp + bc.fn) / static_cast<double>(bc.total());
}

EvalReport make_report(const ConfusionMatrix& cm) {
    EvalReport r;
    r.matrix = cm;
    r.accuracy = accuracy(cm);
    for (std::size_t c = 0; c < cm.num_classes(); ++c) {
        ClassReport cr{cm.catalog()[c], binary_counts(cm, c), {}};
        cr.metrics = precision_recall_f(cr.counts);
        r.macro_precision += cr.metrics.precision;
        r.macro_recall += cr.metrics.recall;
        r.macro_f_measure += cr.metrics.f_measure;
        r.classes.push_back(std::move(cr));
    }
    if (!r.classes.empty()) {
        const auto k = static_cast<double>(r.classes.size());
        r.macro_precision /= k;
        r.macro_recall /= k;
        r.macro_f_measure /= k;
    }
    return r;
}

std::string format_report(const EvalReport& r) {
    std::size_t width = 5;
    for (const auto& c : r.classes) width = std::max(width, c.name.size());
    std::ostringstream os;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-*s  %9s  %9s  %9s\n", static_cast<int>(width), "class", "precision", "recall",
                  "f_measure");
    os << buf;
    for (const auto& c : r.classes) {
        std::snprintf(buf, sizeof buf, "%-*s  %9.4f  %9.4f  %9.4f%s\n", static_cast<int>(width), c.name.c_str(),
                      c.metrics.precision, c.metrics.recall, c.metrics.f_measure,
                      c.metrics.degenerate ? "  (degenerate)" : "");
        os << buf;
    }
    std::snprintf(buf, sizeof buf, "%-*s  %9.4f  %9.4f  %9.4f\n", static_cast<int>(width), "macro", r.macro_precision,
                  r.macro_recall, r.macro_f_measure);
    os << buf;
    std::snprintf(buf, sizeof buf, "accuracy: %.4f (%llu/%llu)\n", r.accuracy,
                  static_cast<unsigned long long>(r.matrix.trace()),
                  static_cast<unsigned long long>(r.matrix.total()));
    os << buf << "\nconfusion matrix (rows = actual, columns = predicted)\n";
    for (std::size_t a = 0; a < r.matrix.num_classes(); ++a) {
        std::snprintf(buf, sizeof buf, "%-*s ", static_cast<int>(width), r.matrix.catalog()[a].c_str());
        os << buf;
        for (std::size_t p = 0; p < r.matrix.num_classes(); ++p) {
            std::snprintf(buf, sizeof buf, " %6llu", static_cast<unsigned long long>(r.matrix.count(a, p)));
            os << buf;
        }
        os << '\n';
    }
    return os.str();
}

nlohmann::json report_to_json(const EvalReport& r) {
    nlohmann::json j;
    j["accuracy"] = r.accuracy;
    j["total"] = r.matrix.total();
    j["catalog"] = r.matrix.catalog();
    j["confusion"] = r.matrix.counts();
    j["macro"] = {{"precision", r.macro_precision}, {"recall", r.macro_recall}, {"f_measure", r.macro_f_measure}};
    auto& classes = j["classes"] = nlohmann::json::array();
    for (const auto& c : r.classes) {
        classes.push_back({{"class", c.name},
                           {"precision", c.metrics.precision},
                           {"recall", c.metrics.recall},
                           {"f_measure", c.metrics.f_measure},
                           {"degenerate", c.metrics.degenerate},
                           {"tp", c.counts.tp},
                           {"fp", c.counts.fp},
                           {"tn", c.counts.tn},
                           {"fn", c.counts.fn}});
    }
    return j;
}

}  // namespace mibids
