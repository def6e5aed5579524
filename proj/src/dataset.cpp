#include "mibids/dataset.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "mibids/error.hpp"
#include "mibids/rng.hpp"

namespace mibids {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            break;
        }
        out.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return out;
}

/// Splits text into lines, dropping a UTF-8 BOM and trailing blank lines.
std::vector<std::string_view> split_lines(std::string_view text) {
    if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        auto nl = text.find('\n', start);
        if (nl == std::string_view::npos) nl = text.size();
        lines.push_back(text.substr(start, nl - start));
        start = nl + 1;
    }
    while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
    return lines;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw DataError("write failed for '" + path.string() + "'");
}

double parse_cell(std::string_view cell, std::size_t row, std::string_view column) {
    double v = 0.0;
    if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
    const auto* first = cell.data();
    const auto* last = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (cell.empty() || ec != std::errc{} || ptr != last || !std::isfinite(v)) {
        throw DataError("row " + std::to_string(row) + ", column '" + std::string(column) +
                        "': missing, non-numeric or non-finite value '" + std::string(cell) + "'");
    }
    return v;
}

struct ParsedTable {
    FeatureSchema schema;
    std::vector<std::vector<double>> rows;
    std::vector<std::string> labels;
};

ParsedTable parse_table(std::string_view text, bool labeled) {
    const auto lines = split_lines(text);
    if (lines.empty()) throw DataError("missing header row");
    auto header = split_fields(lines.front());
    bool has_label = !header.empty() && header.back() == kClassColumn;
    if (labeled && !has_label) {
        throw DataError("last header column must be named 'class'");
    }
    ParsedTable t;
    const std::size_t width = header.size();
    const std::size_t nfeat = has_label ? width - 1 : width;
    for (std::size_t j = 0; j < nfeat; ++j) t.schema.names.emplace_back(header[j]);
    t.schema.validate();

    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::size_t row = i;
        if (trim(lines[i]).empty()) throw DataError("row " + std::to_string(row) + ": blank line");
        auto fields = split_fields(lines[i]);
        if (fields.size() != width) {
            throw DataError("row " + std::to_string(row) + ": expected " + std::to_string(width) +
                            " columns, found " + std::to_string(fields.size()));
        }
        std::vector<double> values(nfeat);
        for (std::size_t j = 0; j < nfeat; ++j) values[j] = parse_cell(fields[j], row, t.schema.names[j]);
        if (has_label) {
            if (fields.back().empty()) {
                throw DataError("row " + std::to_string(row) + ", column 'class': missing label");
            }
            if (labeled) t.labels.emplace_back(fields.back());
        }
        t.rows.push_back(std::move(values));
    }
    return t;
}

}  // namespace

std::optional<std::size_t> FeatureSchema::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) return i;
    }
    return std::nullopt;
}

void FeatureSchema::validate() const {
    std::set<std::string_view> seen;
    for (const auto& n : names) {
        if (n.empty()) throw DataError("empty feature name in schema");
        if (n == kClassColumn) throw DataError("'class' cannot be a feature name");
        if (!seen.insert(n).second) throw DataError("duplicate feature name '" + n + "'");
    }
}

Dataset::Dataset(FeatureSchema schema, std::vector<std::string> classes, std::vector<MibRecord> records)
    : schema_(std::move(schema)), classes_(std::move(classes)), records_(std::move(records)) {
    schema_.validate();
    if (!std::is_sorted(classes_.begin(), classes_.end()) ||
        std::adjacent_find(classes_.begin(), classes_.end()) != classes_.end()) {
        throw DataError("class catalog must be sorted and unique");
    }
    for (const auto& c : classes_) {
        if (c.empty()) throw DataError("empty class label");
    }
    for (std::size_t i = 0; i < records_.size(); ++i) {
        const auto& r = records_[i];
        if (r.values.size() != schema_.size()) {
            throw DataError("record " + std::to_string(i + 1) + " has " + std::to_string(r.values.size()) +
                            " values, schema has " + std::to_string(schema_.size()));
        }
        if (r.label >= classes_.size()) {
            throw DataError("record " + std::to_string(i + 1) + " has a label outside the class catalog");
        }
        for (std::size_t j = 0; j < r.values.size(); ++j) {
            if (!std::isfinite(r.values[j])) {
                throw DataError("record " + std::to_string(i + 1) + ", column '" + schema_.names[j] +
                                "': non-finite value");
            }
        }
    }
}

std::optional<std::size_t> Dataset::class_index(std::string_view name) const {
    auto it = std::lower_bound(classes_.begin(), classes_.end(), name);
    if (it == classes_.end() || *it != name) return std::nullopt;
    return static_cast<std::size_t>(it - classes_.begin());
}

Dataset Dataset::with_records(std::vector<MibRecord> records) const {
    Dataset out;
    out.schema_ = schema_;
    out.classes_ = classes_;
    out.records_ = std::move(records);
    return out;
}

std::vector<std::size_t> Dataset::class_counts() const {
    std::vector<std::size_t> counts(classes_.size(), 0);
    for (const auto& r : records_) ++counts[r.label];
    return counts;
}

Dataset make_dataset(FeatureSchema schema, std::vector<std::vector<double>> rows,
                     const std::vector<std::string>& labels) {
    if (rows.size() != labels.size()) throw DataError("row and label counts differ");
    std::vector<std::string> classes(labels.begin(), labels.end());
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
    std::map<std::string_view, std::size_t> index;
    for (std::size_t c = 0; c < classes.size(); ++c) index.emplace(classes[c], c);
    std::vector<MibRecord> records;
    records.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        records.push_back({std::move(rows[i]), index.at(labels[i])});
    }
    return Dataset(std::move(schema), std::move(classes), std::move(records));
}

Dataset parse_csv(std::string_view text, const std::optional<FeatureSchema>& expected_schema) {
    auto t = parse_table(text, true);
    if (expected_schema && t.schema != *expected_schema) {
        throw DataError("header does not match the expected schema");
    }
    if (t.rows.empty()) throw DataError("empty body");
    return make_dataset(std::move(t.schema), std::move(t.rows), t.labels);
}

Dataset load_csv(const std::filesystem::path& path, const std::optional<FeatureSchema>& expected_schema) {
    try {
        return parse_csv(read_file(path), expected_schema);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

std::string format_real(double v) {
    char buf[32];
    // Integral counters stay in plain integer form.
    if (std::trunc(v) == v && std::abs(v) < 9007199254740992.0) {
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, static_cast<long long>(v));
        return std::string(buf, ptr);
    }
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string format_csv(const Dataset& d) {
    std::string out;
    for (const auto& n : d.schema().names) {
        out += n;
        out += ',';
    }
    out += kClassColumn;
    out += '\n';
    for (const auto& r : d.records()) {
        for (double v : r.values) {
            out += format_real(v);
            out += ',';
        }
        out += d.label_name(r);
        out += '\n';
    }
    return out;
}

void save_csv(const Dataset& d, const std::filesystem::path& path) { write_file(path, format_csv(d)); }

FeatureTable parse_unlabeled_csv(std::string_view text) {
    auto t = parse_table(text, false);
    return FeatureTable{std::move(t.schema), std::move(t.rows)};
}

FeatureTable load_unlabeled_csv(const std::filesystem::path& path) {
    try {
        return parse_unlabeled_csv(read_file(path));
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

std::string format_unlabeled_csv(const FeatureTable& t) {
    std::string out;
    for (std::size_t j = 0; j < t.schema.size(); ++j) {
        if (j) out += ',';
        out += t.schema.names[j];
    }
    out += '\n';
    for (const auto& row : t.rows) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j) out += ',';
            out += format_real(row[j]);
        }
        out += '\n';
    }
    return out;
}

SplitResult split(const Dataset& d, double train_fraction, std::uint64_t seed, bool stratified) {
    if (d.empty()) throw UsageError("cannot split an empty dataset");
    if (!(train_fraction > 0.0 && train_fraction <= 1.0)) {
        throw UsageError("train fraction must lie in (0, 1]");
    }
    const std::size_t n = d.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(std::span<std::size_t>(order));

    auto floor_count = [&](std::size_t count) {
        return static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(count) + 1e-9));
    };
    const std::size_t target = std::min(n, floor_count(n));

    std::vector<bool> in_train(n, false);
    if (!stratified) {
        for (std::size_t k = 0; k < target; ++k) in_train[order[k]] = true;
    } else {
        std::vector<std::vector<std::size_t>> by_class(d.num_classes());
        for (std::size_t idx : order) by_class[d[idx].label].push_back(idx);
        std::vector<std::size_t> taken(d.num_classes(), 0);
        std::size_t total = 0;
        for (std::size_t c = 0; c < by_class.size(); ++c) {
            taken[c] = floor_count(by_class[c].size());
            total += taken[c];
        }
        // Fill the shortfall from the per-class floors, one record per class in catalog order.
        while (total < target) {
            bool progressed = false;
            for (std::size_t c = 0; c < by_class.size() && total < target; ++c) {
                if (taken[c] < by_class[c].size()) {
                    ++taken[c];
                    ++total;
                    progressed = true;
                }
            }
            if (!progressed) break;
        }
        for (std::size_t c = 0; c < by_class.size(); ++c) {
            for (std::size_t k = 0; k < taken[c]; ++k) in_train[by_class[c][k]] = true;
        }
    }

    std::vector<MibRecord> train, test;
    train.reserve(target);
    test.reserve(n - target);
    for (std::size_t idx : order) {
        (in_train[idx] ? train : test).push_back(d[idx]);
    }
    return {d.with_records(std::move(train)), d.with_records(std::move(test))};
}

Normalizer::Normalizer(FeatureSchema schema, std::vector<double> mins, std::vector<double> maxs)
    : schema_(std::move(schema)), mins_(std::move(mins)), maxs_(std::move(maxs)) {
    if (mins_.size() != schema_.size() || maxs_.size() != schema_.size()) {
        throw DataError("normalizer bounds do not match schema width");
    }
    for (std::size_t j = 0; j < mins_.size(); ++j) {
        if (!(mins_[j] <= maxs_[j])) throw DataError("normalizer min exceeds max for '" + schema_.names[j] + "'");
    }
}

double Normalizer::transform(std::size_t feature, double x) const {
    const double lo = mins_[feature];
    const double hi = maxs_[feature];
    if (hi == lo) return 0.0;
    return -1.0 + 2.0 * (x - lo) / (hi - lo);
}

double Normalizer::inverse(std::size_t feature, double y) const {
    const double lo = mins_[feature];
    const double hi = maxs_[feature];
    if (hi == lo) return lo;
    return lo + (y + 1.0) * 0.5 * (hi - lo);
}

std::vector<double> Normalizer::transform(std::span<const double> x) const {
    if (x.size() != schema_.size()) throw DataError("feature vector width does not match normalizer");
    std::vector<double> out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = transform(j, x[j]);
    return out;
}

Normalizer fit_normalizer(const Dataset& train) {
    if (train.empty()) throw UsageError("cannot fit a normalizer on an empty dataset");
    const std::size_t m = train.num_features();
    std::vector<double> lo(m, 0.0), hi(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) lo[j] = hi[j] = train[0].values[j];
    for (const auto& r : train.records()) {
        for (std::size_t j = 0; j < m; ++j) {
            lo[j] = std::min(lo[j], r.values[j]);
            hi[j] = std::max(hi[j], r.values[j]);
        }
    }
    return Normalizer(train.schema(), std::move(lo), std::move(hi));
}

Dataset apply_normalizer(const Normalizer& n, const Dataset& d) {
    if (d.schema() != n.schema()) throw DataError("dataset schema does not match the normalizer");
    std::vector<MibRecord> out;
    out.reserve(d.size());
    for (const auto& r : d.records()) out.push_back({n.transform(r.values), r.label});
    return d.with_records(std::move(out));
}

std::uint64_t fingerprint(const Dataset& d) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    auto byte = [&](unsigned char b) {
        h ^= b;
        h *= 0x100000001B3ULL;
    };
    auto u64 = [&](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) byte(static_cast<unsigned char>(v >> (8 * i)));
    };
    auto str = [&](const std::string& s) {
        u64(s.size());
        for (char c : s) byte(static_cast<unsigned char>(c));
    };
    u64(d.schema().size());
    for (const auto& n : d.schema().names) str(n);
    u64(d.num_classes());
    for (const auto& c : d.classes()) str(c);
    u64(d.size());
    for (const auto& r : d.records()) {
        for (double v : r.values) u64(std::bit_cast<std::uint64_t>(v));
        u64(r.label);
    }
    return h;
}

}  // namespace mibids
