#include "mibids/features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>

#include "json.hpp"

#include "mibids/error.hpp"

namespace mibids {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

/// |Pearson r| of x against y; 0 when either side has zero variance.
double abs_pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) return 0.0;
    return std::min(1.0, std::abs(sxy) / std::sqrt(sxx * syy));
}

}  // namespace

const FeatureGroup& interface_group() {
    static const FeatureGroup group{
        "Interface",
        {"ifInOctets", "ifOutOctets", "ifOutDiscards", "ifInUcastPkts", "ifInNUcastPkts", "ifInDiscards",
         "ifOutUcastPkts", "ifOutNUcastPkts"}};
    return group;
}

GroupCatalog::GroupCatalog() { add(interface_group()); }

void GroupCatalog::add(FeatureGroup g) {
    if (g.name.empty() || g.members.empty()) throw UsageError("feature group needs a name and members");
    groups_[lower(g.name)] = std::move(g);
}

void GroupCatalog::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open groups file '" + path.string() + "'");
    nlohmann::json j;
    try {
        in >> j;
        for (const auto& [name, members] : j.items()) {
            add(FeatureGroup{name, members.get<std::vector<std::string>>()});
        }
    } catch (const nlohmann::json::exception& e) {
        throw UsageError("groups file '" + path.string() + "': " + e.what());
    }
}

const FeatureGroup& GroupCatalog::find(std::string_view name) const {
    auto it = groups_.find(lower(name));
    if (it == groups_.end()) {
        std::string known;
        for (const auto& n : names()) known += (known.empty() ? "" : ", ") + n;
        throw UsageError("unknown feature group '" + std::string(name) + "' (known: " + known + ")");
    }
    return it->second;
}

std::vector<std::string> GroupCatalog::names() const {
    std::vector<std::string> out;
    for (const auto& [key, g] : groups_) out.push_back(key);
    return out;
}

Dataset select_features(const Dataset& d, const std::vector<std::string>& names) {
    std::vector<std::size_t> cols;
    std::string missing;
    for (const auto& n : names) {
        if (auto idx = d.schema().index_of(n)) {
            cols.push_back(*idx);
        } else {
            missing += (missing.empty() ? "" : ", ") + n;
        }
    }
    if (!missing.empty()) throw DataError("variables missing from dataset: " + missing);
    FeatureSchema schema{names};
    std::vector<MibRecord> records;
    records.reserve(d.size());
    for (const auto& r : d.records()) {
        MibRecord p;
        p.label = r.label;
        p.values.reserve(cols.size());
        for (auto c : cols) p.values.push_back(r.values[c]);
        records.push_back(std::move(p));
    }
    return Dataset(std::move(schema), d.classes(), std::move(records));
}

Dataset select_group(const Dataset& d, const FeatureGroup& g) {
    std::vector<std::string> present;
    for (const auto& m : g.members) {
        if (d.schema().index_of(m)) present.push_back(m);
    }
    if (present.empty()) {
        std::string missing;
        for (const auto& m : g.members) missing += (missing.empty() ? "" : ", ") + m;
        throw DataError("no member of group '" + g.name + "' is present; missing: " + missing);
    }
    return select_features(d, present);
}

FeatureRanking rank_features(const Dataset& d) {
    if (d.num_classes() < 2) throw UsageError("feature ranking needs at least two classes");
    const std::size_t n = d.size();
    std::vector<std::vector<double>> indicators(d.num_classes(), std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) indicators[d[i].label][i] = 1.0;

    FeatureRanking ranking;
    std::vector<double> column(n);
    for (std::size_t j = 0; j < d.num_features(); ++j) {
        for (std::size_t i = 0; i < n; ++i) column[i] = d[i].values[j];
        double sum = 0.0;
        for (const auto& ind : indicators) sum += abs_pearson(column, ind);
        ranking.push_back({d.schema().names[j], sum / static_cast<double>(indicators.size())});
    }
    std::stable_sort(ranking.begin(), ranking.end(),
                     [](const FeatureScore& a, const FeatureScore& b) { return a.score > b.score; });
    return ranking;
}

std::vector<std::string> top_k(const Dataset& d, std::size_t k) {
    auto ranking = rank_features(d);
    ranking.resize(std::min(k, ranking.size()));
    std::vector<std::string> out;
    for (const auto& name : d.schema().names) {
        if (std::any_of(ranking.begin(), ranking.end(), [&](const auto& s) { return s.name == name; })) {
            out.push_back(name);
        }
    }
    return out;
}

}  // namespace mibids
