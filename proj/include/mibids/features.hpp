#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mibids/dataset.hpp"

namespace mibids {

/// Named set of MIB variables, in canonical order.
struct FeatureGroup {
    std::string name;
    std::vector<std::string> members;
};

/// The eight MIB-II Interface group variables.
const FeatureGroup& interface_group();

/// Built-in groups plus any loaded from a groups file, keyed by lower-case name.
class GroupCatalog {
public:
    GroupCatalog();

    /// Reads a JSON object of the form {"name": ["var", ...], ...}; entries
    /// replace built-ins of the same name.
    void load(const std::filesystem::path& path);
    void add(FeatureGroup g);

    /// Case-insensitive lookup; throws UsageError listing known groups.
    const FeatureGroup& find(std::string_view name) const;
    std::vector<std::string> names() const;

private:
    std::map<std::string, FeatureGroup> groups_;
};

/// Projects `d` onto the group's members that are present in its schema, in
/// group order. Throws DataError when none are present.
Dataset select_group(const Dataset& d, const FeatureGroup& g);

/// Projects onto an explicit list of names; every name must exist.
Dataset select_features(const Dataset& d, const std::vector<std::string>& names);

struct FeatureScore {
    std::string name;
    double score = 0.0;
};

/// Descending by score; ties keep schema order.
using FeatureRanking = std::vector<FeatureScore>;

/// Score = mean over classes of |Pearson r| between the feature column and the
/// one-vs-rest class indicator. Zero-variance columns score 0.
FeatureRanking rank_features(const Dataset& d);

/// Names of the k best-ranked features, in schema order.
std::vector<std::string> top_k(const Dataset& d, std::size_t k);

}  // namespace mibids
