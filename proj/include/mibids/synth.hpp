#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mibids/dataset.hpp"

namespace mibids {

/// Log-normal rate: exp(mu + sigma * Z), in counter delta per poll interval.
struct RateDistribution {
    double mu = 0.0;
    double sigma = 1.0;

    double mean() const;
    bool operator==(const RateDistribution&) const = default;
};

struct ClassScenario {
    std::string name;
    std::size_t count = 0;
    /// One entry per schema variable, in schema order.
    std::vector<RateDistribution> rates;

    bool operator==(const ClassScenario&) const = default;
};

struct ScenarioSpec {
    FeatureSchema schema;
    /// Sorted by name.
    std::vector<ClassScenario> classes;
    std::uint64_t seed = 42;

    std::size_t total_count() const;

    /// Throws DataError naming the offending class and variable.
    void validate() const;

    bool operator==(const ScenarioSpec&) const = default;
};

/// Eight traffic classes over the Interface group, 4998 records in total.
ScenarioSpec default_scenario();

/// JSON layout:
/// {"seed": 42, "variables": [...],
///  "classes": {"Normal": {"count": 1001, "rates": {"ifInOctets": {"mu": 14.0, "sigma": 0.2}, ...}}, ...}}
ScenarioSpec parse_scenario(std::string_view text);
ScenarioSpec load_scenario(const std::filesystem::path& path);
std::string format_scenario(const ScenarioSpec& spec);

/// Draws every class's records with independent per-variable log-normal
/// values, then shuffles all records with the spec's seed.
Dataset generate(const ScenarioSpec& spec);

}  // namespace mibids
