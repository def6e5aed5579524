#include "mibids/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "mibids/error.hpp"
#include "mibids/features.hpp"
#include "mibids/rng.hpp"

namespace mibids {

double RateDistribution::mean() const { return std::exp(mu + sigma * sigma / 2.0); }

std::size_t ScenarioSpec::total_count() const {
    std::size_t n = 0;
    for (const auto& c : classes) n += c.count;
    return n;
}

void ScenarioSpec::validate() const {
    schema.validate();
    if (schema.size() == 0) throw DataError("scenario has no variables");
    std::size_t populated = 0;
    for (std::size_t c = 0; c < classes.size(); ++c) {
        const auto& cls = classes[c];
        if (cls.name.empty()) throw DataError("scenario class with an empty name");
        if (c > 0 && !(classes[c - 1].name < cls.name)) throw DataError("scenario classes must be sorted and unique");
        if (cls.rates.size() != schema.size()) {
            throw DataError("class '" + cls.name + "' defines " + std::to_string(cls.rates.size()) +
                            " rates for " + std::to_string(schema.size()) + " variables");
        }
        for (std::size_t j = 0; j < schema.size(); ++j) {
            const auto& r = cls.rates[j];
            if (!std::isfinite(r.mu)) {
                throw DataError("class '" + cls.name + "', variable '" + schema.names[j] + "': mu is not finite");
            }
            if (!(r.sigma > 0.0) || !std::isfinite(r.sigma)) {
                throw DataError("class '" + cls.name + "', variable '" + schema.names[j] + "': sigma must be > 0");
            }
        }
        if (cls.count > 0) ++populated;
    }
    if (populated < 2) throw DataError("scenario needs at least two classes with a positive count");
}

ScenarioSpec default_scenario() {
    // Columns follow the Interface group order:
    // ifInOctets, ifOutOctets, ifOutDiscards, ifInUcastPkts, ifInNUcastPkts, ifInDiscards, ifOutUcastPkts,
    // ifOutNUcastPkts. Entries are (mu, sigma) of the log rate per 5 s poll.
    struct Row {
        const char* name;
        std::size_t count;
        RateDistribution rates[8];
    };
    static const Row rows[] = {
        {"BruteForce", 571,
         {{13.4, 0.2}, {13.6, 0.2}, {0.7, 0.3}, {8.6, 0.2}, {3.7, 0.3}, {0.7, 0.3}, {8.6, 0.2}, {2.7, 0.3}}},
        {"HTTP-flood", 571,
         {{15.1, 0.2}, {16.6, 0.2}, {1.2, 0.3}, {9.6, 0.2}, {3.7, 0.3}, {2.5, 0.3}, {9.8, 0.2}, {2.7, 0.3}}},
        {"ICMP-ECHO", 571,
         {{14.6, 0.2}, {14.5, 0.2}, {2.0, 0.3}, {10.0, 0.2}, {3.7, 0.3}, {4.0, 0.3}, {9.9, 0.2}, {2.7, 0.3}}},
        {"Normal", 1001,
         {{14.0, 0.2}, {14.7, 0.2}, {0.7, 0.3}, {7.3, 0.2}, {3.7, 0.3}, {0.7, 0.3}, {7.4, 0.2}, {2.7, 0.3}}},
        {"Slowloris", 571,
         {{11.9, 0.2}, {11.5, 0.2}, {0.7, 0.3}, {8.0, 0.2}, {3.7, 0.3}, {0.7, 0.3}, {7.9, 0.2}, {2.7, 0.3}}},
        {"Slowpost", 571,
         {{12.8, 0.2}, {11.6, 0.2}, {0.7, 0.3}, {7.2, 0.2}, {3.7, 0.3}, {0.7, 0.3}, {7.0, 0.2}, {2.7, 0.3}}},
        {"TCP-SYN", 571,
         {{15.1, 0.2}, {14.4, 0.2}, {2.5, 0.3}, {11.0, 0.2}, {3.7, 0.3}, {5.0, 0.3}, {10.3, 0.2}, {2.7, 0.3}}},
        {"UDP-flood", 571,
         {{17.4, 0.2}, {12.3, 0.2}, {1.5, 0.3}, {10.5, 0.2}, {3.7, 0.3}, {5.8, 0.3}, {8.0, 0.2}, {2.7, 0.3}}},
    };
    ScenarioSpec spec;
    spec.schema.names = interface_group().members;
    spec.seed = 42;
    for (const auto& row : rows) {
        spec.classes.push_back({row.name, row.count, std::vector<RateDistribution>(std::begin(row.rates),
                                                                                   std::end(row.rates))});
    }
    return spec;
}

ScenarioSpec parse_scenario(std::string_view text) {
    ScenarioSpec spec;
    try {
        const auto j = nlohmann::json::parse(text);
        spec.seed = j.value("seed", std::uint64_t{42});
        spec.schema.names = j.at("variables").get<std::vector<std::string>>();
        spec.schema.validate();
        for (const auto& [name, body] : j.at("classes").items()) {
            ClassScenario cls;
            cls.name = name;
            const auto count = body.at("count").get<std::int64_t>();
            if (count < 0) throw DataError("class '" + name + "': count must be >= 0");
            cls.count = static_cast<std::size_t>(count);
            const auto& rates = body.at("rates");
            for (const auto& var : spec.schema.names) {
                if (!rates.contains(var)) throw DataError("class '" + name + "', variable '" + var + "': missing rate");
                const auto& r = rates.at(var);
                cls.rates.push_back({r.at("mu").get<double>(), r.at("sigma").get<double>()});
            }
            for (const auto& [var, _] : rates.items()) {
                if (!spec.schema.index_of(var)) {
                    throw DataError("class '" + name + "': rate for unknown variable '" + var + "'");
                }
            }
            spec.classes.push_back(std::move(cls));
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed scenario: ") + e.what());
    }
    std::sort(spec.classes.begin(), spec.classes.end(),
              [](const ClassScenario& a, const ClassScenario& b) { return a.name < b.name; });
    spec.validate();
    return spec;
}

ScenarioSpec load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open scenario '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_scenario(ss.str());
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

std::string format_scenario(const ScenarioSpec& spec) {
    nlohmann::ordered_json j;
    j["seed"] = spec.seed;
    j["variables"] = spec.schema.names;
    auto& classes = j["classes"] = nlohmann::ordered_json::object();
    for (const auto& cls : spec.classes) {
        nlohmann::ordered_json rates = nlohmann::ordered_json::object();
        for (std::size_t v = 0; v < spec.schema.size(); ++v) {
            rates[spec.schema.names[v]] = {{"mu", cls.rates[v].mu}, {"sigma", cls.rates[v].sigma}};
        }
        classes[cls.name] = {{"count", cls.count}, {"rates", rates}};
    }
    return j.dump(2) + "\n";
}

Dataset generate(const ScenarioSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    std::vector<std::string> catalog;
    for (const auto& cls : spec.classes) catalog.push_back(cls.name);
    std::vector<MibRecord> records;
    records.reserve(spec.total_count());
    for (std::size_t c = 0; c < spec.classes.size(); ++c) {
        const auto& cls = spec.classes[c];
        for (std::size_t i = 0; i < cls.count; ++i) {
            MibRecord r;
            r.label = c;
            r.values.reserve(spec.schema.size());
            for (const auto& rate : cls.rates) r.values.push_back(std::exp(rate.mu + rate.sigma * rng.normal()));
            records.push_back(std::move(r));
        }
    }
    rng.shuffle(std::span<MibRecord>(records));
    return Dataset(spec.schema, std::move(catalog), std::move(records));
}

}  // namespace mibids
