#pragma once

#include <array>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "mibids/snmp/collector.hpp"

namespace mibids::snmp {

/// One fixture cell: a counter value, a noSuchInstance answer, or a varbind
/// left out of the response.
struct FixtureCell {
    enum class Kind { Value, NoSuchInstance, Omit };
    Kind kind = Kind::Value;
    std::uint32_t value = 0;

    bool operator==(const FixtureCell&) const = default;
};

using FixtureRow = std::array<FixtureCell, kInterfaceVars>;

/// CSV with the eight Interface variable names as header (any order); cells are
/// integers, "-" for noSuchInstance or "x" to omit the varbind.
std::vector<FixtureRow> parse_fixture(std::string_view text);
std::vector<FixtureRow> load_fixture(const std::filesystem::path& path);

/// Loopback SNMPv2c agent that answers each GetRequest with the next fixture
/// row. Once the rows run out it stops answering. Requests with a foreign
/// community are dropped silently.
class StubAgent {
public:
    struct Options {
        std::string community = "public";
        std::uint32_t if_index = 1;
        std::string bind_address = "127.0.0.1";
        /// 0 picks an ephemeral port.
        std::uint16_t port = 0;
        /// 1-based ordinals of requests to ignore (simulated loss); they do not consume a row.
        std::set<std::size_t> drop_requests;
    };

    StubAgent(std::vector<FixtureRow> rows, Options options);
    ~StubAgent();

    StubAgent(const StubAgent&) = delete;
    StubAgent& operator=(const StubAgent&) = delete;

    std::uint16_t port() const noexcept { return port_; }
    std::size_t requests_seen() const noexcept { return requests_.load(); }
    std::size_t rows_served() const noexcept { return served_.load(); }

    /// Builds the Response for one request against one fixture row.
    static Message respond(const Message& request, const FixtureRow& row, std::uint32_t if_index);

private:
    void serve();

    std::vector<FixtureRow> rows_;
    Options options_;
    int fd_ = -1;
    std::uint16_t port_ = 0;
    std::atomic<bool> stop_{false};
    std::atomic<std::size_t> requests_{0};
    std::atomic<std::size_t> served_{0};
    std::thread thread_;
};

}  // namespace mibids::snmp
