#pragma once

#include <array>
#include <bitset>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mibids/dataset.hpp"
#include "mibids/snmp/ber.hpp"

namespace mibids::snmp {

inline constexpr std::size_t kInterfaceVars = 8;

/// ifEntry column for each Interface group variable, in group order.
struct InterfaceColumn {
    std::string_view name;
    std::uint32_t column;
    /// ifInNUcastPkts / ifOutNUcastPkts; deprecated and often absent on agents.
    bool optional;
};

const std::array<InterfaceColumn, kInterfaceVars>& interface_columns();

/// 1.3.6.1.2.1.2.2.1.<column>.<if_index>
Oid interface_oid(std::size_t var, std::uint32_t if_index);

struct CounterSample {
    /// steady_clock milliseconds at response receipt.
    std::int64_t timestamp_ms = 0;
    std::array<std::uint32_t, kInterfaceVars> values{};
    /// Variables the agent reported as absent and that were replaced by 0.
    std::bitset<kInterfaceVars> substituted;

    bool operator==(const CounterSample&) const = default;
};

struct PollConfig {
    std::string host = "127.0.0.1";
    std::uint16_t port = 161;
    std::string community = "public";
    std::uint32_t if_index = 1;
    double interval_s = 5.0;
    /// Number of ticks; when 0, derived from duration_s / interval_s.
    std::size_t count = 0;
    double duration_s = 0.0;
    double timeout_s = 1.0;
    std::size_t retries = 1;
    /// Consecutive timed-out ticks that end the stream with a TransportError.
    std::size_t max_failures = 5;
    std::int32_t first_request_id = 1;

    void validate() const;
    std::size_t ticks() const;
};

/// Datagram channel to one agent.
class Transport {
public:
    virtual ~Transport() = default;
    virtual void send(std::span<const std::uint8_t> datagram) = 0;
    /// Next datagram, or nullopt once `deadline` passes.
    virtual std::optional<Bytes> receive(std::chrono::steady_clock::time_point deadline) = 0;
};

/// Connected UDP socket; throws TransportError when the host cannot be resolved.
std::unique_ptr<Transport> make_udp_transport(const std::string& host, std::uint16_t port);

struct PollGap {
    std::size_t tick = 0;
    std::string reason;
};

struct PollStats {
    std::size_t samples = 0;
    std::vector<PollGap> gaps;
};

struct PollCallbacks {
    std::function<void(const CounterSample&)> on_sample;
    std::function<void(const PollGap&)> on_gap;
};

/// Converts one Response into a sample. Returns nullopt (with `reason` set) when a
/// variable is missing or unusable.
std::optional<CounterSample> sample_from_response(const Response& r, std::uint32_t if_index, std::string& reason);

/// One GET per interval for the eight Interface OIDs. Ticks that time out after
/// all retries, or whose response is unusable, are skipped and reported as gaps.
/// Throws TransportError after cfg.max_failures consecutive timed-out ticks;
/// samples already delivered stay delivered.
PollStats poll(const PollConfig& cfg, Transport& transport, const PollCallbacks& callbacks);

/// new - old, or (2^32 - old) + new when the counter wrapped once.
constexpr std::uint32_t counter_delta(std::uint32_t old_value, std::uint32_t new_value) noexcept {
    return new_value >= old_value ? new_value - old_value
                                  : static_cast<std::uint32_t>((0x100000000ULL - old_value) + new_value);
}

/// Interface-schema feature rows, one per consecutive sample pair. Fewer than
/// two samples gives an empty table.
FeatureTable deltas(std::span<const CounterSample> samples);

FeatureSchema interface_schema();

}  // namespace mibids::snmp
