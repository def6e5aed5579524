#include "mibids/snmp/collector.hpp"

#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <thread>

#include "mibids/features.hpp"

namespace mibids::snmp {

namespace {

const Oid& if_entry() {
    static const Oid oid = Oid::parse("1.3.6.1.2.1.2.2.1");
    return oid;
}

class UdpTransport final : public Transport {
public:
    UdpTransport(const std::string& host, std::uint16_t port) {
        addrinfo hints{};
        hints.ai_family = AF_UNSPEC;
        hints.ai_socktype = SOCK_DGRAM;
        addrinfo* res = nullptr;
        const auto service = std::to_string(port);
        if (int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res); rc != 0) {
            throw TransportError("cannot resolve '" + host + "': " + ::gai_strerror(rc));
        }
        std::string last_error = "no usable address";
        for (auto* ai = res; ai != nullptr; ai = ai->ai_next) {
            const int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
            if (fd < 0) {
                last_error = std::strerror(errno);
                continue;
            }
            if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
                fd_ = fd;
                break;
            }
            last_error = std::strerror(errno);
            ::close(fd);
        }
        ::freeaddrinfo(res);
        if (fd_ < 0) throw TransportError("cannot open UDP socket to '" + host + "': " + last_error);
    }

    ~UdpTransport() override {
        if (fd_ >= 0) ::close(fd_);
    }

    UdpTransport(const UdpTransport&) = delete;
    UdpTransport& operator=(const UdpTransport&) = delete;

    void send(std::span<const std::uint8_t> datagram) override {
        // ICMP port-unreachable from a previous send surfaces here as ECONNREFUSED;
        // it is treated like a lost datagram.
        if (::send(fd_, datagram.data(), datagram.size(), 0) < 0 && errno != ECONNREFUSED) {
            throw TransportError(std::string("send failed: ") + std::strerror(errno));
        }
    }

    std::optional<Bytes> receive(std::chrono::steady_clock::time_point deadline) override {
        while (true) {
            const auto now = std::chrono::steady_clock::now();
            if (now >= deadline) return std::nullopt;
            const auto wait = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count() + 1;
            pollfd pfd{fd_, POLLIN, 0};
            const int rc = ::poll(&pfd, 1, static_cast<int>(wait));
            if (rc < 0) {
                if (errno == EINTR) continue;
                throw TransportError(std::string("poll failed: ") + std::strerror(errno));
            }
            if (rc == 0) continue;
            Bytes buf(65536);
            const auto n = ::recv(fd_, buf.data(), buf.size(), 0);
            if (n < 0) {
                if (errno == EINTR || errno == ECONNREFUSED || errno == EAGAIN) continue;
                throw TransportError(std::string("recv failed: ") + std::strerror(errno));
            }
            buf.resize(static_cast<std::size_t>(n));
            return buf;
        }
    }

private:
    int fd_ = -1;
};

std::int64_t steady_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

}  // namespace

const std::array<InterfaceColumn, kInterfaceVars>& interface_columns() {
    static const std::array<InterfaceColumn, kInterfaceVars> columns{{
        {"ifInOctets", 10, false},
        {"ifOutOctets", 16, false},
        {"ifOutDiscards", 19, false},
        {"ifInUcastPkts", 11, false},
        {"ifInNUcastPkts", 12, true},
        {"ifInDiscards", 13, false},
        {"ifOutUcastPkts", 17, false},
        {"ifOutNUcastPkts", 18, true},
    }};
    return columns;
}

Oid interface_oid(std::size_t var, std::uint32_t if_index) {
    return if_entry().child(interface_columns().at(var).column).child(if_index);
}

FeatureSchema interface_schema() { return FeatureSchema{interface_group().members}; }

void PollConfig::validate() const {
    if (host.empty()) throw UsageError("agent host is empty");
    if (!(interval_s > 0.0) || !std::isfinite(interval_s)) throw UsageError("poll interval must be > 0");
    if (!(timeout_s > 0.0) || !std::isfinite(timeout_s)) throw UsageError("timeout must be > 0");
    if (count == 0 && !(duration_s > 0.0)) throw UsageError("set a sample count or a positive duration");
    if (max_failures == 0) throw UsageError("max_failures must be >= 1");
}

std::size_t PollConfig::ticks() const {
    if (count > 0) return count;
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(duration_s / interval_s + 1e-9)));
}

std::unique_ptr<Transport> make_udp_transport(const std::string& host, std::uint16_t port) {
    return std::make_unique<UdpTransport>(host, port);
}

std::optional<CounterSample> sample_from_response(const Response& r, std::uint32_t if_index, std::string& reason) {
    CounterSample s;
    for (std::size_t v = 0; v < kInterfaceVars; ++v) {
        const auto oid = interface_oid(v, if_index);
        const auto& col = interface_columns()[v];
        const VarBind* found = nullptr;
        for (const auto& vb : r.varbinds) {
            if (vb.oid == oid) {
                found = &vb;
                break;
            }
        }
        if (!found) {
            reason = "response lacks " + std::string(col.name);
            return std::nullopt;
        }
        if (const auto* c = std::get_if<Counter32>(&found->value)) {
            s.values[v] = c->value;
        } else if (const auto* i = std::get_if<Integer>(&found->value); i && i->value >= 0) {
            s.values[v] = static_cast<std::uint32_t>(i->value);
        } else if (std::holds_alternative<Exception>(found->value) && col.optional) {
            s.values[v] = 0;
            s.substituted.set(v);
        } else {
            reason = std::string(col.name) + " has no usable counter value";
            return std::nullopt;
        }
    }
    return s;
}

PollStats poll(const PollConfig& cfg, Transport& transport, const PollCallbacks& callbacks) {
    cfg.validate();
    std::vector<Oid> oids;
    for (std::size_t v = 0; v < kInterfaceVars; ++v) oids.push_back(interface_oid(v, cfg.if_index));

    PollStats stats;
    auto gap = [&](std::size_t tick, std::string reason) {
        PollGap g{tick, std::move(reason)};
        if (callbacks.on_gap) callbacks.on_gap(g);
        stats.gaps.push_back(std::move(g));
    };

    const auto interval = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(cfg.interval_s));
    const auto timeout = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(cfg.timeout_s));
    const auto start = std::chrono::steady_clock::now();
    std::int32_t request_id = cfg.first_request_id;
    std::size_t consecutive_failures = 0;
    const std::size_t ticks = cfg.ticks();

    for (std::size_t tick = 0; tick < ticks; ++tick) {
        std::this_thread::sleep_until(start + interval * static_cast<long>(tick));

        std::optional<Response> response;
        std::string failure;
        for (std::size_t attempt = 0; attempt <= cfg.retries && !response && failure.empty(); ++attempt) {
            const std::int32_t id = request_id++;
            transport.send(encode_get(oids, cfg.community, id));
            const auto deadline = std::chrono::steady_clock::now() + timeout;
            while (auto datagram = transport.receive(deadline)) {
                Message m;
                try {
                    m = decode(*datagram);
                } catch (const DataError&) {
                    continue;
                }
                if (m.pdu.request_id != id || m.pdu.type != PduType::Response) continue;
                if (m.version != kVersion2c) {
                    failure = "agent answered with SNMP version " + std::to_string(m.version);
                } else if (m.pdu.error_status != 0) {
                    failure = StatusError(m.pdu.error_status, m.pdu.error_index).what();
                } else {
                    response = Response{m.pdu.request_id, std::move(m.pdu.varbinds)};
                }
                break;
            }
        }

        if (!failure.empty()) {
            consecutive_failures = 0;
            gap(tick, failure);
            continue;
        }
        if (!response) {
            gap(tick, "timeout after " + std::to_string(cfg.retries + 1) + " attempt(s)");
            if (++consecutive_failures >= cfg.max_failures) {
                throw TransportError("no response from " + cfg.host + ":" + std::to_string(cfg.port) + " after " +
                                     std::to_string(consecutive_failures) + " consecutive ticks");
            }
            continue;
        }
        consecutive_failures = 0;
        std::string reason;
        auto sample = sample_from_response(*response, cfg.if_index, reason);
        if (!sample) {
            gap(tick, "sample discarded: " + reason);
            continue;
        }
        sample->timestamp_ms = steady_ms();
        ++stats.samples;
        if (callbacks.on_sample) callbacks.on_sample(*sample);
    }
    return stats;
}

FeatureTable deltas(std::span<const CounterSample> samples) {
    FeatureTable t{interface_schema(), {}};
    for (std::size_t i = 1; i < samples.size(); ++i) {
        std::vector<double> row(kInterfaceVars);
        for (std::size_t v = 0; v < kInterfaceVars; ++v) {
            row[v] = static_cast<double>(counter_delta(samples[i - 1].values[v], samples[i].values[v]));
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

}  // namespace mibids::snmp
