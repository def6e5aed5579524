#include <chrono>
#include <deque>
#include <functional>

#include "doctest.h"
#include "mibids/error.hpp"
#include "mibids/snmp/collector.hpp"
#include "mibids/snmp/stub_agent.hpp"
#include "support.hpp"

using namespace mibids;
using namespace mibids::snmp;

namespace {

// In-memory transport; `handler` turns each request into zero or more replies.
class FakeTransport : public Transport {
public:
    std::function<std::vector<Bytes>(const Message&)> handler;
    std::size_t sent = 0;

    void send(std::span<const std::uint8_t> datagram) override {
        ++sent;
        for (auto& r : handler(decode(datagram))) queue_.push_back(std::move(r));
    }
    std::optional<Bytes> receive(std::chrono::steady_clock::time_point) override {
        if (queue_.empty()) return std::nullopt;
        Bytes b = std::move(queue_.front());
        queue_.pop_front();
        return b;
    }

private:
    std::deque<Bytes> queue_;
};

FixtureRow row_of(std::uint32_t base) {
    FixtureRow r;
    for (std::size_t v = 0; v < kInterfaceVars; ++v) r[v] = FixtureCell{FixtureCell::Kind::Value, base + static_cast<std::uint32_t>(v)};
    return r;
}

PollConfig fast_config(std::size_t count) {
    PollConfig c;
    c.interval_s = 0.001;
    c.timeout_s = 0.01;
    c.count = count;
    return c;
}

CounterSample sample_of(std::initializer_list<std::uint32_t> v) {
    CounterSample s;
    std::copy(v.begin(), v.end(), s.values.begin());
    return s;
}

}  // namespace

TEST_CASE("counter deltas") {
    static_assert(counter_delta(10, 15) == 5);
    static_assert(counter_delta(4294967290u, 5) == 11);
    CHECK(counter_delta(7, 7) == 0);
    CHECK(counter_delta(1, 0) == 4294967295u);
}

TEST_CASE("n samples give n - 1 delta rows") {
    std::vector<CounterSample> s;
    for (std::uint32_t i = 0; i < 12; ++i) s.push_back(sample_of({i * 10, i, i, i, i, i, i, i}));
    const auto t = deltas(s);
    CHECK(t.schema == interface_schema());
    REQUIRE(t.rows.size() == 11);
    for (const auto& r : t.rows) CHECK(r[0] == 10.0);
    CHECK(deltas(std::span<const CounterSample>(s.data(), 1)).rows.empty());
    CHECK(deltas({}).rows.empty());
}

TEST_CASE("interface OIDs") {
    CHECK(interface_oid(0, 2).str() == "1.3.6.1.2.1.2.2.1.10.2");
    CHECK(interface_oid(2, 1).str() == "1.3.6.1.2.1.2.2.1.19.1");
    CHECK(interface_oid(7, 3).str() == "1.3.6.1.2.1.2.2.1.18.3");
}

TEST_CASE("responses become samples") {
    Response r;
    for (std::size_t v = 0; v < kInterfaceVars; ++v) r.varbinds.push_back({interface_oid(v, 1), Counter32{100u + static_cast<std::uint32_t>(v)}});
    std::string reason;
    auto s = sample_from_response(r, 1, reason);
    REQUIRE(s);
    CHECK(s->values[3] == 103);
    CHECK(s->substituted.none());

    Response integer = r;
    integer.varbinds[1].value = Integer{55};
    REQUIRE(sample_from_response(integer, 1, reason));
    CHECK(sample_from_response(integer, 1, reason)->values[1] == 55);

    Response legacy = r;
    legacy.varbinds[4].value = Exception{ExceptionKind::NoSuchInstance};
    legacy.varbinds[7].value = Exception{ExceptionKind::NoSuchObject};
    s = sample_from_response(legacy, 1, reason);
    REQUIRE(s);
    CHECK(s->values[4] == 0);
    CHECK(s->substituted.test(4));
    CHECK(s->substituted.test(7));
    CHECK(s->substituted.count() == 2);

    Response missing = r;
    missing.varbinds.erase(missing.varbinds.begin() + 2);
    CHECK(!sample_from_response(missing, 1, reason));
    CHECK(reason.find("ifOutDiscards") != std::string::npos);

    Response required_absent = r;
    required_absent.varbinds[0].value = Exception{ExceptionKind::NoSuchInstance};
    CHECK(!sample_from_response(required_absent, 1, reason));

    CHECK(!sample_from_response(r, 2, reason));
}

TEST_CASE("poll delivers one sample per answered tick") {
    FakeTransport t;
    const FixtureRow row = row_of(1000);
    t.handler = [&](const Message& req) { return std::vector<Bytes>{encode(StubAgent::respond(req, row, 1))}; };
    std::vector<CounterSample> got;
    const auto stats = poll(fast_config(4), t, {[&](const CounterSample& s) { got.push_back(s); }, {}});
    CHECK(stats.samples == 4);
    CHECK(stats.gaps.empty());
    REQUIRE(got.size() == 4);
    CHECK(got[0].values[0] == 1000);
    CHECK(got[0].values[7] == 1007);
    CHECK(t.sent == 4);
}

TEST_CASE("poll discards replies with a foreign request id") {
    FakeTransport t;
    const FixtureRow row = row_of(5);
    t.handler = [&](const Message& req) {
        Message stale = StubAgent::respond(req, row_of(999), 1);
        stale.pdu.request_id = req.pdu.request_id - 1;
        return std::vector<Bytes>{encode(stale), Bytes{0x30, 0x01}, encode(StubAgent::respond(req, row, 1))};
    };
    std::vector<CounterSample> got;
    poll(fast_config(2), t, {[&](const CounterSample& s) { got.push_back(s); }, {}});
    REQUIRE(got.size() == 2);
    CHECK(got[1].values[0] == 5);
}

TEST_CASE("seven of eight varbinds is a gap") {
    FakeTransport t;
    FixtureRow row = row_of(1);
    row[6] = FixtureCell{FixtureCell::Kind::Omit, 0};
    t.handler = [&](const Message& req) { return std::vector<Bytes>{encode(StubAgent::respond(req, row, 1))}; };
    std::vector<PollGap> gaps;
    const auto stats = poll(fast_config(3), t, {{}, [&](const PollGap& g) { gaps.push_back(g); }});
    CHECK(stats.samples == 0);
    REQUIRE(gaps.size() == 3);
    CHECK(gaps[0].reason.find("ifOutUcastPkts") != std::string::npos);
}

TEST_CASE("timeouts are retried, then skipped, then fatal") {
    FakeTransport t;
    std::size_t calls = 0;
    t.handler = [&](const Message& req) {
        ++calls;
        // Answer only the second attempt of the first tick.
        if (calls == 2) return std::vector<Bytes>{encode(StubAgent::respond(req, row_of(1), 1))};
        return std::vector<Bytes>{};
    };
    PollConfig c = fast_config(4);
    c.retries = 1;
    c.max_failures = 3;
    PollStats stats;
    CHECK_THROWS_AS(stats = poll(c, t, {}), TransportError);
    CHECK(t.sent == 2 + 3 * 2);

    FakeTransport quiet;
    quiet.handler = [](const Message&) { return std::vector<Bytes>{}; };
    c.max_failures = 10;
    stats = poll(c, quiet, {});
    CHECK(stats.samples == 0);
    CHECK(stats.gaps.size() == 4);
}

TEST_CASE("error-status replies are gaps, not transport failures") {
    FakeTransport t;
    t.handler = [&](const Message& req) {
        Message m = StubAgent::respond(req, row_of(1), 1);
        m.pdu.error_status = 5;
        return std::vector<Bytes>{encode(m)};
    };
    PollConfig c = fast_config(6);
    c.max_failures = 2;
    const auto stats = poll(c, t, {});
    CHECK(stats.gaps.size() == 6);
    CHECK(stats.gaps[0].reason.find("genErr") != std::string::npos);
}

TEST_CASE("scheduling arithmetic") {
    PollConfig c;
    c.interval_s = 5;
    c.count = 12;
    CHECK(c.ticks() == 12);
    c.count = 0;
    c.duration_s = 60;
    CHECK(c.ticks() == 12);
    c.duration_s = 0;
    CHECK_THROWS_AS(c.validate(), UsageError);

    FakeTransport t;
    t.handler = [&](const Message& req) { return std::vector<Bytes>{encode(StubAgent::respond(req, row_of(1), 1))}; };
    PollConfig timed = fast_config(5);
    timed.interval_s = 0.04;
    const auto start = std::chrono::steady_clock::now();
    const auto stats = poll(timed, t, {});
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    CHECK(stats.samples <= 5);
    CHECK(elapsed >= 0.16);
    CHECK(elapsed < 1.0);
}

TEST_CASE("fixture parsing") {
    const auto rows = parse_fixture(
        "ifOutOctets,ifInOctets,ifOutDiscards,ifInUcastPkts,ifInNUcastPkts,ifInDiscards,ifOutUcastPkts,ifOutNUcastPkts\n"
        "2,1,3,4,-,6,7,x\n");
    REQUIRE(rows.size() == 1);
    CHECK(rows[0][0] == FixtureCell{FixtureCell::Kind::Value, 1});
    CHECK(rows[0][1] == FixtureCell{FixtureCell::Kind::Value, 2});
    CHECK(rows[0][4].kind == FixtureCell::Kind::NoSuchInstance);
    CHECK(rows[0][7].kind == FixtureCell::Kind::Omit);
    CHECK_THROWS(parse_fixture("ifInOctets\n1\n"));
    CHECK_THROWS(parse_fixture(
        "ifOutOctets,ifInOctets,ifOutDiscards,ifInUcastPkts,ifInNUcastPkts,ifInDiscards,ifOutUcastPkts,ifOutNUcastPkts\n"
        "2,1,3,4,5,6,7,99999999999\n"));
}

TEST_CASE("loopback stub agent reproduces the fixture deltas") {
    auto rows = load_fixture(testsupport::fixture("stub_agent.csv"));
    const std::size_t n = rows.size();
    StubAgent agent(rows, {});
    auto transport = make_udp_transport("127.0.0.1", agent.port());
    PollConfig c = fast_config(n);
    c.timeout_s = 0.5;
    std::vector<CounterSample> samples;
    const auto stats = poll(c, *transport, {[&](const CounterSample& s) { samples.push_back(s); }, {}});
    CHECK(agent.rows_served() == n);
    CHECK(stats.gaps.size() == 1);
    REQUIRE(samples.size() == n - 1);
    CHECK(samples[0].values[0] == 4294960000u);
    CHECK(samples[0].substituted.test(7));
    CHECK(format_unlabeled_csv(deltas(samples)) == testsupport::read_file(testsupport::fixture("stub_agent_deltas.csv")));
}

TEST_CASE("stub agent loss is covered by retries") {
    auto rows = load_fixture(testsupport::fixture("stub_agent.csv"));
    StubAgent::Options o;
    o.drop_requests = {2, 3};
    StubAgent agent(rows, o);
    auto transport = make_udp_transport("127.0.0.1", agent.port());
    PollConfig c = fast_config(rows.size());
    c.timeout_s = 0.1;
    c.retries = 2;
    std::vector<CounterSample> samples;
    poll(c, *transport, {[&](const CounterSample& s) { samples.push_back(s); }, {}});
    CHECK(agent.requests_seen() == rows.size() + 2);
    CHECK(format_unlabeled_csv(deltas(samples)) == testsupport::read_file(testsupport::fixture("stub_agent_deltas.csv")));
}

TEST_CASE("stub agent ignores a foreign community") {
    auto rows = load_fixture(testsupport::fixture("stub_agent.csv"));
    StubAgent agent(rows, {});
    auto transport = make_udp_transport("127.0.0.1", agent.port());
    PollConfig c = fast_config(3);
    c.community = "private";
    c.retries = 0;
    c.max_failures = 2;
    CHECK_THROWS_AS(poll(c, *transport, {}), TransportError);
    CHECK(agent.rows_served() == 0);
}
