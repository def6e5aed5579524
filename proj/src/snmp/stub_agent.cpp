#include "mibids/snmp/stub_agent.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

namespace mibids::snmp {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> fields(std::string_view line) {
    std::vector<std::string_view> out;
    while (true) {
        const auto comma = line.find(',');
        out.push_back(trim(line.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        line.remove_prefix(comma + 1);
    }
    return out;
}

}  // namespace

std::vector<FixtureRow> parse_fixture(std::string_view text) {
    std::vector<std::string_view> lines;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        auto line = trim(text.substr(0, nl));
        if (!line.empty()) lines.push_back(line);
        if (nl == std::string_view::npos) break;
        text.remove_prefix(nl + 1);
    }
    if (lines.empty()) throw DataError("fixture has no header");
    const auto header = fields(lines[0]);
    if (header.size() != kInterfaceVars) throw DataError("fixture header must list the 8 Interface variables");
    std::array<std::size_t, kInterfaceVars> column_of{};
    std::array<bool, kInterfaceVars> seen{};
    for (std::size_t j = 0; j < header.size(); ++j) {
        std::size_t v = 0;
        while (v < kInterfaceVars && interface_columns()[v].name != header[j]) ++v;
        if (v == kInterfaceVars) throw DataError("fixture header has unknown variable '" + std::string(header[j]) + "'");
        if (seen[v]) throw DataError("fixture header repeats '" + std::string(header[j]) + "'");
        seen[v] = true;
        column_of[j] = v;
    }
    std::vector<FixtureRow> rows;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto cells = fields(lines[i]);
        if (cells.size() != kInterfaceVars) {
            throw DataError("fixture row " + std::to_string(i) + " does not have 8 cells");
        }
        FixtureRow row{};
        for (std::size_t j = 0; j < cells.size(); ++j) {
            auto& cell = row[column_of[j]];
            if (cells[j] == "-") {
                cell.kind = FixtureCell::Kind::NoSuchInstance;
            } else if (cells[j] == "x") {
                cell.kind = FixtureCell::Kind::Omit;
            } else {
                auto [ptr, ec] = std::from_chars(cells[j].data(), cells[j].data() + cells[j].size(), cell.value);
                if (ec != std::errc{} || ptr != cells[j].data() + cells[j].size()) {
                    throw DataError("fixture row " + std::to_string(i) + ": bad counter '" + std::string(cells[j]) +
                                    "'");
                }
            }
        }
        rows.push_back(row);
    }
    return rows;
}

std::vector<FixtureRow> load_fixture(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open fixture '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_fixture(ss.str());
}

Message StubAgent::respond(const Message& request, const FixtureRow& row, std::uint32_t if_index) {
    Message reply;
    reply.version = request.version;
    reply.community = request.community;
    reply.pdu.type = PduType::Response;
    reply.pdu.request_id = request.pdu.request_id;
    for (const auto& vb : request.pdu.varbinds) {
        std::size_t v = 0;
        while (v < kInterfaceVars && !(interface_oid(v, if_index) == vb.oid)) ++v;
        if (v == kInterfaceVars) {
            reply.pdu.varbinds.push_back({vb.oid, Exception{ExceptionKind::NoSuchObject}});
            continue;
        }
        const auto& cell = row[v];
        switch (cell.kind) {
            case FixtureCell::Kind::Value:
                reply.pdu.varbinds.push_back({vb.oid, Counter32{cell.value}});
                break;
            case FixtureCell::Kind::NoSuchInstance:
                reply.pdu.varbinds.push_back({vb.oid, Exception{ExceptionKind::NoSuchInstance}});
                break;
            case FixtureCell::Kind::Omit:
                break;
        }
    }
    return reply;
}

StubAgent::StubAgent(std::vector<FixtureRow> rows, Options options)
    : rows_(std::move(rows)), options_(std::move(options)) {
    fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
    if (fd_ < 0) throw TransportError(std::string("stub agent socket: ") + std::strerror(errno));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(options_.port);
    if (::inet_pton(AF_INET, options_.bind_address.c_str(), &addr.sin_addr) != 1) {
        ::close(fd_);
        throw UsageError("stub agent bind address must be a dotted IPv4 address");
    }
    if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
        const std::string err = std::strerror(errno);
        ::close(fd_);
        throw TransportError("stub agent bind: " + err);
    }
    socklen_t len = sizeof addr;
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
    thread_ = std::thread([this] { serve(); });
}

StubAgent::~StubAgent() {
    stop_ = true;
    if (thread_.joinable()) thread_.join();
    if (fd_ >= 0) ::close(fd_);
}

void StubAgent::serve() {
    std::vector<std::uint8_t> buf(65536);
    while (!stop_) {
        pollfd pfd{fd_, POLLIN, 0};
        if (::poll(&pfd, 1, 20) <= 0) continue;
        sockaddr_storage peer{};
        socklen_t peer_len = sizeof peer;
        const auto n = ::recvfrom(fd_, buf.data(), buf.size(), 0, reinterpret_cast<sockaddr*>(&peer), &peer_len);
        if (n <= 0) continue;
        const std::size_t ordinal = ++requests_;
        if (options_.drop_requests.count(ordinal)) continue;
        Message request;
        try {
            request = decode(std::span<const std::uint8_t>(buf.data(), static_cast<std::size_t>(n)));
        } catch (const DataError&) {
            continue;
        }
        if (request.pdu.type != PduType::GetRequest || request.community != options_.community) continue;
        const std::size_t row = served_.load();
        if (row >= rows_.size()) continue;
        ++served_;
        const auto reply = encode(respond(request, rows_[row], options_.if_index));
        ::sendto(fd_, reply.data(), reply.size(), 0, reinterpret_cast<sockaddr*>(&peer), peer_len);
    }
}

}  // namespace mibids::snmp
