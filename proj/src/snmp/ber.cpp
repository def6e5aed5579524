#include "mibids/snmp/ber.hpp"

#include <charconv>
#include <cstdio>
#include <type_traits>

namespace mibids::snmp {

namespace {

constexpr std::uint8_t kTagInteger = 0x02;
constexpr std::uint8_t kTagOctetString = 0x04;
constexpr std::uint8_t kTagNull = 0x05;
constexpr std::uint8_t kTagOid = 0x06;
constexpr std::uint8_t kTagSequence = 0x30;
constexpr std::uint8_t kTagCounter32 = 0x41;

void put_length(Bytes& out, std::size_t len) {
    if (len < 0x80) {
        out.push_back(static_cast<std::uint8_t>(len));
        return;
    }
    std::uint8_t buf[8];
    int n = 0;
    while (len > 0) {
        buf[n++] = static_cast<std::uint8_t>(len & 0xFF);
        len >>= 8;
    }
    out.push_back(static_cast<std::uint8_t>(0x80 | n));
    while (n > 0) out.push_back(buf[--n]);
}

void put_tlv(Bytes& out, std::uint8_t tag, const Bytes& content) {
    out.push_back(tag);
    put_length(out, content.size());
    out.insert(out.end(), content.begin(), content.end());
}

/// Minimal two's-complement content octets.
Bytes integer_content(std::int64_t v) {
    Bytes b;
    for (int shift = 56; shift >= 0; shift -= 8) b.push_back(static_cast<std::uint8_t>((v >> shift) & 0xFF));
    std::size_t start = 0;
    while (start + 1 < b.size()) {
        const bool redundant = (b[start] == 0x00 && !(b[start + 1] & 0x80)) ||
                               (b[start] == 0xFF && (b[start + 1] & 0x80));
        if (!redundant) break;
        ++start;
    }
    return Bytes(b.begin() + static_cast<std::ptrdiff_t>(start), b.end());
}

void put_base128(Bytes& out, std::uint64_t v) {
    std::uint8_t buf[10];
    int n = 0;
    do {
        buf[n++] = static_cast<std::uint8_t>(v & 0x7F);
        v >>= 7;
    } while (v > 0);
    while (n > 1) out.push_back(static_cast<std::uint8_t>(buf[--n] | 0x80));
    out.push_back(buf[0]);
}

Bytes encode_value(const Value& v) {
    Bytes out;
    std::visit(
        [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, Null>) {
                put_tlv(out, kTagNull, {});
            } else if constexpr (std::is_same_v<T, Integer>) {
                put_tlv(out, kTagInteger, integer_content(x.value));
            } else if constexpr (std::is_same_v<T, Counter32>) {
                put_tlv(out, kTagCounter32, integer_content(x.value));
            } else if constexpr (std::is_same_v<T, OctetString>) {
                put_tlv(out, kTagOctetString, Bytes(x.bytes.begin(), x.bytes.end()));
            } else {
                put_tlv(out, static_cast<std::uint8_t>(x.kind), {});
            }
        },
        v);
    return out;
}

class Reader {
public:
    Reader(std::span<const std::uint8_t> bytes, std::size_t base) : bytes_(bytes), base_(base) {}

    bool done() const { return pos_ == bytes_.size(); }
    std::size_t offset() const { return base_ + pos_; }

    struct Tlv {
        std::uint8_t tag;
        std::span<const std::uint8_t> content;
        std::size_t content_offset;
    };

    Tlv next() {
        const std::size_t tag_at = offset();
        if (pos_ >= bytes_.size()) throw BerError(tag_at, "truncated: expected a tag");
        const std::uint8_t tag = bytes_[pos_++];
        if ((tag & 0x1F) == 0x1F) throw BerError(tag_at, "multi-byte tags are not supported");
        if (pos_ >= bytes_.size()) throw BerError(offset(), "truncated: expected a length");
        std::size_t len = bytes_[pos_++];
        if (len == 0x80) throw BerError(offset() - 1, "indefinite length is not allowed");
        if (len & 0x80) {
            const std::size_t n = len & 0x7F;
            if (n > 4) throw BerError(offset() - 1, "length field too long");
            if (pos_ + n > bytes_.size()) throw BerError(offset(), "truncated length field");
            len = 0;
            for (std::size_t i = 0; i < n; ++i) len = (len << 8) | bytes_[pos_++];
        }
        if (len > bytes_.size() - pos_) {
            throw BerError(offset(), "truncated: length " + std::to_string(len) + " exceeds remaining " +
                                         std::to_string(bytes_.size() - pos_) + " bytes");
        }
        Tlv t{tag, bytes_.subspan(pos_, len), offset()};
        pos_ += len;
        return t;
    }

    Tlv expect(std::uint8_t tag, const char* what) {
        const std::size_t at = offset();
        auto t = next();
        if (t.tag != tag) {
            char buf[96];
            std::snprintf(buf, sizeof buf, "expected %s (tag 0x%02X), found tag 0x%02X", what, tag, t.tag);
            throw BerError(at, buf);
        }
        return t;
    }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t base_;
    std::size_t pos_ = 0;
};

std::int64_t decode_signed(const Reader::Tlv& t, std::size_t max_len) {
    if (t.content.empty()) throw BerError(t.content_offset, "empty INTEGER");
    if (t.content.size() > max_len) throw BerError(t.content_offset, "INTEGER too long");
    std::int64_t v = (t.content[0] & 0x80) ? -1 : 0;
    for (auto b : t.content) v = static_cast<std::int64_t>((static_cast<std::uint64_t>(v) << 8) | b);
    return v;
}

std::int32_t decode_int32(const Reader::Tlv& t) {
    const auto v = decode_signed(t, 4);
    return static_cast<std::int32_t>(v);
}

std::uint32_t decode_counter32(const Reader::Tlv& t) {
    const auto v = decode_signed(t, 5);
    if (v < 0 || v > 0xFFFFFFFFLL) throw BerError(t.content_offset, "Counter32 out of range");
    return static_cast<std::uint32_t>(v);
}

Oid decode_oid(const Reader::Tlv& t) {
    if (t.content.empty()) throw BerError(t.content_offset, "empty OBJECT IDENTIFIER");
    std::vector<std::uint64_t> subids;
    std::uint64_t acc = 0;
    bool pending = false;
    for (std::size_t i = 0; i < t.content.size(); ++i) {
        const auto b = t.content[i];
        if (!pending && b == 0x80) throw BerError(t.content_offset + i, "non-minimal OID sub-identifier");
        acc = (acc << 7) | (b & 0x7F);
        if (acc > 0xFFFFFFFFULL + 80) throw BerError(t.content_offset + i, "OID sub-identifier too large");
        pending = (b & 0x80) != 0;
        if (!pending) {
            subids.push_back(acc);
            acc = 0;
        }
    }
    if (pending) throw BerError(t.content_offset + t.content.size() - 1, "truncated OID sub-identifier");
    std::vector<std::uint32_t> arcs;
    const auto first = subids[0];
    if (first < 40) {
        arcs = {0, static_cast<std::uint32_t>(first)};
    } else if (first < 80) {
        arcs = {1, static_cast<std::uint32_t>(first - 40)};
    } else {
        if (first - 80 > 0xFFFFFFFFULL) throw BerError(t.content_offset, "OID second arc too large");
        arcs = {2, static_cast<std::uint32_t>(first - 80)};
    }
    for (std::size_t i = 1; i < subids.size(); ++i) {
        if (subids[i] > 0xFFFFFFFFULL) throw BerError(t.content_offset, "OID arc exceeds 32 bits");
        arcs.push_back(static_cast<std::uint32_t>(subids[i]));
    }
    return Oid(std::move(arcs));
}

Value decode_value(const Reader::Tlv& t) {
    switch (t.tag) {
        case kTagNull:
            if (!t.content.empty()) throw BerError(t.content_offset, "NULL with content");
            return Null{};
        case kTagInteger:
            return Integer{decode_int32(t)};
        case kTagCounter32:
            return Counter32{decode_counter32(t)};
        case kTagOctetString:
            return OctetString{std::string(t.content.begin(), t.content.end())};
        case 0x80:
        case 0x81:
        case 0x82:
            if (!t.content.empty()) throw BerError(t.content_offset, "exception value with content");
            return Exception{static_cast<ExceptionKind>(t.tag)};
        default: {
            char buf[64];
            std::snprintf(buf, sizeof buf, "unsupported value tag 0x%02X", t.tag);
            throw BerError(t.content_offset, buf);
        }
    }
}

}  // namespace

StatusError::StatusError(std::int32_t status, std::int32_t index)
    : DataError("agent returned error-status " + std::string(error_status_name(status)) + " (" +
                std::to_string(status) + ") at index " + std::to_string(index)),
      status_(status),
      index_(index) {}

std::string_view error_status_name(std::int32_t status) {
    static constexpr std::string_view names[] = {
        "noError",     "tooBig",           "noSuchName",          "badValue",     "readOnly",
        "genErr",      "noAccess",         "wrongType",           "wrongLength",  "wrongEncoding",
        "wrongValue",  "noCreation",       "inconsistentValue",   "resourceUnavailable",
        "commitFailed", "undoFailed",      "authorizationError",  "notWritable",  "inconsistentName"};
    if (status < 0 || static_cast<std::size_t>(status) >= std::size(names)) return "unknownError";
    return names[status];
}

Oid::Oid(std::vector<std::uint32_t> arcs) : arcs_(std::move(arcs)) {
    if (arcs_.size() < 2) throw UsageError("OID needs at least two arcs");
    if (arcs_[0] > 2) throw UsageError("OID first arc must be 0, 1 or 2");
    if (arcs_[0] < 2 && arcs_[1] > 39) throw UsageError("OID second arc must be <= 39 under arcs 0 and 1");
}

Oid Oid::parse(std::string_view dotted) {
    if (dotted.starts_with('.')) dotted.remove_prefix(1);
    std::vector<std::uint32_t> arcs;
    while (!dotted.empty()) {
        const auto dot = dotted.find('.');
        const auto part = dotted.substr(0, dot);
        std::uint32_t v = 0;
        auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
        if (part.empty() || ec != std::errc{} || ptr != part.data() + part.size()) {
            throw UsageError("invalid OID component '" + std::string(part) + "'");
        }
        arcs.push_back(v);
        if (dot == std::string_view::npos) break;
        dotted.remove_prefix(dot + 1);
        if (dotted.empty()) throw UsageError("OID ends with a dot");
    }
    return Oid(std::move(arcs));
}

std::string Oid::str() const {
    std::string s;
    for (std::size_t i = 0; i < arcs_.size(); ++i) {
        if (i) s += '.';
        s += std::to_string(arcs_[i]);
    }
    return s;
}

Oid Oid::child(std::uint32_t arc) const {
    auto arcs = arcs_;
    arcs.push_back(arc);
    return Oid(std::move(arcs));
}

Bytes encode_oid_content(const Oid& oid) {
    const auto& a = oid.arcs();
    if (a.size() < 2) throw UsageError("cannot encode an empty OID");
    Bytes out;
    put_base128(out, 40ULL * a[0] + a[1]);
    for (std::size_t i = 2; i < a.size(); ++i) put_base128(out, a[i]);
    return out;
}

Bytes encode(const Message& m) {
    Bytes varbinds;
    for (const auto& vb : m.pdu.varbinds) {
        Bytes body;
        put_tlv(body, kTagOid, encode_oid_content(vb.oid));
        const auto value = encode_value(vb.value);
        body.insert(body.end(), value.begin(), value.end());
        put_tlv(varbinds, kTagSequence, body);
    }
    Bytes pdu;
    put_tlv(pdu, kTagInteger, integer_content(m.pdu.request_id));
    put_tlv(pdu, kTagInteger, integer_content(m.pdu.error_status));
    put_tlv(pdu, kTagInteger, integer_content(m.pdu.error_index));
    put_tlv(pdu, kTagSequence, varbinds);

    Bytes msg;
    put_tlv(msg, kTagInteger, integer_content(m.version));
    put_tlv(msg, kTagOctetString, Bytes(m.community.begin(), m.community.end()));
    put_tlv(msg, static_cast<std::uint8_t>(m.pdu.type), pdu);

    Bytes out;
    put_tlv(out, kTagSequence, msg);
    return out;
}

Message decode(std::span<const std::uint8_t> bytes) {
    Reader top(bytes, 0);
    const auto outer = top.expect(kTagSequence, "message SEQUENCE");
    if (!top.done()) throw BerError(top.offset(), "trailing bytes after message");

    Reader msg(outer.content, outer.content_offset);
    Message m;
    m.version = decode_int32(msg.expect(kTagInteger, "version"));
    const auto community = msg.expect(kTagOctetString, "community");
    m.community.assign(community.content.begin(), community.content.end());

    const std::size_t pdu_at = msg.offset();
    const auto pdu = msg.next();
    if (pdu.tag < 0xA0 || pdu.tag > 0xA3) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "unsupported PDU tag 0x%02X", pdu.tag);
        throw BerError(pdu_at, buf);
    }
    if (!msg.done()) throw BerError(msg.offset(), "trailing bytes after PDU");
    m.pdu.type = static_cast<PduType>(pdu.tag);

    Reader body(pdu.content, pdu.content_offset);
    m.pdu.request_id = decode_int32(body.expect(kTagInteger, "request-id"));
    m.pdu.error_status = decode_int32(body.expect(kTagInteger, "error-status"));
    m.pdu.error_index = decode_int32(body.expect(kTagInteger, "error-index"));
    const auto list = body.expect(kTagSequence, "varbind list");
    if (!body.done()) throw BerError(body.offset(), "trailing bytes after varbind list");

    Reader vbs(list.content, list.content_offset);
    while (!vbs.done()) {
        const auto vb = vbs.expect(kTagSequence, "varbind");
        Reader item(vb.content, vb.content_offset);
        const auto oid_tlv = item.expect(kTagOid, "OBJECT IDENTIFIER");
        Oid oid;
        try {
            oid = decode_oid(oid_tlv);
        } catch (const UsageError& e) {
            throw BerError(oid_tlv.content_offset, e.what());
        }
        const auto value = decode_value(item.next());
        if (!item.done()) throw BerError(item.offset(), "trailing bytes in varbind");
        m.pdu.varbinds.push_back({std::move(oid), value});
    }
    return m;
}

Bytes encode_get(const std::vector<Oid>& oids, std::string_view community, std::int32_t request_id) {
    if (oids.empty()) throw UsageError("GetRequest needs at least one OID");
    Message m;
    m.community = std::string(community);
    m.pdu.type = PduType::GetRequest;
    m.pdu.request_id = request_id;
    for (const auto& oid : oids) {
        Oid checked(oid.arcs());
        m.pdu.varbinds.push_back({std::move(checked), Null{}});
    }
    return encode(m);
}

Response decode_response(std::span<const std::uint8_t> bytes) {
    const auto m = decode(bytes);
    if (m.version != kVersion2c) throw DataError("unsupported SNMP version " + std::to_string(m.version));
    if (m.pdu.type != PduType::Response) throw DataError("expected a Response PDU");
    if (m.pdu.error_status != 0) throw StatusError(m.pdu.error_status, m.pdu.error_index);
    return Response{m.pdu.request_id, m.pdu.varbinds};
}

}  // namespace mibids::snmp
