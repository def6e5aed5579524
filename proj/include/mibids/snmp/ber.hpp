#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mibids/error.hpp"

namespace mibids::snmp {

/// Malformed or truncated BER; `offset` is the byte position where decoding failed.
class BerError : public DataError {
public:
    BerError(std::size_t offset, const std::string& what)
        : DataError("BER error at byte " + std::to_string(offset) + ": " + what), offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Agent answered with a non-zero error-status.
class StatusError : public DataError {
public:
    StatusError(std::int32_t status, std::int32_t index);
    std::int32_t status() const noexcept { return status_; }
    std::int32_t index() const noexcept { return index_; }

private:
    std::int32_t status_;
    std::int32_t index_;
};

/// RFC 3416 error-status name, e.g. 2 -> "noSuchName".
std::string_view error_status_name(std::int32_t status);

class Oid {
public:
    Oid() = default;
    /// Throws UsageError when the arcs violate the first/second arc rules.
    explicit Oid(std::vector<std::uint32_t> arcs);
    /// Accepts "1.3.6.1" or ".1.3.6.1".
    static Oid parse(std::string_view dotted);

    const std::vector<std::uint32_t>& arcs() const noexcept { return arcs_; }
    std::string str() const;
    Oid child(std::uint32_t arc) const;

    bool operator==(const Oid&) const = default;
    auto operator<=>(const Oid&) const = default;

private:
    std::vector<std::uint32_t> arcs_;
};

struct Null {
    bool operator==(const Null&) const = default;
};
struct Integer {
    std::int32_t value = 0;
    bool operator==(const Integer&) const = default;
};
struct Counter32 {
    std::uint32_t value = 0;
    bool operator==(const Counter32&) const = default;
};
struct OctetString {
    std::string bytes;
    bool operator==(const OctetString&) const = default;
};

/// v2c varbind exceptions (context-specific tags 0x80..0x82).
enum class ExceptionKind : std::uint8_t { NoSuchObject = 0x80, NoSuchInstance = 0x81, EndOfMibView = 0x82 };
struct Exception {
    ExceptionKind kind = ExceptionKind::NoSuchObject;
    bool operator==(const Exception&) const = default;
};

using Value = std::variant<Null, Integer, Counter32, OctetString, Exception>;

struct VarBind {
    Oid oid;
    Value value;
    bool operator==(const VarBind&) const = default;
};

enum class PduType : std::uint8_t { GetRequest = 0xA0, GetNextRequest = 0xA1, Response = 0xA2, SetRequest = 0xA3 };

struct Pdu {
    PduType type = PduType::GetRequest;
    std::int32_t request_id = 0;
    std::int32_t error_status = 0;
    std::int32_t error_index = 0;
    std::vector<VarBind> varbinds;
    bool operator==(const Pdu&) const = default;
};

inline constexpr std::int32_t kVersion2c = 1;

struct Message {
    std::int32_t version = kVersion2c;
    std::string community;
    Pdu pdu;
    bool operator==(const Message&) const = default;
};

using Bytes = std::vector<std::uint8_t>;

/// Definite-length BER for a whole SNMP message.
Bytes encode(const Message& m);
Message decode(std::span<const std::uint8_t> bytes);

/// Content octets of an OID (without tag and length).
Bytes encode_oid_content(const Oid& oid);

/// v2c GetRequest with Null values for each OID.
Bytes encode_get(const std::vector<Oid>& oids, std::string_view community, std::int32_t request_id);

struct Response {
    std::int32_t request_id = 0;
    std::vector<VarBind> varbinds;
};

/// Parses a v2c GetResponse. Throws BerError on malformed input, DataError on a
/// wrong version or PDU type, StatusError on a non-zero error-status. The
/// community is not checked.
Response decode_response(std::span<const std::uint8_t> bytes);

}  // namespace mibids::snmp
