#pragma once

#include <stdexcept>
#include <string>

namespace mibids {

/// Bad input data: malformed CSV, schema mismatch, invalid scenario or model file.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid arguments or configuration supplied by the caller.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Network failures while talking to an SNMP agent.
class TransportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace mibids
