#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace anticent {

using NodeId = std::uint32_t;
using Token = std::int64_t;

constexpr NodeId kInvalidNode = static_cast<NodeId>(-1);

// Bad or inconsistent input data (unknown node, malformed file, ...).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Caller violated an API or configuration contract.
struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// An algorithm failed to produce a result (e.g. no convergence).
struct InternalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace anticent
