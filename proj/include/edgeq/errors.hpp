#pragma once

#include <stdexcept>
#include <string>

namespace edgeq {

// Error hierarchy used across the library. Everything derives from
// std::runtime_error so callers can catch broadly or by specific type.

struct InvalidActionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonFiniteLossError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidAcceptanceRatioError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InsufficientSamplesError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad checkpoint/serialized data (magic, version, truncation).
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace edgeq
