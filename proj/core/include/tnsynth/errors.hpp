#pragma once

#include <stdexcept>
#include <string>

namespace tnsynth {

// Malformed external input (tensor files, reports, program text).
struct FileFormatError : std::runtime_error {
    explicit FileFormatError(const std::string& what) : std::runtime_error(what) {}
};

// Valid input that the tool does not handle (e.g. order-2 tensors).
struct UnsupportedError : std::runtime_error {
    explicit UnsupportedError(const std::string& what) : std::runtime_error(what) {}
};

// A broken internal invariant. Reaching this is a bug, not a user error.
struct InternalError : std::logic_error {
    explicit InternalError(const std::string& what) : std::logic_error(what) {}
};

// Operation applied to a network in a state that does not admit it.
struct InvalidStateError : std::logic_error {
    explicit InvalidStateError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace tnsynth
