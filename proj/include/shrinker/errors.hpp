#pragma once

#include <stdexcept>
#include <string>

namespace shrinker {

// Error taxonomy; the CLI maps kinds onto exit codes.
enum class ErrorKind {
    Parameter,        // invalid argument / configuration
    Domain,           // point outside a model chart
    Lookup,           // tabulated value requested off its grid
    Refusal,          // operation rejected (e.g. non-confining potential on a truncated grid)
    Resource,         // size caps exceeded
    Capability,       // geometry not supported by the operation
    Convergence,      // iterative solver failed to certify
    Constraint,       // functional precondition violated (normalization etc.)
    IndefiniteWeight, // non-positive mass weight
    Parse,            // expression syntax
    Io,               // file read/write
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool ok, ErrorKind kind, const std::string& what) {
    if (!ok) fail(kind, what);
}

} // namespace shrinker
