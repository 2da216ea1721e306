#pragma once

#include <stdexcept>
#include <string>

namespace garling {

// Error taxonomy shared by the library and the CLI exit-code mapping.

// Malformed input (bad JSON, unknown family, negative weight, ...).
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& m) : std::runtime_error(m) {}
};

// A documented precondition of an operation was violated by the caller.
struct PreconditionError : std::runtime_error {
    explicit PreconditionError(const std::string& m) : std::runtime_error(m) {}
};

// A bounded search exhausted its cap without finding an admissible index.
struct CapExceededError : std::runtime_error {
    explicit CapExceededError(const std::string& m) : std::runtime_error(m) {}
};

// A verification pass found a certificate or bound violated.
struct VerificationError : std::runtime_error {
    explicit VerificationError(const std::string& m) : std::runtime_error(m) {}
};

// Input shapes do not match (mixed-norm block structure, spread positions, ...).
struct ShapeError : std::runtime_error {
    explicit ShapeError(const std::string& m) : std::runtime_error(m) {}
};

}  // namespace garling
