#pragma once

#include <stdexcept>
#include <string>

namespace certilasso {

// Caller broke a documented precondition (wrong dims, non-symmetric input, ...).
struct ContractError : std::invalid_argument {
    explicit ContractError(const std::string& what) : std::invalid_argument(what) {}
};

// A linear system turned out singular. Distinct from ContractError: the input
// was admissible, the computation just cannot proceed.
struct SolveError : std::runtime_error {
    explicit SolveError(const std::string& what) : std::runtime_error(what) {}
};

// Exhaustive enumeration found no KKT-certifiable candidate. Surfaced, never
// silently approximated.
struct DegenerateInstanceError : std::runtime_error {
    explicit DegenerateInstanceError(const std::string& what) : std::runtime_error(what) {}
};

// The certified path needed full enumeration but N exceeds the enumeration cap.
struct InstanceTooLargeError : std::runtime_error {
    explicit InstanceTooLargeError(const std::string& what) : std::runtime_error(what) {}
};

// Input file / string could not be parsed.
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace certilasso
