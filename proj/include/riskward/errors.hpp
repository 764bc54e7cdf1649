#pragma once

#include <stdexcept>
#include <string>

namespace riskward {

/// Input file could not be read or does not match the expected JSON schema.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// Input parsed but violates a semantic invariant (probabilities, grids, specs).
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Policy enumeration would exceed the configured cap.
class EnumerationCapError : public std::runtime_error {
public:
    explicit EnumerationCapError(const std::string& what) : std::runtime_error(what) {}
};

/// Policy rejected: wrong node coverage, non-grid value, or infeasible decision.
class PolicyError : public std::runtime_error {
public:
    explicit PolicyError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace riskward
