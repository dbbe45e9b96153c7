#pragma once

#include <stdexcept>
#include <string>

namespace edgedeploy {

/// Malformed or inconsistent input: config documents, trace/LUT files, or
/// parameters that violate a type invariant.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A well-formed request that cannot be carried out (e.g. a search space
/// larger than the enumeration cap).
class SimulationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Training produced a non-finite loss.
class DivergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace edgedeploy
