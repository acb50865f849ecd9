#pragma once

#include <stdexcept>
#include <string>

namespace pathgap {

/// Bad or inconsistent configuration (missing callback, unknown manifold kind, ...).
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// Input data contradicts a declared contract, e.g. a Ricci path outside its declared bounds.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// The requested operation has no meaning for this model (e.g. curvature tensor in synthetic mode).
class UnsupportedError : public std::logic_error {
public:
    explicit UnsupportedError(const std::string& what) : std::logic_error(what) {}
};

/// Monte-Carlo sample that cannot produce the requested estimate.
class DegenerateSampleError : public std::runtime_error {
public:
    explicit DegenerateSampleError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pathgap
