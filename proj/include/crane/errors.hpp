#pragma once

#include <stdexcept>
#include <string>

namespace crane {

/// Raised when an instance cannot be migrated as requested (missing source
/// replicas, availability floor impossible, insufficient disk, ...).
class InfeasibleError : public std::runtime_error {
public:
    explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised on malformed input files or API misuse (dimension mismatch, bad ids).
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace crane
