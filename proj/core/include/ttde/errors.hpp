#pragma once

#include <stdexcept>
#include <string>

namespace ttde {

// Invalid parameters, malformed files, shape mismatches. CLI exit code 2.
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure at runtime (divergence, singular inputs). CLI exit code 3.
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ttde
