#pragma once

#include <stdexcept>
#include <string>

namespace qic {

// Error taxonomy mirrors the CLI exit codes: input errors exit 2,
// budget errors exit 3, property failures exit 1.
struct input_error : std::runtime_error {
    explicit input_error(const std::string& what) : std::runtime_error(what) {}
};

struct budget_error : std::runtime_error {
    explicit budget_error(const std::string& what) : std::runtime_error(what) {}
};

struct property_error : std::runtime_error {
    explicit property_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace qic
