#pragma once

#include <stdexcept>
#include <string>

namespace pathroute {

// Bad user input: malformed configs, schema violations, contract breaches.
// The CLI maps this to exit code 2.
struct InvalidInput : std::runtime_error {
    explicit InvalidInput(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem trouble: unreadable/unwritable files. CLI exit code 3.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pathroute
