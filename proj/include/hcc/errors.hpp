#pragma once

#include <stdexcept>
#include <string>

namespace hcc {

// Raised when an iterative or quadrature routine cannot reach its target
// accuracy, or a decode system turns out singular.
struct numerical_error : std::runtime_error {
    explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

// Fewer results than the layer's code dimension.
struct insufficient_results : std::runtime_error {
    explicit insufficient_results(const std::string& what) : std::runtime_error(what) {}
};

// assemble() called before every layer was decoded.
struct incomplete_job : std::runtime_error {
    explicit incomplete_job(const std::string& what) : std::runtime_error(what) {}
};

// A layer could not gather enough results before the configured deadline.
struct harness_timeout : std::runtime_error {
    explicit harness_timeout(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace hcc
