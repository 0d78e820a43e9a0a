#pragma once

#include <stdexcept>
#include <string>

namespace neardiag {

/// Violated input contract: bad dimensions, invalid values, out-of-range queries.
class invalid_input : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical procedure failed to reach its tolerance. Carries the residual
/// that was actually achieved so callers can report it.
class numerical_error : public std::runtime_error {
public:
    numerical_error(const std::string& what, double residual)
        : std::runtime_error(what + " (residual " + std::to_string(residual) + ")"),
          residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

}  // namespace neardiag
