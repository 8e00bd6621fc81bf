// errors.hpp: Exception types shared across the library

#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace qsid {

// Raised when a computation leaves its numerically valid regime (an expm that
// does not converge, a state that stops being a density matrix, ...).
class NumericalFailure : public std::runtime_error {
public:
    explicit NumericalFailure(const std::string& what,
                              std::optional<std::size_t> step = std::nullopt)
        : std::runtime_error(what), step_(step) {}

    // Sampling step or iteration at which the failure was detected, if any.
    std::optional<std::size_t> step() const noexcept { return step_; }

private:
    std::optional<std::size_t> step_;
};

// Requested operation is valid but not available in the current regime
// (e.g. exact Frechet gradients above the dense threshold).
class Unsupported : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace qsid
