#pragma once

#include <stdexcept>
#include <string>

namespace cosetsle {

/// Raised when an iterative or quadrature kernel fails to converge.
/// Carries the last two estimates so callers can report diagnostics.
class numeric_error : public std::runtime_error {
public:
    numeric_error(const std::string& what, double coarse = 0.0, double fine = 0.0)
        : std::runtime_error(what), coarse_estimate(coarse), fine_estimate(fine) {}

    double coarse_estimate;
    double fine_estimate;
};

/// Raised by slit_step when proposed driving positions cross; the SDE
/// stepper catches it and retries with a halved time step.
class step_rejected : public std::runtime_error {
public:
    explicit step_rejected(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cosetsle
