#pragma once

#include <stdexcept>
#include <string>

namespace scmi {

/// Base class for all domain errors raised by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Duty/discontinuous-interval combination makes the conversion ratio degenerate (D + D0 >= 1).
class DegenerateDuty : public Error {
public:
    using Error::Error;
};

/// The requested operating point cannot be reached in discontinuous conduction.
/// Carries the unclamped discontinuous-interval fraction for diagnostics.
class CcmViolation : public Error {
public:
    CcmViolation(const std::string& msg, double unclamped_d0)
        : Error(msg), unclamped_d0_(unclamped_d0) {}
    double unclamped_d0() const noexcept { return unclamped_d0_; }

private:
    double unclamped_d0_;
};

/// Power demand requires a peak duty ratio >= 1.
class DutyOverflow : public Error {
public:
    using Error::Error;
};

/// Gate command and discrete mode disagree (S1 on requires Mode I).
class InconsistentMode : public Error {
public:
    using Error::Error;
};

/// Measurement window is not an integer number of half line cycles.
class WindowError : public Error {
public:
    using Error::Error;
};

/// Value outside the allowed band (e.g. filter cutoff frequency).
class RangeError : public Error {
public:
    using Error::Error;
};

/// Loss accounting does not close against terminal power flow.
class EnergyMismatch : public Error {
public:
    using Error::Error;
};

/// A simulated state variable exceeded the divergence guard.
class NumericalDivergence : public Error {
public:
    using Error::Error;
};

/// Invalid configuration value or unparsable config input.
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace scmi
