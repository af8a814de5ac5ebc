#pragma once

#include <stdexcept>
#include <string>

namespace ryd {

// Operand dimensions incompatible with the requested operation.
struct InvalidDimension : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A documented precondition was violated by the caller.
struct ContractViolation : std::logic_error {
    using std::logic_error::logic_error;
};

// A numerical routine failed to converge or produced an unusable result.
struct NumericalFailure : std::runtime_error {
    explicit NumericalFailure(const std::string& msg, long iterations = -1)
        : std::runtime_error(msg), iterations(iterations) {}
    long iterations;
};

// Time integration failed; `t_us` is the time at which the failure was detected.
struct IntegratorFailure : std::runtime_error {
    IntegratorFailure(const std::string& msg, double t_us)
        : std::runtime_error(msg + " (at t = " + std::to_string(t_us) + " us)"),
          t_us(t_us) {}
    double t_us;
};

// Step-size underflow: the problem is too stiff for the explicit stepper.
struct StiffnessError : IntegratorFailure {
    StiffnessError(const std::string& msg, double t_us, double step_us)
        : IntegratorFailure(msg + ", step = " + std::to_string(step_us) + " us", t_us),
          step_us(step_us) {}
    double step_us;
};

// The generator has more than one steady state.
struct DegenerateSteadyState : std::runtime_error {
    DegenerateSteadyState(int null_dimension)
        : std::runtime_error("steady state is not unique: null space has dimension " +
                             std::to_string(null_dimension)),
          null_dimension(null_dimension) {}
    int null_dimension;
};

// Bad or missing key in a configuration file.
struct ConfigError : std::runtime_error {
    ConfigError(const std::string& msg, std::string key = {})
        : std::runtime_error(msg), key(std::move(key)) {}
    std::string key;
};

// Curve fitting could not produce a usable result.
struct FitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace ryd
