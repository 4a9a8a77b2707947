#pragma once

#include <stdexcept>
#include <string>

namespace macrobell {

// Moment order above the configured maximum.
struct unsupported_order : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Fock-space truncation too coarse for the requested tolerance.
struct truncation_error : std::runtime_error {
    truncation_error(const std::string& msg, double deficit)
        : std::runtime_error(msg), deficit(deficit) {}
    double deficit;
};

// Degree of polarization is 0/0 (identically vanishing moment field).
struct undefined_dp : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Fit problem whose Jacobian cannot constrain both parameters.
struct unidentifiable_parameters : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct insufficient_pulses : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Config-file problem, annotated with the offending line.
struct config_error : std::runtime_error {
    config_error(const std::string& msg, int line)
        : std::runtime_error(msg + " (line " + std::to_string(line) + ")"), line(line) {}
    int line;
};

}  // namespace macrobell
