#pragma once

#include <stdexcept>
#include <string>

namespace vs {

// Base for everything thrown by the library.
class error : public std::runtime_error {
public:
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid construction parameter; message names the offending field.
class parameter_error : public error {
public:
    using error::error;
};

// Query outside the materialized range.
class range_error : public error {
public:
    using error::error;
};

// Two nodes effectively coincide (spectrum behaves as multiple).
class degeneracy_error : public error {
public:
    using error::error;
};

// Evaluation point too close to a node.
class proximity_error : public error {
public:
    using error::error;
};

// Value exceeds double range; caller should switch to a log-scale path.
class overflow_error : public error {
public:
    using error::error;
};

// Division by a quantity that is numerically zero away from any node.
class conditioning_error : public error {
public:
    using error::error;
};

// Data does not match the structural pattern an operation requires.
class pattern_error : public error {
public:
    using error::error;
};

// Removal of a point that is not in the spectrum.
class membership_error : public error {
public:
    using error::error;
};

// Too little data for a statistical procedure.
class insufficiency_error : public error {
public:
    using error::error;
};

// A limit ladder failed to settle.
class extrapolation_error : public error {
public:
    using error::error;
};

// Contour passes too close to a zero or through unusable territory.
class contour_error : public error {
public:
    using error::error;
};

// Refinement/subdivision budget exhausted before isolating an answer.
class resolution_error : public error {
public:
    using error::error;
};

// Stored data violates a summability proxy.
class validity_error : public error {
public:
    using error::error;
};

// Generic numerical failure (solver non-convergence and the like).
class numeric_error : public error {
public:
    using error::error;
};

} // namespace vs
