#pragma once

#include <stdexcept>
#include <string>

namespace simbound {

/// Base class for all errors raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Vector/point dimensionality does not match the expected dimension.
struct DimensionError : Error {
    using Error::Error;
};

/// A time instant or window falls outside a signal's stored horizon.
struct HorizonError : Error {
    using Error::Error;
};

/// Matrix factorization failed even after jitter escalation, or an
/// arithmetic identity that must hold was violated.
struct NumericalError : Error {
    using Error::Error;
};

/// An operation received a parameter outside its admissible range.
struct ParameterError : Error {
    using Error::Error;
};

/// A test point lies outside the feasible test domain.
struct DomainError : Error {
    using Error::Error;
};

/// Malformed robustness-measure descriptor.
struct SpecError : Error {
    using Error::Error;
};

/// External simulator process failed, died, or did not answer in time.
struct AdapterError : Error {
    using Error::Error;
};

/// External simulator replied with something that violates the wire protocol.
struct ProtocolError : Error {
    using Error::Error;
};

/// An oracle evaluation would exceed its configured budget.
struct BudgetError : Error {
    using Error::Error;
};

/// Malformed serialized artifact (CSV/JSON files produced by the tool).
struct FormatError : Error {
    using Error::Error;
};

/// Invalid or schema-violating experiment configuration.
struct ConfigError : Error {
    using Error::Error;
};

} // namespace simbound
