#pragma once

#include <stdexcept>
#include <string>

namespace qdyn {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid argument: out-of-range angle, non-physical Bloch vector,
/// malformed parameter set, and similar precondition violations.
struct DomainError : Error {
    using Error::Error;
};

/// Operation asked of a model family that does not define it
/// (e.g. a decoherence function for a Pauli channel).
struct UnsupportedModelError : Error {
    using Error::Error;
};

/// A time-local decay rate diverges at the queried time.
struct SingularRateError : Error {
    SingularRateError(const std::string& what, double t_arg)
        : Error(what), t(t_arg) {}
    double t;
};

/// Adaptive integration failed; `t` is where the step size underflowed.
struct IntegrationError : Error {
    IntegrationError(const std::string& what, double t_arg)
        : Error(what), t(t_arg) {}
    double t;
};

/// The map at time `s` is too ill-conditioned to factor out.
struct SingularIntermediateError : Error {
    SingularIntermediateError(const std::string& what, double s_arg)
        : Error(what), s(s_arg) {}
    double s;
};

/// Two internal computation routes disagree beyond tolerance. Always a bug.
struct InternalConsistencyError : Error {
    using Error::Error;
};

/// Configuration parsing failure; `key_path` points at the offending entry.
struct ParseError : Error {
    ParseError(const std::string& what, std::string key_path_arg)
        : Error(what + " (at '" + key_path_arg + "')"),
          key_path(std::move(key_path_arg)) {}
    std::string key_path;
};

}  // namespace qdyn
