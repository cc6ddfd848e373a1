#ifndef PDBENCH_ERRORS_HPP
#define PDBENCH_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pdbench {

/// Base class for all bench/pipeline errors so callers can catch one type.
struct BenchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// File / configuration
struct ParseError : BenchError {
    using BenchError::BenchError;
};
struct ConfigError : BenchError {
    using BenchError::BenchError;
};
struct DuplicateFrequency : ParseError {
    using ParseError::ParseError;
};
struct InvariantError : ParseError {
    using ParseError::ParseError;
};
struct UnknownFrequency : BenchError {
    using BenchError::BenchError;
};

// Hardware model
struct InvalidDivider : BenchError {
    using BenchError::BenchError;
};
struct InvalidSwitchState : BenchError {
    using BenchError::BenchError;
};

// Math
struct NoSolution : BenchError {
    using BenchError::BenchError;
};

// Procedure
struct NullNotFound : BenchError {
    using BenchError::BenchError;
};
struct AwaitTimeout : BenchError {
    using BenchError::BenchError;
};
struct RetriesExhausted : BenchError {
    using BenchError::BenchError;
};
struct ClippedCurve : BenchError {
    using BenchError::BenchError;
};

// Curve referencing
struct NoPeriodicity : BenchError {
    using BenchError::BenchError;
};
struct NoCrossing : BenchError {
    using BenchError::BenchError;
};
struct AmbiguityUnresolved : BenchError {
    using BenchError::BenchError;
};
struct DegenerateCurve : BenchError {
    using BenchError::BenchError;
};

} // namespace pdbench

#endif
