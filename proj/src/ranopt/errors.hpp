#ifndef RANOPT_ERRORS_HPP
#define RANOPT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ranopt {

enum class ErrorCode {
    NonSquare,
    NegativeEntry,
    RowSumOutOfTolerance,
    DimensionMismatch,
    GammaOutOfRange,
    DisconnectedGraph,
    BaseNotDoublyStochastic,
    POutOfRange,
    ConditionalLawUnavailable,
    IndexOutOfRange,
    MissingLogs,
    AllPathsDegenerate,
    WindowOrderViolation,
    TooShort,
    NoCrossings,
    ThetaOutOfRange,
    TooFewRuns,
    OptimizerOnBoundary,
    DeltaNonpositive,
    EmptyPieces,
    BetaOutOfRange,
    KNonpositive,
    InvalidArgument,
    ConfigError,
    IoError,
};

/// Exception carrying a stable error code alongside the message; the C API
/// maps the code to its status enum.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
    throw Error(code, what);
}

} // namespace ranopt

#endif
