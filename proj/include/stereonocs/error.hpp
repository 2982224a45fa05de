#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stereonocs {

enum class ErrorCode {
    NonPositiveDepth,
    DegenerateMesh,
    InvalidMesh,
    BadMagic,
    TruncatedFile,
    VersionMismatch,
    MalformedFile,
    ViewTagMismatch,
    EmptyMask,
    ShapeMismatch,
    NotRectified,
    ZeroDisparity,
    ParallelRays,
    InsufficientCorrespondences,
    InsufficientPoints,
    DegenerateConfiguration,
    NoConsensus,
    NotRowStochastic,
    EmptyPairList,
    EmptySet,
    NegativeEntry,
    NonFiniteComponent,
    EmptyTrials,
    InvalidParams,
    FrustumPlacementFailed,
    InvalidConfig,
    Io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (and tests) can branch on the kind without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace stereonocs
