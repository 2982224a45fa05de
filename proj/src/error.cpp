#include "stereonocs/error.hpp"

namespace stereonocs {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::NonPositiveDepth: return "NonPositiveDepth";
        case ErrorCode::DegenerateMesh: return "DegenerateMesh";
        case ErrorCode::InvalidMesh: return "InvalidMesh";
        case ErrorCode::BadMagic: return "BadMagic";
        case ErrorCode::TruncatedFile: return "TruncatedFile";
        case ErrorCode::VersionMismatch: return "VersionMismatch";
        case ErrorCode::MalformedFile: return "MalformedFile";
        case ErrorCode::ViewTagMismatch: return "ViewTagMismatch";
        case ErrorCode::EmptyMask: return "EmptyMask";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::NotRectified: return "NotRectified";
        case ErrorCode::ZeroDisparity: return "ZeroDisparity";
        case ErrorCode::ParallelRays: return "ParallelRays";
        case ErrorCode::InsufficientCorrespondences: return "InsufficientCorrespondences";
        case ErrorCode::InsufficientPoints: return "InsufficientPoints";
        case ErrorCode::DegenerateConfiguration: return "DegenerateConfiguration";
        case ErrorCode::NoConsensus: return "NoConsensus";
        case ErrorCode::NotRowStochastic: return "NotRowStochastic";
        case ErrorCode::EmptyPairList: return "EmptyPairList";
        case ErrorCode::EmptySet: return "EmptySet";
        case ErrorCode::NegativeEntry: return "NegativeEntry";
        case ErrorCode::NonFiniteComponent: return "NonFiniteComponent";
        case ErrorCode::EmptyTrials: return "EmptyTrials";
        case ErrorCode::InvalidParams: return "InvalidParams";
        case ErrorCode::FrustumPlacementFailed: return "FrustumPlacementFailed";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

}  // namespace stereonocs
