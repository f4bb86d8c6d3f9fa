#include "alasso/core/error.hpp"

namespace alasso {

std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::NonSymmetric: return "NonSymmetric";
    case ErrorCode::EmptySample: return "EmptySample";
    case ErrorCode::SingularDesign: return "SingularDesign";
    case ErrorCode::DimensionExceedsSample: return "DimensionExceedsSample";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::ZeroWeightColumn: return "ZeroWeightColumn";
    case ErrorCode::FoldTooSmall: return "FoldTooSmall";
    case ErrorCode::DegenerateVariance: return "DegenerateVariance";
    case ErrorCode::EmptyActiveSet: return "EmptyActiveSet";
    case ErrorCode::SingularSubmatrix: return "SingularSubmatrix";
    case ErrorCode::ZeroInitialComponent: return "ZeroInitialComponent";
    case ErrorCode::ZeroTrueCoefficient: return "ZeroTrueCoefficient";
    case ErrorCode::TooManyFailures: return "TooManyFailures";
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
    case ErrorCode::RequiresPleN: return "RequiresPleN";
    case ErrorCode::SingularBlock: return "SingularBlock";
    case ErrorCode::ParameterOutOfRange: return "ParameterOutOfRange";
    case ErrorCode::UnknownVariant: return "UnknownVariant";
    case ErrorCode::UnknownPreset: return "UnknownPreset";
    case ErrorCode::MalformedCsv: return "MalformedCsv";
    case ErrorCode::NonNumericCell: return "NonNumericCell";
    case ErrorCode::ZeroVarianceColumn: return "ZeroVarianceColumn";
    }
    return "Unknown";
}

} // namespace alasso
