#include "mcoupler/error.hpp"

namespace mcoupler {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidInput: return "InvalidInput";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::DegenerateSquid: return "DegenerateSquid";
        case ErrorCode::ResonantCoupler: return "ResonantCoupler";
        case ErrorCode::NoSignChange: return "NoSignChange";
        case ErrorCode::ZeroDetuning: return "ZeroDetuning";
        case ErrorCode::TruncationUnconverged: return "TruncationUnconverged";
        case ErrorCode::LabelAmbiguous: return "LabelAmbiguous";
        case ErrorCode::NonPositiveDefinite: return "NonPositiveDefinite";
        case ErrorCode::SingularTransform: return "SingularTransform";
        case ErrorCode::MaxIterations: return "MaxIterations";
        case ErrorCode::SingularJacobian: return "SingularJacobian";
        case ErrorCode::InitOutOfBounds: return "InitOutOfBounds";
        case ErrorCode::InvalidDecay: return "InvalidDecay";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace mcoupler
