#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mcoupler {

enum class ErrorCode {
    InvalidInput,
    EmptyInput,
    DegenerateSquid,
    ResonantCoupler,
    NoSignChange,
    ZeroDetuning,
    TruncationUnconverged,
    LabelAmbiguous,
    NonPositiveDefinite,
    SingularTransform,
    MaxIterations,
    SingularJacobian,
    InitOutOfBounds,
    InvalidDecay,
};

std::string_view to_string(ErrorCode code);

/// Library-wide exception. Every failure raised by mcoupler carries a code so
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

inline void require(bool cond, const std::string& what) {
    if (!cond) fail(ErrorCode::InvalidInput, what);
}

}  // namespace mcoupler
