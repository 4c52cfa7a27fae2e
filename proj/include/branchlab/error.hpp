#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace branchlab {

enum class Errc {
    NonPositiveTheta,
    LowTemperature,
    NonPositiveA,
    NegativeRate,
    LambdaOutOfRange,
    DomainError,
    BoundaryCase,
    NoBracket,
    DegenerateTau,
    SingularPath,
    StepTooLarge,
    InvalidConfig,
    ModeConflict,
    EmptyPopulation,
    EmptySnapshot,
    RangeViolation,
    InsufficientData,
    AlphaOutOfRange,
    GridTooCoarse,
    MajorantViolation,
    QuadratureDivergence,
    CapExceeded,
    IoError,
};

std::string_view errc_name(Errc code);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what);
    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

}  // namespace branchlab
