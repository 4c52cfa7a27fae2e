#include "branchlab/error.hpp"

namespace branchlab {

std::string_view errc_name(Errc code)
{
    switch (code) {
    case Errc::NonPositiveTheta: return "NonPositiveTheta";
    case Errc::LowTemperature: return "LowTemperature";
    case Errc::NonPositiveA: return "NonPositiveA";
    case Errc::NegativeRate: return "NegativeRate";
    case Errc::LambdaOutOfRange: return "LambdaOutOfRange";
    case Errc::DomainError: return "DomainError";
    case Errc::BoundaryCase: return "BoundaryCase";
    case Errc::NoBracket: return "NoBracket";
    case Errc::DegenerateTau: return "DegenerateTau";
    case Errc::SingularPath: return "SingularPath";
    case Errc::StepTooLarge: return "StepTooLarge";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::ModeConflict: return "ModeConflict";
    case Errc::EmptyPopulation: return "EmptyPopulation";
    case Errc::EmptySnapshot: return "EmptySnapshot";
    case Errc::RangeViolation: return "RangeViolation";
    case Errc::InsufficientData: return "InsufficientData";
    case Errc::AlphaOutOfRange: return "AlphaOutOfRange";
    case Errc::GridTooCoarse: return "GridTooCoarse";
    case Errc::MajorantViolation: return "MajorantViolation";
    case Errc::QuadratureDivergence: return "QuadratureDivergence";
    case Errc::CapExceeded: return "CapExceeded";
    case Errc::IoError: return "IoError";
    }
    return "Unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code)
{
}

}  // namespace branchlab
