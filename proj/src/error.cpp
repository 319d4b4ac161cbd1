#include "rkbs/error.hpp"

namespace rkbs {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::KindMismatch: return "KindMismatch";
    case Errc::NegativeIndex: return "NegativeIndex";
    case Errc::NotUnitBall: return "NotUnitBall";
    case Errc::EmptyGrid: return "EmptyGrid";
    case Errc::AtomBudgetExceeded: return "AtomBudgetExceeded";
    case Errc::Infeasible: return "Infeasible";
    case Errc::UnsupportedBasis: return "UnsupportedBasis";
    case Errc::DivergenceDetected: return "DivergenceDetected";
    case Errc::CapExceeded: return "CapExceeded";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::IoError: return "IoError";
    case Errc::FormatError: return "FormatError";
  }
  return "Unknown";
}

}  // namespace rkbs
