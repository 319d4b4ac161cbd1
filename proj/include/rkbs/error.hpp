#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rkbs {

enum class Errc {
  DimensionMismatch,
  KindMismatch,
  NegativeIndex,
  NotUnitBall,
  EmptyGrid,
  AtomBudgetExceeded,
  Infeasible,
  UnsupportedBasis,
  DivergenceDetected,
  CapExceeded,
  InvalidArgument,
  IoError,
  FormatError,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

inline void require(bool cond, Errc code, const std::string& what) {
  if (!cond) throw Error(code, what);
}

}  // namespace rkbs
