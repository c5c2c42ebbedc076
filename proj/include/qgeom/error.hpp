#pragma once

#include <stdexcept>
#include <string>

namespace qgeom {

/// Error codes used across the library. Each maps to one failure mode of a
/// documented operation contract.
enum class Errc {
  // matcore
  NonHermitianInput,
  ConvergenceFailure,
  NotPositiveSemidefinite,
  DegenerateBranch,
  TraceNotOne,
  NotHermitian,
  NegativeEigenvalue,
  WrongDimension,
  // states
  BlochOutOfBall,
  GapClosure,
  GaugePole,
  ConfigInvalid,
  // genfun
  DimensionMismatch,
  NotNormalized,
  UnsupportedKind,
  DomainError,
  // geometry
  PuritySingularity,
  NotPure,
  SignFlipAtStencil,
  // numdiff
  OracleFailure,
  PhaseWrap,
  GaugeNotSmooth,
  FitIllConditioned,
  // app
  IoError,
};

const char* to_string(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

}  // namespace qgeom
