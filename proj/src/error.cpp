#include "qgeom/error.hpp"

namespace qgeom {

const char* to_string(Errc c) {
  switch (c) {
    case Errc::NonHermitianInput: return "NonHermitianInput";
    case Errc::ConvergenceFailure: return "ConvergenceFailure";
    case Errc::NotPositiveSemidefinite: return "NotPositiveSemidefinite";
    case Errc::DegenerateBranch: return "DegenerateBranch";
    case Errc::TraceNotOne: return "TraceNotOne";
    case Errc::NotHermitian: return "NotHermitian";
    case Errc::NegativeEigenvalue: return "NegativeEigenvalue";
    case Errc::WrongDimension: return "WrongDimension";
    case Errc::BlochOutOfBall: return "BlochOutOfBall";
    case Errc::GapClosure: return "GapClosure";
    case Errc::GaugePole: return "GaugePole";
    case Errc::ConfigInvalid: return "ConfigInvalid";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::NotNormalized: return "NotNormalized";
    case Errc::UnsupportedKind: return "UnsupportedKind";
    case Errc::DomainError: return "DomainError";
    case Errc::PuritySingularity: return "PuritySingularity";
    case Errc::NotPure: return "NotPure";
    case Errc::SignFlipAtStencil: return "SignFlipAtStencil";
    case Errc::OracleFailure: return "OracleFailure";
    case Errc::PhaseWrap: return "PhaseWrap";
    case Errc::GaugeNotSmooth: return "GaugeNotSmooth";
    case Errc::FitIllConditioned: return "FitIllConditioned";
    case Errc::IoError: return "IoError";
  }
  return "UnknownError";
}

}  // namespace qgeom
