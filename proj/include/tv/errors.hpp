#pragma once

#include <stdexcept>
#include <string>

namespace tv {

enum class ErrorKind {
  InvalidArgument,
  SingularAtFrequency,
  NonHermitianResult,
  DegenerateMeter,
  UnstableModel,
  NegativeLinewidth,
  NoBracket,
  QuadratureFailure,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::SingularAtFrequency: return "SingularAtFrequency";
    case ErrorKind::NonHermitianResult: return "NonHermitianResult";
    case ErrorKind::DegenerateMeter: return "DegenerateMeter";
    case ErrorKind::UnstableModel: return "UnstableModel";
    case ErrorKind::NegativeLinewidth: return "NegativeLinewidth";
    case ErrorKind::NoBracket: return "NoBracket";
    case ErrorKind::QuadratureFailure: return "QuadratureFailure";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::InvalidArgument, what);
}

}  // namespace tv
