#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace hmono {

using cplx = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using Vec2c = Eigen::Vector2cd;
using Mat2c = Eigen::Matrix2cd;
using MatXc = Eigen::MatrixXcd;
using VecXc = Eigen::VectorXcd;

inline constexpr cplx I{0.0, 1.0};

enum class ErrorCode {
  InvalidArgument,
  CoincidentEndpoints,
  OutOfRange,
  SolveFailed,
  StepTooLarge,
  TruncationTooShort,
  EigenGapTooSmall,
  MismatchedGeodesic,
  ChainingFailure,
  NearSingular,
  DegenerateProbe,
  RankDeficient,
  ShapeMismatch,
  NonConvergence,
  DegenerateMass,
  DegenerateMap,
  NotPositive,
  BasePoint,
  DegenerateBasepoints,
  DegenerateRoots,
  ParseError,
};

constexpr std::string_view to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::CoincidentEndpoints: return "CoincidentEndpoints";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::SolveFailed: return "SolveFailed";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::TruncationTooShort: return "TruncationTooShort";
    case ErrorCode::EigenGapTooSmall: return "EigenGapTooSmall";
    case ErrorCode::MismatchedGeodesic: return "MismatchedGeodesic";
    case ErrorCode::ChainingFailure: return "ChainingFailure";
    case ErrorCode::NearSingular: return "NearSingular";
    case ErrorCode::DegenerateProbe: return "DegenerateProbe";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::DegenerateMass: return "DegenerateMass";
    case ErrorCode::DegenerateMap: return "DegenerateMap";
    case ErrorCode::NotPositive: return "NotPositive";
    case ErrorCode::BasePoint: return "BasePoint";
    case ErrorCode::DegenerateBasepoints: return "DegenerateBasepoints";
    case ErrorCode::DegenerateRoots: return "DegenerateRoots";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

// Every failure in the library surfaces as this exception type; callers
// branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Hermitian product, conjugate-linear in the first slot.
template <class A, class B>
cplx herm(const A& a, const B& b) {
  return a.dot(b);  // Eigen's dot conjugates the left operand
}

namespace detail {

inline std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix(splitmix(seed) ^ splitmix(index + 0x632be59bd9b4e019ULL));
}

}  // namespace detail

}  // namespace hmono
