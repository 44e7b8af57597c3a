#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <string_view>

namespace orbitrace {

using Complex = std::complex<double>;

inline constexpr Complex kI{0.0, 1.0};
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

inline bool is_finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

enum class ErrorKind {
    InvalidArgument,
    DegenerateBranch,
    RootFindingFailed,
    BlowUp,
    SampleMismatch,
    BranchTrackingFailed,
    ContourCollision,
    TurningPointOnPath,
    NoConvergence,
    LeftValidityWindow,
    UnpairedAsymmetricOrbit,
    PoleProximity,
    NoConvergenceQR,
    Unaligned,
    Config,
};

std::string_view to_string(ErrorKind kind);

/// Every library failure is reported through this type; `kind()` is stable for callers.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace orbitrace
