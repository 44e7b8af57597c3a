#include "orbitrace/core.hpp"

namespace orbitrace {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::DegenerateBranch: return "DegenerateBranch";
        case ErrorKind::RootFindingFailed: return "RootFindingFailed";
        case ErrorKind::BlowUp: return "BlowUp";
        case ErrorKind::SampleMismatch: return "SampleMismatch";
        case ErrorKind::BranchTrackingFailed: return "BranchTrackingFailed";
        case ErrorKind::ContourCollision: return "ContourCollision";
        case ErrorKind::TurningPointOnPath: return "TurningPointOnPath";
        case ErrorKind::NoConvergence: return "NoConvergence";
        case ErrorKind::LeftValidityWindow: return "LeftValidityWindow";
        case ErrorKind::UnpairedAsymmetricOrbit: return "UnpairedAsymmetricOrbit";
        case ErrorKind::PoleProximity: return "PoleProximity";
        case ErrorKind::NoConvergenceQR: return "NoConvergenceQR";
        case ErrorKind::Unaligned: return "Unaligned";
        case ErrorKind::Config: return "Config";
    }
    return "Unknown";
}

}  // namespace orbitrace
