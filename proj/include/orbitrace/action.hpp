#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>

#include "orbitrace/integrator.hpp"
#include "orbitrace/models.hpp"

namespace orbitrace {

enum class FamilyKind { Librational, Traversing };

std::string_view to_string(FamilyKind kind);

/// Range of Re E in which a family's levels are accepted.
struct EnergyWindow {
    double lo = -INFINITY;
    double hi = INFINITY;

    bool contains(double re) const { return re >= lo && re <= hi; }
    /// Window widened by `fraction` of its width (or of the finite edge when unbounded).
    EnergyWindow widened(double fraction) const;
};

/// Rectangle of complex energies scanned for first seeds.
struct SeedBox {
    double re_min = 0.0;
    double re_max = 10.0;
    double im_min = 0.0;
    double im_max = 0.0;
    int n_re = 41;
    int n_im = 1;
};

struct OrbitFamily {
    std::string label;
    FamilyKind kind = FamilyKind::Librational;
    TurningPair pair = TurningPair::Central;
    int direction = 1;
    double mu = 0.5;
    EnergyWindow window;
    std::optional<int> n_min;  // unset: derived from the action range over the seed box
    std::optional<int> n_max;
    SeedBox seed;
};

struct QuadratureOptions {
    std::size_t nodes = 512;      // Gauss-Legendre nodes per analytic piece
    double branch_ratio = 0.5;    // chosen branch must be this much closer than the other
    double path_clearance = 1e-3;
    double collision_margin = 1e-3;
};

struct ActionPeriod {
    Complex action;
    Complex period;
};

Complex action_librational(const ModelSpec& model, const OrbitFamily& family, Complex E,
                           const QuadratureOptions& options = {});
Complex action_traversing(const ModelSpec& model, const OrbitFamily& family, Complex E,
                          const QuadratureOptions& options = {});
Complex period(const ModelSpec& model, const OrbitFamily& family, Complex E, const QuadratureOptions& options = {});
ActionPeriod action_and_period(const ModelSpec& model, const OrbitFamily& family, Complex E,
                               const QuadratureOptions& options = {});

/// Initial point and path-following time contour of the family's orbit at E:
/// the knots are the times at which the exact orbit passes equally spaced points
/// of the quadrature path.
struct OrbitStart {
    PhasePoint z0;
    TimeContour contour = TimeContour::straight(1.0);
};

OrbitStart orbit_start(const ModelSpec& model, const OrbitFamily& family, Complex E, std::size_t steps,
                       const QuadratureOptions& options = {});

/// Integrated orbit of the family at E with action and label filled.
Orbit family_orbit(const ModelSpec& model, const OrbitFamily& family, Complex E, std::size_t steps,
                   const QuadratureOptions& options = {});

/// Real energy in [lo, hi] where Im W of `family` vanishes in the limit Im E -> 0+
/// (the real-to-complex transition). Throws RootFindingFailed without a sign change.
double transition_energy(const ModelSpec& model, const OrbitFamily& family, double lo, double hi,
                         const QuadratureOptions& options = {});

}  // namespace orbitrace
