#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "orbitrace/integrator.hpp"

namespace orbitrace {

struct SpinVector {
    Complex x;
    Complex y;
    Complex z;
};

SpinVector operator+(SpinVector a, SpinVector b);
SpinVector operator-(SpinVector a, SpinVector b);
SpinVector operator*(Complex s, SpinVector a);
Complex dot(SpinVector a, SpinVector b);      // bilinear, no conjugation
SpinVector cross(SpinVector a, SpinVector b);
double norm(SpinVector a);                    // Hermitian length

struct SpinModel {
    double t1 = 2.0;
    double delta1 = 0.0;

    SpinVector field() const { return {t1, 0.0, Complex(0.0, delta1)}; }
};

/// (E+, E-) = +-(1/2) sqrt(t1^2 - delta1^2), principal root.
std::pair<Complex, Complex> analytic_eigenvalues(const SpinModel& model);

struct SpinSample {
    double s = 0.0;
    Complex t;
    SpinVector n;
};

struct SpinTrajectory {
    std::vector<SpinSample> samples;
    TimeContour contour = TimeContour::straight(1.0);
};

/// RK4 of dn/dt = M x n along the contour. Throws BlowUp past `bound`.
SpinTrajectory bloch_integrate(const SpinModel& model, SpinVector n0, const TimeContour& contour, std::size_t steps,
                               double bound = 1e6);

/// Image under (n_x, n_y, n_z) -> (n_x*, n_y*, -n_z*) with time reversal.
SpinTrajectory spin_image(const SpinTrajectory& trajectory);

double trajectory_distance(const SpinTrajectory& a, const SpinTrajectory& b);

/// Closed orbit on the energy shell of level `sign` (+1 or -1):
/// n0 = sign M/sqrt(M.M) + b e_sign, where e_sign is the isotropic eigenvector of
/// M x with eigenvalue sign i sqrt(M.M) and b is the component of `generic`
/// along it. The contour is straight with period 2 pi / (sign sqrt(M.M)).
struct SpinOrbitStart {
    SpinVector n0;
    TimeContour contour = TimeContour::straight(1.0);
};

inline constexpr SpinVector kGenericSpin{0.3, Complex(0.5, 0.01), 0.8};

SpinOrbitStart representative_orbit(const SpinModel& model, int sign, SpinVector generic = kGenericSpin);

enum class SpinAlignment { AlignedWithM, AlignedWithIM, Divergent };

std::string_view to_string(SpinAlignment a);

SpinVector average_spin(const SpinTrajectory& trajectory);

/// Throws Unaligned when the average is parallel to neither M nor iM.
SpinAlignment average_spin_alignment(const SpinModel& model, const SpinTrajectory& trajectory,
                                     double tolerance = 1e-6);

/// SelfSymmetric when the trajectory matches its image; PairMember when one of
/// `siblings` does (partner = its index). Throws UnpairedAsymmetricOrbit otherwise.
OrbitClass classify_spin_orbit(const SpinModel& model, const SpinTrajectory& trajectory,
                               const std::vector<SpinTrajectory>& siblings, double tolerance = 1e-4);

/// Return time of the trajectory from n0 near the nominal period, measured along
/// the period's direction in the complex t-plane.
Complex measured_period(const SpinModel& model, SpinVector n0, Complex nominal);

struct SweepRow {
    double delta1 = 0.0;
    Complex e_plus;
    Complex e_minus;
    std::optional<SpinAlignment> alignment;  // unset when the average is unaligned
    OrbitClassKind orbit_class = OrbitClassKind::Unclassified;
    double casimir_drift = 0.0;
    double closure = 0.0;
    std::string note;
};

struct SweepOptions {
    std::size_t steps = 2048;
    double transition_window = 1e-3;  // relative to t1
    double classify_tolerance = 1e-4;
    unsigned threads = 0;
};

std::vector<SweepRow> pt_sweep(double t1, const std::vector<double>& delta1_values, const SweepOptions& options = {});

}  // namespace orbitrace
