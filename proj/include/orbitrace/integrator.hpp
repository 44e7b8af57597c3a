#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "orbitrace/models.hpp"

namespace orbitrace {

/// Piecewise-linear path in complex time from 0 to the period. Knots are spaced
/// uniformly in the parameter s; the straight contour t = sT has two knots.
class TimeContour {
public:
    static TimeContour straight(Complex period);
    static TimeContour polyline(std::vector<Complex> knots);

    Complex period() const { return knots_.back(); }
    std::size_t segments() const { return knots_.size() - 1; }
    const std::vector<Complex>& knots() const { return knots_; }
    Complex at(double s) const;
    TimeContour conjugated() const;

private:
    explicit TimeContour(std::vector<Complex> knots) : knots_(std::move(knots)) {}
    std::vector<Complex> knots_;
};

enum class OrbitClassKind { SelfSymmetric, PairMember, Unclassified };

std::string_view to_string(OrbitClassKind kind);

struct OrbitClass {
    OrbitClassKind kind = OrbitClassKind::Unclassified;
    std::optional<std::size_t> partner;
};

struct OrbitSample {
    double s = 0.0;
    Complex t;
    PhasePoint z;
};

struct Orbit {
    std::vector<OrbitSample> samples;
    TimeContour contour = TimeContour::straight(1.0);
    Complex energy;
    Complex action;       // filled by the action module
    Complex line_action;  // integral of p dx/dt accumulated during integration
    ModelId model = ModelId::HarmonicOscillator;
    std::string family_label;
    OrbitClass classification;
    std::optional<double> spatial_period;
    std::optional<double> momentum_period;
};

struct IntegratorOptions {
    double blowup_bound = 1e6;
};

/// Fixed-step RK4 along the contour. `steps` must be a multiple of the contour's
/// segment count; each step uses one analytic piece, picked by an Euler midpoint
/// predictor.
Orbit integrate(const ModelSpec& model, PhasePoint z0, const TimeContour& contour, std::size_t steps,
                const IntegratorOptions& options = {});

Orbit orbit_image(const ModelSpec& model, const Orbit& orbit);

/// Minimum over cyclic shifts (refined to sub-sample offsets) of the maximum
/// pointwise phase-space distance. Coordinates with a period are compared modulo it.
double orbit_distance(const Orbit& a, const Orbit& b);

/// |z(end) - z(start)|, with periodic coordinates reduced.
double closure_error(const Orbit& orbit);

double energy_drift(const ModelSpec& model, const Orbit& orbit);

}  // namespace orbitrace
