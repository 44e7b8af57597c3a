#pragma once

#include <optional>
#include <string>
#include <vector>

#include "orbitrace/action.hpp"

namespace orbitrace {

enum class LevelStatus { Converged, NoConvergence, LeftValidityWindow, Failed };

std::string_view to_string(LevelStatus status);

struct SpectrumRecord {
    std::string family_label;
    std::vector<std::string> family_tags;  // more than one when families share a level
    int n = 0;
    Complex energy;
    Complex action;
    Complex period;
    double w_residual = INFINITY;
    std::vector<double> residual_history;
    LevelStatus status = LevelStatus::Failed;
    std::string message;
    OrbitClass orbit_class;
    bool crossover = false;
    bool degenerate = false;
    std::optional<Complex> quantum_match;
    std::optional<double> match_error;

    bool converged() const { return status == LevelStatus::Converged; }
};

struct QuantizerOptions {
    QuadratureOptions quadrature;
    std::size_t steps = 2048;
    double tolerance = 1e-10;
    int max_iterations = 50;
    double window_slack = 0.1;
    double classify_tolerance = 1e-4;
    double dedup_tolerance = 1e-6;
    double crossover_fraction = 0.02;
    std::vector<double> transitions;
    unsigned threads = 0;
};

/// Default family set of a model with windows bounded by its computed transition energies.
struct FamilySet {
    std::vector<OrbitFamily> families;
    std::vector<double> transitions;
    std::string transition_family;  // family whose Im W defines the transitions
};

FamilySet default_families(const ModelSpec& model, const QuadratureOptions& quadrature = {});

/// Newton iteration on W(E) = 2 pi (n + mu). Never throws for numerical failures:
/// they are reported through the record's status and message.
SpectrumRecord quantize_level(const ModelSpec& model, const OrbitFamily& family, int n, Complex seed,
                              const QuantizerOptions& options = {});

/// Quantizes every family over its n-range, merges coincident levels, flags the
/// crossover, classifies orbits and sorts converged levels by (Re E, Im E).
std::vector<SpectrumRecord> semiclassical_spectrum(const ModelSpec& model, const std::vector<OrbitFamily>& families,
                                                   const QuantizerOptions& options = {});

/// Fills orbit_class for every converged, nondegenerate record: SelfSymmetric when
/// the orbit coincides with its image, PairMember when a sibling's orbit does.
void classify_orbits(const ModelSpec& model, const std::vector<OrbitFamily>& families,
                     std::vector<SpectrumRecord>& records, const QuantizerOptions& options = {});

Complex greens_trace(const ModelSpec& model, const OrbitFamily& family, Complex E,
                     const QuadratureOptions& options = {});

/// Levels that satisfy neither side of the real/pair dichotomy (crossover and
/// degenerate levels are exempt). Empty means the dichotomy holds.
std::vector<std::size_t> dichotomy_violations(const std::vector<SpectrumRecord>& records,
                                              double reality_tolerance = 1e-8);

const OrbitFamily* find_family(const std::vector<OrbitFamily>& families, const std::string& label);

}  // namespace orbitrace
