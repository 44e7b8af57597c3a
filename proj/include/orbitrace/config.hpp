#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "orbitrace/models.hpp"
#include "orbitrace/quantizer.hpp"
#include "orbitrace/spin.hpp"

namespace orbitrace {

/// Per-family changes applied on top of the model's default family set.
struct FamilyOverride {
    std::string label;
    std::optional<double> mu;
    std::optional<int> n_min;
    std::optional<int> n_max;
    std::optional<EnergyWindow> window;
};

struct QuantumConfig {
    std::size_t grid = 0;       // 0: model default
    double extent = 0.0;        // half-width of the box for grid models, 0: model default
    std::size_t propagator_grid = 128;
    std::vector<Complex> propagator_times{{0.3, 0.0}, {0.3, 0.1}, {1.0, -0.2}, {0.0, 0.5}, {2.0, 0.05}};
};

struct SpinConfig {
    double t1 = 2.0;
    std::vector<double> delta1;
    SweepOptions sweep;
};

/// Thresholds used by `verify`.
struct CheckTolerances {
    double symmetry = 1e-12;
    int symmetry_points = 1000;
    double gradient = 1e-6;
    double phs = 1e-12;
    double closure = 1e-8;
    double propagator = 1e-10;
    double witness = 1e-8;
    double dichotomy = 1e-8;
    double conjugation = 1e-8;
    int conjugation_points = 20;
    double slope = 1e-6;
    double quadrature = 1e-10;
    double match = 0.02;
    int match_levels = 10;
    double spin_eigen = 1e-12;
    double casimir = 1e-8;
    double period = 1e-6;
};

struct OutputConfig {
    std::string dir = "out";
    std::string format = "csv";
};

struct ExperimentConfig {
    std::string name;
    ModelId model_id = ModelId::HarmonicOscillator;
    std::optional<ModelSpec> model;  // unset for the two-level model
    std::optional<SpinConfig> spin;  // set only for the two-level model
    QuantumConfig quantum;
    QuantizerOptions quantizer;
    IntegratorOptions integrator;
    std::vector<FamilyOverride> families;
    CheckTolerances tolerances;
    OutputConfig output;
};

/// Parses a JSON experiment. Unknown keys, wrong types and out-of-range values
/// throw Error(Config) with the dotted path of the offending key.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Default families of the model with the config's overrides applied.
FamilySet configured_families(const ExperimentConfig& config);

}  // namespace orbitrace
