#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "orbitrace/config.hpp"
#include "orbitrace/quantum.hpp"
#include "orbitrace/spin.hpp"

namespace orbitrace {

enum class Engine { Quantum, Semiclassical, Both };

Engine parse_engine(const std::string& name);

/// Operator of the configured model at its configured grid, or at `grid` when given.
QuantumOperator build_operator(const ExperimentConfig& config, std::optional<std::size_t> grid = std::nullopt);

struct MatchSummary {
    std::size_t levels = 0;
    double max_error = 0.0;
    double median_error = 0.0;
};

struct FamilyMatch {
    std::string label;
    double mu = 0.0;
    std::size_t levels = 0;
    std::size_t crossover = 0;
    double max_error = 0.0;
};

/// Statistics over the `levels` lowest-|E| matched records.
MatchSummary summarize_matches(const std::vector<SpectrumRecord>& records, std::size_t levels);

/// The same selection split by family.
std::vector<FamilyMatch> family_matches(const std::vector<SpectrumRecord>& records,
                                        const std::vector<OrbitFamily>& families, std::size_t levels);

struct RunError {
    std::string stage;
    std::string kind;
    std::string message;
};

struct SpectrumRun {
    std::vector<double> transitions;
    std::vector<OrbitFamily> families;
    std::vector<SpectrumRecord> records;
    std::vector<Complex> quantum;
    std::vector<Complex> unmatched;
    std::optional<MatchSummary> summary;
    std::vector<std::size_t> violations;
    std::vector<RunError> errors;
};

/// Module failures are collected in `errors`; whatever finished is kept.
SpectrumRun run_spectrum(const ExperimentConfig& config, Engine engine);

struct OrbitRun {
    SpectrumRecord level;
    Orbit orbit;
    Orbit image;
    double distance = 0.0;
    double closure = 0.0;
    double energy_drift = 0.0;
};

/// Orbit of `family` at level n (quantized first) or at the energy E.
OrbitRun run_orbit(const ExperimentConfig& config, const std::string& family, std::optional<int> n,
                   std::optional<Complex> energy);

struct SpinDump {
    double delta1 = 0.0;
    int sign = 1;
    SpinTrajectory trajectory;
};

struct SpinRun {
    std::vector<SweepRow> rows;
    std::vector<SpinDump> dumps;  // both levels at the first and last swept delta1
};

SpinRun run_spin(const ExperimentConfig& config);

struct Check {
    std::string name;
    std::string scope;
    double value = 0.0;
    double tolerance = 0.0;
    bool passed = false;
    std::string detail;
};

/// Every invariant of the configured model.
std::vector<Check> run_verify(const ExperimentConfig& config);

// Writers. CSV files start with a '#' line naming the columns, then a header row.
void write_spectrum_csv(std::ostream& os, const std::vector<SpectrumRecord>& records);
void write_quantum_csv(std::ostream& os, const std::vector<Complex>& eigenvalues);
void write_spectrum_json(std::ostream& os, const ExperimentConfig& config, const SpectrumRun& run);
void write_match_report(std::ostream& os, const SpectrumRun& run);
void write_orbit_csv(std::ostream& os, const Orbit& orbit);
void write_orbit_json(std::ostream& os, const OrbitRun& run);
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);
void write_sweep_json(std::ostream& os, const std::vector<SweepRow>& rows);
void write_spin_csv(std::ostream& os, const SpinTrajectory& trajectory);
void write_verify_json(std::ostream& os, const ExperimentConfig& config, const std::vector<Check>& checks);
void write_error_json(std::ostream& os, const std::vector<RunError>& errors);

}  // namespace orbitrace
