// orbitrace: semiclassical and quantum spectra of pseudo-Hermitian models.
//
//   orbitrace spectrum --config configs/h1_skin.json --engine both --out out/h1
//   orbitrace orbit    --config configs/h3_double_well.json --family left-well --n 0
//   orbitrace spin     --config configs/h4_two_level.json
//   orbitrace verify   --config configs/oscillator.json
//
// Exit codes: 0 success, 1 usage/config/module error, 2 verification failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "orbitrace/pipeline.hpp"

namespace fs = std::filesystem;
using namespace orbitrace;

namespace {

struct Options {
    std::string config;
    std::string engine = "both";
    std::string family;
    std::optional<int> n;
    std::string energy;
    std::string out;
    std::string format;
};

void report_error(const std::string& kind, const std::string& message) {
    nlohmann::ordered_json j{{"error", {{"kind", kind}, {"message", message}}}};
    std::cerr << j.dump() << '\n';
}

ExperimentConfig load(const Options& o) {
    ExperimentConfig cfg = load_config(o.config);
    if (!o.out.empty()) cfg.output.dir = o.out;
    if (!o.format.empty()) cfg.output.format = o.format;
    return cfg;
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
    fs::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error(ErrorKind::InvalidArgument, "cannot write " + path.string());
    body(os);
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::string fmt(Complex z) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g%+.10gi", z.real(), z.imag());
    return buf;
}

Complex parse_energy(const std::string& s) {
    std::istringstream is(s);
    double re = 0.0, im = 0.0;
    char comma = 0;
    is >> re;
    if (is.fail()) throw Error(ErrorKind::Config, "--energy: expected RE or RE,IM");
    if (is >> comma) {
        if (comma != ',' || !(is >> im)) throw Error(ErrorKind::Config, "--energy: expected RE or RE,IM");
    }
    return {re, im};
}

int cmd_spectrum(const Options& o) {
    const ExperimentConfig cfg = load(o);
    const Engine engine = parse_engine(o.engine);
    const SpectrumRun run = run_spectrum(cfg, engine);
    const fs::path dir = cfg.output.dir;
    const bool json = cfg.output.format == "json";

    if (json) {
        write_file(dir / "spectrum.json", [&](std::ostream& os) { write_spectrum_json(os, cfg, run); });
    } else {
        if (engine != Engine::Quantum)
            write_file(dir / "spectrum_semiclassical.csv", [&](std::ostream& os) { write_spectrum_csv(os, run.records); });
        if (engine != Engine::Semiclassical)
            write_file(dir / "spectrum_quantum.csv", [&](std::ostream& os) { write_quantum_csv(os, run.quantum); });
    }
    if (run.summary) write_file(dir / "match_report.json", [&](std::ostream& os) { write_match_report(os, run); });

    std::size_t converged = 0;
    for (const auto& r : run.records) converged += r.converged();
    std::cout << cfg.name << ": " << converged << " semiclassical levels, " << run.quantum.size()
              << " quantum eigenvalues\n";
    if (!run.transitions.empty()) {
        std::cout << "transitions:";
        for (double e : run.transitions) std::cout << ' ' << fmt(e);
        std::cout << '\n';
    }
    if (run.summary) {
        std::cout << "match over " << run.summary->levels << " lowest levels: median " << fmt(run.summary->median_error)
                  << ", max " << fmt(run.summary->max_error) << '\n';
        for (const auto& f : family_matches(run.records, run.families, run.summary->levels))
            std::cout << "  " << f.label << " (mu " << fmt(f.mu) << "): " << f.levels << " levels, max "
                      << fmt(f.max_error) << '\n';
    }
    if (engine != Engine::Quantum)
        std::cout << "dichotomy: " << (run.violations.empty() ? "pass" : "fail") << " (" << run.violations.size()
                  << " violations)\n";
    if (!run.errors.empty()) {
        write_file(dir / "error.json", [&](std::ostream& os) { write_error_json(os, run.errors); });
        for (const auto& e : run.errors) report_error(e.kind, e.stage + ": " + e.message);
        return 1;
    }
    return 0;
}

int cmd_orbit(const Options& o) {
    const ExperimentConfig cfg = load(o);
    if (o.family.empty()) throw Error(ErrorKind::Config, "--family is required");
    std::optional<Complex> energy;
    if (!o.energy.empty()) energy = parse_energy(o.energy);
    const OrbitRun run = run_orbit(cfg, o.family, o.n, energy);
    const fs::path dir = cfg.output.dir;
    const std::string stem = "orbit_" + o.family + (o.n ? "_n" + std::to_string(*o.n) : std::string("_E"));
    write_file(dir / (stem + ".csv"), [&](std::ostream& os) { write_orbit_csv(os, run.orbit); });
    write_file(dir / (stem + "_image.csv"), [&](std::ostream& os) { write_orbit_csv(os, run.image); });
    write_file(dir / (stem + ".json"), [&](std::ostream& os) { write_orbit_json(os, run); });
    std::cout << o.family << " E = " << fmt(run.level.energy) << "\norbit_distance " << run.distance << "\nclosure "
              << run.closure << "\n";
    return 0;
}

int cmd_spin(const Options& o) {
    const ExperimentConfig cfg = load(o);
    const SpinRun run = run_spin(cfg);
    const fs::path dir = cfg.output.dir;
    if (cfg.output.format == "json")
        write_file(dir / "sweep.json", [&](std::ostream& os) { write_sweep_json(os, run.rows); });
    else
        write_file(dir / "sweep.csv", [&](std::ostream& os) { write_sweep_csv(os, run.rows); });
    for (const auto& d : run.dumps)
        write_file(dir / ("spin_orbit_d" + fmt(d.delta1) + (d.sign > 0 ? "_plus" : "_minus") + ".csv"),
                   [&](std::ostream& os) { write_spin_csv(os, d.trajectory); });
    for (const auto& r : run.rows)
        std::cout << "delta1 " << fmt(r.delta1) << "  E+ " << fmt(r.e_plus) << "  "
                  << (r.alignment ? to_string(*r.alignment) : "Unaligned") << "  " << to_string(r.orbit_class)
                  << '\n';
    return 0;
}

int cmd_verify(const Options& o) {
    const ExperimentConfig cfg = load(o);
    const auto checks = run_verify(cfg);
    bool ok = true;
    for (const auto& c : checks) {
        ok = ok && c.passed;
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << " [" << c.scope << "] " << c.value << " < "
                  << c.tolerance << (c.detail.empty() ? "" : "  (" + c.detail + ")") << '\n';
    }
    write_file(fs::path(cfg.output.dir) / "verify.json", [&](std::ostream& os) { write_verify_json(os, cfg, checks); });
    if (!ok) {
        for (const auto& c : checks)
            if (!c.passed) report_error("VerificationFailed", c.name + " [" + c.scope + "]: " + c.detail);
        return 2;
    }
    std::cout << "all " << checks.size() << " checks passed\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Semiclassical and quantum spectra of pseudo-Hermitian models"};
    app.require_subcommand(1);
    Options o;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "Experiment config (JSON)")->required();
        sub->add_option("--out", o.out, "Output directory (overrides output.dir)");
        sub->add_option("--format", o.format, "csv or json (overrides output.format)")
            ->check(CLI::IsMember({"csv", "json"}));
    };
    auto* spectrum = app.add_subcommand("spectrum", "Quantized levels, eigenvalues and their match");
    add_common(spectrum);
    spectrum->add_option("--engine", o.engine, "quantum, semiclassical or both")
        ->check(CLI::IsMember({"quantum", "semiclassical", "both"}));
    auto* orbit = app.add_subcommand("orbit", "Orbit of one level and its symmetry image");
    add_common(orbit);
    orbit->add_option("--family", o.family, "Family label")->required();
    auto* n_opt = orbit->add_option("--n", o.n, "Level index");
    orbit->add_option("--energy", o.energy, "Energy RE,IM instead of a level")->excludes(n_opt);
    auto* spin = app.add_subcommand("spin", "Two-level sweep across the exceptional point");
    add_common(spin);
    auto* verify = app.add_subcommand("verify", "Run every invariant on the configured model");
    add_common(verify);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*spectrum) return cmd_spectrum(o);
        if (*orbit) return cmd_orbit(o);
        if (*spin) return cmd_spin(o);
        if (*verify) return cmd_verify(o);
    } catch (const Error& e) {
        report_error(std::string(to_string(e.kind())), e.what());
        return 1;
    } catch (const std::exception& e) {
        report_error("Internal", e.what());
        return 1;
    }
    return 1;
}
