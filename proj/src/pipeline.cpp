#include "orbitrace/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include <json.hpp>

#include "orbitrace/parallel.hpp"

namespace orbitrace {
namespace {

using ojson = nlohmann::ordered_json;

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_text(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c == '\n' ? ' ' : c;
    }
    return out + "\"";
}

ojson cjson(Complex z) { return ojson::array({z.real(), z.imag()}); }

std::string describe(const Error& e) { return std::string(to_string(e.kind())) + ": " + e.what(); }

std::string join_tags(const std::vector<std::string>& tags) {
    std::string out;
    for (const auto& t : tags) out += (out.empty() ? "" : ";") + t;
    return out;
}

std::vector<const SpectrumRecord*> lowest_matched(const std::vector<SpectrumRecord>& records, std::size_t levels) {
    std::vector<const SpectrumRecord*> m;
    for (const auto& r : records)
        if (r.match_error) m.push_back(&r);
    std::stable_sort(m.begin(), m.end(), [](const SpectrumRecord* a, const SpectrumRecord* b) {
        return std::abs(a->energy) < std::abs(b->energy);
    });
    if (m.size() > levels) m.resize(levels);
    return m;
}

Check make_check(std::string name, std::string scope, double value, double tolerance, std::string detail = {}) {
    Check c;
    c.name = std::move(name);
    c.scope = std::move(scope);
    c.value = value;
    c.tolerance = tolerance;
    c.passed = std::isfinite(value) && value < tolerance;
    c.detail = std::move(detail);
    return c;
}

Check failed_check(std::string name, std::string scope, double tolerance, const std::string& detail) {
    Check c = make_check(std::move(name), std::move(scope), INFINITY, tolerance, detail);
    c.passed = false;
    return c;
}

// Families exchanged by the symmetry map.
std::vector<std::pair<const OrbitFamily*, const OrbitFamily*>> family_pairs(const std::vector<OrbitFamily>& families) {
    std::vector<std::pair<const OrbitFamily*, const OrbitFamily*>> out;
    for (const auto& f : families) {
        for (const auto& g : families) {
            const bool traversing = f.kind == FamilyKind::Traversing && g.kind == FamilyKind::Traversing &&
                                    f.direction == 1 && g.direction == -1;
            const bool wells = f.kind == FamilyKind::Librational && g.kind == FamilyKind::Librational &&
                               f.pair == TurningPair::RightWell && g.pair == TurningPair::LeftWell;
            if (traversing || wells) out.emplace_back(&f, &g);
        }
    }
    return out;
}

// Up to `count` converged, unflagged levels of a family, spread over its n-range.
std::vector<Complex> family_energies(const std::vector<SpectrumRecord>& records, const std::string& label,
                                     std::size_t count) {
    std::vector<const SpectrumRecord*> own;
    for (const auto& r : records)
        if (r.converged() && !r.crossover && !r.degenerate && r.family_label == label) own.push_back(&r);
    std::sort(own.begin(), own.end(), [](auto a, auto b) { return a->n < b->n; });
    std::vector<Complex> out;
    if (own.empty()) return out;
    if (own.size() <= count) {
        for (auto* r : own) out.push_back(r->energy);
        return out;
    }
    for (std::size_t k = 0; k < count; ++k) out.push_back(own[k * (own.size() - 1) / (count - 1)]->energy);
    return out;
}

PhasePoint random_point(std::mt19937_64& rng, double radius) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto draw = [&] { return std::polar(radius * std::sqrt(u(rng)), kTwoPi * u(rng)); };
    const Complex x = draw();
    return {x, draw()};
}

void phase_space_checks(const ExperimentConfig& cfg, std::vector<Check>& out) {
    const ModelSpec& model = *cfg.model;
    const CheckTolerances& tol = cfg.tolerances;
    std::mt19937_64 rng(20240611);
    double worst = 0.0;
    for (int i = 0; i < tol.symmetry_points;) {
        const PhasePoint z = random_point(rng, 5.0);
        if (model.id() == ModelId::H1 && std::abs(z.x.real()) < 1e-3) continue;
        worst = std::max(worst, symmetry_residual(model, z));
        ++i;
    }
    out.push_back(make_check("symmetry_residual", "model", worst, tol.symmetry,
                             std::to_string(tol.symmetry_points) + " random points"));

    worst = 0.0;
    for (int i = 0; i < 100;) {
        const PhasePoint z = random_point(rng, 5.0);
        if (model.id() == ModelId::H1 && std::abs(z.x.real()) < 1e-2) continue;
        const Gradient g = gradient(model, z);
        const double h = 1e-5;
        const Complex dx =
            (hamiltonian(model, {z.x + h, z.p}) - hamiltonian(model, {z.x - h, z.p})) / (2.0 * h);
        const Complex dp =
            (hamiltonian(model, {z.x, z.p + h}) - hamiltonian(model, {z.x, z.p - h})) / (2.0 * h);
        worst = std::max(worst, std::abs(dx - g.dx) / std::max(1.0, std::abs(g.dx)));
        worst = std::max(worst, std::abs(dp - g.dp) / std::max(1.0, std::abs(g.dp)));
        ++i;
    }
    out.push_back(make_check("gradient", "model", worst, tol.gradient, "central differences at 100 points"));
}

ExperimentConfig hermitian_limit(const ExperimentConfig& cfg) {
    ExperimentConfig h = cfg;
    switch (cfg.model_id) {
        case ModelId::H1: {
            auto p = cfg.model->as<SkinParams>();
            p.gamma = 0.0;
            h.model = ModelSpec::skin(p);
            break;
        }
        case ModelId::H2: {
            auto p = cfg.model->as<LatticeParams>();
            p.delta = 0.0;
            h.model = ModelSpec::lattice(p);
            break;
        }
        case ModelId::H3: {
            auto p = cfg.model->as<DoubleWellParams>();
            p.gain = 0.0;
            h.model = ModelSpec::double_well(p);
            break;
        }
        default: break;
    }
    return h;
}

void quantum_checks(const ExperimentConfig& cfg, const std::vector<Complex>& spectrum, const QuantumOperator& op,
                    std::vector<Check>& out) {
    const CheckTolerances& tol = cfg.tolerances;
    out.push_back(make_check("phs_residual", "quantum", phs_residual(op), tol.phs, op.scheme));
    out.push_back(make_check("conjugation_closure", "quantum", conjugation_closure(spectrum), tol.closure,
                             std::to_string(spectrum.size()) + " eigenvalues"));

    std::vector<Complex> low = spectrum;
    std::stable_sort(low.begin(), low.end(), [](Complex a, Complex b) { return std::abs(a) < std::abs(b); });
    if (low.size() > 10) low.resize(10);
    const CMatrix hess = hessenberg(op.h);
    const double scale = op.h.frobenius_norm();
    double worst = 0.0;
    for (Complex l : low) worst = std::max(worst, singular_witness(hess, l) / scale);
    out.push_back(make_check("eigen_witness", "quantum", worst, tol.witness, "10 smallest |E|, relative to |H|_F"));

    const QuantumOperator small = build_operator(cfg, cfg.quantum.propagator_grid);
    worst = 0.0;
    std::string where;
    for (Complex t : cfg.quantum.propagator_times) {
        const double r = propagator_residual(small, t);
        if (!(r <= worst)) {
            worst = r;
            std::ostringstream os;
            os << "worst at t = " << t.real() << (t.imag() < 0 ? "" : "+") << t.imag() << "i";
            where = os.str();
        }
    }
    out.push_back(make_check("propagator_residual", "quantum", worst, tol.propagator,
                             "dim " + std::to_string(small.dim()) + ", " + where));

    const ExperimentConfig herm = hermitian_limit(cfg);
    const auto hspec = eigenvalues(build_operator(herm, cfg.quantum.propagator_grid));
    worst = 0.0;
    for (Complex l : hspec) worst = std::max(worst, std::abs(l.imag()));
    out.push_back(make_check("hermitian_limit", "quantum", worst, 1e-10, "max |Im E| with the non-Hermitian term off"));
}

void semiclassical_checks(const ExperimentConfig& cfg, const SpectrumRun& run, std::vector<Check>& out) {
    const ModelSpec& model = *cfg.model;
    const CheckTolerances& tol = cfg.tolerances;
    const QuadratureOptions& q = cfg.quantizer.quadrature;

    std::size_t converged = 0;
    std::vector<Complex> energies;
    double pole = 0.0;
    for (const auto& r : run.records) {
        if (!r.converged()) continue;
        ++converged;
        energies.push_back(r.energy);
        const OrbitFamily* f = find_family(run.families, r.family_label);
        pole = std::max(pole, std::abs(1.0 - std::exp(kI * (r.action - kTwoPi * f->mu))));
    }
    if (converged == 0) {
        out.push_back(failed_check("semiclassical_levels", "semiclassical", 1.0, "no level converged"));
        return;
    }
    std::ostringstream dich;
    dich << run.violations.size() << " violations among " << converged << " converged levels";
    for (std::size_t i : run.violations) {
        const auto& r = run.records[i];
        dich << "; " << r.family_label << " n=" << r.n;
    }
    Check d = make_check("dichotomy", "semiclassical", static_cast<double>(run.violations.size()), 0.5, dich.str());
    out.push_back(d);
    out.push_back(make_check("pole_zero", "semiclassical", pole, tol.dichotomy, "|1 - exp(i(W - 2 pi mu))|"));
    out.push_back(make_check("spectrum_conjugation", "semiclassical", conjugation_closure(energies), tol.conjugation));

    if (model.id() == ModelId::HarmonicOscillator) {
        const double w = model.as<OscillatorParams>().omega;
        double worst = 0.0;
        for (const auto& r : run.records)
            if (r.converged()) worst = std::max(worst, std::abs(r.energy - w * (2.0 * r.n + 1.0)));
        out.push_back(make_check("oscillator_exact", "semiclassical", worst, tol.dichotomy, "E_n = omega (2n + 1)"));
    }

    for (auto [f, g] : family_pairs(run.families)) {
        const auto ends = family_energies(run.records, f->label, 1u << 20);
        const std::string scope = f->label + "/" + g->label;
        if (ends.size() < 2) {
            out.push_back(failed_check("action_conjugation", scope, tol.conjugation, "fewer than two converged levels"));
            continue;
        }
        double wmax = 0.0, tmax = 0.0;
        std::string err;
        const int m = tol.conjugation_points;
        for (int i = 0; i < m; ++i) {
            const Complex E = ends.front() + (ends.back() - ends.front()) * (double(i) / (m - 1));
            try {
                const ActionPeriod a = action_and_period(model, *f, E, q);
                const ActionPeriod b = action_and_period(model, *g, std::conj(E), q);
                wmax = std::max(wmax, std::abs(b.action - std::conj(a.action)) / (1.0 + std::abs(a.action)));
                tmax = std::max(tmax, std::abs(b.period - std::conj(a.period)) / (1.0 + std::abs(a.period)));
            } catch (const Error& e) {
                err = describe(e);
                wmax = tmax = INFINITY;
            }
        }
        const std::string detail = std::to_string(m) + " energies" + (err.empty() ? "" : "; " + err);
        out.push_back(make_check("action_conjugation", scope, wmax, tol.conjugation, detail));
        out.push_back(make_check("period_conjugation", scope, tmax, tol.conjugation, detail));
    }

    for (const auto& f : run.families) {
        const auto es = family_energies(run.records, f.label, 5);
        if (es.empty()) continue;
        double slope = 0.0, quad = 0.0;
        std::string err;
        QuadratureOptions fine = q;
        fine.nodes = 2 * q.nodes;
        for (Complex E : es) {
            try {
                const double h = 1e-3 * std::max(1.0, std::abs(E));
                auto W = [&](double k) { return action_and_period(model, f, E + k * h, q).action; };
                const Complex dW = (W(-2) - 8.0 * W(-1) + 8.0 * W(1) - W(2)) / (12.0 * h);
                const ActionPeriod ap = action_and_period(model, f, E, q);
                slope = std::max(slope, std::abs(dW - ap.period) / std::abs(ap.period));
                const Complex w2 = action_and_period(model, f, E, fine).action;
                quad = std::max(quad, std::abs(w2 - ap.action) / std::max(1.0, std::abs(ap.action)));
            } catch (const Error& e) {
                err = describe(e);
                slope = quad = INFINITY;
            }
        }
        const std::string detail = std::to_string(es.size()) + " levels" + (err.empty() ? "" : "; " + err);
        out.push_back(make_check("action_slope", f.label, slope, tol.slope, "dW/dE vs T, " + detail));
        out.push_back(make_check("quadrature_convergence", f.label, quad, tol.quadrature,
                                 std::to_string(q.nodes) + " vs " + std::to_string(fine.nodes) + " nodes, " + detail));
    }
}

void match_checks(const ExperimentConfig& cfg, const SpectrumRun& run, std::vector<Check>& out) {
    const CheckTolerances& tol = cfg.tolerances;
    const auto levels = static_cast<std::size_t>(tol.match_levels);
    const MatchSummary s = summarize_matches(run.records, levels);
    const auto per = family_matches(run.records, run.families, levels);
    std::ostringstream os;
    os << s.levels << " lowest |E| matched levels, median " << s.median_error << ", max " << s.max_error;
    std::string failing;
    for (const auto& f : per) {
        std::ostringstream d;
        d << f.levels << " levels (" << f.crossover << " in the crossover window), mu = " << f.mu;
        Check c = make_check("quantum_match", f.label, f.max_error, tol.match, d.str());
        if (!c.passed) {
            std::ostringstream m;
            m << f.label << " (mu = " << f.mu << ")";
            failing += (failing.empty() ? "" : ", ") + m.str();
        }
        out.push_back(c);
    }
    if (!failing.empty()) os << "; failing families: " << failing;
    Check all = make_check("quantum_match", "all", s.max_error, tol.match, os.str());
    if (s.levels < levels) {
        all.passed = false;
        all.detail += "; fewer matched levels than required";
    }
    out.push_back(all);
}

std::vector<Check> spin_checks(const ExperimentConfig& cfg) {
    const SpinConfig& sc = *cfg.spin;
    const CheckTolerances& tol = cfg.tolerances;
    std::vector<Check> out;
    const auto rows = pt_sweep(sc.t1, sc.delta1, sc.sweep);

    double eig = 0.0, phs = 0.0, prop = 0.0;
    for (const auto& row : rows) {
        const QuantumOperator op = build_h4(sc.t1, row.delta1);
        const auto ev = eigenvalues(op);
        for (Complex a : {row.e_plus, row.e_minus}) {
            double best = INFINITY;
            for (Complex b : ev) best = std::min(best, std::abs(a - b));
            eig = std::max(eig, best);
        }
        phs = std::max(phs, phs_residual(op));
        for (Complex t : cfg.quantum.propagator_times) prop = std::max(prop, propagator_residual(op, t));
    }
    out.push_back(make_check("spin_eigenvalues", "sweep", eig, tol.spin_eigen, "analytic vs 2x2 eigensolver"));
    out.push_back(make_check("phs_residual", "sweep", phs, tol.phs));
    out.push_back(make_check("propagator_residual", "sweep", prop, tol.propagator));

    std::size_t bad_spec = 0, bad_align = 0, bad_class = 0, excluded = 0;
    double casimir = 0.0, period = 0.0;
    std::string notes;
    for (const auto& row : rows) {
        if (row.alignment == SpinAlignment::Divergent) {
            ++excluded;
            continue;
        }
        const bool below = row.delta1 < sc.t1;
        const Complex e = row.e_plus;
        const bool spec_ok = below ? std::abs(e.imag()) < tol.spin_eigen && std::abs(row.e_minus.imag()) < tol.spin_eigen
                                   : std::abs(e.real()) < tol.spin_eigen && std::abs(row.e_minus - std::conj(e)) < tol.spin_eigen;
        if (!spec_ok) ++bad_spec;
        const auto want_align = below ? SpinAlignment::AlignedWithM : SpinAlignment::AlignedWithIM;
        if (row.alignment != want_align) ++bad_align;
        const auto want_class = below ? OrbitClassKind::SelfSymmetric : OrbitClassKind::PairMember;
        if (row.orbit_class != want_class) {
            ++bad_class;
            notes += (notes.empty() ? "" : "; ") + num(row.delta1) + ": " + std::string(to_string(row.orbit_class));
        }
        casimir = std::max(casimir, row.casimir_drift);
        const SpinModel m{sc.t1, row.delta1};
        const auto start = representative_orbit(m, 1);
        const Complex measured = measured_period(m, start.n0, start.contour.period());
        const double expected = kTwoPi / std::sqrt(std::abs(sc.t1 * sc.t1 - row.delta1 * row.delta1));
        period = std::max(period, std::abs(std::abs(measured) - expected) / expected);
    }
    const std::string ex = std::to_string(excluded) + " divergent rows excluded";
    out.push_back(make_check("spin_spectrum", "sweep", static_cast<double>(bad_spec), 0.5,
                             "real below t1, conjugate imaginary pair above; " + ex));
    out.push_back(make_check("spin_alignment", "sweep", static_cast<double>(bad_align), 0.5,
                             "M below t1, iM above; " + ex));
    out.push_back(make_check("spin_dichotomy", "sweep", static_cast<double>(bad_class), 0.5,
                             (notes.empty() ? std::string() : notes + "; ") + ex));
    out.push_back(make_check("casimir", "sweep", casimir, tol.casimir, "bilinear n.n drift"));
    out.push_back(make_check("precession_period", "sweep", period, tol.period, "relative to 2 pi / sqrt|t1^2 - delta1^2|"));
    return out;
}

}  // namespace

Engine parse_engine(const std::string& name) {
    if (name == "quantum") return Engine::Quantum;
    if (name == "semiclassical") return Engine::Semiclassical;
    if (name == "both") return Engine::Both;
    throw Error(ErrorKind::Config, "--engine: expected quantum, semiclassical or both, got '" + name + "'");
}

QuantumOperator build_operator(const ExperimentConfig& cfg, std::optional<std::size_t> grid) {
    const std::size_t g = grid.value_or(cfg.quantum.grid);
    switch (cfg.model_id) {
        case ModelId::HarmonicOscillator:
            return build_oscillator(cfg.model->as<OscillatorParams>().omega,
                                    cfg.quantum.extent > 0.0 ? cfg.quantum.extent : 8.0, g ? g : 256);
        case ModelId::H1: return build_h1(cfg.model->as<SkinParams>(), g ? g : 512);
        case ModelId::H2: return build_h2(cfg.model->as<LatticeParams>());
        case ModelId::H3: {
            const auto& p = cfg.model->as<DoubleWellParams>();
            return build_h3(p, cfg.quantum.extent > 0.0 ? cfg.quantum.extent : 3.0 * p.a, g ? g : 256);
        }
        case ModelId::H4: return build_h4(cfg.spin->t1, cfg.spin->delta1.front());
    }
    throw Error(ErrorKind::InvalidArgument, "unknown model");
}

MatchSummary summarize_matches(const std::vector<SpectrumRecord>& records, std::size_t levels) {
    const auto m = lowest_matched(records, levels);
    MatchSummary s;
    s.levels = m.size();
    if (m.empty()) return s;
    std::vector<double> e;
    for (auto* r : m) e.push_back(*r->match_error);
    std::sort(e.begin(), e.end());
    s.max_error = e.back();
    s.median_error = e.size() % 2 ? e[e.size() / 2] : 0.5 * (e[e.size() / 2 - 1] + e[e.size() / 2]);
    return s;
}

std::vector<FamilyMatch> family_matches(const std::vector<SpectrumRecord>& records,
                                        const std::vector<OrbitFamily>& families, std::size_t levels) {
    std::vector<FamilyMatch> out;
    const auto m = lowest_matched(records, levels);
    for (const auto& f : families) {
        FamilyMatch fm;
        fm.label = f.label;
        fm.mu = f.mu;
        for (auto* r : m) {
            if (std::find(r->family_tags.begin(), r->family_tags.end(), f.label) == r->family_tags.end()) continue;
            ++fm.levels;
            fm.crossover += r->crossover;
            fm.max_error = std::max(fm.max_error, *r->match_error);
        }
        if (fm.levels) out.push_back(fm);
    }
    return out;
}

SpectrumRun run_spectrum(const ExperimentConfig& cfg, Engine engine) {
    if (!cfg.model) throw Error(ErrorKind::InvalidArgument, "spectrum: the two-level model is handled by the spin command");
    SpectrumRun run;
    if (engine != Engine::Quantum) {
        try {
            FamilySet set = configured_families(cfg);
            run.families = set.families;
            run.transitions = set.transitions;
            QuantizerOptions opts = cfg.quantizer;
            opts.transitions = set.transitions;
            run.records = semiclassical_spectrum(*cfg.model, set.families, opts);
            run.violations = dichotomy_violations(run.records, cfg.tolerances.dichotomy);
            for (const auto& r : run.records)
                if (!r.converged() && r.status != LevelStatus::LeftValidityWindow)
                    run.errors.push_back({"semiclassical", std::string(to_string(r.status)),
                                          r.family_label + " n=" + std::to_string(r.n) + ": " + r.message});
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::Config) throw;
            run.errors.push_back({"semiclassical", std::string(to_string(e.kind())), e.what()});
        }
    }
    if (engine != Engine::Semiclassical) {
        try {
            run.quantum = eigenvalues(build_operator(cfg));
        } catch (const Error& e) {
            run.errors.push_back({"quantum", std::string(to_string(e.kind())), e.what()});
        }
    }
    if (engine == Engine::Both && !run.quantum.empty() && !run.records.empty()) {
        run.unmatched = match_spectra(run.quantum, run.records).unmatched;
        run.summary = summarize_matches(run.records, static_cast<std::size_t>(cfg.tolerances.match_levels));
    }
    return run;
}

OrbitRun run_orbit(const ExperimentConfig& cfg, const std::string& label, std::optional<int> n,
                   std::optional<Complex> energy) {
    if (!cfg.model) throw Error(ErrorKind::InvalidArgument, "orbit: the two-level model is handled by the spin command");
    if (n.has_value() == energy.has_value())
        throw Error(ErrorKind::InvalidArgument, "orbit: give exactly one of a level index or an energy");
    const FamilySet set = configured_families(cfg);
    const OrbitFamily* fam = find_family(set.families, label);
    if (!fam) {
        std::string known;
        for (const auto& f : set.families) known += (known.empty() ? "" : ", ") + f.label;
        throw Error(ErrorKind::InvalidArgument, "orbit: unknown family '" + label + "' (known: " + known + ")");
    }
    OrbitRun run;
    if (n) {
        OrbitFamily one = *fam;
        one.n_min = one.n_max = *n;
        QuantizerOptions opts = cfg.quantizer;
        opts.transitions = set.transitions;
        const auto recs = semiclassical_spectrum(*cfg.model, {one}, opts);
        if (recs.empty()) throw Error(ErrorKind::NoConvergence, "orbit: no seed for " + label + " n=" + std::to_string(*n));
        run.level = recs.front();
        if (!run.level.converged())
            throw Error(ErrorKind::NoConvergence, "orbit: " + label + " n=" + std::to_string(*n) + ": " + run.level.message);
    } else {
        run.level.family_label = label;
        run.level.family_tags = {label};
        run.level.energy = *energy;
        const ActionPeriod ap = action_and_period(*cfg.model, *fam, *energy, cfg.quantizer.quadrature);
        run.level.action = ap.action;
        run.level.period = ap.period;
        run.level.status = LevelStatus::Converged;
        run.level.message = "energy given, not quantized";
    }
    const OrbitStart start = orbit_start(*cfg.model, *fam, run.level.energy, cfg.quantizer.steps, cfg.quantizer.quadrature);
    run.orbit = integrate(*cfg.model, start.z0, start.contour, cfg.quantizer.steps, cfg.integrator);
    run.orbit.action = run.level.action;
    run.orbit.family_label = label;
    run.image = orbit_image(*cfg.model, run.orbit);
    run.distance = orbit_distance(run.orbit, run.image);
    run.closure = closure_error(run.orbit);
    run.energy_drift = orbitrace::energy_drift(*cfg.model, run.orbit);
    return run;
}

SpinRun run_spin(const ExperimentConfig& cfg) {
    if (!cfg.spin) throw Error(ErrorKind::InvalidArgument, "spin: config model must be h4");
    const SpinConfig& sc = *cfg.spin;
    SpinRun run;
    run.rows = pt_sweep(sc.t1, sc.delta1, sc.sweep);
    std::vector<double> picks{sc.delta1.front()};
    if (sc.delta1.back() != sc.delta1.front()) picks.push_back(sc.delta1.back());
    for (double d : picks) {
        const SpinModel m{sc.t1, d};
        if (std::abs(d - sc.t1) < sc.sweep.transition_window * std::abs(sc.t1)) continue;
        for (int sign : {1, -1}) {
            const auto start = representative_orbit(m, sign);
            run.dumps.push_back({d, sign, bloch_integrate(m, start.n0, start.contour, sc.sweep.steps)});
        }
    }
    return run;
}

std::vector<Check> run_verify(const ExperimentConfig& cfg) {
    if (cfg.spin) return spin_checks(cfg);
    std::vector<Check> out;
    auto guard = [&](const std::string& name, auto&& body) {
        try {
            body();
        } catch (const Error& e) {
            out.push_back(failed_check(name, "error", 0.0, describe(e)));
        }
    };
    guard("phase_space", [&] { phase_space_checks(cfg, out); });
    const SpectrumRun run = run_spectrum(cfg, Engine::Both);
    for (const auto& e : run.errors)
        if (e.stage == "quantum") out.push_back(failed_check("quantum_spectrum", "quantum", 0.0, e.kind + ": " + e.message));
    if (!run.quantum.empty()) guard("quantum", [&] { quantum_checks(cfg, run.quantum, build_operator(cfg), out); });
    guard("semiclassical", [&] { semiclassical_checks(cfg, run, out); });
    if (run.summary) match_checks(cfg, run, out);
    return out;
}

void write_spectrum_csv(std::ostream& os, const std::vector<SpectrumRecord>& records) {
    os << "# semiclassical spectrum; columns: family, tags (';'-joined), n, status, E_re, E_im, W_re, W_im, T_re, T_im, "
          "w_residual, iterations, class, partner, crossover, degenerate, Eq_re, Eq_im, match_error, message\n";
    os << "family,tags,n,status,E_re,E_im,W_re,W_im,T_re,T_im,w_residual,iterations,class,partner,crossover,degenerate,"
          "Eq_re,Eq_im,match_error,message\n";
    for (const auto& r : records) {
        os << csv_text(r.family_label) << ',' << csv_text(join_tags(r.family_tags)) << ',' << r.n << ','
           << to_string(r.status) << ',' << num(r.energy.real()) << ',' << num(r.energy.imag()) << ','
           << num(r.action.real()) << ',' << num(r.action.imag()) << ',' << num(r.period.real()) << ','
           << num(r.period.imag()) << ',' << num(r.w_residual) << ',' << r.residual_history.size() << ','
           << to_string(r.orbit_class.kind) << ',' << (r.orbit_class.partner ? std::to_string(*r.orbit_class.partner) : "")
           << ',' << int(r.crossover) << ',' << int(r.degenerate) << ','
           << (r.quantum_match ? num(r.quantum_match->real()) : "") << ','
           << (r.quantum_match ? num(r.quantum_match->imag()) : "") << ','
           << (r.match_error ? num(*r.match_error) : "") << ',' << csv_text(r.message) << '\n';
    }
}

void write_quantum_csv(std::ostream& os, const std::vector<Complex>& eigenvalues) {
    os << "# quantum spectrum sorted by (Re, Im); columns: index, E_re, E_im\n";
    os << "index,E_re,E_im\n";
    for (std::size_t i = 0; i < eigenvalues.size(); ++i)
        os << i << ',' << num(eigenvalues[i].real()) << ',' << num(eigenvalues[i].imag()) << '\n';
}

namespace {

ojson record_json(const SpectrumRecord& r) {
    ojson j;
    j["family"] = r.family_label;
    j["tags"] = r.family_tags;
    j["n"] = r.n;
    j["status"] = std::string(to_string(r.status));
    j["energy"] = cjson(r.energy);
    j["action"] = cjson(r.action);
    j["period"] = cjson(r.period);
    j["w_residual"] = r.w_residual;
    j["residual_history"] = r.residual_history;
    j["class"] = std::string(to_string(r.orbit_class.kind));
    j["partner"] = r.orbit_class.partner ? ojson(*r.orbit_class.partner) : ojson(nullptr);
    j["crossover"] = r.crossover;
    j["degenerate"] = r.degenerate;
    j["quantum_match"] = r.quantum_match ? cjson(*r.quantum_match) : ojson(nullptr);
    j["match_error"] = r.match_error ? ojson(*r.match_error) : ojson(nullptr);
    j["message"] = r.message;
    return j;
}

ojson summary_json(const SpectrumRun& run) {
    ojson j;
    j["levels"] = run.summary->levels;
    j["median_match_error"] = run.summary->median_error;
    j["max_match_error"] = run.summary->max_error;
    j["dichotomy"] = run.violations.empty() ? "pass" : "fail";
    j["dichotomy_violations"] = run.violations.size();
    return j;
}

ojson errors_json(const std::vector<RunError>& errors) {
    ojson arr = ojson::array();
    for (const auto& e : errors) arr.push_back({{"stage", e.stage}, {"kind", e.kind}, {"message", e.message}});
    return arr;
}

}  // namespace

void write_spectrum_json(std::ostream& os, const ExperimentConfig& cfg, const SpectrumRun& run) {
    ojson j;
    j["experiment"] = cfg.name;
    j["model"] = std::string(to_string(cfg.model_id));
    j["transitions"] = run.transitions;
    ojson fams = ojson::array();
    for (const auto& f : run.families)
        fams.push_back({{"label", f.label},
                        {"kind", std::string(to_string(f.kind))},
                        {"mu", f.mu},
                        {"window", {std::isfinite(f.window.lo) ? ojson(f.window.lo) : ojson(nullptr),
                                    std::isfinite(f.window.hi) ? ojson(f.window.hi) : ojson(nullptr)}}});
    j["families"] = fams;
    ojson recs = ojson::array();
    for (const auto& r : run.records) recs.push_back(record_json(r));
    j["records"] = recs;
    ojson q = ojson::array();
    for (Complex z : run.quantum) q.push_back(cjson(z));
    j["quantum"] = q;
    if (run.summary) j["summary"] = summary_json(run);
    j["errors"] = errors_json(run.errors);
    os << j.dump(2) << '\n';
}

void write_match_report(std::ostream& os, const SpectrumRun& run) {
    ojson levels = ojson::array();
    for (const auto& r : run.records) {
        if (!r.match_error) continue;
        levels.push_back({{"family", r.family_label},
                          {"n", r.n},
                          {"energy", cjson(r.energy)},
                          {"quantum", cjson(*r.quantum_match)},
                          {"delta", cjson(*r.quantum_match - r.energy)},
                          {"match_error", *r.match_error},
                          {"class", std::string(to_string(r.orbit_class.kind))},
                          {"crossover", r.crossover}});
    }
    ojson unmatched = ojson::array();
    for (Complex z : run.unmatched) unmatched.push_back(cjson(z));
    ojson j;
    j["levels"] = levels;
    j["unmatched"] = unmatched;
    if (run.summary) j["summary"] = summary_json(run);
    os << j.dump(2) << '\n';
}

void write_orbit_csv(std::ostream& os, const Orbit& orbit) {
    os << "# orbit of " << (orbit.family_label.empty() ? "?" : orbit.family_label) << " at E = " << num(orbit.energy.real())
       << (orbit.energy.imag() < 0 ? "" : "+") << num(orbit.energy.imag())
       << "i; columns: s, t_re, t_im, x_re, x_im, p_re, p_im\n";
    os << "s,t_re,t_im,x_re,x_im,p_re,p_im\n";
    for (const auto& s : orbit.samples)
        os << num(s.s) << ',' << num(s.t.real()) << ',' << num(s.t.imag()) << ',' << num(s.z.x.real()) << ','
           << num(s.z.x.imag()) << ',' << num(s.z.p.real()) << ',' << num(s.z.p.imag()) << '\n';
}

void write_orbit_json(std::ostream& os, const OrbitRun& run) {
    ojson j;
    j["family"] = run.level.family_label;
    j["n"] = run.level.n;
    j["energy"] = cjson(run.level.energy);
    j["action"] = cjson(run.level.action);
    j["period"] = cjson(run.orbit.contour.period());
    j["line_action"] = cjson(run.orbit.line_action);
    j["orbit_distance"] = run.distance;
    j["closure_error"] = run.closure;
    j["energy_drift"] = run.energy_drift;
    j["samples"] = run.orbit.samples.size();
    os << j.dump(2) << '\n';
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    os << "# two-level sweep; columns: delta1, E_plus_re, E_plus_im, E_minus_re, E_minus_im, alignment, class, "
          "casimir_drift, closure, note\n";
    os << "delta1,E_plus_re,E_plus_im,E_minus_re,E_minus_im,alignment,class,casimir_drift,closure,note\n";
    for (const auto& r : rows)
        os << num(r.delta1) << ',' << num(r.e_plus.real()) << ',' << num(r.e_plus.imag()) << ','
           << num(r.e_minus.real()) << ',' << num(r.e_minus.imag()) << ','
           << (r.alignment ? std::string(to_string(*r.alignment)) : "Unaligned") << ',' << to_string(r.orbit_class)
           << ',' << num(r.casimir_drift) << ',' << num(r.closure) << ',' << csv_text(r.note) << '\n';
}

void write_sweep_json(std::ostream& os, const std::vector<SweepRow>& rows) {
    ojson arr = ojson::array();
    for (const auto& r : rows)
        arr.push_back({{"delta1", r.delta1},
                       {"e_plus", cjson(r.e_plus)},
                       {"e_minus", cjson(r.e_minus)},
                       {"alignment", r.alignment ? std::string(to_string(*r.alignment)) : "Unaligned"},
                       {"class", std::string(to_string(r.orbit_class))},
                       {"casimir_drift", r.casimir_drift},
                       {"closure", r.closure},
                       {"note", r.note}});
    os << ojson{{"rows", arr}}.dump(2) << '\n';
}

void write_spin_csv(std::ostream& os, const SpinTrajectory& trajectory) {
    os << "# spin trajectory; columns: s, t_re, t_im, n_x_re, n_x_im, n_y_re, n_y_im, n_z_re, n_z_im\n";
    os << "s,t_re,t_im,n_x_re,n_x_im,n_y_re,n_y_im,n_z_re,n_z_im\n";
    for (const auto& s : trajectory.samples)
        os << num(s.s) << ',' << num(s.t.real()) << ',' << num(s.t.imag()) << ',' << num(s.n.x.real()) << ','
           << num(s.n.x.imag()) << ',' << num(s.n.y.real()) << ',' << num(s.n.y.imag()) << ',' << num(s.n.z.real())
           << ',' << num(s.n.z.imag()) << '\n';
}

void write_verify_json(std::ostream& os, const ExperimentConfig& cfg, const std::vector<Check>& checks) {
    ojson arr = ojson::array();
    bool ok = true;
    for (const auto& c : checks) {
        ok = ok && c.passed;
        arr.push_back({{"name", c.name},
                       {"scope", c.scope},
                       {"passed", c.passed},
                       {"value", c.value},
                       {"tolerance", c.tolerance},
                       {"detail", c.detail}});
    }
    os << ojson{{"experiment", cfg.name}, {"passed", ok}, {"checks", arr}}.dump(2) << '\n';
}

void write_error_json(std::ostream& os, const std::vector<RunError>& errors) {
    os << ojson{{"errors", errors_json(errors)}}.dump(2) << '\n';
}

}  // namespace orbitrace
