#include "orbitrace/quantizer.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <sstream>

#include "orbitrace/parallel.hpp"

namespace orbitrace {

namespace {

struct GridPoint {
    Complex E;
    Complex W;
};

std::vector<GridPoint> scan_seed_box(const ModelSpec& model, const OrbitFamily& family, const QuadratureOptions& q) {
    std::vector<GridPoint> grid;
    const SeedBox& b = family.seed;
    for (int i = 0; i < b.n_re; ++i) {
        const double re = b.n_re == 1 ? b.re_min : b.re_min + (b.re_max - b.re_min) * i / (b.n_re - 1);
        for (int j = 0; j < b.n_im; ++j) {
            const double im = b.n_im == 1 ? b.im_min : b.im_min + (b.im_max - b.im_min) * j / (b.n_im - 1);
            try {
                grid.push_back({Complex(re, im), action_and_period(model, family, Complex(re, im), q).action});
            } catch (const Error&) {
            }
        }
    }
    return grid;
}

Complex grid_seed(const std::vector<GridPoint>& grid, double target) {
    const GridPoint* best = &grid.front();
    for (const auto& g : grid)
        if (std::abs(g.W - target) < std::abs(best->W - target)) best = &g;
    return best->E;
}

double target_of(const OrbitFamily& f, int n) { return kTwoPi * (double(n) + f.mu); }

std::pair<int, int> n_range(const OrbitFamily& family, const std::vector<GridPoint>& grid) {
    if (family.n_min && family.n_max) return {*family.n_min, *family.n_max};
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& g : grid) {
        lo = std::min(lo, g.W.real());
        hi = std::max(hi, g.W.real());
    }
    if (grid.empty()) return {0, -1};
    int a = family.n_min.value_or(static_cast<int>(std::floor(lo / kTwoPi - family.mu)));
    if (family.kind == FamilyKind::Librational && !family.n_min) a = std::max(a, 0);
    int b = family.n_max.value_or(static_cast<int>(std::ceil(hi / kTwoPi - family.mu)));
    b = std::min(b, a + 80);
    return {a, b};
}

bool complex_less(Complex a, Complex b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
}

OrbitFamily make_family(std::string label, FamilyKind kind, TurningPair pair, int direction, double mu,
                        EnergyWindow window, SeedBox seed) {
    OrbitFamily f;
    f.label = std::move(label);
    f.kind = kind;
    f.pair = pair;
    f.direction = direction;
    f.mu = mu;
    f.window = window;
    f.seed = seed;
    return f;
}

}  // namespace

std::string_view to_string(LevelStatus status) {
    switch (status) {
        case LevelStatus::Converged: return "Converged";
        case LevelStatus::NoConvergence: return "NoConvergence";
        case LevelStatus::LeftValidityWindow: return "LeftValidityWindow";
        case LevelStatus::Failed: return "Failed";
    }
    return "?";
}

const OrbitFamily* find_family(const std::vector<OrbitFamily>& families, const std::string& label) {
    for (const auto& f : families)
        if (f.label == label) return &f;
    return nullptr;
}

FamilySet default_families(const ModelSpec& model, const QuadratureOptions& q) {
    using FK = FamilyKind;
    using TP = TurningPair;
    FamilySet set;
    switch (model.id()) {
        case ModelId::HarmonicOscillator: {
            auto f = make_family("oscillator", FK::Librational, TP::Central, 1, 0.5, {0.0, INFINITY},
                                 {0.5, 40.0, 0.0, 0.0, 80, 1});
            f.n_min = 0;
            f.n_max = 9;
            set.families = {f};
            break;
        }
        case ModelId::H1: {
            const auto& p = model.as<SkinParams>();
            const double top = 0.5 * p.v0 * p.length;
            auto trav_plus = make_family("traversing+", FK::Traversing, TP::Central, 1, 0.0, {}, {});
            const double ex = transition_energy(model, trav_plus, 0.02 * top, top, q);
            const double hi = ex + 8.0 * top;
            trav_plus.window = {ex, INFINITY};
            trav_plus.seed = {ex, hi, 0.0, 4.0 * p.gamma * p.v0, 80, 21};
            auto trav_minus = trav_plus;
            trav_minus.label = "traversing-";
            trav_minus.direction = -1;
            trav_minus.seed.im_min = -trav_plus.seed.im_max;
            trav_minus.seed.im_max = 0.0;
            auto confined = make_family("confined", FK::Librational, TP::Central, 1, 0.5, {0.0, ex},
                                        {0.02 * ex, ex, 0.0, 0.0, 80, 1});
            set.families = {confined, trav_plus, trav_minus};
            set.transitions = {ex};
            set.transition_family = "traversing+";
            break;
        }
        case ModelId::H2: {
            const auto& p = model.as<LatticeParams>();
            const double s = std::sqrt(p.t0 * p.t0 - p.delta * p.delta);
            const double emax = 2.0 * s + 2.0 * std::abs(p.t0);
            auto trav_plus = make_family("traversing+", FK::Traversing, TP::Central, 1, 0.0, {}, {});
            const double e_lo = transition_energy(model, trav_plus, -emax + 0.02, -0.02, q);
            const double e_hi = transition_energy(model, trav_plus, 0.02, emax - 0.02, q);
            trav_plus.window = {e_lo, e_hi};
            trav_plus.seed = {e_lo, e_hi, 0.0, 2.0 * std::abs(p.delta), 60, 21};
            auto trav_minus = trav_plus;
            trav_minus.label = "traversing-";
            trav_minus.direction = -1;
            trav_minus.seed.im_min = -trav_plus.seed.im_max;
            trav_minus.seed.im_max = 0.0;
            auto bottom = make_family("band-bottom", FK::Librational, TP::BandBottom, 1, 0.5, {-INFINITY, e_lo},
                                      {-emax + 0.01, e_lo, 0.0, 0.0, 80, 1});
            auto top = make_family("band-top", FK::Librational, TP::BandTop, 1, 0.5, {e_hi, INFINITY},
                                   {e_hi, emax - 0.01, 0.0, 0.0, 80, 1});
            set.families = {bottom, top, trav_plus, trav_minus};
            set.transitions = {e_lo, e_hi};
            set.transition_family = "traversing+";
            break;
        }
        case ModelId::H3: {
            const auto& p = model.as<DoubleWellParams>();
            const double barrier = p.g * std::pow(p.a, 4);
            auto right = make_family("right-well", FK::Librational, TP::RightWell, 1, 0.5, {}, {});
            const double ex = transition_energy(model, right, 0.5 * barrier, barrier + 4.0 * std::abs(p.gain) * p.a, q);
            const double im_span = 3.0 * std::abs(p.gain) * p.a;
            right.window = {-INFINITY, ex};
            right.seed = {0.0, ex, 0.0, im_span, 60, 31};
            auto left = right;
            left.label = "left-well";
            left.pair = TP::LeftWell;
            left.seed.im_min = -im_span;
            left.seed.im_max = 0.0;
            auto outer = make_family("outer", FK::Librational, TP::Outer, 1, 0.5, {ex, INFINITY},
                                     {ex, ex + 2.0 * barrier + 2.0 * ex, 0.0, 0.0, 120, 1});
            set.families = {left, right, outer};
            set.transitions = {ex};
            set.transition_family = "right-well";
            break;
        }
        case ModelId::H4: throw Error(ErrorKind::InvalidArgument, "H4 has no phase-space families");
    }
    return set;
}

SpectrumRecord quantize_level(const ModelSpec& model, const OrbitFamily& family, int n, Complex seed,
                              const QuantizerOptions& options) {
    SpectrumRecord rec;
    rec.family_label = family.label;
    rec.family_tags = {family.label};
    rec.n = n;
    rec.energy = seed;
    const double target = target_of(family, n);
    const EnergyWindow roam = family.window.widened(options.window_slack);
    Complex E = seed;
    try {
        for (int it = 0; it <= options.max_iterations; ++it) {
            if (!roam.contains(E.real())) {
                std::ostringstream os;
                os << "Newton left the validity window of " << family.label << " at E = " << E;
                rec.status = LevelStatus::LeftValidityWindow;
                rec.message = os.str();
                rec.energy = E;
                return rec;
            }
            const ActionPeriod ap = action_and_period(model, family, E, options.quadrature);
            const double r = std::abs(ap.action - target);
            rec.residual_history.push_back(r);
            rec.energy = E;
            rec.action = ap.action;
            rec.period = ap.period;
            rec.w_residual = r;
            if (r < options.tolerance) {
                const bool near_transition =
                    std::any_of(options.transitions.begin(), options.transitions.end(), [&](double ex) {
                        return std::abs(E.real() - ex) < options.crossover_fraction * std::abs(ex);
                    });
                if (!family.window.contains(E.real()) && !near_transition) {
                    rec.status = LevelStatus::LeftValidityWindow;
                    rec.message = "converged outside the validity window of " + family.label;
                    return rec;
                }
                rec.status = LevelStatus::Converged;
                return rec;
            }
            if (it == options.max_iterations) break;
            if (std::abs(ap.period) == 0.0) break;
            E += (target - ap.action) / ap.period;
            if (!is_finite(E)) break;
        }
        std::ostringstream os;
        os << "no convergence after " << rec.residual_history.size() << " evaluations, last E = " << rec.energy
           << ", residual " << rec.w_residual;
        rec.status = LevelStatus::NoConvergence;
        rec.message = os.str();
    } catch (const Error& e) {
        rec.status = LevelStatus::Failed;
        rec.message = std::string(to_string(e.kind())) + ": " + e.what();
    }
    return rec;
}

std::vector<SpectrumRecord> semiclassical_spectrum(const ModelSpec& model, const std::vector<OrbitFamily>& families,
                                                   const QuantizerOptions& options) {
    std::vector<std::vector<SpectrumRecord>> per_family(families.size());
    parallel_for(
        families.size(),
        [&](std::size_t fi) {
            const OrbitFamily& fam = families[fi];
            const auto grid = scan_seed_box(model, fam, options.quadrature);
            const auto [n0, n1] = n_range(fam, grid);
            std::map<int, Complex> found;
            for (int n = n0; n <= n1; ++n) {
                std::vector<Complex> seeds;
                if (found.count(n - 1) && found.count(n - 2)) seeds.push_back(2.0 * found[n - 1] - found[n - 2]);
                if (!grid.empty()) seeds.push_back(grid_seed(grid, target_of(fam, n)));
                if (seeds.empty()) continue;
                SpectrumRecord rec;
                for (Complex s : seeds) {
                    rec = quantize_level(model, fam, n, s, options);
                    if (rec.converged()) break;
                }
                if (rec.converged()) found[n] = rec.energy;
                per_family[fi].push_back(std::move(rec));
            }
        },
        options.threads);

    std::vector<SpectrumRecord> converged, failed;
    for (auto& list : per_family)
        for (auto& r : list) (r.converged() ? converged : failed).push_back(std::move(r));

    // Merge coincident levels from different families.
    std::vector<SpectrumRecord> merged;
    for (auto& r : converged) {
        auto hit = std::find_if(merged.begin(), merged.end(), [&](const SpectrumRecord& m) {
            return std::abs(m.energy - r.energy) < options.dedup_tolerance;
        });
        if (hit == merged.end()) {
            merged.push_back(std::move(r));
        } else {
            hit->degenerate = true;
            hit->family_tags.push_back(r.family_label);
        }
    }
    for (auto& r : merged)
        for (double ex : options.transitions)
            if (std::abs(r.energy.real() - ex) < options.crossover_fraction * std::abs(ex)) r.crossover = true;

    std::stable_sort(merged.begin(), merged.end(),
                     [](const SpectrumRecord& a, const SpectrumRecord& b) { return complex_less(a.energy, b.energy); });
    classify_orbits(model, families, merged, options);
    for (auto& r : failed) merged.push_back(std::move(r));
    return merged;
}

void classify_orbits(const ModelSpec& model, const std::vector<OrbitFamily>& families,
                     std::vector<SpectrumRecord>& records, const QuantizerOptions& options) {
    const std::size_t count = records.size();
    std::vector<std::unique_ptr<Orbit>> orbits(count), images(count);
    std::vector<std::string> errors(count);
    parallel_for(
        count,
        [&](std::size_t i) {
            const auto& r = records[i];
            if (!r.converged() || r.degenerate) return;
            const OrbitFamily* fam = find_family(families, r.family_label);
            if (!fam) return;
            try {
                orbits[i] = std::make_unique<Orbit>(family_orbit(model, *fam, r.energy, options.steps, options.quadrature));
                images[i] = std::make_unique<Orbit>(orbit_image(model, *orbits[i]));
            } catch (const Error& e) {
                errors[i] = std::string(to_string(e.kind())) + ": " + e.what();
            }
        },
        options.threads);

    std::vector<OrbitClass> result(count);
    std::vector<std::string> notes(count);
    parallel_for(
        count,
        [&](std::size_t i) {
            if (!orbits[i]) {
                notes[i] = errors[i];
                return;
            }
            if (orbit_distance(*orbits[i], *images[i]) < options.classify_tolerance) {
                result[i] = {OrbitClassKind::SelfSymmetric, std::nullopt};
                return;
            }
            const Complex target = std::conj(records[i].energy);
            for (std::size_t j = 0; j < count; ++j) {
                if (j == i || !orbits[j]) continue;
                if (std::abs(records[j].energy - target) > 1e-6 * (1.0 + std::abs(target))) continue;
                if (orbit_distance(*images[i], *orbits[j]) < options.classify_tolerance) {
                    result[i] = {OrbitClassKind::PairMember, j};
                    return;
                }
            }
            notes[i] = "UnpairedAsymmetricOrbit: orbit is neither self-symmetric nor matched by a sibling's orbit";
        },
        options.threads);
    for (std::size_t i = 0; i < count; ++i) {
        if (!records[i].converged() || records[i].degenerate) continue;
        records[i].orbit_class = result[i];
        if (!notes[i].empty()) records[i].message = notes[i];
    }
}

Complex greens_trace(const ModelSpec& model, const OrbitFamily& family, Complex E, const QuadratureOptions& options) {
    const ActionPeriod ap = action_and_period(model, family, E, options);
    const Complex phase = std::exp(kI * (ap.action - kTwoPi * family.mu));
    const Complex denom = 1.0 - phase;
    if (std::abs(denom) < 1e-12) {
        std::ostringstream os;
        os << family.label << ": E = " << E << " is within 1e-12 of a pole";
        throw Error(ErrorKind::PoleProximity, os.str());
    }
    return kI * ap.period * phase / denom;
}

std::vector<std::size_t> dichotomy_violations(const std::vector<SpectrumRecord>& records, double reality_tolerance) {
    std::vector<std::size_t> bad;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        if (!r.converged() || r.crossover || r.degenerate) continue;
        bool ok = false;
        if (r.orbit_class.kind == OrbitClassKind::SelfSymmetric) {
            ok = std::abs(r.energy.imag()) < reality_tolerance;
        } else if (r.orbit_class.kind == OrbitClassKind::PairMember && r.orbit_class.partner) {
            const auto& q = records[*r.orbit_class.partner];
            ok = std::abs(r.energy - std::conj(q.energy)) < reality_tolerance &&
                 q.orbit_class.kind == OrbitClassKind::PairMember;
        }
        if (!ok) bad.push_back(i);
    }
    return bad;
}

}  // namespace orbitrace
