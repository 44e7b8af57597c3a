#include "orbitrace/action.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>

namespace orbitrace {

namespace {

struct Rule {
    std::vector<double> x;
    std::vector<double> w;
};

Rule compute_gauss_legendre(std::size_t n) {
    Rule r{std::vector<double>(n), std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        double z = std::cos(kPi * (double(i) + 0.75) / (double(n) + 0.5));
        double dp = 1.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (std::size_t j = 2; j <= n; ++j) {
                const double p2 = ((2.0 * double(j) - 1.0) * z * p1 - (double(j) - 1.0) * p0) / double(j);
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1.0;
            dp = double(n) * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        r.x[i] = -z;
        r.w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    return r;
}

const Rule& gauss_legendre(std::size_t n) {
    static std::mutex mutex;
    static std::map<std::size_t, Rule> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, compute_gauss_legendre(n)).first;
    return it->second;
}

std::optional<double> momentum_period(const ModelSpec& m) { return m.momentum_period(); }

double wrap_re(double v, std::optional<double> period) {
    return period ? v - *period * std::round(v / *period) : v;
}

Complex wrap(Complex v, std::optional<double> period) { return {wrap_re(v.real(), period), v.imag()}; }

Complex unwrap_near(Complex v, Complex ref, std::optional<double> period) { return ref + wrap(v - ref, period); }

double segment_distance(Complex pt, Complex a, Complex b) {
    const Complex d = b - a;
    const double t = std::clamp(std::real(std::conj(d) * (pt - a)) / std::norm(d), 0.0, 1.0);
    return std::abs(pt - (a + t * d));
}

// Quadrature path in the complex x-plane parameterised by u.
// Librational: u = theta in [0, pi], x = c - h cos(theta).
// Traversing: u in [0, 1], x = start + span * u.
struct Path {
    bool librational = true;
    Complex c, h;
    Complex start, span;
    double u1 = kPi;
    std::vector<double> breaks;  // interior parameters where the analytic piece changes

    Complex x(double u) const { return librational ? c - h * std::cos(u) : start + span * u; }
    Complex dx(double u) const { return librational ? h * std::sin(u) : span; }
};

struct Node {
    double u;
    Complex x;
    Complex dxdu;
    double weight;
};

Path librational_path(const ModelSpec& model, const OrbitFamily& family, Complex E, const QuadratureOptions& opt) {
    const auto pair = turning_pair(model, family.pair, E);
    const double sep = std::abs(pair[1] - pair[0]);
    if (!(sep > 1e-6)) {
        std::ostringstream os;
        os << family.label << ": turning points separated by " << sep << " at E = " << E;
        throw Error(ErrorKind::DegenerateBranch, os.str());
    }
    Path path;
    path.librational = true;
    path.c = 0.5 * (pair[0] + pair[1]);
    path.h = 0.5 * (pair[1] - pair[0]);
    path.u1 = kPi;

    std::vector<double> shifts{0.0};
    if (auto L = model.spatial_period()) shifts = {-*L, 0.0, *L};
    for (Complex r : turning_points(model, E)) {
        for (double s : shifts) {
            const Complex q = r + s;
            if (std::abs(q - pair[0]) < 1e-8 * (1.0 + sep) || std::abs(q - pair[1]) < 1e-8 * (1.0 + sep)) continue;
            if (segment_distance(q, pair[0], pair[1]) < opt.collision_margin * sep) {
                std::ostringstream os;
                os << family.label << ": turning point " << q << " lies on the action path at E = " << E;
                throw Error(ErrorKind::ContourCollision, os.str());
            }
        }
    }

    if (model.id() == ModelId::H1) {
        const double half = 0.5 * model.as<SkinParams>().length;
        const double hr = path.h.real();
        if (hr != 0.0) {
            const double lo = std::min(pair[0].real(), pair[1].real());
            const double hi = std::max(pair[0].real(), pair[1].real());
            for (double k = std::ceil(lo / half); k * half <= hi; k += 1.0) {
                const double cth = (path.c.real() - k * half) / hr;
                if (std::abs(cth) >= 1.0) continue;
                const double th = std::acos(cth);
                if (std::abs(path.x(th).imag()) > 1e-9 * (1.0 + sep)) {
                    std::ostringstream os;
                    os << family.label << ": action path crosses the cusp line off the real axis at E = " << E;
                    throw Error(ErrorKind::ContourCollision, os.str());
                }
                path.breaks.push_back(th);
            }
        }
    }
    std::sort(path.breaks.begin(), path.breaks.end());
    return path;
}

Path traversing_path(const ModelSpec& model, const OrbitFamily& family, Complex E, const QuadratureOptions& opt) {
    const auto L = model.spatial_period();
    if (!L) throw Error(ErrorKind::InvalidArgument, family.label + ": traversing family needs a spatial period");
    if (family.direction != 1 && family.direction != -1)
        throw Error(ErrorKind::InvalidArgument, family.label + ": direction must be +1 or -1");
    const double x0 = traversal_origin(model);
    Path path;
    path.librational = false;
    path.start = family.direction > 0 ? x0 : x0 + *L;
    path.span = double(family.direction) * *L;
    path.u1 = 1.0;

    for (Complex r : turning_points(model, E)) {
        for (double s : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
            const Complex q = r + s * *L;
            if (segment_distance(q, x0, x0 + *L) < opt.path_clearance) {
                std::ostringstream os;
                os << family.label << ": turning point " << q << " within " << opt.path_clearance
                   << " of the real path at E = " << E;
                throw Error(ErrorKind::TurningPointOnPath, os.str());
            }
        }
    }
    for (double c : cusp_points(model, x0, x0 + *L)) {
        double u = (c - path.start.real()) / path.span.real();
        path.breaks.push_back(u);
    }
    std::sort(path.breaks.begin(), path.breaks.end());
    return path;
}

void append_gauss(std::vector<Node>& out, const Path& path, double a, double b, std::size_t n) {
    const Rule& r = gauss_legendre(n);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = mid + half * r.x[i];
        out.push_back({u, path.x(u), path.dx(u), half * r.w[i]});
    }
}

// Gauss nodes over [a, b], split at the path's breaks.
void append_split(std::vector<Node>& out, const Path& path, double a, double b, std::size_t n) {
    double lo = a;
    for (double br : path.breaks) {
        if (br > a + 1e-14 && br < b - 1e-14) {
            append_gauss(out, path, lo, br, n);
            lo = br;
        }
    }
    append_gauss(out, path, lo, b, n);
}

Complex velocity(const ModelSpec& model, Complex x, Complex p) { return gradient(model, {x, p}).dp; }

struct Tracked {
    std::vector<Complex> p;  // continued branch
    std::vector<Complex> q;  // the other branch
};

// Continues a branch node by node, outward from `start` in both directions.
Tracked track(const ModelSpec& model, Complex E, const std::vector<Node>& nodes, std::size_t start, Complex p0,
              Complex q0, const QuadratureOptions& opt, const std::string& label) {
    const auto period = momentum_period(model);
    Tracked tr{std::vector<Complex>(nodes.size()), std::vector<Complex>(nodes.size())};
    tr.p[start] = p0;
    tr.q[start] = q0;
    // Branch continuation with a linear predictor in the path parameter.
    auto step = [&](std::size_t i, std::size_t prev, std::optional<std::size_t> prev2) {
        Complex pred = tr.p[prev];
        if (prev2) {
            const double du = nodes[prev].u - nodes[*prev2].u;
            if (du != 0.0) pred += (tr.p[prev] - tr.p[*prev2]) * ((nodes[i].u - nodes[prev].u) / du);
        }
        const auto b = momentum_branches(model, nodes[i].x, E);
        const double d0 = std::abs(wrap(b[0] - pred, period));
        const double d1 = std::abs(wrap(b[1] - pred, period));
        const std::size_t c = d0 <= d1 ? 0 : 1;
        const double dc = std::min(d0, d1), dother = std::max(d0, d1);
        if (dc > opt.branch_ratio * dother) {
            std::ostringstream os;
            os << label << ": branch jump near x = " << nodes[i].x << " at E = " << E
               << " (increase quadrature nodes)";
            throw Error(ErrorKind::BranchTrackingFailed, os.str());
        }
        tr.p[i] = unwrap_near(b[c], pred, period);
        tr.q[i] = unwrap_near(b[1 - c], tr.q[prev], period);
    };
    for (std::size_t i = start + 1; i < nodes.size(); ++i)
        step(i, i - 1, i >= start + 2 ? std::optional<std::size_t>(i - 2) : std::nullopt);
    for (std::size_t i = start; i-- > 0;)
        step(i, i + 1, i + 2 <= start ? std::optional<std::size_t>(i + 2) : std::nullopt);
    return tr;
}

// Librational tracking anchored at the node closest to the middle of the path.
// Orients the result so that Re W > 0.
struct LibrationalTrack {
    Tracked tr;
    bool swapped = false;
};

LibrationalTrack track_librational(const ModelSpec& model, Complex E, const std::vector<Node>& nodes,
                                   const QuadratureOptions& opt, const std::string& label) {
    std::size_t start = 0;
    for (std::size_t i = 1; i < nodes.size(); ++i)
        if (std::abs(nodes[i].u - 0.5 * kPi) < std::abs(nodes[start].u - 0.5 * kPi)) start = i;
    const auto b = momentum_branches(model, nodes[start].x, E);
    LibrationalTrack lt{track(model, E, nodes, start, b[0], b[1], opt, label)};
    if (auto period = momentum_period(model)) {
        // The two branches must meet at the turning points, not merely agree modulo the period.
        const double k0 = std::round((lt.tr.p.front() - lt.tr.q.front()).real() / *period);
        for (Complex& q : lt.tr.q) q += k0 * *period;
        const double k1 = std::round((lt.tr.p.back() - lt.tr.q.back()).real() / *period);
        if (k1 != 0.0) {
            std::ostringstream os;
            os << label << ": branches do not reconnect at both turning points at E = " << E;
            throw Error(ErrorKind::BranchTrackingFailed, os.str());
        }
    }
    Complex W{};
    for (std::size_t i = 0; i < nodes.size(); ++i) W += nodes[i].weight * (lt.tr.p[i] - lt.tr.q[i]) * nodes[i].dxdu;
    if (W.real() < 0.0) {
        std::swap(lt.tr.p, lt.tr.q);
        lt.swapped = true;
    }
    return lt;
}

// Traversing tracking: nodes[0] is the path start; the branch moving in the
// family's direction is continued to the end, which must close modulo the period.
Tracked track_traversing(const ModelSpec& model, const OrbitFamily& family, Complex E,
                         const std::vector<Node>& nodes, const QuadratureOptions& opt) {
    const auto b = momentum_branches(model, nodes.front().x, E);
    const double v0 = velocity(model, nodes.front().x, b[0]).real() * family.direction;
    const double v1 = velocity(model, nodes.front().x, b[1]).real() * family.direction;
    if ((v0 > 0.0) == (v1 > 0.0)) {
        std::ostringstream os;
        os << family.label << ": no unique branch moving in direction " << family.direction << " at E = " << E;
        throw Error(ErrorKind::BranchTrackingFailed, os.str());
    }
    const std::size_t c = v0 > 0.0 ? 0 : 1;
    Tracked tr = track(model, E, nodes, 0, b[c], b[1 - c], opt, family.label);
    const Complex gap = wrap(tr.p.back() - tr.p.front(), momentum_period(model));
    if (std::abs(gap) > 1e-8 * (1.0 + std::abs(tr.p.front()))) {
        std::ostringstream os;
        os << family.label << ": traversing branch does not close over one period at E = " << E;
        throw Error(ErrorKind::BranchTrackingFailed, os.str());
    }
    return tr;
}

ActionPeriod librational_integrals(const ModelSpec& model, const OrbitFamily& family, Complex E,
                                   const QuadratureOptions& opt) {
    const Path path = librational_path(model, family, E, opt);
    std::vector<Node> nodes;
    append_split(nodes, path, 0.0, kPi, opt.nodes);
    const auto lt = track_librational(model, E, nodes, opt, family.label);
    ActionPeriod r{};
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const Complex p = lt.tr.p[i], q = lt.tr.q[i];
        r.action += nodes[i].weight * (p - q) * nodes[i].dxdu;
        r.period += nodes[i].weight * (1.0 / velocity(model, nodes[i].x, p) - 1.0 / velocity(model, nodes[i].x, q)) *
                    nodes[i].dxdu;
    }
    return r;
}

ActionPeriod traversing_integrals(const ModelSpec& model, const OrbitFamily& family, Complex E,
                                  const QuadratureOptions& opt) {
    const Path path = traversing_path(model, family, E, opt);
    std::vector<Node> nodes{{0.0, path.x(0.0), path.dx(0.0), 0.0}};
    append_split(nodes, path, 0.0, 1.0, opt.nodes);
    nodes.push_back({1.0, path.x(1.0), path.dx(1.0), 0.0});
    const Tracked tr = track_traversing(model, family, E, nodes, opt);
    ActionPeriod r{};
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        r.action += nodes[i].weight * tr.p[i] * nodes[i].dxdu;
        r.period += nodes[i].weight / velocity(model, nodes[i].x, tr.p[i]) * nodes[i].dxdu;
    }
    return r;
}

void require_kind(const OrbitFamily& family, FamilyKind kind) {
    if (family.kind != kind)
        throw Error(ErrorKind::InvalidArgument, family.label + ": wrong family kind for this operation");
}

// The momentum at a turning point, continued from the neighbouring branch value.
Complex coalesced_momentum(const ModelSpec& model, Complex x, Complex E, Complex neighbour) {
    switch (model.id()) {
        case ModelId::H1: return {0.0, -model.as<SkinParams>().gamma};
        case ModelId::H2: {
            const auto& q = model.as<LatticeParams>();
            const Complex b = E + 2.0 * q.t0 * std::cos(q.field() * x - q.p_y);
            const Complex u = -b / (2.0 * (q.t0 + q.delta));
            return unwrap_near(-kI * std::log(u), neighbour, model.momentum_period());
        }
        default: return {};
    }
}

}  // namespace

std::string_view to_string(FamilyKind kind) {
    return kind == FamilyKind::Librational ? "librational" : "traversing";
}

EnergyWindow EnergyWindow::widened(double fraction) const {
    EnergyWindow w = *this;
    double width;
    if (std::isfinite(lo) && std::isfinite(hi))
        width = hi - lo;
    else if (std::isfinite(lo))
        width = std::max(std::abs(lo), 1.0);
    else if (std::isfinite(hi))
        width = std::max(std::abs(hi), 1.0);
    else
        return w;
    if (std::isfinite(lo)) w.lo -= fraction * width;
    if (std::isfinite(hi)) w.hi += fraction * width;
    return w;
}

Complex action_librational(const ModelSpec& model, const OrbitFamily& family, Complex E,
                           const QuadratureOptions& options) {
    require_kind(family, FamilyKind::Librational);
    return librational_integrals(model, family, E, options).action;
}

Complex action_traversing(const ModelSpec& model, const OrbitFamily& family, Complex E,
                          const QuadratureOptions& options) {
    require_kind(family, FamilyKind::Traversing);
    return traversing_integrals(model, family, E, options).action;
}

ActionPeriod action_and_period(const ModelSpec& model, const OrbitFamily& family, Complex E,
                               const QuadratureOptions& options) {
    if (!is_finite(E)) throw Error(ErrorKind::InvalidArgument, "action: energy not finite");
    return family.kind == FamilyKind::Librational ? librational_integrals(model, family, E, options)
                                                  : traversing_integrals(model, family, E, options);
}

Complex period(const ModelSpec& model, const OrbitFamily& family, Complex E, const QuadratureOptions& options) {
    return action_and_period(model, family, E, options).period;
}

OrbitStart orbit_start(const ModelSpec& model, const OrbitFamily& family, Complex E, std::size_t steps,
                       const QuadratureOptions& options) {
    if (steps < 16 || steps % 4 != 0)
        throw Error(ErrorKind::InvalidArgument, "orbit_start: steps must be a multiple of 4 and >= 16");
    constexpr std::size_t kSub = 8;

    if (family.kind == FamilyKind::Traversing) {
        const Path path = traversing_path(model, family, E, options);
        std::vector<Node> nodes{{0.0, path.x(0.0), path.dx(0.0), 0.0}};
        std::vector<std::size_t> knot_index{0};
        for (std::size_t k = 0; k < steps; ++k) {
            append_split(nodes, path, double(k) / double(steps), double(k + 1) / double(steps), kSub);
            const double u = double(k + 1) / double(steps);
            knot_index.push_back(nodes.size());
            nodes.push_back({u, path.x(u), path.dx(u), 0.0});
        }
        const Tracked tr = track_traversing(model, family, E, nodes, options);
        std::vector<Complex> knots{Complex{}};
        Complex t{};
        for (std::size_t k = 0; k < steps; ++k) {
            for (std::size_t i = knot_index[k] + 1; i < knot_index[k + 1]; ++i)
                t += nodes[i].weight * nodes[i].dxdu / velocity(model, nodes[i].x, tr.p[i]);
            knots.push_back(t);
        }
        return {{nodes.front().x, tr.p.front()}, TimeContour::polyline(std::move(knots))};
    }

    const Path path = librational_path(model, family, E, options);
    const std::size_t half = steps / 2;
    // Interior knots of [0, pi] are tracked together with the sub-interval nodes.
    std::vector<Node> nodes;
    std::vector<std::size_t> first_of(half + 1);
    for (std::size_t k = 0; k < half; ++k) {
        const double a = kPi * double(k) / double(half), b = kPi * double(k + 1) / double(half);
        first_of[k] = nodes.size();
        append_split(nodes, path, a, b, kSub);
        if (k + 1 < half) nodes.push_back({b, path.x(b), path.dx(b), 0.0});
    }
    first_of[half] = nodes.size();
    const auto lt = track_librational(model, E, nodes, options, family.label);

    // Interval integrals of dt = dx / H_p on the outbound (p) and return (q) legs.
    std::vector<Complex> out(half), back(half);
    for (std::size_t k = 0; k < half; ++k) {
        for (std::size_t i = first_of[k]; i < first_of[k + 1]; ++i) {
            if (nodes[i].weight == 0.0) continue;
            out[k] += nodes[i].weight * nodes[i].dxdu / velocity(model, nodes[i].x, lt.tr.p[i]);
            back[k] += nodes[i].weight * nodes[i].dxdu / velocity(model, nodes[i].x, lt.tr.q[i]);
        }
    }
    std::vector<Complex> knots{Complex{}};
    Complex t{};
    for (std::size_t k = 0; k < half; ++k) knots.push_back(t += out[k]);
    for (std::size_t j = 0; j < half; ++j) knots.push_back(t -= back[half - 1 - j]);

    const Complex x1 = path.x(0.0);
    const Complex p1 = coalesced_momentum(model, x1, E, lt.tr.p.front());
    return {{x1, p1}, TimeContour::polyline(std::move(knots))};
}

Orbit family_orbit(const ModelSpec& model, const OrbitFamily& family, Complex E, std::size_t steps,
                   const QuadratureOptions& options) {
    const OrbitStart st = orbit_start(model, family, E, steps, options);
    Orbit orbit = integrate(model, st.z0, st.contour, steps);
    orbit.energy = E;
    orbit.action = action_and_period(model, family, E, options).action;
    orbit.family_label = family.label;
    return orbit;
}

double transition_energy(const ModelSpec& model, const OrbitFamily& family, double lo, double hi,
                         const QuadratureOptions& options) {
    constexpr double eps = 0.05;
    auto f = [&](double e) -> std::optional<double> {
        try {
            const double w1 = action_and_period(model, family, Complex(e, eps), options).action.imag();
            const double w2 = action_and_period(model, family, Complex(e, 2.0 * eps), options).action.imag();
            const double w3 = action_and_period(model, family, Complex(e, 3.0 * eps), options).action.imag();
            return 3.0 * w1 - 3.0 * w2 + w3;
        } catch (const Error&) {
            return std::nullopt;
        }
    };
    constexpr int kScan = 64;
    std::optional<double> prev_v;
    double prev_e = lo;
    for (int i = 0; i <= kScan; ++i) {
        const double e = lo + (hi - lo) * double(i) / kScan;
        const auto v = f(e);
        if (v && prev_v && ((*v > 0.0) != (*prev_v > 0.0))) {
            double a = prev_e, b = e, fa = *prev_v;
            for (int it = 0; it < 100 && b - a > 1e-12 * (1.0 + std::abs(a)); ++it) {
                const double m = 0.5 * (a + b);
                const auto fm = f(m);
                if (!fm) break;
                if ((*fm > 0.0) == (fa > 0.0)) {
                    a = m;
                    fa = *fm;
                } else {
                    b = m;
                }
            }
            return 0.5 * (a + b);
        }
        if (v) {
            prev_v = v;
            prev_e = e;
        }
    }
    std::ostringstream os;
    os << family.label << ": no transition energy in [" << lo << ", " << hi << "]";
    throw Error(ErrorKind::RootFindingFailed, os.str());
}

}  // namespace orbitrace
