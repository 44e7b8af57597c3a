#include "orbitrace/integrator.hpp"

#include "orbitrace/detail/cyclic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace orbitrace {

namespace {

double wrap(double v, std::optional<double> period) {
    if (!period) return v;
    return v - *period * std::round(v / *period);
}

Complex wrap(Complex v, std::optional<double> period) { return {wrap(v.real(), period), v.imag()}; }

struct Metric {
    std::optional<double> xp;
    std::optional<double> pp;

    double operator()(const PhasePoint& a, const PhasePoint& b) const {
        return std::hypot(std::abs(wrap(a.x - b.x, xp)), std::abs(wrap(a.p - b.p, pp)));
    }
};

// Unwraps `v` to the periodic copy nearest `ref`.
Complex near(Complex v, Complex ref, std::optional<double> period) { return ref + wrap(v - ref, period); }

struct State {
    PhasePoint z;
    Complex w;
};

State derivative(const ModelSpec& model, const State& st, Piece piece) {
    const Gradient g = gradient(model, st.z, piece);
    return {{g.dp, -g.dx}, st.z.p * g.dp};
}

State axpy(const State& st, Complex h, const State& d) {
    return {{st.z.x + h * d.z.x, st.z.p + h * d.z.p}, st.w + h * d.w};
}

}  // namespace

std::string_view to_string(OrbitClassKind kind) {
    switch (kind) {
        case OrbitClassKind::SelfSymmetric: return "SelfSymmetric";
        case OrbitClassKind::PairMember: return "PairMember";
        case OrbitClassKind::Unclassified: return "Unclassified";
    }
    return "?";
}

TimeContour TimeContour::straight(Complex period) { return polyline({Complex{}, period}); }

TimeContour TimeContour::polyline(std::vector<Complex> knots) {
    if (knots.size() < 2) throw Error(ErrorKind::InvalidArgument, "time contour needs at least two knots");
    if (knots.front() != Complex{}) throw Error(ErrorKind::InvalidArgument, "time contour must start at t = 0");
    if (!(std::abs(knots.back()) > 0.0)) throw Error(ErrorKind::InvalidArgument, "time contour period must be nonzero");
    for (Complex k : knots)
        if (!is_finite(k)) throw Error(ErrorKind::InvalidArgument, "time contour knots must be finite");
    return TimeContour(std::move(knots));
}

Complex TimeContour::at(double s) const {
    const double u = std::clamp(s, 0.0, 1.0) * double(segments());
    const std::size_t j = std::min(static_cast<std::size_t>(u), segments() - 1);
    const double f = u - double(j);
    return knots_[j] + f * (knots_[j + 1] - knots_[j]);
}

TimeContour TimeContour::conjugated() const {
    std::vector<Complex> k(knots_.size());
    std::transform(knots_.begin(), knots_.end(), k.begin(), [](Complex t) { return std::conj(t); });
    return TimeContour(std::move(k));
}

Orbit integrate(const ModelSpec& model, PhasePoint z0, const TimeContour& contour, std::size_t steps,
                const IntegratorOptions& options) {
    if (steps < 16) throw Error(ErrorKind::InvalidArgument, "integrate: steps must be >= 16");
    if (steps % contour.segments() != 0)
        throw Error(ErrorKind::InvalidArgument, "integrate: steps must be a multiple of the contour segments");
    if (!is_finite(z0.x) || !is_finite(z0.p)) throw Error(ErrorKind::InvalidArgument, "integrate: z0 not finite");

    const std::size_t per_segment = steps / contour.segments();
    const auto& knots = contour.knots();

    Orbit orbit;
    orbit.contour = contour;
    orbit.model = model.id();
    orbit.energy = hamiltonian(model, z0);
    orbit.spatial_period = model.spatial_period();
    orbit.momentum_period = model.momentum_period();
    orbit.samples.reserve(steps + 1);
    orbit.samples.push_back({0.0, Complex{}, z0});

    State st{z0, Complex{}};
    Complex t{};
    for (std::size_t k = 0; k < steps; ++k) {
        const std::size_t seg = k / per_segment;
        const Complex h = (knots[seg + 1] - knots[seg]) / double(per_segment);
        const Gradient g0 = gradient(model, st.z);
        const Piece piece = piece_of(model, st.z.x + 0.5 * h * g0.dp);

        const State k1 = derivative(model, st, piece);
        const State k2 = derivative(model, axpy(st, 0.5 * h, k1), piece);
        const State k3 = derivative(model, axpy(st, 0.5 * h, k2), piece);
        const State k4 = derivative(model, axpy(st, h, k3), piece);
        st.z.x += h / 6.0 * (k1.z.x + 2.0 * k2.z.x + 2.0 * k3.z.x + k4.z.x);
        st.z.p += h / 6.0 * (k1.z.p + 2.0 * k2.z.p + 2.0 * k3.z.p + k4.z.p);
        st.w += h / 6.0 * (k1.w + 2.0 * k2.w + 2.0 * k3.w + k4.w);

        if (!(std::abs(st.z.x) <= options.blowup_bound) || !(std::abs(st.z.p) <= options.blowup_bound)) {
            std::ostringstream os;
            os << "trajectory exceeded " << options.blowup_bound << " at step " << k + 1;
            throw Error(ErrorKind::BlowUp, os.str());
        }
        t = (k + 1) % per_segment == 0 ? knots[seg + 1] : t + h;
        orbit.samples.push_back({double(k + 1) / double(steps), t, st.z});
    }
    orbit.line_action = st.w;
    return orbit;
}

Orbit orbit_image(const ModelSpec& model, const Orbit& orbit) {
    const SymmetryMap map = model.symmetry();
    const std::size_t n = orbit.samples.size() - 1;
    const Complex T = orbit.contour.period();
    const bool reverse = map.time_sign < 0;

    Orbit image = orbit;
    for (std::size_t j = 0; j <= n; ++j) {
        const OrbitSample& src = orbit.samples[reverse ? n - j : j];
        image.samples[j].s = double(j) / double(n);
        image.samples[j].t = reverse ? std::conj(T - src.t) : std::conj(src.t);
        image.samples[j].z = map.apply(src.z);
    }
    if (reverse) {
        const auto& k = orbit.contour.knots();
        std::vector<Complex> knots(k.size());
        for (std::size_t j = 0; j < k.size(); ++j) knots[j] = std::conj(T - k[k.size() - 1 - j]);
        knots.front() = Complex{};
        image.contour = TimeContour::polyline(std::move(knots));
    } else {
        image.contour = orbit.contour.conjugated();
    }
    image.energy = std::conj(orbit.energy);
    image.action = std::conj(orbit.action);
    image.line_action = std::conj(orbit.line_action);
    image.classification = {};
    return image;
}

namespace {

double directed_distance(const Orbit& a, const Orbit& b) {
    const Metric metric{a.spatial_period, a.momentum_period};
    const std::size_t n = a.samples.size() - 1;
    std::vector<PhasePoint> pa(n), pb(n);
    for (std::size_t j = 0; j < n; ++j) {
        pa[j] = a.samples[j].z;
        pb[j] = b.samples[j].z;
    }
    auto interp = [&](const PhasePoint (&pts)[4], const double (&w)[4]) {
        PhasePoint out{};
        for (int i = 0; i < 4; ++i) {
            out.x += w[i] * near(pts[i].x, pts[1].x, a.spatial_period);
            out.p += w[i] * near(pts[i].p, pts[1].p, a.momentum_period);
        }
        return out;
    };
    return detail::directed_cyclic_distance(pa, pb, metric, interp);
}

}  // namespace

double orbit_distance(const Orbit& a, const Orbit& b) {
    if (a.samples.size() != b.samples.size() || a.samples.size() < 5) {
        std::ostringstream os;
        os << "orbit_distance: sample counts " << a.samples.size() << " and " << b.samples.size();
        throw Error(ErrorKind::SampleMismatch, os.str());
    }
    return std::min(directed_distance(a, b), directed_distance(b, a));
}

double closure_error(const Orbit& orbit) {
    const Metric metric{orbit.spatial_period, orbit.momentum_period};
    return metric(orbit.samples.front().z, orbit.samples.back().z);
}

double energy_drift(const ModelSpec& model, const Orbit& orbit) {
    double worst = 0.0;
    for (const auto& s : orbit.samples) worst = std::max(worst, std::abs(hamiltonian(model, s.z) - orbit.energy));
    return worst;
}

}  // namespace orbitrace
