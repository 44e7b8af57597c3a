#include "orbitrace/models.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace orbitrace {

namespace {

bool lex_less(Complex a, Complex b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
}

void require(bool ok, const char* what) {
    if (!ok) throw Error(ErrorKind::InvalidArgument, what);
}

// Coalescence test for the two momentum branches.
void check_distinct(Complex a, Complex b, Complex x) {
    if (std::abs(a - b) <= 1e-10 * (1.0 + std::abs(a) + std::abs(b))) {
        std::ostringstream os;
        os << "momentum branches coalesce at x = " << x;
        throw Error(ErrorKind::DegenerateBranch, os.str());
    }
}

std::array<Complex, 2> quadratic_roots(Complex a, Complex b, Complex c) {
    Complex disc = std::sqrt(b * b - 4.0 * a * c);
    if (std::real(std::conj(b) * disc) < 0.0) disc = -disc;
    Complex q = -0.5 * (b + disc);
    if (q == Complex{}) return {Complex{}, Complex{}};
    return {q / a, c / q};
}

// Roots of a monic-normalised polynomial (coefficients highest degree first) by
// Weierstrass iteration, then Newton polish on the original polynomial.
std::vector<Complex> polynomial_roots(const std::vector<Complex>& coeffs) {
    const std::size_t deg = coeffs.size() - 1;
    std::vector<Complex> mon(coeffs.size());
    for (std::size_t i = 0; i < coeffs.size(); ++i) mon[i] = coeffs[i] / coeffs[0];
    auto eval = [&](Complex x) {
        Complex v = 0.0;
        for (Complex c : mon) v = v * x + c;
        return v;
    };
    auto deriv = [&](Complex x) {
        Complex v = 0.0;
        for (std::size_t i = 0; i < deg; ++i) v = v * x + mon[i] * double(deg - i);
        return v;
    };
    double radius = 0.0;
    for (std::size_t i = 1; i <= deg; ++i) radius = std::max(radius, std::pow(std::abs(mon[i]), 1.0 / double(i)));
    radius = 2.0 * radius + 1.0;
    std::vector<Complex> z(deg);
    for (std::size_t k = 0; k < deg; ++k) z[k] = std::polar(radius, 0.4 + kTwoPi * double(k) / double(deg));
    for (int it = 0; it < 500; ++it) {
        double change = 0.0;
        for (std::size_t k = 0; k < deg; ++k) {
            Complex den = 1.0;
            for (std::size_t j = 0; j < deg; ++j)
                if (j != k) den *= z[k] - z[j];
            Complex step = eval(z[k]) / den;
            z[k] -= step;
            change = std::max(change, std::abs(step) / (1.0 + std::abs(z[k])));
        }
        if (change < 1e-15) break;
    }
    for (Complex& r : z) {
        for (int it = 0; it < 8; ++it) {
            Complex d = deriv(r);
            if (d == Complex{}) break;
            Complex step = eval(r) / d;
            r -= step;
            if (std::abs(step) < 1e-16 * (1.0 + std::abs(r))) break;
        }
    }
    return z;
}

}  // namespace

std::string_view to_string(ModelId id) {
    switch (id) {
        case ModelId::HarmonicOscillator: return "HO";
        case ModelId::H1: return "H1";
        case ModelId::H2: return "H2";
        case ModelId::H3: return "H3";
        case ModelId::H4: return "H4";
    }
    return "?";
}

std::string_view to_string(TurningPair pair) {
    switch (pair) {
        case TurningPair::Central: return "central";
        case TurningPair::LeftWell: return "left-well";
        case TurningPair::RightWell: return "right-well";
        case TurningPair::Outer: return "outer";
        case TurningPair::BandBottom: return "band-bottom";
        case TurningPair::BandTop: return "band-top";
    }
    return "?";
}

PhasePoint SymmetryMap::apply(PhasePoint z) const {
    Complex x = conjugates ? std::conj(z.x - x_center) : z.x - x_center;
    Complex p = conjugates ? std::conj(z.p) : z.p;
    return {x_center + x_scale * x, p_scale * p};
}

ModelSpec ModelSpec::oscillator(OscillatorParams params) {
    require(std::isfinite(params.omega) && params.omega > 0.0, "oscillator: omega must be positive");
    return ModelSpec(ModelId::HarmonicOscillator, params);
}

ModelSpec ModelSpec::skin(SkinParams params) {
    require(std::isfinite(params.gamma) && std::isfinite(params.v0) && params.v0 > 0.0,
            "H1: gamma finite and V0 positive required");
    require(params.length > 0.0, "H1: L must be positive");
    return ModelSpec(ModelId::H1, params);
}

ModelSpec ModelSpec::lattice(LatticeParams params) {
    require(std::isfinite(params.t0) && params.t0 != 0.0, "H2: t0 must be nonzero");
    require(std::isfinite(params.delta) && std::abs(params.delta) < std::abs(params.t0),
            "H2: |delta| < |t0| required");
    require(params.length >= 8.0, "H2: L >= 8 required");
    require(params.flux_quanta != 0, "H2: q must be nonzero");
    require(std::isfinite(params.p_y), "H2: p_y must be finite");
    return ModelSpec(ModelId::H2, params);
}

ModelSpec ModelSpec::double_well(DoubleWellParams params) {
    require(std::isfinite(params.g) && params.g > 0.0, "H3: g must be positive");
    require(std::isfinite(params.a) && params.a > 0.0, "H3: a must be positive");
    require(std::isfinite(params.gain), "H3: Gamma must be finite");
    return ModelSpec(ModelId::H3, params);
}

SymmetryMap ModelSpec::symmetry() const {
    switch (id_) {
        case ModelId::H2: {
            const auto& q = as<LatticeParams>();
            return {1.0, q.p_y / q.field(), -1.0, -1, true};
        }
        case ModelId::H3: return {-1.0, 0.0, 1.0, -1, true};
        default: return {1.0, 0.0, -1.0, -1, true};
    }
}

std::optional<double> ModelSpec::spatial_period() const {
    if (id_ == ModelId::H1) return as<SkinParams>().length;
    if (id_ == ModelId::H2) return kTwoPi / as<LatticeParams>().field();
    return std::nullopt;
}

std::optional<double> ModelSpec::momentum_period() const {
    if (id_ == ModelId::H2) return kTwoPi;
    return std::nullopt;
}

Piece piece_of(const ModelSpec& model, Complex x) {
    if (model.id() != ModelId::H1) return {};
    const double L = model.as<SkinParams>().length;
    const int cell = static_cast<int>(std::floor((x.real() + 0.5 * L) / L));
    const double local = x.real() - cell * L;
    return {cell, local >= 0.0 ? 1 : -1};
}

Complex hamiltonian(const ModelSpec& model, PhasePoint z) {
    return hamiltonian(model, z, piece_of(model, z.x));
}

Complex hamiltonian(const ModelSpec& model, PhasePoint z, Piece piece) {
    const Complex x = z.x, p = z.p;
    switch (model.id()) {
        case ModelId::HarmonicOscillator: {
            const double w = model.as<OscillatorParams>().omega;
            return p * p + w * w * x * x;
        }
        case ModelId::H1: {
            const auto& q = model.as<SkinParams>();
            const Complex k = p + kI * q.gamma;
            return k * k + q.v0 * double(piece.side) * (x - double(piece.cell) * q.length);
        }
        case ModelId::H2: {
            const auto& q = model.as<LatticeParams>();
            return -2.0 * (q.t0 * std::cos(p) + kI * q.delta * std::sin(p) +
                           q.t0 * std::cos(q.p_y - q.field() * x));
        }
        case ModelId::H3: {
            const auto& q = model.as<DoubleWellParams>();
            const Complex u = x * x - q.a * q.a;
            return p * p + q.g * u * u + kI * q.gain * x;
        }
        case ModelId::H4: break;
    }
    throw Error(ErrorKind::InvalidArgument, "hamiltonian: not a phase-space model");
}

Gradient gradient(const ModelSpec& model, PhasePoint z) {
    return gradient(model, z, piece_of(model, z.x));
}

Gradient gradient(const ModelSpec& model, PhasePoint z, Piece piece) {
    const Complex x = z.x, p = z.p;
    switch (model.id()) {
        case ModelId::HarmonicOscillator: {
            const double w = model.as<OscillatorParams>().omega;
            return {2.0 * w * w * x, 2.0 * p};
        }
        case ModelId::H1: {
            const auto& q = model.as<SkinParams>();
            return {Complex(q.v0 * piece.side), 2.0 * (p + kI * q.gamma)};
        }
        case ModelId::H2: {
            const auto& q = model.as<LatticeParams>();
            const double B = q.field();
            return {-2.0 * q.t0 * B * std::sin(q.p_y - B * x),
                    2.0 * q.t0 * std::sin(p) - 2.0 * kI * q.delta * std::cos(p)};
        }
        case ModelId::H3: {
            const auto& q = model.as<DoubleWellParams>();
            return {4.0 * q.g * x * (x * x - q.a * q.a) + kI * q.gain, 2.0 * p};
        }
        case ModelId::H4: break;
    }
    throw Error(ErrorKind::InvalidArgument, "gradient: not a phase-space model");
}

std::array<Complex, 2> momentum_branches(const ModelSpec& model, Complex x, Complex E) {
    return momentum_branches(model, x, E, piece_of(model, x));
}

std::array<Complex, 2> momentum_branches(const ModelSpec& model, Complex x, Complex E, Piece piece) {
    switch (model.id()) {
        case ModelId::HarmonicOscillator: {
            const double w = model.as<OscillatorParams>().omega;
            const Complex r = std::sqrt(E - w * w * x * x);
            check_distinct(r, -r, x);
            return {r, -r};
        }
        case ModelId::H1: {
            const auto& q = model.as<SkinParams>();
            const Complex V = q.v0 * double(piece.side) * (x - double(piece.cell) * q.length);
            const Complex r = std::sqrt(E - V);
            check_distinct(r, -r, x);
            return {r - kI * q.gamma, -r - kI * q.gamma};
        }
        case ModelId::H2: {
            const auto& q = model.as<LatticeParams>();
            const Complex b = E + 2.0 * q.t0 * std::cos(q.field() * x - q.p_y);
            const auto u = quadratic_roots(q.t0 + q.delta, b, q.t0 - q.delta);
            check_distinct(u[0], u[1], x);
            return {-kI * std::log(u[0]), -kI * std::log(u[1])};
        }
        case ModelId::H3: {
            const auto& q = model.as<DoubleWellParams>();
            const Complex u = x * x - q.a * q.a;
            const Complex r = std::sqrt(E - q.g * u * u - kI * q.gain * x);
            check_distinct(r, -r, x);
            return {r, -r};
        }
        case ModelId::H4: break;
    }
    throw Error(ErrorKind::InvalidArgument, "momentum_branches: not a separable model");
}

std::vector<Complex> turning_points(const ModelSpec& model, Complex E) {
    std::vector<Complex> roots;
    switch (model.id()) {
        case ModelId::HarmonicOscillator: {
            const double w = model.as<OscillatorParams>().omega;
            const Complex r = std::sqrt(E) / w;
            roots = {r, -r};
            break;
        }
        case ModelId::H1: {
            const auto& q = model.as<SkinParams>();
            const Complex r = E / q.v0;
            if (r.real() >= 0.0 && r.real() <= 0.5 * q.length) roots.push_back(r);
            if (-r.real() < 0.0 && -r.real() >= -0.5 * q.length) roots.push_back(-r);
            break;
        }
        case ModelId::H2: {
            const auto& q = model.as<LatticeParams>();
            const double B = q.field();
            const double s = std::sqrt(q.t0 * q.t0 - q.delta * q.delta);
            for (double sign : {-1.0, 1.0}) {
                const Complex c = (sign * 2.0 * s - E) / (2.0 * q.t0);
                const Complex phi = std::acos(c);
                for (Complex f : {phi, -phi}) {
                    double shift = std::floor((f.real() + 0.5 * kPi) / kTwoPi);
                    f -= kTwoPi * shift;
                    roots.push_back((q.p_y + f) / B);
                }
            }
            break;
        }
        case ModelId::H3: {
            const auto& q = model.as<DoubleWellParams>();
            const double a2 = q.a * q.a;
            roots = polynomial_roots({Complex(q.g), 0.0, Complex(-2.0 * q.g * a2), kI * q.gain,
                                      Complex(q.g * a2 * a2) - E});
            for (Complex r : roots) {
                const Complex u = r * r - a2;
                const Complex res = q.g * u * u + kI * q.gain * r - E;
                if (std::abs(res) > 1e-10 * (1.0 + std::abs(E))) {
                    std::ostringstream os;
                    os << "quartic root " << r << " residual " << std::abs(res) << " at E = " << E;
                    throw Error(ErrorKind::RootFindingFailed, os.str());
                }
            }
            break;
        }
        case ModelId::H4: throw Error(ErrorKind::InvalidArgument, "turning_points: not a phase-space model");
    }
    std::sort(roots.begin(), roots.end(), lex_less);
    return roots;
}

std::array<Complex, 2> turning_pair(const ModelSpec& model, TurningPair pair, Complex E) {
    auto ordered = [](Complex a, Complex b) {
        return lex_less(a, b) ? std::array<Complex, 2>{a, b} : std::array<Complex, 2>{b, a};
    };
    auto unavailable = [&]() {
        std::ostringstream os;
        os << to_string(model.id()) << ": turning pair " << to_string(pair) << " unavailable at E = " << E;
        return Error(ErrorKind::RootFindingFailed, os.str());
    };
    switch (model.id()) {
        case ModelId::HarmonicOscillator:
        case ModelId::H1: {
            if (pair != TurningPair::Central) throw unavailable();
            auto r = turning_points(model, E);
            if (r.size() != 2) throw unavailable();
            return ordered(r[0], r[1]);
        }
        case ModelId::H2: {
            if (pair != TurningPair::BandBottom && pair != TurningPair::BandTop) throw unavailable();
            const auto& q = model.as<LatticeParams>();
            const double s = std::sqrt(q.t0 * q.t0 - q.delta * q.delta);
            const bool bottom = pair == TurningPair::BandBottom;
            const double anchor = (bottom == (q.t0 < 0.0)) ? kPi : 0.0;
            const Complex c = ((bottom ? -2.0 : 2.0) * s - E) / (2.0 * q.t0);
            const Complex d = std::acos(c * std::cos(anchor));
            const double B = q.field();
            return ordered((q.p_y + anchor - d) / B, (q.p_y + anchor + d) / B);
        }
        case ModelId::H3: {
            auto r = turning_points(model, E);
            const double a = model.as<DoubleWellParams>().a;
            if (pair == TurningPair::Outer) return ordered(r.front(), r.back());
            if (pair != TurningPair::LeftWell && pair != TurningPair::RightWell) throw unavailable();
            const double centre = pair == TurningPair::LeftWell ? -a : a;
            std::sort(r.begin(), r.end(), [&](Complex u, Complex v) {
                return std::abs(u - centre) < std::abs(v - centre);
            });
            return ordered(r[0], r[1]);
        }
        case ModelId::H4: break;
    }
    throw unavailable();
}

PhasePoint symmetry_image(const ModelSpec& model, PhasePoint z) { return model.symmetry().apply(z); }

double symmetry_residual(const ModelSpec& model, PhasePoint z) {
    return std::abs(hamiltonian(model, symmetry_image(model, z)) - std::conj(hamiltonian(model, z)));
}

std::vector<double> cusp_points(const ModelSpec& model, double lo, double hi) {
    std::vector<double> out;
    if (model.id() != ModelId::H1) return out;
    const double half = 0.5 * model.as<SkinParams>().length;
    for (double k = std::ceil(lo / half); k * half < hi; k += 1.0) {
        const double c = k * half;
        if (c > lo && c < hi) out.push_back(c);
    }
    return out;
}

double traversal_origin(const ModelSpec& model) {
    if (model.id() == ModelId::H1) return -0.5 * model.as<SkinParams>().length;
    if (model.id() == ModelId::H2) {
        const auto& q = model.as<LatticeParams>();
        return q.p_y / q.field();
    }
    throw Error(ErrorKind::InvalidArgument, "traversal_origin: model has no spatial period");
}

}  // namespace orbitrace
