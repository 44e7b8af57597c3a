#include "orbitrace/spin.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "orbitrace/detail/cyclic.hpp"
#include "orbitrace/linalg.hpp"
#include "orbitrace/parallel.hpp"

namespace orbitrace {

SpinVector operator+(SpinVector a, SpinVector b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
SpinVector operator-(SpinVector a, SpinVector b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
SpinVector operator*(Complex s, SpinVector a) { return {s * a.x, s * a.y, s * a.z}; }
Complex dot(SpinVector a, SpinVector b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
SpinVector cross(SpinVector a, SpinVector b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
double norm(SpinVector a) { return std::sqrt(std::norm(a.x) + std::norm(a.y) + std::norm(a.z)); }

namespace {

SpinVector conj(SpinVector a) { return {std::conj(a.x), std::conj(a.y), std::conj(a.z)}; }

Complex frequency(const SpinModel& m) { return std::sqrt(Complex(m.t1 * m.t1 - m.delta1 * m.delta1)); }

}  // namespace

std::pair<Complex, Complex> analytic_eigenvalues(const SpinModel& model) {
    const Complex w = frequency(model);
    return {0.5 * w, -0.5 * w};
}

SpinTrajectory bloch_integrate(const SpinModel& model, SpinVector n0, const TimeContour& contour, std::size_t steps,
                               double bound) {
    if (steps < 16) throw Error(ErrorKind::InvalidArgument, "bloch_integrate: steps must be >= 16");
    if (steps % contour.segments() != 0)
        throw Error(ErrorKind::InvalidArgument, "bloch_integrate: steps must be a multiple of the contour segments");
    const SpinVector M = model.field();
    const std::size_t per = steps / contour.segments();
    const auto& knots = contour.knots();
    SpinTrajectory tr;
    tr.contour = contour;
    tr.samples.reserve(steps + 1);
    tr.samples.push_back({0.0, Complex{}, n0});
    SpinVector n = n0;
    Complex t{};
    auto f = [&](SpinVector v) { return cross(M, v); };
    for (std::size_t k = 0; k < steps; ++k) {
        const std::size_t seg = k / per;
        const Complex h = (knots[seg + 1] - knots[seg]) / double(per);
        const SpinVector k1 = f(n);
        const SpinVector k2 = f(n + (0.5 * h) * k1);
        const SpinVector k3 = f(n + (0.5 * h) * k2);
        const SpinVector k4 = f(n + h * k3);
        n = n + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        for (Complex c : {n.x, n.y, n.z}) {
            if (!(std::abs(c) <= bound)) {
                std::ostringstream os;
                os << "spin component exceeded " << bound << " at step " << k + 1;
                throw Error(ErrorKind::BlowUp, os.str());
            }
        }
        t = (k + 1) % per == 0 ? knots[seg + 1] : t + h;
        tr.samples.push_back({double(k + 1) / double(steps), t, n});
    }
    return tr;
}

SpinTrajectory spin_image(const SpinTrajectory& trajectory) {
    const std::size_t n = trajectory.samples.size() - 1;
    const Complex T = trajectory.contour.period();
    SpinTrajectory img = trajectory;
    for (std::size_t j = 0; j <= n; ++j) {
        const SpinSample& src = trajectory.samples[n - j];
        SpinVector v = conj(src.n);
        v.z = -v.z;
        img.samples[j] = {double(j) / double(n), std::conj(T - src.t), v};
    }
    const auto& k = trajectory.contour.knots();
    std::vector<Complex> knots(k.size());
    for (std::size_t j = 0; j < k.size(); ++j) knots[j] = std::conj(T - k[k.size() - 1 - j]);
    knots.front() = Complex{};
    img.contour = TimeContour::polyline(std::move(knots));
    return img;
}

double trajectory_distance(const SpinTrajectory& a, const SpinTrajectory& b) {
    if (a.samples.size() != b.samples.size() || a.samples.size() < 5)
        throw Error(ErrorKind::SampleMismatch, "trajectory_distance: sample counts differ");
    const std::size_t n = a.samples.size() - 1;
    std::vector<SpinVector> pa(n), pb(n);
    for (std::size_t j = 0; j < n; ++j) {
        pa[j] = a.samples[j].n;
        pb[j] = b.samples[j].n;
    }
    auto metric = [](const SpinVector& u, const SpinVector& v) { return norm(u - v); };
    auto interp = [](const SpinVector (&pts)[4], const double (&w)[4]) {
        SpinVector out{};
        for (int i = 0; i < 4; ++i) out = out + Complex(w[i]) * pts[i];
        return out;
    };
    return std::min(detail::directed_cyclic_distance(pa, pb, metric, interp),
                    detail::directed_cyclic_distance(pb, pa, metric, interp));
}

SpinOrbitStart representative_orbit(const SpinModel& model, int sign, SpinVector generic) {
    if (sign != 1 && sign != -1) throw Error(ErrorKind::InvalidArgument, "representative_orbit: sign must be +-1");
    const Complex w = frequency(model);
    if (std::abs(w) < 1e-12 * std::max(1.0, std::abs(model.t1)))
        throw Error(ErrorKind::InvalidArgument, "representative_orbit: no closed orbit at the exceptional point");
    const SpinVector Mhat = (1.0 / w) * model.field();
    const SpinVector u1{0.0, 1.0, 0.0};
    const SpinVector u2 = cross(Mhat, u1);
    const double s = double(sign);
    const SpinVector e = (1.0 / std::sqrt(2.0)) * (u1 - Complex(0.0, s) * u2);
    // The amplitude is taken from the sign = +1 decomposition so both levels share it.
    const SpinVector e_plus_dual = (1.0 / std::sqrt(2.0)) * (u1 + Complex(0.0, 1.0) * u2);
    const Complex b = dot(generic, e_plus_dual);
    return {Complex(s) * Mhat + b * e, TimeContour::straight(kTwoPi / (s * w))};
}

std::string_view to_string(SpinAlignment a) {
    switch (a) {
        case SpinAlignment::AlignedWithM: return "AlignedWithM";
        case SpinAlignment::AlignedWithIM: return "AlignedWithIM";
        case SpinAlignment::Divergent: return "Divergent";
    }
    return "?";
}

SpinVector average_spin(const SpinTrajectory& trajectory) {
    const std::size_t n = trajectory.samples.size() - 1;
    SpinVector sum{};
    for (std::size_t j = 0; j < n; ++j) sum = sum + trajectory.samples[j].n;
    return (1.0 / double(n)) * sum;
}

SpinAlignment average_spin_alignment(const SpinModel& model, const SpinTrajectory& trajectory, double tolerance) {
    const SpinVector avg = average_spin(trajectory);
    const SpinVector M = model.field();
    const double scale = norm(avg) * norm(M);
    if (scale == 0.0) throw Error(ErrorKind::Unaligned, "average spin vanishes");
    const double angle = norm(cross(avg, M)) / scale;
    const Complex c = dot(avg, conj(M)) / dot(M, conj(M));
    if (angle < tolerance) {
        if (std::abs(c.imag()) <= tolerance * std::abs(c)) return SpinAlignment::AlignedWithM;
        if (std::abs(c.real()) <= tolerance * std::abs(c)) return SpinAlignment::AlignedWithIM;
    }
    std::ostringstream os;
    os << "average spin not aligned with M or iM (angle " << angle << ", coefficient " << c << ")";
    throw Error(ErrorKind::Unaligned, os.str());
}

OrbitClass classify_spin_orbit(const SpinModel& model, const SpinTrajectory& trajectory,
                               const std::vector<SpinTrajectory>& siblings, double tolerance) {
    (void)model;
    const SpinTrajectory img = spin_image(trajectory);
    if (trajectory_distance(trajectory, img) < tolerance) return {OrbitClassKind::SelfSymmetric, std::nullopt};
    for (std::size_t i = 0; i < siblings.size(); ++i)
        if (trajectory_distance(img, siblings[i]) < tolerance) return {OrbitClassKind::PairMember, i};
    throw Error(ErrorKind::UnpairedAsymmetricOrbit, "spin trajectory is neither self-symmetric nor paired");
}

Complex measured_period(const SpinModel& model, SpinVector n0, Complex nominal) {
    const SpinVector M = model.field();
    CMatrix K(3, 3);
    K(0, 1) = -M.z;
    K(0, 2) = M.y;
    K(1, 0) = M.z;
    K(1, 2) = -M.x;
    K(2, 0) = -M.y;
    K(2, 1) = M.x;
    const Complex dir = nominal / std::abs(nominal);
    auto gap = [&](double tau) {
        const CMatrix U = expm((tau * dir) * K);
        const SpinVector n{U(0, 0) * n0.x + U(0, 1) * n0.y + U(0, 2) * n0.z,
                           U(1, 0) * n0.x + U(1, 1) * n0.y + U(1, 2) * n0.z,
                           U(2, 0) * n0.x + U(2, 1) * n0.y + U(2, 2) * n0.z};
        return norm(n - n0);
    };
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double lo = 0.9 * std::abs(nominal), hi = 1.1 * std::abs(nominal);
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = gap(x1), f2 = gap(x2);
    while (hi - lo > 1e-14 * std::abs(nominal)) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = gap(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = gap(x2);
        }
    }
    return 0.5 * (lo + hi) * dir;
}

std::vector<SweepRow> pt_sweep(double t1, const std::vector<double>& delta1_values, const SweepOptions& options) {
    if (delta1_values.empty()) throw Error(ErrorKind::InvalidArgument, "pt_sweep: empty delta1 list");
    if (!std::is_sorted(delta1_values.begin(), delta1_values.end()))
        throw Error(ErrorKind::InvalidArgument, "pt_sweep: delta1 values must be sorted");
    std::vector<SweepRow> rows(delta1_values.size());
    parallel_for(
        rows.size(),
        [&](std::size_t i) {
            SweepRow& row = rows[i];
            const SpinModel model{t1, delta1_values[i]};
            row.delta1 = model.delta1;
            std::tie(row.e_plus, row.e_minus) = analytic_eigenvalues(model);
            if (std::abs(model.delta1 - t1) < options.transition_window * std::abs(t1)) {
                row.alignment = SpinAlignment::Divergent;
                row.note = "exceptional point: period diverges";
                return;
            }
            try {
                std::vector<SpinTrajectory> tr;
                for (int sign : {1, -1}) {
                    const auto start = representative_orbit(model, sign);
                    tr.push_back(bloch_integrate(model, start.n0, start.contour, options.steps));
                }
                const Complex c0 = dot(tr[0].samples.front().n, tr[0].samples.front().n);
                for (const auto& s : tr[0].samples)
                    row.casimir_drift = std::max(row.casimir_drift, std::abs(dot(s.n, s.n) - c0));
                row.closure = norm(tr[0].samples.back().n - tr[0].samples.front().n);
                row.alignment = average_spin_alignment(model, tr[0]);
                row.orbit_class = classify_spin_orbit(model, tr[0], {tr[1]}, options.classify_tolerance).kind;
            } catch (const Error& e) {
                if (e.kind() == ErrorKind::BlowUp) row.alignment = SpinAlignment::Divergent;
                row.note = std::string(to_string(e.kind())) + ": " + e.what();
            }
        },
        options.threads);
    return rows;
}

}  // namespace orbitrace
