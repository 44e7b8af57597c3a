#include "orbitrace/quantum.hpp"

#include <algorithm>
#include <numeric>

namespace orbitrace {

namespace {

CMatrix reflection(std::size_t n) {
    CMatrix p(n, n);
    for (std::size_t i = 0; i < n; ++i) p(i, n - 1 - i) = 1.0;
    return p;
}

// Sinc-DVR kinetic matrix for p^2 on a uniform grid of spacing h.
void add_kinetic(CMatrix& m, double h) {
    const std::size_t n = m.rows();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) {
                m(i, j) += kPi * kPi / (3.0 * h * h);
            } else {
                const double d = double(i) - double(j);
                const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
                m(i, j) += 2.0 * sign / (d * d * h * h);
            }
        }
}

double grid_point(double X, std::size_t N, std::size_t i) { return -X + double(i + 1) * 2.0 * X / double(N + 1); }

}  // namespace

QuantumOperator build_oscillator(double omega, double X, std::size_t N) {
    if (N < 16 || !(X > 0.0)) throw Error(ErrorKind::InvalidArgument, "build_oscillator: N >= 16 and X > 0 required");
    QuantumOperator op;
    op.model = ModelId::HarmonicOscillator;
    op.h = CMatrix(N, N);
    add_kinetic(op.h, 2.0 * X / double(N + 1));
    for (std::size_t i = 0; i < N; ++i) {
        const double x = grid_point(X, N, i);
        op.h(i, i) += omega * omega * x * x;
    }
    op.eta = CMatrix::identity(N);
    op.form = EtaForm::Metric;
    op.scheme = "sinc-dvr";
    op.grid = N;
    op.extent = X;
    return op;
}

QuantumOperator build_h1(const SkinParams& p, std::size_t N) {
    if (N < 128 || N % 2 != 0) throw Error(ErrorKind::InvalidArgument, "build_h1: N >= 128 and even required");
    const std::size_t dim = N + 1;
    const long half = static_cast<long>(N / 2);
    QuantumOperator op;
    op.model = ModelId::H1;
    op.h = CMatrix(dim, dim);
    auto coeff = [&](long d) {
        if (d == 0) return p.length / 4.0;
        if (d % 2 == 0) return 0.0;
        return -p.length / (kPi * kPi * double(d) * double(d));
    };
    for (std::size_t i = 0; i < dim; ++i) {
        const long m = static_cast<long>(i) - half;
        const Complex k = kTwoPi * double(m) / p.length + kI * p.gamma;
        for (std::size_t j = 0; j < dim; ++j) {
            const long d = static_cast<long>(i) - static_cast<long>(j);
            op.h(i, j) = p.v0 * coeff(d);
        }
        op.h(i, i) += k * k;
    }
    op.eta = reflection(dim);
    op.form = EtaForm::Transpose;
    op.scheme = "plane-wave";
    op.grid = N;
    op.extent = p.length;
    return op;
}

QuantumOperator build_h2(const LatticeParams& p) {
    if (p.length < 8.0 || p.length != std::floor(p.length))
        throw Error(ErrorKind::InvalidArgument, "build_h2: integer L >= 8 required");
    const auto n = static_cast<std::size_t>(p.length);
    const double B = p.field();
    QuantumOperator op;
    op.model = ModelId::H2;
    op.h = CMatrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        op.h(j, (j + 1) % n) += -(p.t0 + p.delta);
        op.h(j, (j + n - 1) % n) += -(p.t0 - p.delta);
        op.h(j, j) += -2.0 * p.t0 * std::cos(B * double(j) - p.p_y);
    }
    op.eta = CMatrix::identity(n);
    op.form = EtaForm::Transpose;
    op.scheme = "lattice";
    op.grid = n;
    op.extent = p.length;
    return op;
}

QuantumOperator build_h3(const DoubleWellParams& p, double X, std::size_t N) {
    if (N < 64) throw Error(ErrorKind::InvalidArgument, "build_h3: N >= 64 required");
    if (!(X > 2.0 * p.a)) throw Error(ErrorKind::InvalidArgument, "build_h3: X > 2a required");
    QuantumOperator op;
    op.model = ModelId::H3;
    op.h = CMatrix(N, N);
    add_kinetic(op.h, 2.0 * X / double(N + 1));
    for (std::size_t i = 0; i < N; ++i) {
        const double x = grid_point(X, N, i);
        const double u = x * x - p.a * p.a;
        op.h(i, i) += p.g * u * u + kI * p.gain * x;
    }
    op.eta = reflection(N);
    op.form = EtaForm::Transpose;
    op.scheme = "sinc-dvr";
    op.grid = N;
    op.extent = X;
    return op;
}

QuantumOperator build_h4(double t1, double delta1) {
    QuantumOperator op;
    op.model = ModelId::H4;
    op.h = CMatrix(2, 2);
    op.h(0, 0) = 0.5 * kI * delta1;
    op.h(1, 1) = -0.5 * kI * delta1;
    op.h(0, 1) = op.h(1, 0) = 0.5 * t1;
    op.eta = reflection(2);
    op.form = EtaForm::Transpose;
    op.scheme = "two-level";
    op.grid = 2;
    return op;
}

std::vector<Complex> eigenvalues(const QuantumOperator& op) { return eigenvalues(op.h); }

double phs_residual(const QuantumOperator& op) {
    const CMatrix& base = op.form == EtaForm::Transpose ? op.h.transpose() : op.h;
    const CMatrix lhs = op.eta * base * inverse(op.eta);
    const double norm = op.h.frobenius_norm();
    return norm == 0.0 ? 0.0 : (lhs - op.h.adjoint()).frobenius_norm() / norm;
}

double propagator_residual(const QuantumOperator& op, Complex t) {
    if (op.dim() > 256) throw Error(ErrorKind::InvalidArgument, "propagator_residual: dim <= 256 required");
    const CMatrix u = expm(-kI * t * op.h);
    const CMatrix back = expm(kI * std::conj(t) * op.h).adjoint();
    const CMatrix& base = op.form == EtaForm::Transpose ? u.transpose() : u;
    const CMatrix lhs = op.eta * base * inverse(op.eta);
    return (lhs - back).frobenius_norm() / u.frobenius_norm();
}

double conjugation_closure(const std::vector<Complex>& spectrum) {
    double worst = 0.0;
    for (Complex a : spectrum) {
        double best = INFINITY;
        for (Complex b : spectrum) best = std::min(best, std::abs(a - std::conj(b)));
        worst = std::max(worst, best);
    }
    return worst;
}

MatchReport match_spectra(const std::vector<Complex>& quantum, std::vector<SpectrumRecord>& records) {
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < records.size(); ++i)
        if (records[i].converged()) order.push_back(i);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(records[a].energy) < std::abs(records[b].energy);
    });
    std::vector<bool> used(quantum.size(), false);
    for (std::size_t i : order) {
        auto& r = records[i];
        std::optional<std::size_t> best;
        for (std::size_t k = 0; k < quantum.size(); ++k) {
            if (used[k] && !r.crossover) continue;
            if (!best) {
                best = k;
                continue;
            }
            const double dk = std::abs(quantum[k] - r.energy), db = std::abs(quantum[*best] - r.energy);
            if (dk < db || (dk == db && std::abs(quantum[k]) < std::abs(quantum[*best]))) best = k;
        }
        if (!best) continue;
        if (!r.crossover) used[*best] = true;
        r.quantum_match = quantum[*best];
        r.match_error = std::abs(quantum[*best] - r.energy) / (1.0 + std::abs(r.energy));
    }
    MatchReport report;
    for (std::size_t k = 0; k < quantum.size(); ++k)
        if (!used[k]) report.unmatched.push_back(quantum[k]);
    return report;
}

}  // namespace orbitrace
