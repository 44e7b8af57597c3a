#pragma once

#include <string>
#include <vector>

#include "orbitrace/linalg.hpp"
#include "orbitrace/models.hpp"
#include "orbitrace/quantizer.hpp"

namespace orbitrace {

/// How the metric enters the pseudo-Hermiticity identity: eta H eta^-1 = H^dagger
/// (Metric) or eta H^T eta^-1 = H^dagger (Transpose).
enum class EtaForm { Metric, Transpose };

struct QuantumOperator {
    ModelId model = ModelId::HarmonicOscillator;
    CMatrix h;
    CMatrix eta;
    EtaForm form = EtaForm::Metric;
    std::string scheme;
    std::size_t grid = 0;
    double extent = 0.0;

    std::size_t dim() const { return h.rows(); }
};

/// Sinc-DVR of p^2 + omega^2 x^2 on N interior points of [-X, X].
QuantumOperator build_oscillator(double omega, double X, std::size_t N);

/// Plane waves m = -N/2..N/2 on the ring of circumference L (dimension N + 1).
QuantumOperator build_h1(const SkinParams& params, std::size_t N);

/// L x L tight-binding ring.
QuantumOperator build_h2(const LatticeParams& params);

/// Sinc-DVR on N interior points of the Dirichlet box [-X, X].
QuantumOperator build_h3(const DoubleWellParams& params, double X, std::size_t N);

/// 2 x 2 matrix (1/2) M.sigma with M = (t1, 0, i delta1).
QuantumOperator build_h4(double t1, double delta1);

std::vector<Complex> eigenvalues(const QuantumOperator& op);

double phs_residual(const QuantumOperator& op);
double propagator_residual(const QuantumOperator& op, Complex t);

/// max over lambda of min over lambda' of |lambda - conj(lambda')|.
double conjugation_closure(const std::vector<Complex>& spectrum);

struct MatchReport {
    std::vector<Complex> unmatched;
};

/// Greedy nearest-neighbour assignment of quantum levels to converged records in
/// order of increasing |E|. Crossover records only receive their nearest level and
/// do not consume it.
MatchReport match_spectra(const std::vector<Complex>& quantum, std::vector<SpectrumRecord>& records);

}  // namespace orbitrace
