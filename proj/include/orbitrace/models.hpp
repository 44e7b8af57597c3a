#pragma once

#include <array>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "orbitrace/core.hpp"

namespace orbitrace {

enum class ModelId { HarmonicOscillator, H1, H2, H3, H4 };

std::string_view to_string(ModelId id);

struct PhasePoint {
    Complex x;
    Complex p;
};

/// Image of a point under the classical symmetry composed with conjugation:
/// x -> x_center + x_scale * conj(x - x_center), p -> p_scale * conj(p).
struct SymmetryMap {
    double x_scale = 1.0;
    double x_center = 0.0;
    double p_scale = -1.0;
    int time_sign = -1;  // -1: the map involves a transpose, images run backwards in time
    bool conjugates = true;

    PhasePoint apply(PhasePoint z) const;
};

struct OscillatorParams {
    double omega = 1.0;
};

struct SkinParams {
    double gamma = 0.5;
    double v0 = 1.0;
    double length = 15.0;
};

struct LatticeParams {
    double t0 = -1.0;
    double delta = 0.35;
    double length = 32.0;
    int flux_quanta = 1;
    double p_y = 0.0;

    double field() const { return kTwoPi * flux_quanta / length; }
};

struct DoubleWellParams {
    double g = 0.5;
    double a = 2.0;
    double gain = 4.0;
};

/// Analytic piece of a piecewise model. Only H1 has more than one: `cell` is the
/// ring copy and `side` the sign of Re x relative to the cell centre.
struct Piece {
    int cell = 0;
    int side = 0;
    friend bool operator==(const Piece&, const Piece&) = default;
};

class ModelSpec {
public:
    using Params = std::variant<OscillatorParams, SkinParams, LatticeParams, DoubleWellParams>;

    static ModelSpec oscillator(OscillatorParams params = {});
    static ModelSpec skin(SkinParams params = {});
    static ModelSpec lattice(LatticeParams params = {});
    static ModelSpec double_well(DoubleWellParams params = {});

    ModelId id() const { return id_; }
    std::string_view name() const { return to_string(id_); }
    const Params& params() const { return params_; }
    template <class P>
    const P& as() const { return std::get<P>(params_); }

    SymmetryMap symmetry() const;
    std::optional<double> spatial_period() const;
    std::optional<double> momentum_period() const;

private:
    ModelSpec(ModelId id, Params params) : id_(id), params_(params) {}
    ModelId id_;
    Params params_;
};

struct Gradient {
    Complex dx;
    Complex dp;
};

Piece piece_of(const ModelSpec& model, Complex x);

Complex hamiltonian(const ModelSpec& model, PhasePoint z);
Complex hamiltonian(const ModelSpec& model, PhasePoint z, Piece piece);

Gradient gradient(const ModelSpec& model, PhasePoint z);
Gradient gradient(const ModelSpec& model, PhasePoint z, Piece piece);

/// Both solutions p of H(x, p) = E. Throws DegenerateBranch at a turning point.
std::array<Complex, 2> momentum_branches(const ModelSpec& model, Complex x, Complex E);
std::array<Complex, 2> momentum_branches(const ModelSpec& model, Complex x, Complex E, Piece piece);

/// Points with H = E and dH/dp = 0, sorted by (Re, Im). H2 roots are those with
/// Re(Bx - p_y) in [-pi/2, 3pi/2).
std::vector<Complex> turning_points(const ModelSpec& model, Complex E);

enum class TurningPair { Central, LeftWell, RightWell, Outer, BandBottom, BandTop };

std::string_view to_string(TurningPair pair);

/// The two turning points bounding a librational family, ordered (Re, Im).
std::array<Complex, 2> turning_pair(const ModelSpec& model, TurningPair pair, Complex E);

PhasePoint symmetry_image(const ModelSpec& model, PhasePoint z);
double symmetry_residual(const ModelSpec& model, PhasePoint z);

/// Real positions in (lo, hi) where the analytic piece changes.
std::vector<double> cusp_points(const ModelSpec& model, double lo, double hi);

/// Start of the real-x period traversed by running orbits (a cusp for H1).
double traversal_origin(const ModelSpec& model);

}  // namespace orbitrace
