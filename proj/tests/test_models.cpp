#include <doctest.h>

#include <algorithm>
#include <random>

#include <Eigen/Eigenvalues>

#include "orbitrace/models.hpp"

using namespace orbitrace;

namespace {

std::vector<ModelSpec> phase_space_models() {
    return {ModelSpec::oscillator(), ModelSpec::skin(), ModelSpec::lattice(), ModelSpec::double_well()};
}

PhasePoint random_point(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (;;) {
        PhasePoint z{{u(rng), u(rng)}, {u(rng), u(rng)}};
        if (std::abs(z.x) <= 5.0 && std::abs(z.p) <= 5.0 && std::abs(z.x.real()) > 1e-2) return z;
    }
}

bool same_set(std::vector<Complex> a, std::vector<Complex> b, double tol) {
    if (a.size() != b.size()) return false;
    for (Complex z : a) {
        auto it = std::min_element(b.begin(), b.end(),
                                   [&](Complex p, Complex q) { return std::abs(p - z) < std::abs(q - z); });
        if (std::abs(*it - z) > tol) return false;
        b.erase(it);
    }
    return true;
}

}  // namespace

TEST_CASE("hamiltonian by direct substitution") {
    CHECK(std::abs(hamiltonian(ModelSpec::oscillator(), {1.0, 0.0}) - 1.0) < 1e-15);
    CHECK(std::abs(hamiltonian(ModelSpec::skin(), {2.0, 0.0}) - 1.75) < 1e-15);
    CHECK(std::abs(hamiltonian(ModelSpec::double_well(), {1.0, 1.0}) - Complex(5.5, 4.0)) < 1e-14);
    // -2 [t0 cos p + i delta sin p + t0 cos(p_y - B x)] at x = 0, p = pi/2
    const Complex h2 = hamiltonian(ModelSpec::lattice(), {0.0, kPi / 2});
    CHECK(std::abs(h2 - Complex(2.0, -0.7)) < 1e-14);
}

TEST_CASE("gradient examples and finite differences") {
    const Gradient g = gradient(ModelSpec::oscillator(), {1.0, 2.0});
    CHECK(std::abs(g.dx - 2.0) < 1e-15);
    CHECK(std::abs(g.dp - 4.0) < 1e-15);
    const Gradient g1 = gradient(ModelSpec::skin(), {3.0, 1.0});
    CHECK(std::abs(g1.dx - 1.0) < 1e-15);
    CHECK(std::abs(g1.dp - Complex(2.0, 1.0)) < 1e-15);

    std::mt19937_64 rng(7);
    for (const auto& m : phase_space_models()) {
        double worst = 0.0;
        for (int i = 0; i < 100; ++i) {
            const PhasePoint z = random_point(rng);
            const double h = 1e-5;
            const Gradient gr = gradient(m, z);
            const Complex dx = (hamiltonian(m, {z.x + h, z.p}) - hamiltonian(m, {z.x - h, z.p})) / (2 * h);
            const Complex dp = (hamiltonian(m, {z.x, z.p + h}) - hamiltonian(m, {z.x, z.p - h})) / (2 * h);
            worst = std::max(worst, std::abs(dx - gr.dx) / std::max(1.0, std::abs(gr.dx)));
            worst = std::max(worst, std::abs(dp - gr.dp) / std::max(1.0, std::abs(gr.dp)));
        }
        INFO(m.name());
        CHECK(worst < 1e-6);
    }
}

TEST_CASE("momentum branches") {
    auto ho = momentum_branches(ModelSpec::oscillator(), 0.0, 4.0);
    CHECK(same_set({ho[0], ho[1]}, {2.0, -2.0}, 1e-14));
    auto h1 = momentum_branches(ModelSpec::skin(), 0.0, 1.0);
    CHECK(same_set({h1[0], h1[1]}, {Complex(1, -0.5), Complex(-1, -0.5)}, 1e-14));

    // H2 at x = 0, p_y = 0, E = 0: roots of -0.65 u^2 - 2 u - 1.35 = 0, p = -i log u.
    const Complex disc = std::sqrt(Complex(4.0 - 4.0 * 0.65 * 1.35));
    const Complex u1 = (2.0 + disc) / (-1.3), u2 = (2.0 - disc) / (-1.3);
    auto h2 = momentum_branches(ModelSpec::lattice(), 0.0, 0.0);
    CHECK(same_set({std::exp(kI * h2[0]), std::exp(kI * h2[1])}, {u1, u2}, 1e-12));

    std::mt19937_64 rng(11);
    for (const auto& m : phase_space_models()) {
        for (int i = 0; i < 50; ++i) {
            const PhasePoint z = random_point(rng);
            const Complex E = hamiltonian(m, z);
            for (Complex p : momentum_branches(m, z.x, E)) CHECK(std::abs(hamiltonian(m, {z.x, p}) - E) < 1e-10);
        }
    }
}

TEST_CASE("coalesced branches raise DegenerateBranch") {
    try {
        momentum_branches(ModelSpec::oscillator(), 2.0, 4.0);
        FAIL("expected DegenerateBranch");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DegenerateBranch);
    }
}

TEST_CASE("turning points") {
    CHECK(same_set(turning_points(ModelSpec::oscillator(), 4.0), {-2.0, 2.0}, 1e-14));
    const auto h1 = turning_points(ModelSpec::skin(), Complex(3, 1));
    REQUIRE(h1.size() == 2);
    CHECK(std::abs(h1[0] - Complex(-3, -1)) < 1e-14);
    CHECK(std::abs(h1[1] - Complex(3, 1)) < 1e-14);

    // H3 quartic against companion-matrix eigenvalues
    const DoubleWellParams q;
    const ModelSpec h3 = ModelSpec::double_well(q);
    for (Complex E : {Complex(10.0), Complex(3.0, 7.0), Complex(25.0, -2.0)}) {
        const std::array<Complex, 5> c{Complex(q.g), 0.0, -2.0 * q.g * q.a * q.a, kI * q.gain,
                                       q.g * std::pow(q.a, 4) - E};
        Eigen::Matrix4cd comp = Eigen::Matrix4cd::Zero();
        for (int j = 0; j < 4; ++j) comp(0, j) = -c[j + 1] / c[0];
        for (int i = 1; i < 4; ++i) comp(i, i - 1) = 1.0;
        Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(comp);
        std::vector<Complex> oracle(es.eigenvalues().data(), es.eigenvalues().data() + 4);
        const auto roots = turning_points(h3, E);
        CHECK(same_set(roots, oracle, 1e-9));
        CHECK(std::is_sorted(roots.begin(), roots.end(), [](Complex a, Complex b) {
            return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
        }));
        for (Complex x : roots) {
            CHECK(std::abs(hamiltonian(h3, {x, 0.0}) - E) < 1e-10 * (1 + std::abs(E)));
            CHECK(std::abs(gradient(h3, {x, 0.0}).dp) < 1e-10);
        }
    }

    // H2: both defining equations, via the vanishing discriminant of the branch quadratic
    const LatticeParams lp;
    const ModelSpec h2 = ModelSpec::lattice(lp);
    for (Complex E : {Complex(-3.0), Complex(0.5, 0.2)}) {
        const auto roots = turning_points(h2, E);
        CHECK(roots.size() == 4);
        for (Complex x : roots) {
            const Complex b = E + 2.0 * lp.t0 * std::cos(lp.field() * x - lp.p_y);
            const Complex disc = b * b - 4.0 * (lp.t0 + lp.delta) * (lp.t0 - lp.delta);
            CHECK(std::abs(disc) < 1e-10);
        }
    }
}

TEST_CASE("turning points are closed under the symmetry at real energy") {
    for (const auto& m : phase_space_models()) {
        for (double E : {0.7, 2.5, 12.0}) {
            if (m.id() == ModelId::H2 && E > 3.0) continue;
            const auto roots = turning_points(m, E);
            std::vector<Complex> image;
            for (Complex x : roots) image.push_back(symmetry_image(m, {x, 0.0}).x);
            INFO(m.name(), " E=", E);
            if (m.id() == ModelId::H2) {
                // closure holds modulo the spatial period
                const double L = *m.spatial_period();
                for (Complex y : image) {
                    double best = INFINITY;
                    for (Complex x : roots) {
                        const Complex d = y - x;
                        best = std::min(best, std::abs(Complex(d.real() - L * std::round(d.real() / L), d.imag())));
                    }
                    CHECK(best < 1e-9);
                }
            } else {
                CHECK(same_set(image, roots, 1e-9));
            }
        }
    }
}

TEST_CASE("symmetry images") {
    const PhasePoint z{Complex(1, 2), Complex(3, -1)};
    const PhasePoint a = symmetry_image(ModelSpec::skin(), z);
    CHECK(std::abs(a.x - Complex(1, -2)) < 1e-15);
    CHECK(std::abs(a.p - Complex(-3, -1)) < 1e-15);
    const PhasePoint b = symmetry_image(ModelSpec::double_well(), z);
    CHECK(std::abs(b.x - Complex(-1, 2)) < 1e-15);
    CHECK(std::abs(b.p - Complex(3, 1)) < 1e-15);
    const PhasePoint c = symmetry_image(ModelSpec::lattice(), z);
    CHECK(std::abs(c.x - Complex(1, -2)) < 1e-15);
    CHECK(std::abs(c.p - Complex(-3, -1)) < 1e-15);

    LatticeParams shifted;
    shifted.p_y = 0.7;
    const ModelSpec h2 = ModelSpec::lattice(shifted);
    const double x0 = shifted.p_y / shifted.field();
    const PhasePoint d = symmetry_image(h2, z);
    CHECK(std::abs(d.x - (x0 + std::conj(z.x - x0))) < 1e-12);
}

TEST_CASE("symmetry residual vanishes and the map is an involution") {
    std::mt19937_64 rng(3);
    LatticeParams shifted;
    shifted.p_y = 0.4;
    auto models = phase_space_models();
    models.push_back(ModelSpec::lattice(shifted));
    for (const auto& m : models) {
        double worst = 0.0, back = 0.0;
        for (int i = 0; i < 1000; ++i) {
            const PhasePoint z = random_point(rng);
            worst = std::max(worst, symmetry_residual(m, z));
            const PhasePoint zz = symmetry_image(m, symmetry_image(m, z));
            back = std::max(back, std::abs(zz.x - z.x) + std::abs(zz.p - z.p));
        }
        INFO(m.name());
        CHECK(worst < 1e-12);
        CHECK(back < 1e-12);
    }
}

TEST_CASE("model metadata") {
    CHECK(*ModelSpec::skin().spatial_period() == doctest::Approx(15.0));
    CHECK(*ModelSpec::lattice().spatial_period() == doctest::Approx(32.0));
    CHECK_FALSE(ModelSpec::double_well().spatial_period().has_value());
    CHECK(ModelSpec::skin().symmetry().time_sign == -1);
    CHECK(traversal_origin(ModelSpec::skin()) == doctest::Approx(-7.5));
    const auto cusps = cusp_points(ModelSpec::skin(), -7.0, 7.0);
    REQUIRE(cusps.size() == 1);
    CHECK(cusps[0] == doctest::Approx(0.0));
    CHECK_THROWS_AS(ModelSpec::skin({0.5, -1.0, 15.0}), Error);
}
