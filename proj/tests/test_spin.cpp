#include <doctest.h>

#include <algorithm>

#include <Eigen/Eigenvalues>

#include "orbitrace/spin.hpp"

using namespace orbitrace;

namespace {

std::vector<Complex> eigen_levels(double t1, double delta1) {
    Eigen::Matrix2cd h;
    h << Complex(0.0, 0.5 * delta1), 0.5 * t1, 0.5 * t1, Complex(0.0, -0.5 * delta1);
    Eigen::ComplexEigenSolver<Eigen::Matrix2cd> es(h, false);
    std::vector<Complex> v{es.eigenvalues()(0), es.eigenvalues()(1)};
    std::sort(v.begin(), v.end(), [](Complex a, Complex b) { return a.real() + a.imag() < b.real() + b.imag(); });
    return v;
}

}  // namespace

TEST_CASE("two-level eigenvalues against Eigen") {
    for (double d : {0.0, 0.5, 1.9, 2.5, 4.0}) {
        const auto [ep, em] = analytic_eigenvalues({2.0, d});
        const auto oracle = eigen_levels(2.0, d);
        INFO("delta1 = ", d);
        CHECK(std::abs(em - oracle[0]) < 1e-12);
        CHECK(std::abs(ep - oracle[1]) < 1e-12);
        CHECK(std::abs(ep + em) < 1e-15);
    }
    const auto [a, b] = analytic_eigenvalues({2.0, 1.0});
    CHECK(std::abs(a - std::sqrt(3.0) / 2) < 1e-15);
    CHECK(std::abs(b + std::sqrt(3.0) / 2) < 1e-15);
    const auto [c, d] = analytic_eigenvalues({2.0, 4.0});
    CHECK(std::abs(c - Complex(0.0, std::sqrt(3.0))) < 1e-15);
    CHECK(std::abs(d + Complex(0.0, std::sqrt(3.0))) < 1e-15);
}

TEST_CASE("vector algebra") {
    const SpinVector ex{1.0, 0.0, 0.0}, ey{0.0, 1.0, 0.0};
    const SpinVector ez = cross(ex, ey);
    CHECK(ez.z == Complex(1.0));
    CHECK(dot({kI, 0.0, 0.0}, {kI, 0.0, 0.0}) == Complex(-1.0));
    CHECK(norm({kI, 0.0, 0.0}) == doctest::Approx(1.0));
}

TEST_CASE("representative orbits close and conserve the Casimir") {
    for (double d : {0.0, 1.0, 3.0}) {
        const SpinModel m{2.0, d};
        for (int sign : {1, -1}) {
            const auto st = representative_orbit(m, sign);
            const auto tr = bloch_integrate(m, st.n0, st.contour, 2048);
            const Complex c0 = dot(st.n0, st.n0);
            double drift = 0.0;
            for (const auto& s : tr.samples) drift = std::max(drift, std::abs(dot(s.n, s.n) - c0));
            INFO("delta1 = ", d, " sign ", sign);
            CHECK(drift < 1e-8);
            CHECK(norm(tr.samples.back().n - tr.samples.front().n) < 1e-8);
            // the energy shell: n . M fixed by the level sign
            const Complex mm = std::sqrt(dot(m.field(), m.field()));
            CHECK(std::abs(dot(st.n0, m.field()) - double(sign) * mm) < 1e-12);

            const Complex nominal = kTwoPi / (double(sign) * mm);
            CHECK(std::abs(measured_period(m, st.n0, nominal) - nominal) < 1e-6 * std::abs(nominal));
        }
    }
}

TEST_CASE("alignment and classification on both sides") {
    const SpinModel unbroken{2.0, 1.0};
    const SpinModel broken{2.0, 3.0};
    auto orbits = [](const SpinModel& m) {
        std::vector<SpinTrajectory> tr;
        for (int sign : {1, -1}) {
            const auto st = representative_orbit(m, sign);
            tr.push_back(bloch_integrate(m, st.n0, st.contour, 2048));
        }
        return tr;
    };
    const auto u = orbits(unbroken);
    CHECK(average_spin_alignment(unbroken, u[0]) == SpinAlignment::AlignedWithM);
    CHECK(classify_spin_orbit(unbroken, u[0], {u[1]}).kind == OrbitClassKind::SelfSymmetric);

    const auto b = orbits(broken);
    CHECK(average_spin_alignment(broken, b[0]) == SpinAlignment::AlignedWithIM);
    const OrbitClass cls = classify_spin_orbit(broken, b[0], {b[1]});
    CHECK(cls.kind == OrbitClassKind::PairMember);
    CHECK(cls.partner == std::optional<std::size_t>(0));
    CHECK(trajectory_distance(spin_image(b[0]), b[1]) < 1e-4);
}

TEST_CASE("sweep across the exceptional point") {
    std::vector<double> d;
    for (int i = 0; i <= 40; ++i) d.push_back(0.1 * i);
    const auto rows = pt_sweep(2.0, d);
    REQUIRE(rows.size() == 41);
    for (const auto& r : rows) {
        INFO("delta1 = ", r.delta1);
        if (std::abs(r.delta1 - 2.0) < 1e-9) {
            CHECK(r.alignment == SpinAlignment::Divergent);
            continue;
        }
        const auto oracle = eigen_levels(2.0, r.delta1);
        CHECK(std::abs(r.e_minus - oracle[0]) < 1e-12);
        if (r.delta1 < 2.0) {
            CHECK(std::abs(r.e_plus.imag()) < 1e-12);
            CHECK(r.alignment == SpinAlignment::AlignedWithM);
            CHECK(r.orbit_class == OrbitClassKind::SelfSymmetric);
        } else {
            CHECK(std::abs(r.e_plus.real()) < 1e-12);
            CHECK(r.alignment == SpinAlignment::AlignedWithIM);
            CHECK(r.orbit_class == OrbitClassKind::PairMember);
        }
        CHECK(r.casimir_drift < 1e-8);
        CHECK(r.closure < 1e-8);
    }
}

TEST_CASE("sweep arguments") {
    CHECK_THROWS_AS(pt_sweep(2.0, {}), Error);
    CHECK_THROWS_AS(pt_sweep(2.0, {1.0, 0.5}), Error);
}
