#include <doctest.h>

#include "orbitrace/action.hpp"
#include "orbitrace/integrator.hpp"

using namespace orbitrace;

namespace {

Orbit shifted(const Orbit& o, std::size_t k) {
    Orbit s = o;
    const std::size_t n = o.samples.size() - 1;
    for (std::size_t j = 0; j < n; ++j) s.samples[j].z = o.samples[(j + k) % n].z;
    s.samples[n].z = s.samples[0].z;
    return s;
}

OrbitFamily family(const ModelSpec& m, TurningPair pair, const char* label) {
    OrbitFamily f;
    f.label = label;
    f.kind = FamilyKind::Librational;
    f.pair = pair;
    (void)m;
    return f;
}

double mean_re_x(const Orbit& o) {
    double s = 0.0;
    for (const auto& p : o.samples) s += p.z.x.real();
    return s / double(o.samples.size());
}

}  // namespace

TEST_CASE("time contours") {
    const auto c = TimeContour::straight(Complex(2.0, 1.0));
    CHECK(c.segments() == 1);
    CHECK(std::abs(c.at(0.25) - Complex(0.5, 0.25)) < 1e-15);
    const auto p = TimeContour::polyline({0.0, Complex(1.0, 1.0), Complex(2.0, 0.0)});
    CHECK(std::abs(p.at(0.75) - Complex(1.5, 0.5)) < 1e-15);
    CHECK(std::abs(p.conjugated().knots()[1] - Complex(1.0, -1.0)) < 1e-15);
    CHECK_THROWS_AS(TimeContour::polyline({1.0, 2.0}), Error);
    CHECK_THROWS_AS(TimeContour::straight(0.0), Error);
}

TEST_CASE("oscillator orbits") {
    const ModelSpec ho = ModelSpec::oscillator();
    const Orbit full = integrate(ho, {1.0, 0.0}, TimeContour::straight(2 * kPi), 1024);
    CHECK(full.samples.size() == 1025);
    CHECK(closure_error(full) < 1e-8);
    CHECK(energy_drift(ho, full) < 1e-9);

    // x = cos 2t, p = -sin 2t: the antipode is reached after a quarter of 2 pi
    const Orbit half = integrate(ho, {1.0, 0.0}, TimeContour::straight(kPi / 2), 1024);
    CHECK(std::abs(half.samples.back().z.x + 1.0) < 1e-8);
    CHECK(std::abs(half.samples.back().z.p) < 1e-8);

    // line action of one period equals pi E
    const Orbit one = integrate(ho, {2.0, 0.0}, TimeContour::straight(kPi), 2048);
    CHECK(std::abs(one.line_action - 4.0 * kPi) < 1e-9);
}

TEST_CASE("fourth-order convergence") {
    const ModelSpec ho = ModelSpec::oscillator();
    const double e1 = closure_error(integrate(ho, {1.0, 0.0}, TimeContour::straight(kPi), 64));
    const double e2 = closure_error(integrate(ho, {1.0, 0.0}, TimeContour::straight(kPi), 128));
    CHECK(e1 / e2 >= 15.0);
}

TEST_CASE("blow-up and argument checks") {
    const ModelSpec ho = ModelSpec::oscillator();
    // imaginary time: x = cosh(2 tau) passes 1e6 before tau = 10
    try {
        integrate(ho, {1.0, 0.0}, TimeContour::straight(Complex(0.0, 10.0)), 1024);
        FAIL("expected BlowUp");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::BlowUp);
    }
    CHECK_THROWS_AS(integrate(ho, {1.0, 0.0}, TimeContour::straight(1.0), 8), Error);
    CHECK_THROWS_AS(integrate(ho, {1.0, 0.0}, TimeContour::polyline({0.0, 1.0, 2.0, 3.0}), 64), Error);
}

TEST_CASE("H1 confined orbit from the action module closes") {
    const ModelSpec h1 = ModelSpec::skin();
    const OrbitFamily f = family(h1, TurningPair::Central, "confined");
    const Complex E = 2.0;
    const Orbit o = family_orbit(h1, f, E, 2048);
    CHECK(closure_error(o) < 1e-6);
    CHECK(energy_drift(h1, o) < 1e-7);
    CHECK(std::abs(o.contour.period() - period(h1, f, E)) < 1e-8);
    CHECK(std::abs(o.line_action - action_librational(h1, f, E)) < 1e-5);
}

TEST_CASE("contour independence") {
    const ModelSpec ho = ModelSpec::oscillator();
    const Complex T = kPi;
    const auto straight = integrate(ho, {1.0, 0.3}, TimeContour::straight(T), 2048);
    const auto bent =
        integrate(ho, {1.0, 0.3}, TimeContour::polyline({0.0, T / 2.0 + Complex(0, 0.1 * std::abs(T)), T}), 2048);
    CHECK(std::abs(straight.samples.back().z.x - bent.samples.back().z.x) < 1e-6);
    CHECK(std::abs(straight.samples.back().z.p - bent.samples.back().z.p) < 1e-6);

    const ModelSpec h3 = ModelSpec::double_well();
    const OrbitFamily outer = family(h3, TurningPair::Outer, "outer");
    const OrbitStart st = orbit_start(h3, outer, 30.0, 2048);
    const Complex P = st.contour.period();
    const auto a = integrate(h3, st.z0, TimeContour::straight(P), 2048);
    const auto b =
        integrate(h3, st.z0, TimeContour::polyline({0.0, P / 2.0 + Complex(0, 0.1 * std::abs(P)), P}), 2048);
    CHECK(closure_error(a) < 1e-6);
    CHECK(std::abs(a.samples.back().z.x - b.samples.back().z.x) < 1e-6);
    CHECK(std::abs(a.samples.back().z.p - b.samples.back().z.p) < 1e-6);
}

TEST_CASE("orbit images") {
    const ModelSpec h3 = ModelSpec::double_well();
    const OrbitFamily left = family(h3, TurningPair::LeftWell, "left-well");
    const Complex E(3.342250, -7.522740);
    const Orbit o = family_orbit(h3, left, E, 2048);
    const Orbit img = orbit_image(h3, o);

    CHECK(img.energy == std::conj(o.energy));
    CHECK(img.contour.period() == std::conj(o.contour.period()));
    CHECK(mean_re_x(o) < -0.5);
    CHECK(mean_re_x(img) > 0.5);
    CHECK(orbit_distance(o, img) > 1e-2);

    const Orbit back = orbit_image(h3, img);
    double d = 0.0;
    for (std::size_t j = 0; j < o.samples.size(); ++j)
        d = std::max(d, std::abs(back.samples[j].z.x - o.samples[j].z.x) + std::abs(back.samples[j].z.p - o.samples[j].z.p));
    CHECK(d < 1e-10);

    // the image is itself a solution
    const Orbit redo = integrate(h3, img.samples.front().z, img.contour, 2048);
    double r = 0.0;
    for (std::size_t j = 0; j < o.samples.size(); ++j)
        r = std::max(r, std::abs(redo.samples[j].z.x - img.samples[j].z.x) + std::abs(redo.samples[j].z.p - img.samples[j].z.p));
    CHECK(r < 1e-6);

    // above the barrier the orbit is its own image
    const OrbitFamily outer = family(h3, TurningPair::Outer, "outer");
    const Orbit hi = family_orbit(h3, outer, 30.0, 2048);
    CHECK(orbit_distance(hi, orbit_image(h3, hi)) < 1e-6);
}

TEST_CASE("orbit distance") {
    const ModelSpec ho = ModelSpec::oscillator();
    const Orbit o = integrate(ho, {1.0, 0.0}, TimeContour::straight(kPi), 512);
    CHECK(orbit_distance(o, o) < 1e-14);
    const Orbit s = shifted(o, 37);
    CHECK(orbit_distance(o, s) < 1e-10);
    CHECK(orbit_distance(s, o) == doctest::Approx(orbit_distance(o, s)));
    const Orbit big = integrate(ho, {2.0, 0.0}, TimeContour::straight(kPi), 512);
    CHECK(orbit_distance(o, big) == doctest::Approx(1.0).epsilon(1e-6));
    const Orbit other = integrate(ho, {1.0, 0.0}, TimeContour::straight(kPi), 256);
    CHECK_THROWS_AS(orbit_distance(o, other), Error);
}
