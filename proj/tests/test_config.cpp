#include <doctest.h>

#include "orbitrace/config.hpp"

using namespace orbitrace;

namespace {

std::string config_error(const std::string& text) {
    try {
        parse_config(text);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Config);
        return e.what();
    }
    return "";
}

bool starts_with(const std::string& s, const std::string& prefix) { return s.rfind(prefix, 0) == 0; }

}  // namespace

TEST_CASE("minimal configs") {
    const auto ho = parse_config(R"({"name": "x", "model": {"kind": "oscillator"}})");
    CHECK(ho.model_id == ModelId::HarmonicOscillator);
    REQUIRE(ho.model.has_value());
    CHECK(ho.model->as<OscillatorParams>().omega == 1.0);
    CHECK(ho.output.format == "csv");
    CHECK(ho.tolerances.match == 0.02);
    CHECK_FALSE(ho.spin.has_value());

    const auto h3 = parse_config(R"({"name": "y", "model": {"kind": "h3", "g": 0.25, "a": 3, "gain": 2}})");
    CHECK(h3.model->as<DoubleWellParams>().a == 3.0);
    CHECK(h3.model->as<DoubleWellParams>().gain == 2.0);
}

TEST_CASE("spin configs") {
    const auto c = parse_config(
        R"({"name": "s", "model": {"kind": "h4", "t1": 2}, "spin": {"delta1": {"start": 0, "stop": 4, "step": 0.1}}})");
    REQUIRE(c.spin.has_value());
    CHECK_FALSE(c.model.has_value());
    REQUIRE(c.spin->delta1.size() == 41);
    CHECK(c.spin->delta1[20] == doctest::Approx(2.0));
    CHECK(c.spin->delta1.back() == doctest::Approx(4.0));

    const auto l = parse_config(R"({"name": "s", "model": {"kind": "h4"}, "spin": {"delta1": [0.5, 1.5]}})");
    CHECK(l.spin->delta1 == std::vector<double>{0.5, 1.5});

    CHECK(starts_with(config_error(R"({"name": "s", "model": {"kind": "h4"}, "spin": {"delta1": []}})"),
                      "spin.delta1: must be nonempty"));
    CHECK(starts_with(config_error(R"({"name": "s", "model": {"kind": "h4"}, "spin": {"delta1": [2, 1]}})"),
                      "spin.delta1: must be sorted"));
    CHECK(starts_with(config_error(R"({"name": "s", "model": {"kind": "h4"}})"), "spin: missing required key"));
    CHECK(starts_with(config_error(R"({"name": "s", "model": {"kind": "h1"}, "spin": {"delta1": [1]}})"),
                      "spin: only valid"));
}

TEST_CASE("errors name the offending key") {
    CHECK(starts_with(config_error("{ not json"), "<root>: malformed JSON"));
    CHECK(starts_with(config_error(R"({"name": "x", "model": {"kind": "oscillator", "omgea": 1}})"),
                      "model.omgea: unknown key"));
    CHECK(starts_with(config_error(R"({"name": "x", "model": {"kind": "h5"}})"), "model.kind: unknown model"));
    CHECK(starts_with(config_error(R"({"name": "x", "model": {"kind": "h2", "delta": 2}})"), "model.delta"));
    CHECK(starts_with(config_error(R"({"name": "x", "model": {"kind": "h1"}, "semiclassical": {"steps": 1022}})"),
                      "semiclassical.steps"));
    CHECK(starts_with(config_error(R"({"name": "x", "model": {"kind": "h1"}, "output": {"format": "xml"}})"),
                      "output.format"));
    CHECK(starts_with(config_error(R"({"name": "x", "model": {"kind": "h1", "gamma": "big"}})"),
                      "model.gamma: expected a number"));
    CHECK(starts_with(config_error(R"({"name": "x"})"), "model: missing required key"));
    CHECK(starts_with(config_error(R"({"name": "x", "model": {"kind": "h3"},
                                      "families": [{"label": "outer", "n_min": 5, "n_max": 2}]})"),
                      "families[0].n_max: n-range is empty"));
    CHECK(starts_with(config_error(R"({"name": "x", "model": {"kind": "h3"},
                                      "families": [{"label": "outer", "window": [3, 1]}]})"),
                      "families[0].window"));
}

TEST_CASE("family overrides") {
    const auto c = parse_config(R"({"name": "x", "model": {"kind": "oscillator"},
        "families": [{"label": "oscillator", "mu": 0.3, "n_min": 2, "n_max": 4, "window": [0.5, null]}]})");
    const FamilySet set = configured_families(c);
    const OrbitFamily* f = find_family(set.families, "oscillator");
    REQUIRE(f != nullptr);
    CHECK(f->mu == 0.3);
    CHECK(f->n_min == 2);
    CHECK(f->n_max == 4);
    CHECK(f->window.lo == 0.5);
    CHECK(std::isinf(f->window.hi));

    const auto bad = parse_config(R"({"name": "x", "model": {"kind": "oscillator"},
        "families": [{"label": "nope"}]})");
    try {
        configured_families(bad);
        FAIL("expected a config error");
    } catch (const Error& e) {
        CHECK(starts_with(e.what(), "families[0].label: unknown family"));
    }
}

TEST_CASE("shipped configs load") {
    for (const char* name : {"oscillator", "h1_skin", "h2_lattice", "h3_double_well", "h4_two_level"}) {
        INFO(name);
        const auto c = load_config(std::filesystem::path(ORBITRACE_CONFIGS) / (std::string(name) + ".json"));
        CHECK(c.name == name);
    }
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), Error);
}
