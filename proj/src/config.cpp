#include "orbitrace/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace orbitrace {
namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw Error(ErrorKind::Config, path + ": " + what);
}

std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

// Object reader that remembers which keys were consumed so leftovers can be rejected.
class Table {
public:
    Table(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }
    std::string path(const std::string& key) const { return join(path_, key); }

    const json* find(const std::string& key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    const json& require(const std::string& key) {
        const json* v = find(key);
        if (!v) fail(path(key), "missing required key");
        return *v;
    }

    double number(const std::string& key, double fallback) {
        const json* v = find(key);
        if (!v) return fallback;
        if (!v->is_number()) fail(path(key), "expected a number");
        const double x = v->get<double>();
        if (!std::isfinite(x)) fail(path(key), "must be finite");
        return x;
    }

    double positive(const std::string& key, double fallback) {
        const double x = number(key, fallback);
        if (!(x > 0.0)) fail(path(key), "must be > 0");
        return x;
    }

    long integer(const std::string& key, long fallback) {
        const json* v = find(key);
        if (!v) return fallback;
        if (!v->is_number_integer()) fail(path(key), "expected an integer");
        return v->get<long>();
    }

    std::size_t count(const std::string& key, std::size_t fallback, std::size_t minimum) {
        const long n = integer(key, static_cast<long>(fallback));
        if (n < static_cast<long>(minimum)) fail(path(key), "must be >= " + std::to_string(minimum));
        return static_cast<std::size_t>(n);
    }

    std::string text(const std::string& key, const std::string& fallback) {
        const json* v = find(key);
        if (!v) return fallback;
        if (!v->is_string()) fail(path(key), "expected a string");
        return v->get<std::string>();
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) fail(path(it.key()), "unknown key");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

ModelId parse_model_id(const std::string& kind, const std::string& path) {
    if (kind == "oscillator") return ModelId::HarmonicOscillator;
    if (kind == "h1") return ModelId::H1;
    if (kind == "h2") return ModelId::H2;
    if (kind == "h3") return ModelId::H3;
    if (kind == "h4") return ModelId::H4;
    fail(path, "unknown model '" + kind + "' (expected oscillator, h1, h2, h3 or h4)");
}

void parse_model(Table& root, ExperimentConfig& cfg) {
    Table t(root.require("model"), "model");
    if (!t.has("kind")) fail(t.path("kind"), "missing required key");
    cfg.model_id = parse_model_id(t.text("kind", ""), t.path("kind"));
    switch (cfg.model_id) {
        case ModelId::HarmonicOscillator:
            cfg.model = ModelSpec::oscillator({t.positive("omega", 1.0)});
            break;
        case ModelId::H1: {
            SkinParams p;
            p.gamma = t.number("gamma", p.gamma);
            p.v0 = t.positive("v0", p.v0);
            p.length = t.positive("length", p.length);
            cfg.model = ModelSpec::skin(p);
            break;
        }
        case ModelId::H2: {
            LatticeParams p;
            p.t0 = t.number("t0", p.t0);
            p.delta = t.number("delta", p.delta);
            p.length = static_cast<double>(t.count("length", 32, 8));
            p.flux_quanta = static_cast<int>(t.integer("flux_quanta", p.flux_quanta));
            p.p_y = t.number("p_y", p.p_y);
            if (p.t0 == 0.0) fail(t.path("t0"), "must be nonzero");
            if (std::abs(p.delta) >= std::abs(p.t0)) fail(t.path("delta"), "must satisfy |delta| < |t0|");
            cfg.model = ModelSpec::lattice(p);
            break;
        }
        case ModelId::H3: {
            DoubleWellParams p;
            p.g = t.positive("g", p.g);
            p.a = t.positive("a", p.a);
            p.gain = t.number("gain", p.gain);
            cfg.model = ModelSpec::double_well(p);
            break;
        }
        case ModelId::H4: {
            SpinConfig s;
            s.t1 = t.positive("t1", s.t1);
            cfg.spin = s;
            break;
        }
    }
    t.finish();
}

void parse_semiclassical(Table& root, ExperimentConfig& cfg) {
    const json* v = root.find("semiclassical");
    if (!v) return;
    Table t(*v, "semiclassical");
    QuantizerOptions& q = cfg.quantizer;
    q.steps = t.count("steps", q.steps, 16);
    if (q.steps % 4 != 0) fail(t.path("steps"), "must be a multiple of 4");
    q.quadrature.nodes = t.count("nodes", q.quadrature.nodes, 8);
    q.quadrature.branch_ratio = t.positive("branch_ratio", q.quadrature.branch_ratio);
    if (q.quadrature.branch_ratio >= 1.0) fail(t.path("branch_ratio"), "must be < 1");
    q.quadrature.path_clearance = t.positive("path_clearance", q.quadrature.path_clearance);
    q.quadrature.collision_margin = t.positive("collision_margin", q.quadrature.collision_margin);
    q.tolerance = t.positive("tolerance", q.tolerance);
    q.max_iterations = static_cast<int>(t.count("max_iterations", q.max_iterations, 1));
    q.window_slack = t.positive("window_slack", q.window_slack);
    q.classify_tolerance = t.positive("classify_tolerance", q.classify_tolerance);
    q.dedup_tolerance = t.positive("dedup_tolerance", q.dedup_tolerance);
    q.crossover_fraction = t.positive("crossover_fraction", q.crossover_fraction);
    q.threads = static_cast<unsigned>(t.count("threads", q.threads, 0));
    cfg.integrator.blowup_bound = t.positive("blowup_bound", cfg.integrator.blowup_bound);
    t.finish();
}

Complex parse_complex(const json& v, const std::string& path) {
    if (v.is_number()) return {v.get<double>(), 0.0};
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
        return {v[0].get<double>(), v[1].get<double>()};
    fail(path, "expected a number or a [re, im] pair");
}

void parse_quantum(Table& root, ExperimentConfig& cfg) {
    const json* v = root.find("quantum");
    if (!v) return;
    Table t(*v, "quantum");
    QuantumConfig& q = cfg.quantum;
    q.grid = t.count("grid", q.grid, 0);
    q.extent = t.number("extent", q.extent);
    if (q.extent < 0.0) fail(t.path("extent"), "must be >= 0");
    q.propagator_grid = t.count("propagator_grid", q.propagator_grid, 2);
    if (const json* times = t.find("propagator_times")) {
        if (!times->is_array() || times->empty()) fail(t.path("propagator_times"), "expected a nonempty array");
        q.propagator_times.clear();
        for (std::size_t i = 0; i < times->size(); ++i)
            q.propagator_times.push_back(
                parse_complex((*times)[i], t.path("propagator_times") + "[" + std::to_string(i) + "]"));
    }
    t.finish();
}

std::optional<double> bound(const json& v, const std::string& path) {
    if (v.is_null()) return std::nullopt;
    if (!v.is_number()) fail(path, "expected a number or null");
    return v.get<double>();
}

void parse_families(Table& root, ExperimentConfig& cfg) {
    const json* v = root.find("families");
    if (!v) return;
    if (!v->is_array()) fail("families", "expected an array");
    for (std::size_t i = 0; i < v->size(); ++i) {
        const std::string path = "families[" + std::to_string(i) + "]";
        Table t((*v)[i], path);
        FamilyOverride f;
        f.label = t.text("label", "");
        if (f.label.empty()) fail(t.path("label"), "missing required key");
        if (t.has("mu")) f.mu = t.number("mu", 0.0);
        if (t.has("n_min")) f.n_min = static_cast<int>(t.integer("n_min", 0));
        if (t.has("n_max")) f.n_max = static_cast<int>(t.integer("n_max", 0));
        if (f.n_min && f.n_max && *f.n_min > *f.n_max) fail(t.path("n_max"), "n-range is empty");
        if (const json* w = t.find("window")) {
            if (!w->is_array() || w->size() != 2) fail(t.path("window"), "expected [lo, hi]");
            EnergyWindow win;
            win.lo = bound((*w)[0], t.path("window") + "[0]").value_or(-INFINITY);
            win.hi = bound((*w)[1], t.path("window") + "[1]").value_or(INFINITY);
            if (!(win.lo < win.hi)) fail(t.path("window"), "lo must be < hi");
            f.window = win;
        }
        t.finish();
        cfg.families.push_back(f);
    }
}

void parse_spin(Table& root, ExperimentConfig& cfg) {
    const json* v = root.find("spin");
    if (!cfg.spin) {
        if (v) fail("spin", "only valid with model.kind = h4");
        return;
    }
    if (!v) fail("spin", "missing required key");
    Table t(*v, "spin");
    SpinConfig& s = *cfg.spin;
    const json& d = t.require("delta1");
    const std::string dpath = t.path("delta1");
    if (d.is_array()) {
        for (std::size_t i = 0; i < d.size(); ++i) {
            if (!d[i].is_number()) fail(dpath + "[" + std::to_string(i) + "]", "expected a number");
            s.delta1.push_back(d[i].get<double>());
        }
    } else if (d.is_object()) {
        Table r(d, dpath);
        const double start = r.number("start", 0.0);
        const double stop = r.number("stop", 0.0);
        const double step = r.positive("step", 1.0);
        r.finish();
        if (stop < start) fail(dpath + ".stop", "must be >= start");
        const long n = std::lround((stop - start) / step);
        for (long i = 0; i <= n; ++i) s.delta1.push_back(start + static_cast<double>(i) * step);
    } else {
        fail(dpath, "expected an array or {start, stop, step}");
    }
    if (s.delta1.empty()) fail(dpath, "must be nonempty");
    for (std::size_t i = 1; i < s.delta1.size(); ++i)
        if (s.delta1[i] < s.delta1[i - 1]) fail(dpath, "must be sorted");
    s.sweep.steps = t.count("steps", s.sweep.steps, 16);
    s.sweep.transition_window = t.positive("transition_window", s.sweep.transition_window);
    s.sweep.classify_tolerance = t.positive("classify_tolerance", s.sweep.classify_tolerance);
    s.sweep.threads = static_cast<unsigned>(t.count("threads", s.sweep.threads, 0));
    t.finish();
}

void parse_tolerances(Table& root, ExperimentConfig& cfg) {
    const json* v = root.find("tolerances");
    if (!v) return;
    Table t(*v, "tolerances");
    CheckTolerances& c = cfg.tolerances;
    c.symmetry = t.positive("symmetry", c.symmetry);
    c.symmetry_points = static_cast<int>(t.count("symmetry_points", c.symmetry_points, 1));
    c.gradient = t.positive("gradient", c.gradient);
    c.phs = t.positive("phs", c.phs);
    c.closure = t.positive("closure", c.closure);
    c.propagator = t.positive("propagator", c.propagator);
    c.witness = t.positive("witness", c.witness);
    c.dichotomy = t.positive("dichotomy", c.dichotomy);
    c.conjugation = t.positive("conjugation", c.conjugation);
    c.conjugation_points = static_cast<int>(t.count("conjugation_points", c.conjugation_points, 2));
    c.slope = t.positive("slope", c.slope);
    c.quadrature = t.positive("quadrature", c.quadrature);
    c.match = t.positive("match", c.match);
    c.match_levels = static_cast<int>(t.count("match_levels", c.match_levels, 1));
    c.spin_eigen = t.positive("spin_eigen", c.spin_eigen);
    c.casimir = t.positive("casimir", c.casimir);
    c.period = t.positive("period", c.period);
    t.finish();
}

void parse_output(Table& root, ExperimentConfig& cfg) {
    const json* v = root.find("output");
    if (!v) return;
    Table t(*v, "output");
    cfg.output.dir = t.text("dir", cfg.output.dir);
    cfg.output.format = t.text("format", cfg.output.format);
    if (cfg.output.format != "csv" && cfg.output.format != "json") fail(t.path("format"), "expected csv or json");
    t.finish();
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::Config, std::string("<root>: malformed JSON: ") + e.what());
    }
    Table root(j, "");
    ExperimentConfig cfg;
    cfg.name = root.text("name", "experiment");
    parse_model(root, cfg);
    parse_semiclassical(root, cfg);
    parse_quantum(root, cfg);
    parse_families(root, cfg);
    parse_spin(root, cfg);
    parse_tolerances(root, cfg);
    parse_output(root, cfg);
    root.finish();
    if (cfg.spin && !cfg.families.empty()) fail("families", "not valid with model.kind = h4");
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Config, path.string() + ": cannot open");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

FamilySet configured_families(const ExperimentConfig& config) {
    if (!config.model) throw Error(ErrorKind::InvalidArgument, "the two-level model has no phase-space families");
    FamilySet set = default_families(*config.model, config.quantizer.quadrature);
    for (std::size_t i = 0; i < config.families.size(); ++i) {
        const FamilyOverride& o = config.families[i];
        OrbitFamily* f = nullptr;
        for (auto& g : set.families)
            if (g.label == o.label) f = &g;
        if (!f) fail("families[" + std::to_string(i) + "].label", "unknown family '" + o.label + "'");
        if (o.mu) f->mu = *o.mu;
        if (o.n_min) f->n_min = o.n_min;
        if (o.n_max) f->n_max = o.n_max;
        if (o.window) f->window = *o.window;
        if (f->n_min && f->n_max && *f->n_min > *f->n_max)
            fail("families[" + std::to_string(i) + "]", "n-range is empty");
    }
    return set;
}

}  // namespace orbitrace
