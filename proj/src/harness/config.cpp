#include "rdlab/harness/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace rdlab::harness {

namespace {

const std::vector<std::string> kSections{"grid",      "operator", "perturbation", "reaction", "diffusion",
                                         "noise",     "solver",   "monte_carlo",  "output"};

// Reads keys off a JSON object and rejects whatever was not read.
class Reader {
public:
    Reader(const Json& node, std::string where) : node_(node), where_(std::move(where)) {
        if (!node_.is_object()) throw ConfigError(where_ + ": expected an object");
    }

    template <class T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        auto it = node_.find(key);
        if (it == node_.end()) return;
        try {
            out = it->template get<T>();
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(where_ + "." + key + ": " + e.what());
        }
    }

    const Json* child(const char* key) {
        seen_.insert(key);
        auto it = node_.find(key);
        return it == node_.end() ? nullptr : &*it;
    }

    void finish() const {
        for (auto it = node_.begin(); it != node_.end(); ++it) {
            if (!seen_.count(it.key())) throw ConfigError(where_ + ": unknown key '" + it.key() + "'");
        }
    }

    const std::string& where() const { return where_; }

private:
    const Json& node_;
    std::string where_;
    std::set<std::string> seen_;
};

void require(bool ok, const std::string& message) {
    if (!ok) throw ConfigError(message);
}

bool is_known_experiment(const std::string& name) {
    for (const auto& e : experiment_names()) {
        if (e == name) return true;
    }
    return false;
}

// Section with its experiment override merged in.
Json section_for(const Json& document, const std::string& name, const std::string& experiment) {
    Json section = document.contains(name) ? document.at(name) : Json::object();
    if (!section.is_object()) throw ConfigError(name + ": expected an object");
    if (section.contains("overrides")) {
        const Json overrides = section.at("overrides");
        section.erase("overrides");
        if (!overrides.is_object()) throw ConfigError(name + ".overrides: expected an object");
        for (auto it = overrides.begin(); it != overrides.end(); ++it) {
            if (!is_known_experiment(it.key())) {
                throw ConfigError(name + ".overrides: unknown experiment '" + it.key() + "'");
            }
        }
        if (overrides.contains(experiment)) section.merge_patch(overrides.at(experiment));
    }
    return section;
}

ReactionConfig parse_reaction(const Json& node, const std::string& where) {
    ReactionConfig r;
    Reader in(node, where);
    in.get("k", r.k);
    in.get("leading", r.leading);
    in.get("lower", r.lower);
    in.finish();
    require(r.k >= 1, where + ".k must be >= 1");
    require(static_cast<int>(r.lower.size()) <= 2 * r.k + 1, where + ".lower has more than 2k + 1 entries");
    require(std::isfinite(r.leading) && r.leading != 0.0, where + ".leading must be finite and nonzero");
    return r;
}

Json reaction_json(const ReactionConfig& r) { return {{"k", r.k}, {"leading", r.leading}, {"lower", r.lower}}; }

bool known_preset(const std::string& p) {
    return p == "zero" || p == "constant" || p == "fractional" || p == "bounded" || p == "linear";
}

bool known_profile(const std::string& p) { return p == "cosine" || p == "constant" || p == "zero"; }

void check_increasing(const std::vector<double>& v, const std::string& what) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        require(std::isfinite(v[i]) && v[i] > 0.0, what + " entries must be positive and finite");
        if (i > 0) require(v[i] > v[i - 1], what + " must be strictly increasing");
    }
}

Json to_json(const ExperimentConfig& c) {
    Json j;
    j["experiment"] = c.experiment;
    j["grid"] = {{"cells", c.cells}};
    j["operator"] = {{"a", c.op.a}, {"b", c.op.b}, {"c", c.op.c}, {"kappa", c.op.kappa}};
    const auto& p = c.perturbation;
    j["perturbation"] = {{"family", family_name(p.family)},
                         {"delta", p.delta},
                         {"indices", p.indices},
                         {"datum_amplitude", p.datum_amplitude},
                         {"reaction_delta", p.reaction_delta},
                         {"decoupled_control", p.decoupled_control},
                         {"thetas", p.thetas},
                         {"t_min", p.t_min},
                         {"samples", p.samples},
                         {"sabotage_factor", p.sabotage_factor}};
    j["reaction"] = reaction_json(c.reaction);
    if (c.control) j["reaction"]["control"] = reaction_json(*c.control);
    j["reaction"]["search"] = {
        {"radius", c.search.radius}, {"step", c.search.step}, {"verify_step", c.search.verify_step}};
    j["diffusion"] = {{"preset", c.diffusion.preset},
                      {"c", c.diffusion.c},
                      {"n", c.diffusion.n},
                      {"eps", c.diffusion.eps},
                      {"variants", c.diffusion.variants}};
    j["noise"] = {{"kind", c.noise.kind}, {"rank", c.noise.rank}, {"decay", c.noise.decay}};
    const auto& s = c.solver;
    j["solver"] = {{"horizon", s.horizon},
                   {"dt", s.dt},
                   {"dts", s.dts},
                   {"scheme", scheme_name(s.scheme)},
                   {"ladder", s.ladder},
                   {"cap", s.cap},
                   {"p", s.p},
                   {"initial",
                    {{"profile", s.initial.profile},
                     {"scale", s.initial.scale},
                     {"scales", s.initial.scales},
                     {"random_amplitude", s.initial.random_amplitude},
                     {"control_profile", s.initial.control_profile},
                     {"control_scale", s.initial.control_scale}}}};
    j["monte_carlo"] = {{"paths", c.monte_carlo.paths},
                        {"seed", c.monte_carlo.seed},
                        {"threads", c.monte_carlo.threads},
                        {"deterministic_reduce", c.monte_carlo.deterministic_reduce}};
    j["output"] = {{"directory", c.output}};
    return j;
}

}  // namespace

SolverConfig ExperimentConfig::solver_config(double dt) const {
    SolverConfig s;
    s.horizon = solver.horizon;
    s.dt = dt;
    s.scheme = solver.scheme;
    s.ladder = solver.ladder;
    s.cap = solver.cap;
    s.p = solver.p;
    s.validate();
    return s;
}

ExperimentConfig resolve_config(const Json& document, const std::string& experiment) {
    require(is_known_experiment(experiment), "unknown experiment '" + experiment + "'");
    require(document.is_object(), "config: top level must be an object");
    for (auto it = document.begin(); it != document.end(); ++it) {
        bool known = false;
        for (const auto& s : kSections) known = known || s == it.key();
        require(known, "config: unknown section '" + it.key() + "'");
    }

    ExperimentConfig c;
    c.experiment = experiment;

    {
        const Json node = section_for(document, "grid", experiment);
        Reader in(node, "grid");
        in.get("cells", c.cells);
        in.finish();
        require(c.cells >= 2, "grid.cells must be >= 2");
    }
    {
        const Json node = section_for(document, "operator", experiment);
        Reader in(node, "operator");
        in.get("a", c.op.a);
        in.get("b", c.op.b);
        in.get("c", c.op.c);
        in.get("kappa", c.op.kappa);
        in.finish();
        require(c.op.a > 0.0, "operator.a must be positive");
    }
    {
        const Json node = section_for(document, "perturbation", experiment);
        Reader in(node, "perturbation");
        auto& p = c.perturbation;
        std::string family = family_name(p.family);
        in.get("family", family);
        try {
            p.family = parse_family(family);
        } catch (const Error& e) {
            throw ConfigError(std::string("perturbation.family: ") + e.what());
        }
        in.get("delta", p.delta);
        in.get("indices", p.indices);
        in.get("datum_amplitude", p.datum_amplitude);
        in.get("reaction_delta", p.reaction_delta);
        in.get("decoupled_control", p.decoupled_control);
        in.get("thetas", p.thetas);
        in.get("t_min", p.t_min);
        in.get("samples", p.samples);
        in.get("sabotage_factor", p.sabotage_factor);
        in.finish();
        require(!p.indices.empty(), "perturbation.indices must be nonempty");
        check_increasing(p.indices, "perturbation.indices");
        for (double th : p.thetas) require(th >= 0.0 && th < 0.5, "perturbation.thetas must lie in [0, 1/2)");
        require(p.t_min > 0.0, "perturbation.t_min must be positive");
        require(p.samples >= 2, "perturbation.samples must be >= 2");
        require(p.sabotage_factor > 1.0, "perturbation.sabotage_factor must exceed 1");
    }
    {
        const Json node = section_for(document, "reaction", experiment);
        Json base = node;
        base.erase("control");
        base.erase("search");
        c.reaction = parse_reaction(base, "reaction");
        require(c.reaction.leading > 0.0, "reaction.leading must be positive");
        if (node.contains("control")) c.control = parse_reaction(node.at("control"), "reaction.control");
        if (node.contains("search")) {
            Reader in(node.at("search"), "reaction.search");
            in.get("radius", c.search.radius);
            in.get("step", c.search.step);
            in.get("verify_step", c.search.verify_step);
            in.finish();
            require(c.search.radius > 0.0 && c.search.step > 0.0 && c.search.verify_step > 0.0,
                    "reaction.search values must be positive");
        }
    }
    {
        const Json node = section_for(document, "diffusion", experiment);
        Reader in(node, "diffusion");
        auto& d = c.diffusion;
        in.get("preset", d.preset);
        in.get("c", d.c);
        in.get("n", d.n);
        in.get("eps", d.eps);
        in.get("variants", d.variants);
        in.finish();
        require(known_preset(d.preset), "diffusion.preset: unknown preset '" + d.preset + "'");
        for (const auto& v : d.variants) require(known_preset(v), "diffusion.variants: unknown preset '" + v + "'");
        require(d.n >= 1 && d.eps >= 0.0, "diffusion.n must be >= 1 and eps >= 0");
    }
    {
        const Json node = section_for(document, "noise", experiment);
        Reader in(node, "noise");
        in.get("kind", c.noise.kind);
        in.get("rank", c.noise.rank);
        in.get("decay", c.noise.decay);
        in.finish();
        require(c.noise.kind == "none" || c.noise.kind == "white" || c.noise.kind == "colored",
                "noise.kind must be none, white or colored");
        require(c.noise.rank >= 1 && c.noise.rank <= c.cells, "noise.rank must lie in [1, cells]");
        require(c.noise.decay >= 0.0, "noise.decay must be nonnegative");
    }
    {
        const Json node = section_for(document, "solver", experiment);
        Reader in(node, "solver");
        auto& s = c.solver;
        in.get("horizon", s.horizon);
        in.get("dt", s.dt);
        in.get("dts", s.dts);
        std::string scheme = scheme_name(s.scheme);
        in.get("scheme", scheme);
        try {
            s.scheme = parse_scheme(scheme);
        } catch (const Error& e) {
            throw ConfigError(std::string("solver.scheme: ") + e.what());
        }
        in.get("ladder", s.ladder);
        in.get("cap", s.cap);
        in.get("p", s.p);
        if (const Json* init = in.child("initial")) {
            Reader ii(*init, "solver.initial");
            ii.get("profile", s.initial.profile);
            ii.get("scale", s.initial.scale);
            ii.get("scales", s.initial.scales);
            ii.get("random_amplitude", s.initial.random_amplitude);
            ii.get("control_profile", s.initial.control_profile);
            ii.get("control_scale", s.initial.control_scale);
            ii.finish();
        }
        in.finish();
        require(known_profile(s.initial.profile) && known_profile(s.initial.control_profile),
                "solver.initial: profile must be cosine, constant or zero");
        require(s.initial.random_amplitude >= 0.0, "solver.initial.random_amplitude must be nonnegative");
        for (double v : s.initial.scales) require(v >= 0.0, "solver.initial.scales must be nonnegative");
        require(s.p > 0.0, "solver.p must be positive");
        try {
            c.solver_config(s.dt);
            for (double dt : s.dts) c.solver_config(dt);
        } catch (const Error& e) {
            throw ConfigError(std::string("solver: ") + e.what());
        }
    }
    {
        const Json node = section_for(document, "monte_carlo", experiment);
        Reader in(node, "monte_carlo");
        in.get("paths", c.monte_carlo.paths);
        in.get("seed", c.monte_carlo.seed);
        in.get("threads", c.monte_carlo.threads);
        in.get("deterministic_reduce", c.monte_carlo.deterministic_reduce);
        in.finish();
        require(c.monte_carlo.paths >= 2, "monte_carlo.paths must be >= 2");
        require(c.monte_carlo.threads >= 1, "monte_carlo.threads must be >= 1");
    }
    {
        const Json node = section_for(document, "output", experiment);
        Reader in(node, "output");
        in.get("directory", c.output);
        in.finish();
    }
    c.resolved = to_json(c);
    return c;
}

void apply_overrides(ExperimentConfig& c, const RunOverrides& o) {
    if (o.seed) c.monte_carlo.seed = *o.seed;
    if (o.paths) {
        require(*o.paths >= 2, "--paths must be >= 2");
        c.monte_carlo.paths = *o.paths;
    }
    if (o.threads) {
        require(*o.threads >= 1, "--threads must be >= 1");
        c.monte_carlo.threads = *o.threads;
    }
    if (o.deterministic_reduce) c.monte_carlo.deterministic_reduce = *o.deterministic_reduce;
    if (o.output) c.output = *o.output;
    c.resolved = to_json(c);
}

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config file " + path.string() + ": " + e.what());
    }
}

std::string config_hash(const Json& resolved) {
    const std::string text = resolved.dump();
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

EllipticSpec build_elliptic(const ExperimentConfig& c) {
    return EllipticSpec::constant(GridSpec(c.cells), c.op.a, c.op.b, c.op.c, c.op.kappa);
}

ReactionSpec build_reaction(const ReactionConfig& r, const std::string& name) {
    return ReactionSpec::polynomial(r.k, r.leading, r.lower, name);
}

DiffusionSpec build_diffusion(const DiffusionConfig& d, const std::string& preset) {
    if (preset == "zero") return DiffusionSpec::zero();
    if (preset == "constant") return DiffusionSpec::constant(d.c);
    if (preset == "fractional") return DiffusionSpec::fractional(d.c, d.n, d.eps);
    if (preset == "bounded") return DiffusionSpec::bounded_sigmoid(d.c);
    if (preset == "linear") return DiffusionSpec::linear(d.c);
    throw ConfigError("unknown diffusion preset '" + preset + "'");
}

std::optional<NoiseModel> build_noise(const NoiseConfig& n, GridSpec grid) {
    if (n.kind == "none") return std::nullopt;
    if (n.kind == "white") return NoiseModel::white(grid);
    return make_spectral_colored(grid, n.rank, n.decay);
}

Vector initial_datum(const std::string& profile, double scale, double random_amplitude, GridSpec grid,
                     std::uint64_t seed, std::uint64_t path) {
    const double pi = std::acos(-1.0);
    Vector xi(grid.cells());
    for (int i = 0; i < grid.cells(); ++i) {
        const double x = grid.node(i);
        if (profile == "cosine") {
            xi[i] = scale * (1.0 + 0.5 * std::cos(pi * x));
        } else if (profile == "constant") {
            xi[i] = scale;
        } else if (profile == "zero") {
            xi[i] = 0.0;
        } else {
            throw ConfigError("unknown initial profile '" + profile + "'");
        }
    }
    if (random_amplitude > 0.0) {
        for (std::uint32_t k = 1; k <= 4; ++k) {
            const double z = random_amplitude * counter_normal(seed, path, 0, k, Channel::InitialDatum);
            for (int i = 0; i < grid.cells(); ++i) xi[i] += z * std::cos(k * pi * grid.node(i));
        }
    }
    return xi;
}

}  // namespace rdlab::harness
