#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rdlab/coefficients.hpp"
#include "rdlab/noise.hpp"
#include "rdlab/operator.hpp"
#include "rdlab/solver.hpp"

namespace rdlab::harness {

using Json = nlohmann::json;

class ConfigError : public Error {
public:
    using Error::Error;
};

inline const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names{"semigroup", "truncation", "sandwich", "global", "paths", "lemmas"};
    return names;
}

struct OperatorConfig {
    double a = 1.0, b = 0.0, c = 0.0, kappa = 0.0;
};

struct PerturbationConfig {
    FamilyKind family = FamilyKind::Yosida;
    double delta = 1.0;
    std::vector<double> indices{4, 16, 64, 256};
    double datum_amplitude = 0.0;    // xi_n = xi + (amplitude / n) cos(pi x)
    double reaction_delta = 0.0;     // a_0 of F_n shifted by delta / n
    bool decoupled_control = false;  // also run with independent noise per index
    std::vector<double> thetas{0.0, 0.25, 0.49};
    double t_min = 0.1;
    int samples = 64;
    double sabotage_factor = 10.0;
};

struct ReactionConfig {
    int k = 1;
    double leading = 1.0;
    std::vector<double> lower{0.0, 1.0};
};

struct SearchConfig {
    double radius = 10.0;
    double step = 0.01;
    double verify_step = 0.001;
};

struct DiffusionConfig {
    std::string preset = "constant";  // zero | constant | fractional | bounded | linear
    double c = 0.5;
    int n = 3;
    double eps = 0.01;
    std::vector<std::string> variants;  // experiments sweeping presets; empty means {preset}
};

struct NoiseConfig {
    std::string kind = "white";  // none | white | colored
    int rank = 8;
    double decay = 1.0;
};

struct InitialConfig {
    std::string profile = "cosine";  // cosine: s (1 + cos(pi x) / 2); constant: s; zero
    double scale = 1.0;
    std::vector<double> scales;
    double random_amplitude = 0.0;  // Gaussian coefficients on the first 4 cosine modes
    std::string control_profile = "constant";
    double control_scale = 4.0;
};

struct SolverSection {
    double horizon = 1.0;
    double dt = 1e-3;
    std::vector<double> dts;
    Scheme scheme = Scheme::ExponentialEuler;
    std::vector<double> ladder{1, 2, 4, 8};
    double cap = 1e8;
    double p = 4.0;
    InitialConfig initial;
};

struct MonteCarloConfig {
    int paths = 200;
    std::uint64_t seed = 20240601;
    int threads = 1;
    bool deterministic_reduce = true;
};

/// Fully resolved settings for one experiment. `resolved` is the canonical
/// JSON the hash is computed from.
struct ExperimentConfig {
    std::string experiment;
    int cells = 64;
    OperatorConfig op;
    PerturbationConfig perturbation;
    ReactionConfig reaction;
    std::optional<ReactionConfig> control;
    SearchConfig search;
    DiffusionConfig diffusion;
    NoiseConfig noise;
    SolverSection solver;
    MonteCarloConfig monte_carlo;
    std::string output = "out";
    Json resolved;

    SolverConfig solver_config(double dt) const;
};

/// Parses a config document for one experiment: per-section "overrides"
/// entries keyed by experiment name are merged over the section first.
/// Unknown keys at any level are rejected.
ExperimentConfig resolve_config(const Json& document, const std::string& experiment);
Json read_json_file(const std::filesystem::path& path);

/// Built-in defaults, the same document shipped as configs/default.json.
Json default_document();

/// Command-line overrides applied after resolution (re-hashed).
struct RunOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> paths;
    std::optional<int> threads;
    std::optional<bool> deterministic_reduce;
    std::optional<std::string> output;
};
void apply_overrides(ExperimentConfig& config, const RunOverrides& overrides);

/// 64-bit FNV-1a of the canonical dump, as 16 hex digits.
std::string config_hash(const Json& resolved);

// Model builders shared by the experiments.
EllipticSpec build_elliptic(const ExperimentConfig& config);
ReactionSpec build_reaction(const ReactionConfig& config, const std::string& name);
DiffusionSpec build_diffusion(const DiffusionConfig& config, const std::string& preset);
std::optional<NoiseModel> build_noise(const NoiseConfig& config, GridSpec grid);
/// Datum for one path; randomization draws from the InitialDatum channel.
Vector initial_datum(const std::string& profile, double scale, double random_amplitude, GridSpec grid,
                     std::uint64_t seed, std::uint64_t path);

}  // namespace rdlab::harness
