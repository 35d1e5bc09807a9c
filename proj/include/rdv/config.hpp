#ifndef RDV_CONFIG_HPP
#define RDV_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rdv/geometry.hpp"
#include "rdv/gpr.hpp"
#include "rdv/sampler.hpp"
#include "rdv/traffic.hpp"
#include "rdv/uas.hpp"

namespace rdv {

struct TrafficConfig {
    HistoricalProfile profile = HistoricalProfile::sinusoid(8.0, 1.0, 10.0);
    DeviationRule deviation{DeviationRule::Kind::Sign, 1.0, 8.0, 0.25};
    int chosen_path = 0;  // 0: drawn from the seed
    double sigma_speed = 0.25;
    double sigma_position = 1.0;
    double measurement_rate = 10.0;  // [Hz]
};

struct GpConfig {
    KernelConfig kernel{};
    GPKind kind = GPKind::DTC;
    std::size_t n_inducing = 30;
    std::size_t window = 0;
};

struct SamplerConfig {
    std::size_t n_s = 5;
    std::size_t n_e = 2;
    double lambda = 0.5;
    double gamma_scale = 1.96;
    Strategy strategy = Strategy::WorstFirst;
    std::vector<double> weights;  // empty: all ones
    double horizon = 60.0;        // initial proposal spread is horizon / 4 [s]
};

struct PlannerConfig {
    UasParams params{};
    double energy = 1.6e4;  // E_r0 [J]
    std::optional<Vec2> uas_start;  // default: landing site
    bool abort_to_abort_site = false;
    int starts = 16;
    int max_evaluations = 160;
};

struct RiskConfig {
    double gamma = 0.05;
    double kappa = 0.0;
    std::size_t mc_draws = 10000;
};

struct RunConfig {
    double control_period = 1.0;   // T_s [s]
    double epsilon = 1.0;          // loop exit when t1 <= epsilon [s]
    std::uint64_t seed = 1;
    std::string output_dir = "out";
    double warmup = 1.0;            // data gathered before the first regression [s]
    double rendezvous_radius = 5.0; // [m]
    double max_duration = 900.0;    // [s]
};

/**
 * @brief Fully resolved scenario. `map` always holds the parsed network;
 * `map_doc` its JSON so manifests are self-contained.
 */
struct ScenarioConfig {
    nlohmann::json map_doc;
    std::optional<PathMap> map;
    TrafficConfig traffic;
    GpConfig gp;
    SamplerConfig sampler;
    PlannerConfig planner;
    RiskConfig risk;
    RunConfig run;

    const PathMap& paths() const { return *map; }
    std::vector<double> path_weights() const;
    Vec2 uas_start() const;
    Vec2 abort_endpoint() const;
};

/// Strict parse; unknown keys and invalid values throw ValidationError naming the key.
ScenarioConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = ".");
ScenarioConfig load_config(const std::filesystem::path& file);

/// Every field with defaults materialized, map inlined.
nlohmann::json to_json(const ScenarioConfig& cfg);

/// FNV-1a of the compact resolved JSON, as 16 hex digits.
std::string config_hash(const ScenarioConfig& cfg);

/// Parse numbers, also accepting "inf" / "-inf" strings.
double parse_real(const nlohmann::json& v, const std::string& key);

/// Set a dotted key ("risk.kappa") in a config document; throws ValidationError for unknown keys.
void set_config_value(nlohmann::json& resolved_doc, const std::string& dotted_key, const nlohmann::json& value);

}  // namespace rdv

#endif  // RDV_CONFIG_HPP
