#ifndef RDV_SWEEP_HPP
#define RDV_SWEEP_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rdv/csv.hpp"
#include "rdv/mission.hpp"

namespace rdv {

/// One parameter to vary: dotted config key and its values.
struct Variation {
    std::string key;
    std::vector<nlohmann::json> values;
};

/// "key=a:b:n" (n evenly spaced values) or "key=v1,v2,..." (numbers, "inf"/"-inf", or plain strings).
Variation parse_variation(const std::string& spec);

struct SweepOptions {
    std::size_t runs = 1;
    std::uint64_t base_seed = 1;
    std::optional<Variation> vary;
    bool parallel = true;
};

struct SweepRecord {
    std::size_t index = 0;
    std::uint64_t seed = 0;
    std::string value;  // varied value, empty without --vary
    bool rejected = false;
    std::string error;
    bool delivered = false;
    Phase final_phase = Phase::Cruise;
    std::string verdict;
    std::string reason;
    int chosen_path = 0;
    int target_path = 0;
    double min_energy = 0.0;
    double min_plan_margin = 0.0;
    double max_rho_d = 0.0;
    int safety_trips = 0;
    int iterations = 0;

    bool operator==(const SweepRecord&) const = default;
};

/**
 * runs x values missions with seeds base_seed + run. Each variation is applied to
 * the resolved config document and re-validated; a config that fails validation
 * throws ValidationError before any mission starts.
 */
std::vector<SweepRecord> run_sweep(const ScenarioConfig& cfg, const SweepOptions& opts);
/// Serial reference for run_sweep.
std::vector<SweepRecord> run_sweep_reference(const ScenarioConfig& cfg, const SweepOptions& opts);

CsvTable sweep_table(const std::vector<SweepRecord>& records);

/// Sampler convergence traces for runs seeds, in parallel; one CSV row per (run, iteration).
CsvTable convergence_table(const ScenarioConfig& cfg, std::size_t runs, std::uint64_t base_seed, double t_end);

}  // namespace rdv

#endif  // RDV_SWEEP_HPP
