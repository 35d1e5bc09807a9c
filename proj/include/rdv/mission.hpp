#ifndef RDV_MISSION_HPP
#define RDV_MISSION_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rdv/config.hpp"
#include "rdv/csv.hpp"
#include "rdv/planner.hpp"
#include "rdv/risk.hpp"

namespace rdv {

enum class Phase { Cruise, CommittedRendezvous, Aborting, Landed, Failed };

const char* to_string(Phase p);

/// No persistently safe plan exists at t = 0: even the direct flight home exceeds E_r0.
class InitiallyInfeasible : public ValidationError {
public:
    using ValidationError::ValidationError;
};

struct MissionState {
    double t = 0.0;
    Vec2 uas_position;
    double energy = 0.0;
    bool carrying_package = true;
    Phase phase = Phase::Cruise;
    std::optional<MissionPlan> plan;
    ReachableSet reachable;

    double mass(const UasParams& u) const { return carrying_package ? u.mass_loaded : u.mass_empty; }
};

struct SafetyCertificate {
    double plan_margin = 0.0;          // E_r - (E1 + E4) of the current plan
    double direct_abort_margin = 0.0;  // E_r - least energy to fly to the abort endpoint now
    bool ok = false;
};

/// Re-evaluate the abort branch from the current state; margins in J.
SafetyCertificate check_persistent_safety(const MissionState& state, const UasParams& params, Vec2 abort_endpoint);

struct MissionLog {
    std::uint64_t seed = 0;
    int chosen_path = 1;
    Phase final_phase = Phase::Cruise;
    bool delivered = false;
    std::optional<Verdict> verdict;
    std::string decision_reason;  // risk, planner, safety, timeout
    double decision_time = -1.0;
    std::optional<PathId> target_path;
    std::optional<RiskReport> risk;        // active paths only; decides the verdict
    std::vector<PathRisk> pruned_risk;     // paths already ruled out, for comparison
    double min_energy = 0.0;
    double min_plan_margin = 0.0;
    double min_direct_margin = 0.0;
    int safety_trips = 0;
    int iterations = 0;
    int decisions = 0;
    bool rendezvous_actuated = false;
    double end_time = 0.0;
    double wall_seconds = 0.0;
    std::vector<Phase> phase_trace;  // one entry per logged state row
    std::vector<double> energy_trace;

    CsvTable state{{"t", "phase", "x", "y", "energy", "carrying", "driver_theta", "driver_x", "driver_y",
                    "active_paths", "plan_margin", "direct_abort_margin"}};
    CsvTable plans{{"t", "feasible", "held", "binding", "pnr_x", "pnr_y", "t1", "t2", "t3", "t4", "v1", "v2", "v3",
                    "v4", "e1", "e2", "e3", "e4", "objective"}};
    CsvTable sampler{{"t", "iteration", "path", "active", "mean", "variance", "best_cost", "row_infeasible",
                      "target", "fallback"}};
    CsvTable risk_rows{{"t", "path", "active", "extra_fuel_mean", "extra_fuel_sigma", "cvar", "rho_d", "monte_carlo",
                        "verdict"}};
    CsvTable measurements{{"t", "theta_meas", "speed_meas", "hist_speed", "deviation_obs"}};
    CsvTable fits{{"t", "m", "kind", "jitter", "rmse_vs_truth"}};
};

/**
 * Run one mission: control loop at run.control_period while the decision time
 * t1 exceeds run.epsilon, then the one-time risk gate and the chosen branch.
 * `seed` replaces run.seed. Throws InitiallyInfeasible.
 */
MissionLog run_mission(const ScenarioConfig& cfg, std::uint64_t seed);

nlohmann::json manifest_json(const MissionLog& log, const ScenarioConfig& cfg);

/// Writes state/plan/sampler/risk/measurement/fit CSVs and manifest.json into dir.
void write_mission_outputs(const MissionLog& log, const ScenarioConfig& cfg, const std::filesystem::path& dir);

/// Cross-entropy proposal spread (over active paths) per cruise iteration of a mission, up to t_end.
struct ConvergenceTrace {
    std::vector<double> t;
    std::vector<double> max_variance;
    std::vector<double> mean_variance;
};

ConvergenceTrace sampler_convergence(const ScenarioConfig& cfg, std::uint64_t seed, double t_end);

/// RMSE of the posterior mean against the true deviation on a grid over the observed set.
double deviation_rmse(const GPModel& gp, const DeviationRule& truth, std::size_t grid = 200,
                      double exclusion = 0.1);

}  // namespace rdv

#endif  // RDV_MISSION_HPP
