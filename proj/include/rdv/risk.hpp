#ifndef RDV_RISK_HPP
#define RDV_RISK_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include <json.hpp>

#include "rdv/geometry.hpp"
#include "rdv/planner.hpp"

namespace rdv {

/// One active path at decision time: its plan and the propagated driver estimate.
struct PathCandidate {
    PathId path = 1;
    const Path* geometry = nullptr;
    MissionPlan plan;
    double theta_hat = 0.0;   // expected driver arc length at the plan's rendezvous time
    double half_width = 0.0;  // h
};

struct PathRisk {
    PathId path = 1;
    bool feasible = true;
    bool monte_carlo = false;
    double extra_fuel_mean = 0.0;
    double extra_fuel_sigma = 0.0;
    double cvar = 0.0;
    double rho_d = 0.0;
};

enum class Verdict { Proceed, Abort };

struct RiskReport {
    std::vector<PathRisk> per_path;  // ascending path id
    double gamma = 0.05;
    double kappa = 0.0;
    std::optional<PathId> worst_path;
    Verdict verdict = Verdict::Abort;

    const PathRisk* find(PathId id) const;
    nlohmann::json to_json() const;
};

struct RiskOptions {
    double gamma = 0.05;
    double kappa = 0.0;
    double gamma_scale = 1.96;  // h = gamma_scale * sigma_theta
    std::size_t mc_draws = 10000;
    std::uint64_t seed = 1;
};

/**
 * Fuel to reach `rendezvous` at the planned time and land: E1 and the duration of
 * leg 2 as planned, leg 3 flown at least energy (the way the simulator flies it).
 */
double rendezvous_chain_energy_at(const MissionPlan& plan, Vec2 rendezvous, double alpha, double v_max);

/**
 * Extra fuel E_e = E_r - (E1 + E2 + E3) as a function of where the driver
 * actually is, evaluated at theta_hat and theta_hat +/- h. A monotone map gives a
 * Gaussian with linearized sigma; otherwise 10^4 Monte Carlo draws. Paths whose
 * plan is infeasible get rho_d = +inf.
 */
RiskReport assess_decision_risk(const std::vector<PathCandidate>& candidates, const UasParams& params,
                                const RiskOptions& opts);

const char* to_string(Verdict v);

}  // namespace rdv

#endif  // RDV_RISK_HPP
