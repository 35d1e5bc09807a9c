#ifndef RDV_PLANNER_HPP
#define RDV_PLANNER_HPP

#include <array>
#include <string>

#include <json.hpp>

#include "rdv/geometry.hpp"
#include "rdv/uas.hpp"

namespace rdv {

/// Constraint families, in infeasibility-diagnosis order.
enum class Constraint { None, EnergyAbort, EnergyRendezvous, VMax, TMax, Dwell };

std::string to_string(Constraint c);

struct Segment {
    Vec2 from;
    Vec2 to;
    Vec2 velocity;
    double duration = 0.0;
    double mass = 0.0;
    double energy = 0.0;
};

/**
 * @brief Four constant-velocity segments: origin -> PNR -> rendezvous -> landing,
 * plus the abort leg PNR -> abort endpoint.
 */
struct MissionPlan {
    double t_start = 0.0;        // absolute time the plan starts at `origin`
    double energy_budget = 0.0;  // E_r at t_start
    Vec2 origin;
    Segment to_pnr;
    Segment to_rendezvous;
    Segment to_landing;
    Segment abort;
    bool feasible = false;
    Constraint binding = Constraint::None;
    double objective = 0.0;  // t2 + t3 + t4 - t1

    Vec2 pnr() const { return to_pnr.to; }
    Vec2 rendezvous_point() const { return to_rendezvous.to; }
    double decision_time() const { return to_pnr.duration; }
    double rendezvous_time() const { return t_start + to_pnr.duration + to_rendezvous.duration; }
    double landing_time() const { return rendezvous_time() + to_landing.duration; }
    double rendezvous_chain_energy() const { return to_pnr.energy + to_rendezvous.energy + to_landing.energy; }
    double abort_chain_energy() const { return to_pnr.energy + abort.energy; }

    nlohmann::json to_json() const;
};

struct PlanRequest {
    Vec2 uas_position;
    double t0 = 0.0;
    double energy = 0.0;  // E_r at t0
    Vec2 p_star;
    double t_rendezvous = 0.0;  // absolute
    Vec2 landing_site;
    Vec2 abort_endpoint;  // end of the abort leg; the landing site unless configured otherwise
    UasParams params;
};

/// Multiplicative loosening of individual constraints, used for diagnosis.
struct Relaxation {
    double abort_budget = 1.0;
    double rendezvous_budget = 1.0;
    double v_max = 1.0;
    double t_max = 1.0;
    double dwell = 1.0;

    static Relaxation loosen(Constraint c, double factor);
};

struct SolverOptions {
    int starts = 16;
    int max_evaluations = 160;  // per Nelder-Mead start
    bool parallel = true;
    bool diagnose = true;
    Relaxation relaxation{};
};

/**
 * Place the PNR and choose segment durations maximizing t1 for the fixed
 * rendezvous time, with both the rendezvous chain (m_a, m_a, m_b) and the abort
 * chain (m_a, m_a) within the energy budget.
 *
 * Velocities are eliminated as displacement / duration; for a given PNR and t1
 * the shortest feasible t3 and t4 follow in closed form, so the search is a
 * multi-start Nelder-Mead over the PNR with an inner line search over t1.
 * Infeasible results name the binding constraint: the first (in diagnosis
 * order) whose 10% relaxation makes the problem feasible, else the first one
 * violated at the least-infeasible point.
 */
MissionPlan solve_ocp(const PlanRequest& req, const SolverOptions& opts = {});

/// Plan advanced by `elapsed` seconds of flight along its first segment.
MissionPlan advance_plan(const MissionPlan& plan, double elapsed, double alpha);

struct HoldDecision {
    MissionPlan plan;
    bool held = false;   // previous plan kept
    bool abort = false;  // neither plan usable
};

/// Fresh plan if feasible, else the previous one advanced by `elapsed` while its PNR is still ahead.
HoldDecision replan_or_hold(const MissionPlan& previous, const MissionPlan& fresh, double elapsed, double alpha);

/// Least-energy direct flight range out and back, optionally dropping mass at the far end.
struct RangeReport {
    double no_drop = 0.0;
    double with_drop = 0.0;
    double cruise_speed = 0.0;
};
RangeReport max_round_trip_range(const UasParams& params, double energy);

}  // namespace rdv

#endif  // RDV_PLANNER_HPP
