// Re-evaluates the four-segment plan constraints from the raw plan fields.
// Deliberately self-contained: no calls into the solver or the uas helpers.
#ifndef RDV_TEST_PLAN_CHECKER_HPP
#define RDV_TEST_PLAN_CHECKER_HPP

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "rdv/planner.hpp"

namespace check {

struct Limits {
    double m_a, m_b, alpha, v_max, t_max, t_c;
    double energy;
    double t_rendezvous;  // absolute
    rdv::Vec2 p_star, landing, abort_end;
};

inline double len(double x, double y) { return std::sqrt(x * x + y * y); }

inline std::vector<std::string> violations(const rdv::MissionPlan& p, const Limits& L, double tol = 1e-6) {
    std::vector<std::string> out;
    auto fail = [&](const std::string& what, double got, double bound) {
        std::ostringstream s;
        s.precision(12);
        s << what << ": " << got << " vs " << bound;
        out.push_back(s.str());
    };
    auto near = [&](rdv::Vec2 a, rdv::Vec2 b, const std::string& what) {
        const double d = len(a.x - b.x, a.y - b.y);
        if (d > tol) fail(what, d, tol);
    };
    const rdv::Segment* segs[4] = {&p.to_pnr, &p.to_rendezvous, &p.to_landing, &p.abort};
    const char* names[4] = {"seg1", "seg2", "seg3", "seg4"};
    const double masses[4] = {L.m_a, L.m_a, L.m_b, L.m_a};

    // waypoint chain
    near(p.to_pnr.from, p.origin, "seg1 start");
    near(p.to_rendezvous.from, p.to_pnr.to, "seg2 start");
    near(p.to_rendezvous.to, L.p_star, "rendezvous point");
    near(p.to_landing.from, p.to_rendezvous.to, "seg3 start");
    near(p.to_landing.to, L.landing, "landing point");
    near(p.abort.from, p.to_pnr.to, "seg4 start");
    near(p.abort.to, L.abort_end, "abort point");

    double e[4];
    for (int i = 0; i < 4; ++i) {
        const rdv::Segment& s = *segs[i];
        const std::string n = names[i];
        // x_i = x_{i-1} + v_i t_i
        near({s.from.x + s.velocity.x * s.duration, s.from.y + s.velocity.y * s.duration}, s.to, n + " kinematics");
        const double speed = len(s.velocity.x, s.velocity.y);
        if (speed > L.v_max * (1 + tol)) fail(n + " speed", speed, L.v_max);
        if (s.duration < L.t_c * (1 - tol)) fail(n + " dwell", s.duration, L.t_c);
        if (std::abs(s.mass - masses[i]) > tol) fail(n + " mass", s.mass, masses[i]);
        e[i] = (0.5 * masses[i] * speed * speed + L.alpha * masses[i]) * s.duration;
        if (std::abs(e[i] - s.energy) > tol * std::max(1.0, e[i])) fail(n + " energy bookkeeping", s.energy, e[i]);
    }
    const double t1 = p.to_pnr.duration, t2 = p.to_rendezvous.duration, t3 = p.to_landing.duration,
                 t4 = p.abort.duration;
    if (std::abs(p.t_start + t1 + t2 - L.t_rendezvous) > tol) fail("rendezvous time", p.t_start + t1 + t2, L.t_rendezvous);
    if (t1 + t2 + t3 > L.t_max * (1 + tol)) fail("t_max rendezvous chain", t1 + t2 + t3, L.t_max);
    if (t1 + t4 > L.t_max * (1 + tol)) fail("t_max abort chain", t1 + t4, L.t_max);
    const double slack = tol * std::max(1.0, L.energy);
    if (e[0] + e[1] + e[2] > L.energy + slack) fail("energy rendezvous", e[0] + e[1] + e[2], L.energy);
    if (e[0] + e[3] > L.energy + slack) fail("energy abort", e[0] + e[3], L.energy);
    return out;
}

inline Limits limits_for(const rdv::PlanRequest& r) {
    return {r.params.mass_loaded, r.params.mass_empty, r.params.alpha, r.params.v_max, r.params.t_max,
            r.params.t_c,        r.energy,            r.t_rendezvous,  r.p_star,       r.landing_site,
            r.abort_endpoint};
}

}  // namespace check

#endif  // RDV_TEST_PLAN_CHECKER_HPP
