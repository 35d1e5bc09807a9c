#include <doctest.h>

#include <cmath>
#include <random>

#include "rdv/planner.hpp"
#include "support/plan_checker.hpp"

using rdv::Constraint;
using rdv::PlanRequest;

namespace {

PlanRequest straight() {
    PlanRequest r;
    r.uas_position = {0, 0};
    r.t0 = 0.0;
    r.energy = 1.6e4;
    r.p_star = {100, 0};
    r.t_rendezvous = 20.0;
    r.landing_site = {0, 0};
    r.abort_endpoint = {0, 0};
    return r;
}

std::string report(const std::vector<std::string>& v) {
    std::string s;
    for (const auto& x : v) s += x + "; ";
    return s;
}

}  // namespace

TEST_CASE("straight-line plan passes the checker and its energy re-simulates") {
    const PlanRequest r = straight();
    const auto plan = rdv::solve_ocp(r);
    REQUIRE(plan.feasible);
    const auto bad = check::violations(plan, check::limits_for(r));
    CHECK_MESSAGE(bad.empty(), report(bad));

    // integrate m (|v|^2/2 + alpha) over each segment in 1000 steps
    double total = 0.0;
    for (const rdv::Segment* s : {&plan.to_pnr, &plan.to_rendezvous, &plan.to_landing}) {
        const double dt = s->duration / 1000.0;
        const double v2 = s->velocity.x * s->velocity.x + s->velocity.y * s->velocity.y;
        for (int k = 0; k < 1000; ++k) total += s->mass * (0.5 * v2 + r.params.alpha) * dt;
    }
    CHECK(total == doctest::Approx(plan.rendezvous_chain_energy()).epsilon(1e-6));
    CHECK(plan.objective == doctest::Approx(plan.to_rendezvous.duration + plan.to_landing.duration +
                                            plan.abort.duration - plan.to_pnr.duration));
}

TEST_CASE("co-located UAS and rendezvous point") {
    PlanRequest r = straight();
    r.uas_position = {100, 0};
    r.t_rendezvous = 2 * r.params.t_c;
    const auto plan = rdv::solve_ocp(r);
    REQUIRE(plan.feasible);
    CHECK(check::violations(plan, check::limits_for(r)).empty());
    CHECK(plan.to_pnr.duration == doctest::Approx(r.params.t_c));
    CHECK(plan.to_rendezvous.velocity.norm() <= r.params.v_max);
}

TEST_CASE("no energy means the abort budget binds") {
    PlanRequest r = straight();
    r.energy = 0.0;
    const auto plan = rdv::solve_ocp(r);
    CHECK_FALSE(plan.feasible);
    CHECK(plan.binding == Constraint::EnergyAbort);
    CHECK(rdv::to_string(plan.binding) == "energy-abort");
}

TEST_CASE("unreachable rendezvous names v_max or dwell") {
    PlanRequest r = straight();
    r.p_star = {1000, 0};
    r.energy = 1e7;
    auto plan = rdv::solve_ocp(r);
    CHECK_FALSE(plan.feasible);
    CHECK(plan.binding == Constraint::VMax);

    r = straight();
    r.p_star = {5, 0};
    r.t_rendezvous = 3.0;
    plan = rdv::solve_ocp(r);
    CHECK_FALSE(plan.feasible);
    CHECK(plan.binding == Constraint::Dwell);
}

TEST_CASE("more energy never shortens the decision time") {
    PlanRequest r = straight();
    r.p_star = {300, 400};
    r.t_rendezvous = 90.0;
    double last = -1.0;
    for (int k = 0; k < 10; ++k) {
        r.energy = 6000.0 + 1500.0 * k;
        const auto plan = rdv::solve_ocp(r);
        if (!plan.feasible) continue;
        CHECK(check::violations(plan, check::limits_for(r)).empty());
        CHECK(plan.decision_time() >= last - 1e-6);
        last = plan.decision_time();
    }
    CHECK(last > 0.0);
}

TEST_CASE("random feasible plans pass the checker") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(-400, 400), tr(10, 120), en(3000, 20000);
    int feasible = 0;
    for (int k = 0; k < 60; ++k) {
        PlanRequest r;
        r.uas_position = {u(rng) / 4, u(rng) / 4};
        r.t0 = 5.0;
        r.energy = en(rng);
        r.p_star = {u(rng), u(rng)};
        r.t_rendezvous = r.t0 + tr(rng);
        r.landing_site = {0, 0};
        r.abort_endpoint = k % 2 ? rdv::Vec2{50, -50} : rdv::Vec2{0, 0};
        const auto plan = rdv::solve_ocp(r);
        if (!plan.feasible) continue;
        ++feasible;
        const auto bad = check::violations(plan, check::limits_for(r));
        CHECK_MESSAGE(bad.empty(), report(bad));
    }
    CHECK(feasible > 10);
}

TEST_CASE("parallel and serial multi-start agree") {
    PlanRequest r = straight();
    r.p_star = {-200, 350};
    r.t_rendezvous = 70.0;
    rdv::SolverOptions a;
    a.parallel = false;
    rdv::SolverOptions b;
    b.parallel = true;
    const auto pa = rdv::solve_ocp(r, a);
    const auto pb = rdv::solve_ocp(r, b);
    CHECK(pa.feasible == pb.feasible);
    CHECK(pa.pnr() == pb.pnr());
    CHECK(pa.to_pnr.duration == pb.to_pnr.duration);
}

TEST_CASE("relaxation flips the named constraint") {
    PlanRequest r = straight();
    r.energy = 0.0;
    const auto plan = rdv::solve_ocp(r);
    REQUIRE(!plan.feasible);

    PlanRequest big = straight();
    big.p_star = {300, 400};
    big.t_rendezvous = 90.0;
    const auto base = rdv::solve_ocp(big);
    REQUIRE(base.feasible);
    big.energy = base.rendezvous_chain_energy() * 0.97;
    const auto tight = rdv::solve_ocp(big);
    if (!tight.feasible) {
        rdv::SolverOptions o;
        o.relaxation = rdv::Relaxation::loosen(tight.binding, 1.1);
        CHECK(rdv::solve_ocp(big, o).feasible);
    }
}

TEST_CASE("advance and hold") {
    const PlanRequest r = straight();
    const auto plan = rdv::solve_ocp(r);
    REQUIRE(plan.feasible);
    const auto adv = rdv::advance_plan(plan, 1.0, r.params.alpha);
    CHECK(adv.t_start == doctest::Approx(plan.t_start + 1.0));
    CHECK(adv.to_pnr.duration == doctest::Approx(plan.to_pnr.duration - 1.0));
    CHECK(adv.pnr() == plan.pnr());
    CHECK(adv.rendezvous_time() == doctest::Approx(plan.rendezvous_time()));
    CHECK(adv.energy_budget == doctest::Approx(plan.energy_budget - (plan.to_pnr.energy / plan.to_pnr.duration)));

    auto fresh = plan;
    const auto take = rdv::replan_or_hold(plan, fresh, 1.0, r.params.alpha);
    CHECK_FALSE(take.held);
    CHECK_FALSE(take.abort);

    fresh.feasible = false;
    const auto hold = rdv::replan_or_hold(plan, fresh, 1.0, r.params.alpha);
    CHECK(hold.held);
    CHECK_FALSE(hold.abort);
    CHECK(hold.plan.to_pnr.duration == doctest::Approx(plan.to_pnr.duration - 1.0));

    const auto expired = rdv::replan_or_hold(plan, fresh, plan.to_pnr.duration + 1.0, r.params.alpha);
    CHECK(expired.abort);
}

TEST_CASE("round-trip ranges") {
    rdv::UasParams u;
    const auto rr = rdv::max_round_trip_range(u, 1.6e4);
    CHECK(rr.cruise_speed == doctest::Approx(std::sqrt(40.0)));
    CHECK(rr.with_drop > rr.no_drop);
    CHECK(rr.no_drop == doctest::Approx(421.637).epsilon(1e-4));
}

TEST_CASE("plan json carries the segments") {
    const auto plan = rdv::solve_ocp(straight());
    const auto j = plan.to_json();
    CHECK(j.contains("feasible"));
    CHECK(j.dump().find("binding") != std::string::npos);
}
