#include "rdv/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "rdv/errors.hpp"

namespace rdv {

std::string to_string(Constraint c) {
    switch (c) {
        case Constraint::None:
            return "none";
        case Constraint::EnergyAbort:
            return "energy-abort";
        case Constraint::EnergyRendezvous:
            return "energy-rendezvous";
        case Constraint::VMax:
            return "v_max";
        case Constraint::TMax:
            return "t_max";
        case Constraint::Dwell:
            return "dwell";
    }
    return "unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kFeasTol = 1e-12;     // normalized slack
constexpr double kPenaltyBase = 1e6;   // NM objective offset for infeasible points
constexpr double kEnergyTieBreak = 1e-3;  // seconds per unit of normalized energy

constexpr std::array<Constraint, 5> kDiagnosisOrder = {Constraint::EnergyAbort, Constraint::EnergyRendezvous,
                                                       Constraint::VMax, Constraint::TMax, Constraint::Dwell};

std::size_t order_index(Constraint c) {
    for (std::size_t i = 0; i < kDiagnosisOrder.size(); ++i) {
        if (kDiagnosisOrder[i] == c) return i;
    }
    return kDiagnosisOrder.size();
}

struct Problem {
    Vec2 x0, p_star, landing, abort_end;
    double T = 0.0;  // t1 + t2
    double budget_rdv = 0.0, budget_abort = 0.0, energy = 0.0;
    double v_max = 0.0, t_max = 0.0, t_c = 0.0;
    double m_a = 0.0, m_b = 0.0, alpha = 0.0;
    double d3 = 0.0, lo3 = 0.0, hi3 = 0.0, need3 = 0.0;
    double time_scale = 1.0, dist_scale = 1.0, energy_scale = 1.0;
};

// Energy-minimizing duration for distance d, clamped into [lo, hi] (hi < lo means lo).
double economical_duration(double d, double alpha, double lo, double hi) {
    const double t_opt = d / std::sqrt(2.0 * alpha);
    return std::clamp(t_opt, lo, std::max(lo, hi));
}

// Smallest t in [lo, hi] with transit_energy(m, d, t) <= budget, assuming one exists.
double shortest_duration(double m, double d, double alpha, double budget, double lo, double hi) {
    if (transit_energy(m, d, lo, alpha) <= budget) return lo;
    const double disc = budget * budget - 2.0 * m * m * alpha * d * d;
    if (disc <= 0.0) return economical_duration(d, alpha, lo, hi);
    const double root_lo = m * d * d / (budget + std::sqrt(disc));
    return std::clamp(root_lo, lo, std::max(lo, hi));
}

Problem make_problem(const PlanRequest& req, const Relaxation& rel) {
    const UasParams& u = req.params;
    if (!(u.v_max > 0.0 && u.t_max > 0.0 && u.t_c > 0.0 && u.alpha > 0.0 && u.mass_loaded > 0.0 &&
          u.mass_empty > 0.0)) {
        throw ValidationError("planner: physical parameters must be strictly positive");
    }
    Problem p;
    p.x0 = req.uas_position;
    p.p_star = req.p_star;
    p.landing = req.landing_site;
    p.abort_end = req.abort_endpoint;
    p.T = req.t_rendezvous - req.t0;
    p.energy = req.energy;
    p.budget_rdv = req.energy * rel.rendezvous_budget;
    p.budget_abort = req.energy * rel.abort_budget;
    p.v_max = u.v_max * rel.v_max;
    p.t_max = u.t_max * rel.t_max;
    p.t_c = u.t_c * rel.dwell;
    p.m_a = u.mass_loaded;
    p.m_b = u.mass_empty;
    p.alpha = u.alpha;
    p.d3 = distance(p.p_star, p.landing);
    p.lo3 = std::max(p.t_c, p.d3 / p.v_max);
    p.hi3 = p.t_max - p.T;
    p.need3 = transit_energy(p.m_b, p.d3, economical_duration(p.d3, p.alpha, p.lo3, p.hi3), p.alpha);
    p.time_scale = std::max(std::abs(p.T), 1.0);
    p.dist_scale = std::max(p.v_max * std::abs(p.T), 1.0);
    p.energy_scale = std::max(req.energy, 1.0);
    return p;
}

struct PnrGeometry {
    Vec2 x1;
    double d1 = 0.0, d2 = 0.0, d4 = 0.0, lo4 = 0.0;
};

PnrGeometry pnr_geometry(const Problem& p, Vec2 x1) {
    PnrGeometry g;
    g.x1 = x1;
    g.d1 = distance(x1, p.x0);
    g.d2 = distance(p.p_star, x1);
    g.d4 = distance(p.abort_end, x1);
    g.lo4 = std::max(p.t_c, g.d4 / p.v_max);
    return g;
}

// Normalized slack of every constraint family at (x1, t1); negative means violated.
struct Slacks {
    std::array<double, 5> by_family{};  // indexed like kDiagnosisOrder

    double min() const { return *std::min_element(by_family.begin(), by_family.end()); }
    Constraint first_violated() const {
        for (std::size_t i = 0; i < by_family.size(); ++i) {
            if (by_family[i] < -kFeasTol) return kDiagnosisOrder[i];
        }
        return Constraint::None;
    }
};

Slacks slacks(const Problem& p, const PnrGeometry& g, double t1) {
    const double t2 = p.T - t1;
    Slacks s;
    if (!(t1 > 0.0) || !(t2 > 0.0)) {
        s.by_family.fill(-kInf);
        s.by_family[order_index(Constraint::Dwell)] = std::min(t1, t2) / p.time_scale - 1.0;
        return s;
    }
    const double e1 = transit_energy(p.m_a, g.d1, t1, p.alpha);
    const double e2 = transit_energy(p.m_a, g.d2, t2, p.alpha);
    const double hi4 = p.t_max - t1;
    const double need4 = transit_energy(p.m_a, g.d4, economical_duration(g.d4, p.alpha, g.lo4, hi4), p.alpha);

    s.by_family[0] = (p.budget_abort - e1 - need4) / p.energy_scale;
    s.by_family[1] = (p.budget_rdv - e1 - e2 - p.need3) / p.energy_scale;
    s.by_family[2] = std::min(p.v_max * t1 - g.d1, p.v_max * t2 - g.d2) / p.dist_scale;
    s.by_family[3] = std::min(p.hi3 - p.lo3, hi4 - g.lo4) / p.time_scale;
    s.by_family[4] = std::min(t1 - p.t_c, t2 - p.t_c) / p.time_scale;
    return s;
}

struct InnerResult {
    bool feasible = false;
    double t1 = 0.0, t3 = 0.0, t4 = 0.0;
    double objective = kInf;
    double violation = 0.0;
    Slacks at_best;
};

struct Durations {
    double t3 = 0.0, t4 = 0.0, objective = kInf;
};

Durations completion(const Problem& p, const PnrGeometry& g, double t1) {
    const double t2 = p.T - t1;
    const double e1 = transit_energy(p.m_a, g.d1, t1, p.alpha);
    const double e2 = transit_energy(p.m_a, g.d2, t2, p.alpha);
    Durations d;
    d.t3 = shortest_duration(p.m_b, p.d3, p.alpha, p.budget_rdv - e1 - e2, p.lo3, p.hi3);
    d.t4 = shortest_duration(p.m_a, g.d4, p.alpha, p.budget_abort - e1, g.lo4, p.t_max - t1);
    const double e3 = transit_energy(p.m_b, p.d3, d.t3, p.alpha);
    const double e4 = transit_energy(p.m_a, g.d4, d.t4, p.alpha);
    d.objective = t2 + d.t3 + d.t4 - t1 + kEnergyTieBreak * (e1 + e2 + e3 + e4) / p.energy_scale;
    return d;
}

constexpr double kGolden = 0.6180339887498948482;

template <typename F>
double golden_argmax(F&& f, double a, double b, int iterations) {
    double c = b - kGolden * (b - a);
    double d = a + kGolden * (b - a);
    double fc = f(c);
    double fd = f(d);
    for (int k = 0; k < iterations; ++k) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kGolden * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kGolden * (b - a);
            fd = f(d);
        }
    }
    return fc >= fd ? c : d;
}

InnerResult solve_inner(const Problem& p, const PnrGeometry& g) {
    InnerResult r;
    const double lo = p.t_c;
    const double hi = p.T - p.t_c;
    if (!(hi >= lo)) {
        const double t1 = 0.5 * p.T;
        r.at_best = slacks(p, g, t1);
        r.at_best.by_family[order_index(Constraint::Dwell)] = (hi - lo) / (2.0 * p.time_scale);
        r.violation = -r.at_best.min();
        r.t1 = t1;
        return r;
    }
    auto s = [&](double t1) { return slacks(p, g, t1).min(); };
    const double t_star = hi > lo ? golden_argmax(s, lo, hi, 24) : lo;
    double s_star = s(t_star);
    // the maximizer may sit on a bracket end
    for (double end : {lo, hi}) {
        const double v = s(end);
        if (v > s_star) {
            s_star = v;
        }
    }
    double t_best = t_star;
    if (s(lo) >= s_star) t_best = lo;
    if (s(hi) >= s_star) t_best = hi;
    r.at_best = slacks(p, g, t_best);
    if (s_star < -kFeasTol) {
        r.violation = -s_star;
        r.t1 = t_best;
        return r;
    }

    // feasible interval [a, b] around t_best; the slack is concave in t1
    auto boundary = [&](double feasible_pt, double infeasible_pt) {
        if (s(infeasible_pt) >= -kFeasTol) return infeasible_pt;
        for (int k = 0; k < 30; ++k) {
            const double mid = 0.5 * (feasible_pt + infeasible_pt);
            if (s(mid) >= -kFeasTol) {
                feasible_pt = mid;
            } else {
                infeasible_pt = mid;
            }
        }
        return feasible_pt;
    };
    const double a = boundary(t_best, lo);
    const double b = boundary(t_best, hi);

    auto obj = [&](double t1) { return completion(p, g, t1).objective; };
    constexpr int kGrid = 16;
    double best_t = b;
    double best_f = obj(b);
    for (int k = 0; k < kGrid; ++k) {
        const double t = a + (b - a) * k / kGrid;
        const double f = obj(t);
        if (f < best_f) {
            best_f = f;
            best_t = t;
        }
    }
    const double step = (b - a) / kGrid;
    if (step > 0.0) {
        const double t_ref =
            golden_argmax([&](double t) { return -obj(t); }, std::max(a, best_t - step), std::min(b, best_t + step), 24);
        const double f_ref = obj(t_ref);
        if (f_ref < best_f) {
            best_f = f_ref;
            best_t = t_ref;
        }
    }
    const Durations d = completion(p, g, best_t);
    r.feasible = true;
    r.t1 = best_t;
    r.t3 = d.t3;
    r.t4 = d.t4;
    r.objective = d.objective;
    r.at_best = slacks(p, g, best_t);
    return r;
}

double outer_objective(const InnerResult& r) {
    return r.feasible ? r.objective : kPenaltyBase * (1.0 + r.violation);
}

struct StartResult {
    Vec2 x1;
    InnerResult inner;
    double value = kInf;
};

StartResult nelder_mead(const Problem& p, Vec2 start, double step, int max_evals) {
    struct Vertex {
        Vec2 x;
        double f;
        InnerResult inner;
    };
    int evals = 0;
    auto eval = [&](Vec2 x) {
        ++evals;
        InnerResult in = solve_inner(p, pnr_geometry(p, x));
        return Vertex{x, outer_objective(in), in};
    };
    std::array<Vertex, 3> v = {eval(start), eval(start + Vec2{step, 0.0}), eval(start + Vec2{0.0, step})};
    auto by_value = [](const Vertex& a, const Vertex& b) { return a.f < b.f; };

    while (evals < max_evals) {
        std::sort(v.begin(), v.end(), by_value);
        const double spread = std::abs(v[2].f - v[0].f);
        const double size = std::max(distance(v[1].x, v[0].x), distance(v[2].x, v[0].x));
        if (spread <= 1e-8 * (1.0 + std::abs(v[0].f)) && size <= 1e-3 * (1.0 + step)) break;

        const Vec2 centroid = (v[0].x + v[1].x) * 0.5;
        const Vertex refl = eval(centroid + (centroid - v[2].x));
        if (refl.f < v[0].f) {
            const Vertex exp = eval(centroid + (centroid - v[2].x) * 2.0);
            v[2] = exp.f < refl.f ? exp : refl;
        } else if (refl.f < v[1].f) {
            v[2] = refl;
        } else {
            const bool outside = refl.f < v[2].f;
            const Vec2 target = outside ? centroid + (refl.x - centroid) * 0.5 : centroid + (v[2].x - centroid) * 0.5;
            const Vertex con = eval(target);
            if (con.f < std::min(refl.f, v[2].f)) {
                v[2] = con;
            } else {
                for (std::size_t k = 1; k < v.size(); ++k) v[k] = eval(v[0].x + (v[k].x - v[0].x) * 0.5);
            }
        }
    }
    std::sort(v.begin(), v.end(), by_value);
    return {v[0].x, v[0].inner, v[0].f};
}

std::vector<Vec2> start_points(const Problem& p, int count) {
    const Vec2 a = p.x0;
    const Vec2 b = p.p_star;
    const Vec2 c = p.abort_end;
    const Vec2 ab = b - a;
    const double len = std::max(ab.norm(), 1.0);
    const Vec2 perp = Vec2{-ab.y, ab.x} / len;
    std::vector<Vec2> pts = {
        a,
        (a + b) * 0.5,
        a + ab * 0.25,
        a + ab * 0.75,
        b,
        (a + c) * 0.5,
        (b + c) * 0.5,
        (a + b + c) / 3.0,
        a + ab * 0.125,
        a + ab * 0.375,
        a + ab * 0.625,
        a + ab * 0.875,
        (a + b) * 0.5 + perp * (0.25 * len),
        (a + b) * 0.5 - perp * (0.25 * len),
        c,
        a + (c - a) * 0.25,
    };
    pts.resize(static_cast<std::size_t>(std::clamp(count, 1, static_cast<int>(pts.size()))));
    return pts;
}

Segment make_segment(Vec2 from, Vec2 to, double duration, double mass, double alpha) {
    Segment s;
    s.from = from;
    s.to = to;
    s.duration = duration;
    s.mass = mass;
    s.velocity = (to - from) / duration;
    s.energy = segment_energy(mass, s.velocity.norm(), duration, alpha);
    return s;
}

MissionPlan assemble(const PlanRequest& req, const Problem& p, Vec2 x1, const InnerResult& in) {
    MissionPlan plan;
    plan.t_start = req.t0;
    plan.energy_budget = req.energy;
    plan.origin = req.uas_position;
    const double t2 = p.T - in.t1;
    plan.to_pnr = make_segment(p.x0, x1, in.t1, p.m_a, p.alpha);
    plan.to_rendezvous = make_segment(x1, p.p_star, t2, p.m_a, p.alpha);
    plan.to_landing = make_segment(p.p_star, p.landing, in.feasible ? in.t3 : std::max(p.lo3, 1e-9), p.m_b, p.alpha);
    plan.abort = make_segment(x1, p.abort_end, in.feasible ? in.t4 : std::max(p.t_c, 1e-9), p.m_a, p.alpha);
    plan.feasible = in.feasible;
    plan.objective = t2 + plan.to_landing.duration + plan.abort.duration - in.t1;
    return plan;
}

StartResult search(const PlanRequest& req, const Problem& p, const SolverOptions& opts) {
    const std::vector<Vec2> starts = start_points(p, opts.starts);
    const double step =
        std::max(5.0, 0.05 * (distance(p.x0, p.p_star) + distance(p.x0, p.abort_end) + distance(p.p_star, p.abort_end)));
    std::vector<StartResult> results(starts.size());
    const auto n = static_cast<long>(starts.size());
    if (opts.parallel) {
#pragma omp parallel for schedule(dynamic)
        for (long i = 0; i < n; ++i) {
            const auto k = static_cast<std::size_t>(i);
            results[k] = nelder_mead(p, starts[k], step, opts.max_evaluations);
        }
    } else {
        for (long i = 0; i < n; ++i) {
            const auto k = static_cast<std::size_t>(i);
            results[k] = nelder_mead(p, starts[k], step, opts.max_evaluations);
        }
    }
    (void)req;
    // deterministic reduction: lowest value, then lowest start index
    std::size_t best = 0;
    for (std::size_t k = 1; k < results.size(); ++k) {
        if (results[k].value < results[best].value) best = k;
    }
    return results[best];
}

Relaxation combine(const Relaxation& a, const Relaxation& b) {
    return {a.abort_budget * b.abort_budget, a.rendezvous_budget * b.rendezvous_budget, a.v_max * b.v_max,
            a.t_max * b.t_max, a.dwell * b.dwell};
}

}  // namespace

Relaxation Relaxation::loosen(Constraint c, double factor) {
    Relaxation r;
    switch (c) {
        case Constraint::EnergyAbort:
            r.abort_budget = factor;
            break;
        case Constraint::EnergyRendezvous:
            r.rendezvous_budget = factor;
            break;
        case Constraint::VMax:
            r.v_max = factor;
            break;
        case Constraint::TMax:
            r.t_max = factor;
            break;
        case Constraint::Dwell:
            r.dwell = 2.0 - factor;
            break;
        case Constraint::None:
            break;
    }
    return r;
}

MissionPlan solve_ocp(const PlanRequest& req, const SolverOptions& opts) {
    const Problem p = make_problem(req, opts.relaxation);
    const StartResult best = search(req, p, opts);
    MissionPlan plan = assemble(req, p, best.x1, best.inner);
    if (plan.feasible) return plan;

    plan.binding = best.inner.at_best.first_violated();
    if (plan.binding == Constraint::None) plan.binding = Constraint::Dwell;
    if (opts.diagnose) {
        for (Constraint c : kDiagnosisOrder) {
            SolverOptions relaxed = opts;
            relaxed.diagnose = false;
            relaxed.relaxation = combine(opts.relaxation, Relaxation::loosen(c, 1.1));
            const Problem pr = make_problem(req, relaxed.relaxation);
            if (search(req, pr, relaxed).inner.feasible) {
                plan.binding = c;
                break;
            }
        }
    }
    return plan;
}

MissionPlan advance_plan(const MissionPlan& plan, double elapsed, double alpha) {
    MissionPlan next = plan;
    const double spent = plan.to_pnr.energy * std::min(1.0, elapsed / plan.to_pnr.duration);
    next.t_start = plan.t_start + elapsed;
    next.origin = plan.origin + plan.to_pnr.velocity * elapsed;
    next.energy_budget = plan.energy_budget - spent;
    next.to_pnr.from = next.origin;
    next.to_pnr.duration = plan.to_pnr.duration - elapsed;
    next.to_pnr.energy = segment_energy(plan.to_pnr.mass, plan.to_pnr.velocity.norm(),
                                        std::max(0.0, next.to_pnr.duration), alpha);
    next.objective = plan.objective + 2.0 * elapsed;
    return next;
}

HoldDecision replan_or_hold(const MissionPlan& previous, const MissionPlan& fresh, double elapsed, double alpha) {
    if (fresh.feasible) return {fresh, false, false};
    if (previous.feasible && previous.to_pnr.duration - elapsed >= 0.0) {
        return {advance_plan(previous, elapsed, alpha), true, false};
    }
    HoldDecision d;
    d.plan = previous;
    d.abort = true;
    return d;
}

RangeReport max_round_trip_range(const UasParams& params, double energy) {
    // Energy per meter at speed v is m (v/2 + alpha/v), minimized at the economy speed.
    const double v = economy_speed(params.alpha, params.v_max);
    const double per_meter = 0.5 * v + params.alpha / v;
    RangeReport r;
    r.cruise_speed = v;
    r.no_drop = energy / (2.0 * params.mass_loaded * per_meter);
    r.with_drop = energy / ((params.mass_loaded + params.mass_empty) * per_meter);
    return r;
}

namespace {

nlohmann::json segment_json(const Segment& s) {
    return {{"from", {s.from.x, s.from.y}},
            {"to", {s.to.x, s.to.y}},
            {"velocity", {s.velocity.x, s.velocity.y}},
            {"duration", s.duration},
            {"mass", s.mass},
            {"energy", s.energy}};
}

}  // namespace

nlohmann::json MissionPlan::to_json() const {
    return {{"t_start", t_start},
            {"energy_budget", energy_budget},
            {"origin", {origin.x, origin.y}},
            {"to_pnr", segment_json(to_pnr)},
            {"to_rendezvous", segment_json(to_rendezvous)},
            {"to_landing", segment_json(to_landing)},
            {"abort", segment_json(abort)},
            {"feasible", feasible},
            {"binding", to_string(binding)},
            {"objective", objective}};
}

}  // namespace rdv
