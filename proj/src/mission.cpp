#include "rdv/mission.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <random>

#include "rdv/errors.hpp"

namespace rdv {

const char* to_string(Phase p) {
    switch (p) {
        case Phase::Cruise:
            return "cruise";
        case Phase::CommittedRendezvous:
            return "committed_rendezvous";
        case Phase::Aborting:
            return "aborting";
        case Phase::Landed:
            return "landed";
        case Phase::Failed:
            return "failed";
    }
    return "unknown";
}

SafetyCertificate check_persistent_safety(const MissionState& state, const UasParams& params, Vec2 abort_endpoint) {
    if (state.phase != Phase::Cruise) throw DomainError("check_persistent_safety: only defined while cruising");
    SafetyCertificate c;
    c.direct_abort_margin = state.energy - min_transit_energy(state.mass(params), distance(state.uas_position, abort_endpoint),
                                                              params.alpha, params.v_max);
    c.plan_margin = state.plan ? state.energy - state.plan->abort_chain_energy() : c.direct_abort_margin;
    const double tol = 1e-6 * std::max(1.0, std::abs(state.energy));
    c.ok = c.plan_margin >= -tol && (!state.plan || state.plan->feasible);
    return c;
}

double deviation_rmse(const GPModel& gp, const DeviationRule& truth, std::size_t grid, double exclusion) {
    const double lo = gp.observed_min();
    const double hi = gp.observed_max();
    if (!(hi >= lo) || grid < 2) return std::numeric_limits<double>::quiet_NaN();
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t k = 0; k < grid; ++k) {
        const double x = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(grid - 1);
        if (truth.kind == DeviationRule::Kind::Sign && std::abs(x - truth.center) <= exclusion) continue;
        const double e = gp.mean(x) - truth(x);
        sum += e * e;
        ++n;
    }
    return n ? std::sqrt(sum / static_cast<double>(n)) : std::numeric_limits<double>::quiet_NaN();
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t id) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(id)};
    return std::mt19937_64(seq);
}

struct Candidate {
    double t_rendezvous = 0.0;
    Vec2 point;
    MissionPlan plan;
};

class Simulation {
public:
    Simulation(const ScenarioConfig& cfg, std::uint64_t seed)
        : cfg_(cfg),
          u_(cfg.planner.params),
          map_(cfg.paths()),
          driver_rng_(stream(seed, 1)),
          sampler_rng_(stream(seed, 2)),
          data_(cfg.gp.window),
          gp_(GPModel::prior(cfg.gp.kernel)),
          tick_(1.0 / cfg.traffic.measurement_rate),
          ticks_per_period_(static_cast<int>(std::lround(cfg.run.control_period * cfg.traffic.measurement_rate))),
          abort_end_(cfg.abort_endpoint()) {
        log_.seed = seed;
        int chosen = cfg.traffic.chosen_path;
        if (chosen == 0) {
            auto rng = stream(seed, 3);
            chosen = std::uniform_int_distribution<int>(1, static_cast<int>(map_.size()))(rng);
        }
        log_.chosen_path = chosen;
        truth_.chosen_path = chosen;
        truth_.deviation = cfg.traffic.deviation;
        truth_.path_length = map_.path(chosen).length();
        truth_.sigma_speed = cfg.traffic.sigma_speed;
        truth_.sigma_position = cfg.traffic.sigma_position;

        s_.uas_position = cfg.uas_start();
        s_.energy = cfg.planner.energy;
        s_.reachable = ReachableSet::all(map_);
        log_.min_energy = s_.energy;
        log_.min_plan_margin = kInf;
        log_.min_direct_margin = kInf;
    }

    MissionLog run() {
        const double home = min_transit_energy(u_.mass_loaded, distance(s_.uas_position, abort_end_), u_.alpha, u_.v_max);
        if (home > s_.energy) {
            throw InitiallyInfeasible("scenario is initially infeasible: flying to the abort endpoint needs " +
                                      std::to_string(home) + " J but planner.energy is " + std::to_string(s_.energy) +
                                      " J");
        }
        warmup();
        cruise();
        if (s_.phase == Phase::Cruise) decide();
        if (s_.phase == Phase::CommittedRendezvous) rendezvous();
        if (s_.phase == Phase::Aborting) fly_to(abort_end_);
        log_.final_phase = s_.phase;
        log_.end_time = s_.t;
        return std::move(log_);
    }

    // Proposal spread of the cruise iterations up to t_end.
    ConvergenceTrace convergence(double t_end) {
        warmup();
        cruise(t_end);
        return std::move(trace_);
    }

private:
    const ScenarioConfig& cfg_;
    const UasParams& u_;
    const PathMap& map_;
    MissionLog log_;
    MissionState s_;
    DriverTruth truth_;
    std::mt19937_64 driver_rng_;
    std::mt19937_64 sampler_rng_;
    Dataset data_;
    GPModel gp_;
    Measurement last_{};
    ProposalDistribution prop_;
    SampleBatch batch_;
    EliteResult elites_;
    std::optional<PathId> plan_target_;
    double tick_;
    int ticks_per_period_;
    Vec2 abort_end_;
    double last_plan_margin_ = kInf;
    double last_direct_margin_ = kInf;
    ConvergenceTrace trace_;

    Vec2 driver_point() const { return map_.path(truth_.chosen_path).evaluate_clamped(truth_.theta); }

    // Advance the world by dt: driver, measurement, UAS motion and energy.
    void tick(Vec2 velocity, double dt, bool airborne) {
        auto [next, meas] = step_driver(truth_, cfg_.traffic.profile, dt, driver_rng_);
        const bool moving = truth_.theta < truth_.path_length;
        truth_ = next;
        if (airborne) {
            s_.uas_position = s_.uas_position + velocity * dt;
            s_.energy -= segment_energy(s_.mass(u_), velocity.norm(), dt, u_.alpha);
        }
        s_.t = truth_.t;
        ingest(meas, moving);
        log_.energy_trace.push_back(s_.energy);
        log_.min_energy = std::min(log_.min_energy, s_.energy);
        if (s_.energy < -1e-9 * std::max(1.0, cfg_.planner.energy)) s_.phase = Phase::Failed;
    }

    void ingest(const Measurement& m, bool moving) {
        last_ = m;
        const double obs = m.speed_meas - m.hist_speed;
        log_.measurements.row() << m.t << m.theta_meas << m.speed_meas << m.hist_speed << obs;
        if (moving) data_.append(m.hist_speed, obs);
        const double theta = std::max(m.theta_meas, s_.reachable.driver_theta);
        const Vec2 seen = map_.path(truth_.chosen_path).evaluate_clamped(theta);
        try {
            s_.reachable = prune_reachable(s_.reachable, map_, theta, seen);
        } catch (const InconsistentMeasurement&) {
        }
    }

    void warmup() {
        const int n = static_cast<int>(std::lround(cfg_.run.warmup * cfg_.traffic.measurement_rate));
        for (int k = 0; k < n; ++k) tick({0.0, 0.0}, tick_, false);
    }

    void refit() {
        try {
            gp_ = fit(data_, cfg_.gp.kernel, cfg_.gp.kind, std::min(cfg_.gp.n_inducing, data_.size()));
        } catch (const InsufficientData&) {
            gp_ = GPModel::prior(cfg_.gp.kernel);
        } catch (const ConditioningError&) {
            // keep the previous snapshot
        }
        const double rmse = gp_.fitted() ? deviation_rmse(gp_, truth_.deviation) : std::numeric_limits<double>::quiet_NaN();
        log_.fits.row() << s_.t << static_cast<unsigned long>(data_.size())
                        << (cfg_.gp.kind == GPKind::Full ? "full" : "dtc") << gp_.jitter() << rmse;
    }

    PropagationOptions propagation() const {
        PropagationOptions o;
        o.gamma_scale = cfg_.sampler.gamma_scale;
        return o;
    }

    BatchInputs batch_inputs() const {
        BatchInputs in;
        in.map = &map_;
        in.gp = &gp_;
        in.profile = &cfg_.traffic.profile;
        in.driver_theta = last_.theta_meas;
        in.cost.uas_position = s_.uas_position;
        in.cost.t0 = s_.t;
        in.cost.landing_site = map_.landing_site();
        if (s_.plan && s_.plan->feasible) in.cost.t_landing = s_.plan->landing_time();
        in.cost.params = u_;
        in.propagation = propagation();
        return in;
    }

    void sample_and_rank() {
        batch_ = sample_batch(prop_, sampler_rng_, s_.reachable, s_.t + u_.t_c);
        evaluate_batch(batch_, batch_inputs());
        elites_ = rank_and_select(batch_, cfg_.sampler.n_e, cfg_.sampler.strategy, cfg_.path_weights());
    }

    // Rows without n_e finite samples restart from the initial rule at the current state.
    void update_proposal() {
        if (elites_.target_path) prop_ = update_parameters(prop_, elites_);
        bool restart = false;
        for (std::size_t i = 0; i < prop_.paths(); ++i) restart = restart || (elites_.row_infeasible[i] && batch_.active[i]);
        if (!restart) return;
        const ProposalDistribution fresh = initial_proposal(map_, s_.uas_position, s_.t, u_.v_max, cfg_.sampler.horizon,
                                                            cfg_.sampler.lambda, cfg_.sampler.n_s, cfg_.sampler.n_e);
        for (std::size_t i = 0; i < prop_.paths(); ++i) {
            if (!elites_.row_infeasible[i] || !batch_.active[i]) continue;
            prop_.mean[i] = fresh.mean[i];
            prop_.variance[i] = fresh.variance[i];
        }
    }

    PlanRequest request(Vec2 p_star, double t_rendezvous) const {
        PlanRequest r;
        r.uas_position = s_.uas_position;
        r.t0 = s_.t;
        r.energy = s_.energy;
        r.p_star = p_star;
        r.t_rendezvous = t_rendezvous;
        r.landing_site = map_.landing_site();
        r.abort_endpoint = abort_end_;
        r.params = u_;
        return r;
    }

    SolverOptions solver_options(bool diagnose) const {
        SolverOptions o;
        o.starts = cfg_.planner.starts;
        o.max_evaluations = cfg_.planner.max_evaluations;
        o.diagnose = diagnose;
        return o;
    }

    void log_plan(const MissionPlan& p, bool held) {
        log_.plans.row() << s_.t << (p.feasible ? 1 : 0) << (held ? 1 : 0) << to_string(p.binding) << p.pnr().x
                         << p.pnr().y << p.to_pnr.duration << p.to_rendezvous.duration << p.to_landing.duration
                         << p.abort.duration << p.to_pnr.velocity.norm() << p.to_rendezvous.velocity.norm()
                         << p.to_landing.velocity.norm() << p.abort.velocity.norm() << p.to_pnr.energy
                         << p.to_rendezvous.energy << p.to_landing.energy << p.abort.energy << p.objective;
    }

    void log_state() {
        std::string active;
        for (PathId id : s_.reachable.active) {
            if (!active.empty()) active += ';';
            active += std::to_string(id);
        }
        const Vec2 d = driver_point();
        log_.state.row() << s_.t << to_string(s_.phase) << s_.uas_position.x << s_.uas_position.y << s_.energy
                         << (s_.carrying_package ? 1 : 0) << truth_.theta << d.x << d.y << active << last_plan_margin_
                         << last_direct_margin_;
        log_.phase_trace.push_back(s_.phase);
    }

    void log_sampler(int iteration) {
        for (std::size_t i = 0; i < prop_.paths(); ++i) {
            const bool target = elites_.target_path && static_cast<std::size_t>(*elites_.target_path) == i + 1;
            log_.sampler.row() << s_.t << iteration << static_cast<int>(i + 1) << static_cast<int>(batch_.active[i])
                               << prop_.mean[i] << prop_.variance[i] << elites_.row_best_cost[i]
                               << static_cast<int>(elites_.row_infeasible[i]) << (target ? 1 : 0)
                               << (elites_.fallback ? 1 : 0);
        }
    }

    void start_abort(const char* reason) {
        s_.phase = Phase::Aborting;
        log_.decision_reason = reason;
        log_.verdict = Verdict::Abort;
        log_.decisions = 1;
        log_.decision_time = s_.t;
    }

    void record_spread() {
        double max_v = 0.0;
        double sum = 0.0;
        std::size_t n = 0;
        for (std::size_t i = 0; i < prop_.paths(); ++i) {
            if (!batch_.active[i]) continue;
            max_v = std::max(max_v, prop_.variance[i]);
            sum += prop_.variance[i];
            ++n;
        }
        trace_.t.push_back(s_.t);
        trace_.max_variance.push_back(max_v);
        trace_.mean_variance.push_back(n ? sum / static_cast<double>(n) : 0.0);
    }

    void cruise(double trace_until = -1.0) {
        prop_ = initial_proposal(map_, s_.uas_position, s_.t, u_.v_max, cfg_.sampler.horizon, cfg_.sampler.lambda,
                                 cfg_.sampler.n_s, cfg_.sampler.n_e);
        int iteration = 0;
        while (true) {
            if (s_.t >= cfg_.run.max_duration) {
                start_abort("timeout");
                return;
            }
            if (trace_until >= 0.0 && s_.t > trace_until + 1e-9) return;
            refit();
            sample_and_rank();
            update_proposal();
            log_sampler(iteration);
            record_spread();

            MissionPlan fresh;
            if (elites_.target_path) {
                fresh = solve_ocp(request(elites_.p_star, elites_.t_rendezvous), solver_options(false));
            }
            bool held = false;
            if (!s_.plan) {
                if (!fresh.feasible) {
                    // still on the ground: wait for a first feasible plan
                    log_state();
                    ++iteration;
                    log_.iterations = iteration;
                    for (int k = 0; k < ticks_per_period_; ++k) tick({0.0, 0.0}, tick_, false);
                    continue;
                }
                s_.plan = fresh;
                plan_target_ = elites_.target_path;
            } else {
                const HoldDecision d = replan_or_hold(*s_.plan, fresh, s_.t - s_.plan->t_start, u_.alpha);
                if (d.abort) {
                    start_abort("planner");
                    return;
                }
                held = d.held;
                s_.plan = d.plan;
                if (!held) plan_target_ = elites_.target_path;
            }
            log_plan(*s_.plan, held);

            const SafetyCertificate cert = check_persistent_safety(s_, u_, abort_end_);
            last_plan_margin_ = cert.plan_margin;
            last_direct_margin_ = cert.direct_abort_margin;
            log_.min_plan_margin = std::min(log_.min_plan_margin, cert.plan_margin);
            log_.min_direct_margin = std::min(log_.min_direct_margin, cert.direct_abort_margin);
            log_state();
            ++iteration;
            log_.iterations = iteration;
            if (!cert.ok) {
                ++log_.safety_trips;
                start_abort("safety");
                return;
            }
            if (s_.plan->decision_time() <= cfg_.run.epsilon) return;

            const Vec2 v1 = s_.plan->to_pnr.velocity;
            for (int k = 0; k < ticks_per_period_; ++k) {
                tick(v1, tick_, true);
                if (s_.phase == Phase::Failed) return;
            }
        }
    }

    // The UAS sits at its PNR: fly straight to p, then home at economy speed.
    MissionPlan branch_plan(Vec2 p, double t_r) const {
        MissionPlan plan;
        plan.t_start = s_.t;
        plan.energy_budget = s_.energy;
        plan.origin = s_.uas_position;
        const double t2 = t_r - s_.t;
        const Vec2 home = map_.landing_site();
        const double d3 = distance(p, home);
        const double t3 = std::max(u_.t_c, d3 / economy_speed(u_.alpha, u_.v_max));
        plan.to_pnr = Segment{s_.uas_position, s_.uas_position, {0.0, 0.0}, 0.0, u_.mass_loaded, 0.0};
        plan.to_rendezvous = Segment{s_.uas_position, p, (p - s_.uas_position) / t2, t2, u_.mass_loaded,
                                     transit_energy(u_.mass_loaded, distance(p, s_.uas_position), t2, u_.alpha)};
        plan.to_landing = Segment{p, home, (home - p) / t3, t3, u_.mass_empty, transit_energy(u_.mass_empty, d3, t3, u_.alpha)};
        plan.abort = Segment{s_.uas_position, abort_end_, {0.0, 0.0}, 0.0, u_.mass_loaded, 0.0};
        const bool fast = plan.to_rendezvous.velocity.norm() > u_.v_max * (1.0 + 1e-9);
        const bool fuel = plan.to_rendezvous.energy + plan.to_landing.energy > s_.energy;
        const bool late = t2 + t3 > u_.t_max;
        plan.feasible = !fast && !fuel && !late;
        plan.binding = fuel ? Constraint::EnergyRendezvous : fast ? Constraint::VMax : late ? Constraint::TMax : Constraint::None;
        plan.objective = t2 + t3;
        return plan;
    }

    // Best decision-time plan for one path: the elite times and the proposal mean, re-propagated now.
    std::optional<Candidate> candidate_for(PathId id) {
        if (s_.plan && plan_target_ && *plan_target_ == id) {
            return Candidate{s_.plan->rendezvous_time(), s_.plan->rendezvous_point(), *s_.plan};
        }
        const auto row = static_cast<std::size_t>(id - 1);
        std::vector<double> times;
        for (std::size_t k = 0; k < elites_.n_e; ++k) times.push_back(elites_.elite(row, k));
        times.push_back(prop_.mean[row]);
        const Path& path = map_.path(id);
        std::optional<Candidate> best;
        double best_extra = -kInf;
        for (double t_r : times) {
            if (!(t_r >= s_.t + u_.t_c)) continue;
            const Propagation pr = propagate_position(path, gp_, cfg_.traffic.profile, last_.theta_meas, s_.t, t_r,
                                                      propagation());
            if (!pr.valid) continue;
            Candidate c{t_r, pr.point, branch_plan(pr.point, t_r)};
            if (!c.plan.feasible) continue;
            const double extra = s_.energy - rendezvous_chain_energy_at(c.plan, pr.point, u_.alpha, u_.v_max);
            if (extra > best_extra) {
                best_extra = extra;
                best = c;
            }
        }
        return best;
    }

    void decide() {
        log_.decisions = 1;
        log_.decision_time = s_.t;
        log_.decision_reason = "risk";
        log_.target_path = plan_target_;
        std::map<PathId, Candidate> cands;
        auto candidate = [&](PathId id, bool keep) {
            PathCandidate pc;
            pc.path = id;
            pc.geometry = &map_.path(id);
            const auto c = candidate_for(id);
            if (c && c->plan.feasible) {
                const Propagation pr = propagate_position(*pc.geometry, gp_, cfg_.traffic.profile, last_.theta_meas,
                                                          s_.t, std::max(c->t_rendezvous, s_.t + 1e-6),
                                                          propagation());
                pc.plan = c->plan;
                pc.theta_hat = pr.theta;
                pc.half_width = pr.half_width;
                if (!pr.valid) pc.plan.feasible = false;
                if (keep) cands.emplace(id, *c);
            }
            return pc;
        };
        std::vector<PathCandidate> risk_in;
        std::vector<PathCandidate> pruned_in;
        for (PathId id : s_.reachable.active) risk_in.push_back(candidate(id, true));
        for (const Path& p : map_.paths()) {
            if (!s_.reachable.contains(p.id())) pruned_in.push_back(candidate(p.id(), false));
        }
        RiskOptions ro;
        ro.gamma = cfg_.risk.gamma;
        ro.kappa = cfg_.risk.kappa;
        ro.gamma_scale = cfg_.sampler.gamma_scale;
        ro.mc_draws = cfg_.risk.mc_draws;
        ro.seed = log_.seed;
        RiskReport rep = assess_decision_risk(risk_in, u_, ro);
        // pruned paths are assessed as if the driver had taken them; they do not vote
        if (!pruned_in.empty()) log_.pruned_risk = assess_decision_risk(pruned_in, u_, ro).per_path;
        std::vector<std::pair<PathRisk, bool>> rows;
        for (const auto& p : rep.per_path) rows.emplace_back(p, true);
        for (const auto& p : log_.pruned_risk) rows.emplace_back(p, false);
        std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first.path < b.first.path; });
        for (const auto& [p, active] : rows) {
            log_.risk_rows.row() << s_.t << p.path << (active ? 1 : 0) << p.extra_fuel_mean << p.extra_fuel_sigma
                                 << p.cvar << p.rho_d << (p.monte_carlo ? 1 : 0) << to_string(rep.verdict);
        }
        log_.verdict = rep.verdict;
        log_.risk = rep;
        candidates_ = std::move(cands);
        s_.phase = rep.verdict == Verdict::Proceed ? Phase::CommittedRendezvous : Phase::Aborting;
    }

    std::map<PathId, Candidate> candidates_;

    std::optional<PathId> aim_path() const {
        if (plan_target_ && s_.reachable.contains(*plan_target_) && candidates_.count(*plan_target_)) {
            return plan_target_;
        }
        for (PathId id : s_.reachable.active) {
            if (candidates_.count(id)) return id;
        }
        return std::nullopt;
    }

    void rendezvous() {
        log_.rendezvous_actuated = true;
        const double grace = 2.0 * cfg_.run.control_period;
        int k = 0;
        while (s_.phase == Phase::CommittedRendezvous && s_.carrying_package) {
            const auto id = aim_path();
            if (!id) {
                s_.phase = Phase::Aborting;
                break;
            }
            const Candidate& c = candidates_.at(*id);
            const Path& path = map_.path(*id);
            Vec2 aim;
            double to_go = c.t_rendezvous - s_.t;
            if (to_go > tick_) {
                const Propagation pr = propagate_position(path, gp_, cfg_.traffic.profile, last_.theta_meas, s_.t,
                                                          c.t_rendezvous, propagation());
                aim = pr.valid ? pr.point : c.point;
            } else {
                aim = path.evaluate_clamped(last_.theta_meas);
                to_go = tick_;
            }
            Vec2 v = (aim - s_.uas_position) / to_go;
            if (v.norm() > u_.v_max) v = v * (u_.v_max / v.norm());
            tick(v, tick_, true);
            if (s_.phase == Phase::Failed) return;
            if (++k % ticks_per_period_ == 0) log_state();
            if (distance(s_.uas_position, driver_point()) <= cfg_.run.rendezvous_radius) {
                s_.carrying_package = false;
                log_.delivered = true;
                log_state();
            } else if (s_.t > c.t_rendezvous + grace) {
                s_.phase = Phase::Aborting;
            }
        }
        if (s_.phase == Phase::CommittedRendezvous) fly_to(map_.landing_site());
    }

    // Least-energy straight flight; ends landed.
    void fly_to(Vec2 dest) {
        const double v = economy_speed(u_.alpha, u_.v_max);
        int k = 0;
        while (s_.phase != Phase::Failed) {
            const double d = distance(dest, s_.uas_position);
            if (d <= 1e-9) break;
            const double dt = std::min(tick_, d / v);
            const Vec2 dir = (dest - s_.uas_position) / d;
            tick(dir * v, dt, true);
            if (dt < tick_) s_.uas_position = dest;
            if (++k % ticks_per_period_ == 0) log_state();
        }
        if (s_.phase == Phase::Failed) return;
        s_.phase = Phase::Landed;
        log_state();
    }
};

}  // namespace

MissionLog run_mission(const ScenarioConfig& cfg, std::uint64_t seed) {
    const auto start = std::chrono::steady_clock::now();
    Simulation sim(cfg, seed);
    MissionLog log = sim.run();
    log.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return log;
}

ConvergenceTrace sampler_convergence(const ScenarioConfig& cfg, std::uint64_t seed, double t_end) {
    Simulation sim(cfg, seed);
    return sim.convergence(t_end);
}

nlohmann::json manifest_json(const MissionLog& log, const ScenarioConfig& cfg) {
    ScenarioConfig resolved = cfg;
    resolved.run.seed = log.seed;
    const RangeReport ranges = max_round_trip_range(cfg.planner.params, cfg.planner.energy);
    auto real = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(format_real(v)); };
    nlohmann::json j;
    j["config_hash"] = config_hash(resolved);
    j["seed"] = log.seed;
    j["chosen_path"] = log.chosen_path;
    j["final_phase"] = to_string(log.final_phase);
    j["delivered"] = log.delivered;
    j["verdict"] = log.verdict ? nlohmann::json(to_string(*log.verdict)) : nlohmann::json(nullptr);
    j["decision"] = {{"reason", log.decision_reason},
                     {"time", log.decision_time},
                     {"target_path", log.target_path ? nlohmann::json(*log.target_path) : nlohmann::json(nullptr)},
                     {"risk", log.risk ? log.risk->to_json() : nlohmann::json(nullptr)}};
    RiskReport pruned;
    pruned.per_path = log.pruned_risk;
    j["decision"]["pruned_risk"] = pruned.to_json()["per_path"];
    j["min_energy"] = log.min_energy;
    j["min_plan_margin"] = real(log.min_plan_margin);
    j["min_direct_abort_margin"] = real(log.min_direct_margin);
    j["safety_trips"] = log.safety_trips;
    j["iterations"] = log.iterations;
    j["end_time"] = log.end_time;
    j["ranges"] = {{"no_drop", ranges.no_drop}, {"with_drop", ranges.with_drop}, {"cruise_speed", ranges.cruise_speed}};
    j["config"] = to_json(resolved);
    j["timing"] = {{"wall_seconds", log.wall_seconds}};
    return j;
}

void write_mission_outputs(const MissionLog& log, const ScenarioConfig& cfg, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    log.state.write(dir / "state.csv");
    log.plans.write(dir / "plan.csv");
    log.sampler.write(dir / "sampler.csv");
    log.risk_rows.write(dir / "risk.csv");
    log.measurements.write(dir / "measurements.csv");
    log.fits.write(dir / "fit.csv");
    std::ofstream out(dir / "manifest.json");
    if (!out) throw std::runtime_error("cannot write " + (dir / "manifest.json").string());
    out << manifest_json(log, cfg).dump(2) << '\n';
}

}  // namespace rdv
