#include "rdv/risk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "rdv/errors.hpp"
#include "rdv/numerics.hpp"
#include "rdv/uas.hpp"

namespace rdv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

PathRisk infeasible_risk(PathId id) {
    PathRisk r;
    r.path = id;
    r.feasible = false;
    r.extra_fuel_mean = -kInf;
    r.cvar = -kInf;
    r.rho_d = kInf;
    return r;
}

}  // namespace

const char* to_string(Verdict v) { return v == Verdict::Proceed ? "proceed" : "abort"; }

const PathRisk* RiskReport::find(PathId id) const {
    for (const auto& p : per_path) {
        if (p.path == id) return &p;
    }
    return nullptr;
}

double rendezvous_chain_energy_at(const MissionPlan& plan, Vec2 rendezvous, double alpha, double v_max) {
    const double t2 = plan.to_rendezvous.duration;
    const double e2 = transit_energy(plan.to_rendezvous.mass, distance(rendezvous, plan.pnr()), t2, alpha);
    const double e3 = min_transit_energy(plan.to_landing.mass, distance(plan.to_landing.to, rendezvous), alpha, v_max);
    return plan.to_pnr.energy + e2 + e3;
}

RiskReport assess_decision_risk(const std::vector<PathCandidate>& candidates, const UasParams& params,
                                const RiskOptions& opts) {
    if (!(opts.gamma > 0.0 && opts.gamma <= 1.0)) throw DomainError("risk: gamma must lie in (0, 1]");
    if (!(opts.gamma_scale > 0.0)) throw DomainError("risk: gamma_scale must be > 0");
    if (opts.mc_draws == 0) throw DomainError("risk: mc_draws must be >= 1");

    RiskReport rep;
    rep.gamma = opts.gamma;
    rep.kappa = opts.kappa;

    std::vector<const PathCandidate*> sorted;
    for (const auto& c : candidates) sorted.push_back(&c);
    std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->path < b->path; });

    for (const PathCandidate* c : sorted) {
        if (!c->plan.feasible || c->geometry == nullptr) {
            rep.per_path.push_back(infeasible_risk(c->path));
            continue;
        }
        const MissionPlan& plan = c->plan;
        const Path& path = *c->geometry;
        auto extra = [&](double theta) {
            return plan.energy_budget - rendezvous_chain_energy_at(plan, path.evaluate_clamped(theta), params.alpha, params.v_max);
        };
        PathRisk r;
        r.path = c->path;
        const double h = std::max(0.0, c->half_width);
        const double e0 = extra(c->theta_hat);
        if (h == 0.0) {
            r.extra_fuel_mean = e0;
            r.extra_fuel_sigma = 0.0;
            r.cvar = e0;
        } else {
            const double ep = extra(c->theta_hat + h);
            const double em = extra(c->theta_hat - h);
            const bool monotone = (ep - e0) * (e0 - em) >= 0.0;
            if (monotone) {
                r.extra_fuel_mean = e0;
                r.extra_fuel_sigma = std::abs(ep - em) / (2.0 * opts.gamma_scale);
                r.cvar = gaussian_cvar_lower(e0, r.extra_fuel_sigma, opts.gamma);
            } else {
                r.monte_carlo = true;
                std::mt19937_64 rng(opts.seed);
                std::normal_distribution<double> theta_dist(c->theta_hat, h / opts.gamma_scale);
                std::vector<double> draws(opts.mc_draws);
                for (double& d : draws) d = extra(theta_dist(rng));
                double mean = 0.0;
                for (double d : draws) mean += d;
                mean /= static_cast<double>(draws.size());
                double var = 0.0;
                for (double d : draws) var += (d - mean) * (d - mean);
                r.extra_fuel_mean = mean;
                r.extra_fuel_sigma = std::sqrt(var / static_cast<double>(draws.size()));
                r.cvar = empirical_cvar_lower(draws, opts.gamma);
            }
        }
        r.rho_d = -r.cvar;
        rep.per_path.push_back(r);
    }

    double worst = -kInf;
    for (const auto& p : rep.per_path) {
        if (!rep.worst_path || p.rho_d > worst) {
            worst = p.rho_d;
            rep.worst_path = p.path;
        }
    }
    rep.verdict = (rep.worst_path && worst <= opts.kappa) ? Verdict::Proceed : Verdict::Abort;
    return rep;
}

nlohmann::json RiskReport::to_json() const {
    nlohmann::json paths = nlohmann::json::array();
    for (const auto& p : per_path) {
        paths.push_back({{"path", p.path},
                         {"feasible", p.feasible},
                         {"monte_carlo", p.monte_carlo},
                         {"extra_fuel_mean", p.extra_fuel_mean},
                         {"extra_fuel_sigma", p.extra_fuel_sigma},
                         {"cvar", p.cvar},
                         {"rho_d", p.rho_d}});
    }
    nlohmann::json j = {{"gamma", gamma}, {"kappa", kappa}, {"verdict", to_string(verdict)}, {"per_path", paths}};
    j["worst_path"] = worst_path ? nlohmann::json(*worst_path) : nlohmann::json(nullptr);
    return j;
}

}  // namespace rdv
