// Serial reference vs OpenMP kernels: sample evaluation, planner multi-start, mission sweep.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <omp.h>

#include "rdv/config.hpp"
#include "rdv/csv.hpp"
#include "rdv/planner.hpp"
#include "rdv/sampler.hpp"
#include "rdv/sweep.hpp"

namespace {

template <typename F>
double time_ms(F&& f, int reps) {
    double best = 1e300;
    for (int k = 0; k < reps; ++k) {
        const auto a = std::chrono::steady_clock::now();
        f();
        best = std::min(best, std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - a).count());
    }
    return best;
}

bool same_batch(const rdv::SampleBatch& a, const rdv::SampleBatch& b) {
    for (std::size_t k = 0; k < a.times.size(); ++k) {
        if (a.theta[k] != b.theta[k] || a.half_widths[k] != b.half_widths[k]) return false;
        if (a.energies[k] != b.energies[k] && !(std::isinf(a.energies[k]) && std::isinf(b.energies[k]))) return false;
    }
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    const std::filesystem::path scenario =
        argc > 1 ? std::filesystem::path(argv[1]) : std::filesystem::path(RDV_SOURCE_DIR) / "scenarios/scenario_fig7.json";
    const rdv::ScenarioConfig cfg = rdv::load_config(scenario);
    const rdv::PathMap& map = cfg.paths();

    std::mt19937_64 rng(7);
    std::vector<double> x;
    std::vector<double> y;
    std::normal_distribution<double> noise(0.0, 0.25);
    for (int k = 0; k < 500; ++k) {
        const double h = 8.0 + std::sin(0.01 * k);
        x.push_back(h);
        y.push_back((h > 8.0 ? 1.0 : h < 8.0 ? -1.0 : 0.0) + noise(rng));
    }
    const rdv::GPModel gp = rdv::fit(x, y, cfg.gp.kernel, rdv::GPKind::DTC, 30);

    rdv::ProposalDistribution prop = rdv::initial_proposal(map, {0, 0}, 10.0, 10.0, 60.0, 0.5, 400, 2);
    const rdv::ReachableSet all = rdv::ReachableSet::all(map);
    rdv::BatchInputs in;
    in.map = &map;
    in.gp = &gp;
    in.profile = &cfg.traffic.profile;
    in.driver_theta = 80.0;
    in.cost.uas_position = {0, 0};
    in.cost.t0 = 10.0;
    in.cost.landing_site = map.landing_site();
    in.cost.params = cfg.planner.params;
    const rdv::SampleBatch base = rdv::sample_batch(prop, rng, all, 12.0);
    rdv::SampleBatch serial = base;
    rdv::SampleBatch parallel = base;

    rdv::CsvTable t({"kernel", "size", "threads", "serial_ms", "parallel_ms", "speedup", "identical"});
    const int threads = omp_get_max_threads();
    {
        const double s = time_ms([&] { rdv::evaluate_batch_reference(serial, in); }, 3);
        const double p = time_ms([&] { rdv::evaluate_batch(parallel, in); }, 3);
        t.row() << "evaluate_batch" << static_cast<unsigned long>(base.times.size()) << threads << s << p << s / p
                << (same_batch(serial, parallel) ? 1 : 0);
    }
    {
        rdv::PlanRequest req;
        req.uas_position = {0, 0};
        req.t0 = 0.0;
        req.energy = cfg.planner.energy;
        req.p_star = {200, 500};
        req.t_rendezvous = 90.0;
        req.landing_site = map.landing_site();
        req.abort_endpoint = map.landing_site();
        req.params = cfg.planner.params;
        rdv::SolverOptions so;
        rdv::MissionPlan a;
        rdv::MissionPlan b;
        so.parallel = false;
        const double s = time_ms([&] { a = rdv::solve_ocp(req, so); }, 5);
        so.parallel = true;
        const double p = time_ms([&] { b = rdv::solve_ocp(req, so); }, 5);
        t.row() << "solve_ocp" << 16 << threads << s << p << s / p
                << (a.to_pnr.duration == b.to_pnr.duration && a.pnr() == b.pnr() ? 1 : 0);
    }
    {
        rdv::SweepOptions opts;
        opts.runs = 8;
        std::vector<rdv::SweepRecord> a;
        std::vector<rdv::SweepRecord> b;
        const double s = time_ms([&] { a = rdv::run_sweep_reference(cfg, opts); }, 1);
        const double p = time_ms([&] { b = rdv::run_sweep(cfg, opts); }, 1);
        t.row() << "run_sweep" << 8 << threads << s << p << s / p << (a == b ? 1 : 0);
    }
    std::cout << t.str();
    return 0;
}
