// rdv: run rendezvous missions, sweeps and benchmarks from JSON scenario files.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>

#include <CLI11.hpp>

#include "rdv/config.hpp"
#include "rdv/csv.hpp"
#include "rdv/errors.hpp"
#include "rdv/gpr.hpp"
#include "rdv/mission.hpp"
#include "rdv/numerics.hpp"
#include "rdv/sweep.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSafety = 3;

fs::path output_dir(const std::string& flag, const std::string& configured) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("RDV_OUTPUT_DIR"); env && *env) return env;
    return configured;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double stddev(const std::vector<double>& v) {
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size()));
}

int simulate(const std::string& config, std::optional<std::uint64_t> seed, const std::string& out) {
    const rdv::ScenarioConfig cfg = rdv::load_config(config);
    const std::uint64_t s = seed.value_or(cfg.run.seed);
    const rdv::MissionLog log = rdv::run_mission(cfg, s);
    const fs::path dir = output_dir(out, cfg.run.output_dir);
    rdv::write_mission_outputs(log, cfg, dir);
    std::cout << "phase=" << rdv::to_string(log.final_phase)
              << " verdict=" << (log.verdict ? rdv::to_string(*log.verdict) : "none")
              << " delivered=" << (log.delivered ? "yes" : "no") << " min_energy=" << rdv::format_real(log.min_energy)
              << " out=" << dir.string() << '\n';
    if (log.safety_trips > 0 || log.final_phase != rdv::Phase::Landed) return kExitSafety;
    return kExitOk;
}

int sweep(const std::string& config, std::size_t runs, std::uint64_t base_seed, const std::string& vary,
          const std::string& out, double convergence_end, bool serial) {
    const rdv::ScenarioConfig cfg = rdv::load_config(config);
    rdv::SweepOptions opts;
    opts.runs = runs;
    opts.base_seed = base_seed;
    opts.parallel = !serial;
    if (!vary.empty()) opts.vary = rdv::parse_variation(vary);
    const fs::path dir = output_dir(out, cfg.run.output_dir);
    fs::create_directories(dir);
    const auto records = rdv::run_sweep(cfg, opts);
    rdv::sweep_table(records).write(dir / "sweep.csv");
    if (convergence_end > 0.0) rdv::convergence_table(cfg, runs, base_seed, convergence_end).write(dir / "convergence.csv");
    std::size_t delivered = 0;
    std::size_t trips = 0;
    for (const auto& r : records) {
        delivered += r.delivered ? 1 : 0;
        trips += r.safety_trips > 0 || (!r.rejected && r.final_phase != rdv::Phase::Landed) ? 1 : 0;
    }
    std::cout << "runs=" << records.size() << " delivered=" << delivered << " safety_failures=" << trips
              << " out=" << (dir / "sweep.csv").string() << '\n';
    return trips ? kExitSafety : kExitOk;
}

int bench_gp(std::size_t reps, const std::string& out) {
    const std::vector<std::size_t> sizes = {50, 100, 200, 300};
    const auto rows = rdv::benchmark_fit(sizes, reps);
    rdv::CsvTable t({"m", "full_median_us", "full_stddev_us", "dtc_median_us", "dtc_stddev_us", "ratio"});
    for (const auto& r : rows) {
        t.row() << static_cast<unsigned long>(r.m) << r.full_median_us << r.full_stddev_us << r.dtc_median_us
                << r.dtc_stddev_us << r.dtc_median_us / r.full_median_us;
    }
    const fs::path dir = output_dir(out, "out");
    fs::create_directories(dir);
    t.write(dir / "bench_gp.csv");
    std::cout << t.str();
    return kExitOk;
}

int bench_quadrature(std::size_t reps, const std::string& out) {
    // default sinusoid historical profile, integrated over [0, T]
    auto f = [](double t) { return 8.0 + std::sin(t / 10.0); };
    rdv::CsvTable t({"t_end", "value", "exact", "abs_error", "evaluations", "median_us", "stddev_us"});
    rdv::QuadratureOptions opts;
    opts.abs_tol = 1e-12;
    opts.rel_tol = 1e-12;
    for (double t_end : {10.0, 50.0, 100.0, 200.0}) {
        const double exact = 8.0 * t_end + 10.0 * (1.0 - std::cos(t_end / 10.0));
        rdv::QuadratureResult res;
        std::vector<double> us;
        for (std::size_t k = 0; k < reps; ++k) {
            const auto a = std::chrono::steady_clock::now();
            res = rdv::integrate(f, 0.0, t_end, opts);
            us.push_back(std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - a).count());
        }
        t.row() << t_end << res.value << exact << std::abs(res.value - exact)
                << static_cast<unsigned long>(res.evaluations) << median(us) << stddev(us);
    }
    const fs::path dir = output_dir(out, "out");
    fs::create_directories(dir);
    t.write(dir / "bench_quadrature.csv");
    std::cout << t.str();
    return kExitOk;
}

int validate(const std::string& config) {
    const rdv::ScenarioConfig cfg = rdv::load_config(config);
    std::cout << "ok " << rdv::config_hash(cfg) << '\n';
    return kExitOk;
}

int tune(const std::string& config, std::uint64_t seed, double duration) {
    const rdv::ScenarioConfig cfg = rdv::load_config(config);
    rdv::DriverTruth truth;
    truth.deviation = cfg.traffic.deviation;
    truth.sigma_speed = cfg.traffic.sigma_speed;
    truth.sigma_position = cfg.traffic.sigma_position;
    std::mt19937_64 rng(seed);
    std::vector<double> x;
    std::vector<double> y;
    const double dt = 1.0 / cfg.traffic.measurement_rate;
    while (truth.t + 1e-9 < duration) {
        auto [next, m] = rdv::step_driver(truth, cfg.traffic.profile, dt, rng);
        truth = next;
        x.push_back(m.hist_speed);
        y.push_back(m.speed_meas - m.hist_speed);
    }
    const rdv::KernelConfig tuned = rdv::tune_hyperparameters(x, y, cfg.gp.kernel);
    nlohmann::json j = tuned.to_json();
    j["log_marginal_likelihood"] = rdv::log_marginal_likelihood(x, y, tuned);
    j["samples"] = x.size();
    std::cout << j.dump(2) << '\n';
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Risk-averse multi-path rendezvous planner and mission simulator"};
    app.require_subcommand(1);

    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;

    auto* sim = app.add_subcommand("simulate", "Run one mission");
    sim->add_option("config", config, "Scenario JSON")->required();
    sim->add_option("--seed", seed, "Overrides run.seed");
    sim->add_option("--out", out, "Output directory");

    std::size_t runs = 1;
    std::uint64_t base_seed = 1;
    std::string vary;
    double convergence_end = 0.0;
    bool serial = false;
    auto* sw = app.add_subcommand("sweep", "Run seeded missions, optionally varying one parameter");
    sw->add_option("config", config, "Scenario JSON")->required();
    sw->add_option("--runs", runs, "Missions per value")->check(CLI::PositiveNumber);
    sw->add_option("--seed", base_seed, "First seed");
    sw->add_option("--vary", vary, "key=a:b:n or key=v1,v2,...");
    sw->add_option("--out", out, "Output directory");
    sw->add_option("--convergence", convergence_end, "Also write sampler convergence traces up to this time [s]");
    sw->add_flag("--serial", serial, "Run missions one after another");

    bool gp = false;
    bool quad = false;
    std::size_t reps = 50;
    auto* bench = app.add_subcommand("bench", "Timing tables");
    auto* gp_flag = bench->add_flag("--gp", gp, "Full vs DTC fit times");
    bench->add_flag("--quadrature", quad, "Adaptive quadrature on the historical profile")->excludes(gp_flag);
    bench->add_option("--reps", reps, "Repetitions")->check(CLI::PositiveNumber);
    bench->add_option("--out", out, "Output directory");

    auto* val = app.add_subcommand("validate", "Check a scenario file");
    val->add_option("config", config, "Scenario JSON")->required();

    double duration = 50.0;
    std::uint64_t tune_seed = 1;
    auto* tn = app.add_subcommand("tune", "Marginal-likelihood hyperparameters on a simulated stream");
    tn->add_option("config", config, "Scenario JSON")->required();
    tn->add_option("--seed", tune_seed, "Stream seed");
    tn->add_option("--duration", duration, "Stream length [s]")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*sim) return simulate(config, seed, out);
        if (*sw) return sweep(config, runs, base_seed, vary, out, convergence_end, serial);
        if (*bench) {
            if (!gp && !quad) {
                std::cerr << "bench: pass --gp or --quadrature\n";
                return kExitConfig;
            }
            return gp ? bench_gp(reps, out) : bench_quadrature(reps, out);
        }
        if (*val) return validate(config);
        if (*tn) return tune(config, tune_seed, duration);
    } catch (const rdv::ValidationError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return kExitOk;
}
