#include "rdv/sweep.hpp"

#include <cctype>
#include <cmath>
#include <limits>
#include <sstream>

#include "rdv/errors.hpp"

namespace rdv {

Variation parse_variation(const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
        throw ValidationError("--vary expects key=a:b:n or key=v1,v2,...");
    }
    Variation v;
    v.key = spec.substr(0, eq);
    const std::string rhs = spec.substr(eq + 1);
    auto number = [&](const std::string& s) {
        if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        std::size_t used = 0;
        double x = 0.0;
        try {
            x = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != s.size() || s.empty()) throw ValidationError("--vary: '" + s + "' is not a number");
        return x;
    };
    auto to_json = [](double x) {
        if (std::isinf(x)) return nlohmann::json(x > 0 ? "inf" : "-inf");
        if (x == std::floor(x) && std::abs(x) < 1e15) return nlohmann::json(static_cast<long long>(x));
        return nlohmann::json(x);
    };
    if (rhs.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(rhs);
        std::string p;
        while (std::getline(ss, p, ':')) parts.push_back(p);
        if (parts.size() != 3) throw ValidationError("--vary: range must be a:b:n");
        const double a = number(parts[0]);
        const double b = number(parts[1]);
        const double n = number(parts[2]);
        if (!(n >= 1.0) || n != std::floor(n)) throw ValidationError("--vary: n must be a positive integer");
        const auto count = static_cast<std::size_t>(n);
        for (std::size_t k = 0; k < count; ++k) {
            const double x = count == 1 ? a : a + (b - a) * static_cast<double>(k) / static_cast<double>(count - 1);
            v.values.push_back(to_json(x));
        }
    } else {
        std::stringstream ss(rhs);
        std::string p;
        while (std::getline(ss, p, ',')) {
            // non-numeric list entries pass through as strings (strategy names, rules)
            const bool numeric = !p.empty() && (std::isdigit(static_cast<unsigned char>(p.back())) || p.ends_with("inf"));
            v.values.push_back(numeric ? to_json(number(p)) : nlohmann::json(p));
        }
    }
    if (v.values.empty()) throw ValidationError("--vary: no values");
    return v;
}

namespace {

struct Job {
    const ScenarioConfig* cfg;
    std::uint64_t seed;
    std::string value;
};

SweepRecord run_job(const Job& job, std::size_t index) {
    SweepRecord r;
    r.index = index;
    r.seed = job.seed;
    r.value = job.value;
    try {
        const MissionLog log = run_mission(*job.cfg, job.seed);
        r.delivered = log.delivered;
        r.final_phase = log.final_phase;
        r.verdict = log.verdict ? to_string(*log.verdict) : "none";
        r.reason = log.decision_reason;
        r.chosen_path = log.chosen_path;
        r.target_path = log.target_path ? *log.target_path : 0;
        r.min_energy = log.min_energy;
        r.min_plan_margin = log.min_plan_margin;
        r.max_rho_d = -std::numeric_limits<double>::infinity();
        if (log.risk) {
            for (const auto& p : log.risk->per_path) r.max_rho_d = std::max(r.max_rho_d, p.rho_d);
        } else {
            r.max_rho_d = std::numeric_limits<double>::quiet_NaN();
        }
        r.safety_trips = log.safety_trips;
        r.iterations = log.iterations;
    } catch (const InitiallyInfeasible& e) {
        r.rejected = true;
        r.error = e.what();
    }
    return r;
}

std::vector<ScenarioConfig> variants(const ScenarioConfig& cfg, const SweepOptions& opts,
                                     std::vector<std::string>& labels) {
    std::vector<ScenarioConfig> out;
    if (!opts.vary) {
        out.push_back(cfg);
        labels.emplace_back();
        return out;
    }
    const nlohmann::json base = to_json(cfg);
    for (const auto& value : opts.vary->values) {
        nlohmann::json doc = base;
        set_config_value(doc, opts.vary->key, value);
        out.push_back(parse_config(doc));
        labels.push_back(value.is_string() ? value.get<std::string>() : value.dump());
    }
    return out;
}

std::vector<SweepRecord> sweep(const ScenarioConfig& cfg, const SweepOptions& opts, bool parallel) {
    if (opts.runs < 1) throw ValidationError("--runs must be >= 1");
    std::vector<std::string> labels;
    const std::vector<ScenarioConfig> cfgs = variants(cfg, opts, labels);
    std::vector<Job> jobs;
    for (std::size_t v = 0; v < cfgs.size(); ++v) {
        for (std::size_t k = 0; k < opts.runs; ++k) jobs.push_back({&cfgs[v], opts.base_seed + k, labels[v]});
    }
    std::vector<SweepRecord> out(jobs.size());
    const auto n = static_cast<long>(jobs.size());
    if (parallel) {
#pragma omp parallel for schedule(dynamic)
        for (long i = 0; i < n; ++i) {
            const auto k = static_cast<std::size_t>(i);
            out[k] = run_job(jobs[k], k);
        }
    } else {
        for (long i = 0; i < n; ++i) {
            const auto k = static_cast<std::size_t>(i);
            out[k] = run_job(jobs[k], k);
        }
    }
    return out;
}

}  // namespace

std::vector<SweepRecord> run_sweep(const ScenarioConfig& cfg, const SweepOptions& opts) {
    return sweep(cfg, opts, opts.parallel);
}

std::vector<SweepRecord> run_sweep_reference(const ScenarioConfig& cfg, const SweepOptions& opts) {
    return sweep(cfg, opts, false);
}

CsvTable sweep_table(const std::vector<SweepRecord>& records) {
    CsvTable t({"run", "seed", "value", "rejected", "delivered", "final_phase", "verdict", "reason", "chosen_path",
                "target_path", "min_energy", "min_plan_margin", "max_rho_d", "safety_trips", "iterations"});
    for (const auto& r : records) {
        t.row() << static_cast<unsigned long>(r.index) << static_cast<unsigned long>(r.seed) << r.value
                << (r.rejected ? 1 : 0) << (r.delivered ? 1 : 0) << to_string(r.final_phase) << r.verdict << r.reason
                << r.chosen_path << r.target_path << r.min_energy << r.min_plan_margin << r.max_rho_d
                << r.safety_trips << r.iterations;
    }
    return t;
}

CsvTable convergence_table(const ScenarioConfig& cfg, std::size_t runs, std::uint64_t base_seed, double t_end) {
    std::vector<ConvergenceTrace> traces(runs);
    const auto n = static_cast<long>(runs);
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) {
        traces[static_cast<std::size_t>(i)] = sampler_convergence(cfg, base_seed + static_cast<std::uint64_t>(i), t_end);
    }
    CsvTable t({"run", "seed", "iteration", "t", "max_variance", "mean_variance"});
    for (std::size_t r = 0; r < runs; ++r) {
        const auto& tr = traces[r];
        for (std::size_t k = 0; k < tr.t.size(); ++k) {
            t.row() << static_cast<unsigned long>(r) << static_cast<unsigned long>(base_seed + r)
                    << static_cast<unsigned long>(k) << tr.t[k] << tr.max_variance[k] << tr.mean_variance[k];
        }
    }
    return t;
}

}  // namespace rdv
