#include "rdv/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "rdv/errors.hpp"

namespace rdv {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!obj.is_object()) throw ValidationError(where + ": expected an object");
    for (const auto& [key, _] : obj.items()) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
            throw ValidationError("unknown key '" + where + "." + key + "'");
        }
    }
}

double real_or(const json& obj, const char* key, double def, const std::string& where) {
    if (!obj.contains(key)) return def;
    return parse_real(obj.at(key), where + "." + key);
}

std::size_t count_or(const json& obj, const char* key, std::size_t def, const std::string& where) {
    if (!obj.contains(key)) return def;
    const json& v = obj.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) {
        throw ValidationError("'" + where + "." + key + "' must be a non-negative integer");
    }
    return v.get<std::size_t>();
}

void require(bool ok, const std::string& key, const std::string& what) {
    if (!ok) throw ValidationError("'" + key + "' " + what);
}

json real_json(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

Vec2 point(const json& v, const std::string& key) {
    if (!v.is_array() || v.size() != 2) throw ValidationError("'" + key + "' must be [x, y]");
    return {parse_real(v[0], key), parse_real(v[1], key)};
}

KernelConfig::Smoothness smoothness(const json& v) {
    const double nu = parse_real(v, "gp.nu");
    if (nu == 0.5) return KernelConfig::Smoothness::Half;
    if (nu == 1.5) return KernelConfig::Smoothness::ThreeHalves;
    if (nu == 2.5) return KernelConfig::Smoothness::FiveHalves;
    throw ValidationError("'gp.nu' must be 0.5, 1.5 or 2.5");
}

void parse_traffic(const json& j, TrafficConfig& t, std::size_t n_paths) {
    reject_unknown(j, {"profile", "deviation", "chosen_path", "sigma_speed", "sigma_position", "measurement_rate"},
                   "traffic");
    try {
        if (j.contains("profile")) t.profile = HistoricalProfile::from_json(j.at("profile"));
        if (j.contains("deviation")) t.deviation = DeviationRule::from_json(j.at("deviation"));
    } catch (const json::exception& e) {
        throw ValidationError(std::string("traffic: ") + e.what());
    }
    t.chosen_path = static_cast<int>(count_or(j, "chosen_path", static_cast<std::size_t>(t.chosen_path), "traffic"));
    t.sigma_speed = real_or(j, "sigma_speed", t.sigma_speed, "traffic");
    t.sigma_position = real_or(j, "sigma_position", t.sigma_position, "traffic");
    t.measurement_rate = real_or(j, "measurement_rate", t.measurement_rate, "traffic");
    require(t.chosen_path >= 0 && static_cast<std::size_t>(t.chosen_path) <= n_paths, "traffic.chosen_path",
            "must be 0 (random) or a path id");
    require(t.sigma_speed >= 0.0, "traffic.sigma_speed", "must be >= 0");
    require(t.sigma_position >= 0.0, "traffic.sigma_position", "must be >= 0");
    require(t.measurement_rate > 0.0 && std::isfinite(t.measurement_rate), "traffic.measurement_rate", "must be > 0");
}

void parse_gp(const json& j, GpConfig& g) {
    reject_unknown(j, {"kind", "nu", "length_scale", "signal_variance", "noise_variance", "n_inducing", "window"},
                   "gp");
    if (j.contains("kind")) {
        const auto& v = j.at("kind");
        if (v == "full") {
            g.kind = GPKind::Full;
        } else if (v == "dtc") {
            g.kind = GPKind::DTC;
        } else {
            throw ValidationError("'gp.kind' must be \"full\" or \"dtc\"");
        }
    }
    if (j.contains("nu")) g.kernel.nu = smoothness(j.at("nu"));
    g.kernel.length_scale = real_or(j, "length_scale", g.kernel.length_scale, "gp");
    g.kernel.signal_variance = real_or(j, "signal_variance", g.kernel.signal_variance, "gp");
    g.kernel.noise_variance = real_or(j, "noise_variance", g.kernel.noise_variance, "gp");
    g.n_inducing = count_or(j, "n_inducing", g.n_inducing, "gp");
    g.window = count_or(j, "window", g.window, "gp");
    g.kernel.validate();
    require(g.n_inducing >= 1, "gp.n_inducing", "must be >= 1");
    require(g.window == 0 || g.window >= 2, "gp.window", "must be 0 (unbounded) or >= 2");
}

void parse_sampler(const json& j, SamplerConfig& s, std::size_t n_paths) {
    reject_unknown(j, {"n_s", "n_e", "lambda", "gamma_scale", "strategy", "weights", "horizon"}, "sampler");
    s.n_s = count_or(j, "n_s", s.n_s, "sampler");
    s.n_e = count_or(j, "n_e", s.n_e, "sampler");
    s.lambda = real_or(j, "lambda", s.lambda, "sampler");
    s.gamma_scale = real_or(j, "gamma_scale", s.gamma_scale, "sampler");
    s.horizon = real_or(j, "horizon", s.horizon, "sampler");
    if (j.contains("strategy")) {
        const auto& v = j.at("strategy");
        if (v == "worst_first") {
            s.strategy = Strategy::WorstFirst;
        } else if (v == "best_first") {
            s.strategy = Strategy::BestFirst;
        } else {
            throw ValidationError("'sampler.strategy' must be \"worst_first\" or \"best_first\"");
        }
    }
    if (j.contains("weights") && !j.at("weights").is_null()) {
        const auto& w = j.at("weights");
        if (!w.is_array()) throw ValidationError("'sampler.weights' must be an array");
        s.weights.clear();
        for (const auto& x : w) s.weights.push_back(parse_real(x, "sampler.weights"));
    }
    require(s.n_e >= 1 && s.n_s > s.n_e, "sampler.n_s", "must exceed sampler.n_e >= 1");
    require(s.lambda > 0.0 && std::isfinite(s.lambda), "sampler.lambda", "must be > 0");
    require(s.gamma_scale > 0.0 && std::isfinite(s.gamma_scale), "sampler.gamma_scale", "must be > 0");
    require(s.horizon > 0.0 && std::isfinite(s.horizon), "sampler.horizon", "must be > 0");
    require(s.weights.empty() || s.weights.size() == n_paths, "sampler.weights", "must have one entry per path");
    for (double w : s.weights) require(w > 0.0 && std::isfinite(w), "sampler.weights", "entries must be > 0");
}

void parse_planner(const json& j, PlannerConfig& p) {
    reject_unknown(j,
                   {"v_max", "t_max", "t_c", "mass_loaded", "mass_empty", "alpha", "energy", "uas_start",
                    "abort_endpoint", "starts", "max_evaluations"},
                   "planner");
    UasParams& u = p.params;
    u.v_max = real_or(j, "v_max", u.v_max, "planner");
    u.t_max = real_or(j, "t_max", u.t_max, "planner");
    u.t_c = real_or(j, "t_c", u.t_c, "planner");
    u.mass_loaded = real_or(j, "mass_loaded", u.mass_loaded, "planner");
    u.mass_empty = real_or(j, "mass_empty", u.mass_empty, "planner");
    u.alpha = real_or(j, "alpha", u.alpha, "planner");
    p.energy = real_or(j, "energy", p.energy, "planner");
    if (j.contains("uas_start") && !j.at("uas_start").is_null()) p.uas_start = point(j.at("uas_start"), "planner.uas_start");
    if (j.contains("abort_endpoint")) {
        const auto& v = j.at("abort_endpoint");
        if (v == "landing_site") {
            p.abort_to_abort_site = false;
        } else if (v == "abort_site") {
            p.abort_to_abort_site = true;
        } else {
            throw ValidationError("'planner.abort_endpoint' must be \"landing_site\" or \"abort_site\"");
        }
    }
    p.starts = static_cast<int>(count_or(j, "starts", static_cast<std::size_t>(p.starts), "planner"));
    p.max_evaluations =
        static_cast<int>(count_or(j, "max_evaluations", static_cast<std::size_t>(p.max_evaluations), "planner"));
    for (auto [key, v] : {std::pair{"planner.v_max", u.v_max}, {"planner.t_max", u.t_max}, {"planner.t_c", u.t_c},
                          {"planner.mass_loaded", u.mass_loaded}, {"planner.mass_empty", u.mass_empty},
                          {"planner.alpha", u.alpha}, {"planner.energy", p.energy}}) {
        require(v > 0.0 && std::isfinite(v), key, "must be a positive number");
    }
    require(u.mass_empty <= u.mass_loaded, "planner.mass_empty", "must not exceed planner.mass_loaded");
    require(p.starts >= 1 && p.starts <= 16, "planner.starts", "must be in [1, 16]");
    require(p.max_evaluations >= 4, "planner.max_evaluations", "must be >= 4");
}

void parse_risk(const json& j, RiskConfig& r) {
    reject_unknown(j, {"gamma", "kappa", "mc_draws"}, "risk");
    r.gamma = real_or(j, "gamma", r.gamma, "risk");
    r.kappa = real_or(j, "kappa", r.kappa, "risk");
    r.mc_draws = count_or(j, "mc_draws", r.mc_draws, "risk");
    require(r.gamma > 0.0 && r.gamma <= 1.0, "risk.gamma", "must lie in (0, 1]");
    require(!std::isnan(r.kappa) && r.kappa != std::numeric_limits<double>::infinity(), "risk.kappa",
            "must be a number or \"-inf\"");
    require(r.mc_draws >= 1, "risk.mc_draws", "must be >= 1");
}

void parse_run(const json& j, RunConfig& r) {
    reject_unknown(j, {"control_period", "epsilon", "seed", "output_dir", "warmup", "rendezvous_radius", "max_duration"},
                   "run");
    r.control_period = real_or(j, "control_period", r.control_period, "run");
    r.epsilon = real_or(j, "epsilon", r.epsilon, "run");
    if (j.contains("seed")) {
        const auto& v = j.at("seed");
        if (!v.is_number_unsigned()) throw ValidationError("'run.seed' must be a non-negative integer");
        r.seed = v.get<std::uint64_t>();
    }
    if (j.contains("output_dir")) {
        if (!j.at("output_dir").is_string()) throw ValidationError("'run.output_dir' must be a string");
        r.output_dir = j.at("output_dir").get<std::string>();
    }
    r.warmup = real_or(j, "warmup", r.warmup, "run");
    r.rendezvous_radius = real_or(j, "rendezvous_radius", r.rendezvous_radius, "run");
    r.max_duration = real_or(j, "max_duration", r.max_duration, "run");
    require(r.control_period > 0.0 && std::isfinite(r.control_period), "run.control_period", "must be > 0");
    require(r.epsilon > 0.0 && std::isfinite(r.epsilon), "run.epsilon", "must be > 0");
    require(r.warmup > 0.0 && std::isfinite(r.warmup), "run.warmup", "must be > 0");
    require(r.rendezvous_radius > 0.0, "run.rendezvous_radius", "must be > 0");
    require(r.epsilon >= r.control_period, "run.epsilon", "must be >= run.control_period");
    require(r.max_duration > r.warmup && std::isfinite(r.max_duration), "run.max_duration", "must exceed run.warmup");
}

std::string strategy_name(Strategy s) { return s == Strategy::WorstFirst ? "worst_first" : "best_first"; }

}  // namespace

double parse_real(const json& v, const std::string& key) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
    }
    throw ValidationError("'" + key + "' must be a number");
}

std::vector<double> ScenarioConfig::path_weights() const {
    if (!sampler.weights.empty()) return sampler.weights;
    return std::vector<double>(map->size(), 1.0);
}

Vec2 ScenarioConfig::uas_start() const { return planner.uas_start.value_or(map->landing_site()); }

Vec2 ScenarioConfig::abort_endpoint() const {
    return planner.abort_to_abort_site ? map->abort_site() : map->landing_site();
}

ScenarioConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
    reject_unknown(doc, {"map", "traffic", "gp", "sampler", "planner", "risk", "run"}, "config");
    if (!doc.contains("map")) throw ValidationError("missing key 'map'");
    ScenarioConfig cfg;
    const json& m = doc.at("map");
    if (m.is_string()) {
        const std::filesystem::path file = base_dir / m.get<std::string>();
        std::ifstream in(file);
        if (!in) throw ValidationError("'map': cannot open " + file.string());
        try {
            cfg.map_doc = json::parse(in);
        } catch (const json::parse_error& e) {
            throw ValidationError("'map': " + file.string() + ": " + e.what());
        }
    } else {
        cfg.map_doc = m;
    }
    cfg.map = map_from_json(cfg.map_doc);
    cfg.map_doc = cfg.map->to_json();
    const std::size_t n = cfg.map->size();
    const json empty = json::object();
    parse_traffic(doc.value("traffic", empty), cfg.traffic, n);
    parse_gp(doc.value("gp", empty), cfg.gp);
    parse_sampler(doc.value("sampler", empty), cfg.sampler, n);
    parse_planner(doc.value("planner", empty), cfg.planner);
    parse_risk(doc.value("risk", empty), cfg.risk);
    parse_run(doc.value("run", empty), cfg.run);

    const double steps = cfg.run.control_period * cfg.traffic.measurement_rate;
    require(std::abs(steps - std::round(steps)) < 1e-9 && std::round(steps) >= 1.0, "run.control_period",
            "must be a whole number of measurement periods");
    const double warm = cfg.run.warmup * cfg.traffic.measurement_rate;
    require(std::abs(warm - std::round(warm)) < 1e-9 && std::round(warm) >= 2.0, "run.warmup",
            "must cover at least two whole measurement periods");
    require(cfg.traffic.profile.min_speed(cfg.run.max_duration) > 0.0, "traffic.profile",
            "speed must stay positive over run.max_duration");
    return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ValidationError("cannot open config " + file.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("config " + file.string() + ": " + e.what());
    }
    return parse_config(doc, file.parent_path());
}

json to_json(const ScenarioConfig& cfg) {
    const UasParams& u = cfg.planner.params;
    json j;
    j["map"] = cfg.map_doc;
    j["traffic"] = {{"profile", cfg.traffic.profile.to_json()},
                    {"deviation", cfg.traffic.deviation.to_json()},
                    {"chosen_path", cfg.traffic.chosen_path},
                    {"sigma_speed", cfg.traffic.sigma_speed},
                    {"sigma_position", cfg.traffic.sigma_position},
                    {"measurement_rate", cfg.traffic.measurement_rate}};
    json kernel = cfg.gp.kernel.to_json();
    j["gp"] = {{"kind", cfg.gp.kind == GPKind::Full ? "full" : "dtc"},
               {"nu", kernel["nu"]},
               {"length_scale", cfg.gp.kernel.length_scale},
               {"signal_variance", cfg.gp.kernel.signal_variance},
               {"noise_variance", cfg.gp.kernel.noise_variance},
               {"n_inducing", cfg.gp.n_inducing},
               {"window", cfg.gp.window}};
    j["sampler"] = {{"n_s", cfg.sampler.n_s},
                    {"n_e", cfg.sampler.n_e},
                    {"lambda", cfg.sampler.lambda},
                    {"gamma_scale", cfg.sampler.gamma_scale},
                    {"strategy", strategy_name(cfg.sampler.strategy)},
                    {"weights", cfg.path_weights()},
                    {"horizon", cfg.sampler.horizon}};
    const Vec2 start = cfg.uas_start();
    j["planner"] = {{"v_max", u.v_max},
                    {"t_max", u.t_max},
                    {"t_c", u.t_c},
                    {"mass_loaded", u.mass_loaded},
                    {"mass_empty", u.mass_empty},
                    {"alpha", u.alpha},
                    {"energy", cfg.planner.energy},
                    {"uas_start", {start.x, start.y}},
                    {"abort_endpoint", cfg.planner.abort_to_abort_site ? "abort_site" : "landing_site"},
                    {"starts", cfg.planner.starts},
                    {"max_evaluations", cfg.planner.max_evaluations}};
    j["risk"] = {{"gamma", cfg.risk.gamma}, {"kappa", real_json(cfg.risk.kappa)}, {"mc_draws", cfg.risk.mc_draws}};
    j["run"] = {{"control_period", cfg.run.control_period},
                {"epsilon", cfg.run.epsilon},
                {"seed", cfg.run.seed},
                {"output_dir", cfg.run.output_dir},
                {"warmup", cfg.run.warmup},
                {"rendezvous_radius", cfg.run.rendezvous_radius},
                {"max_duration", cfg.run.max_duration}};
    return j;
}

std::string config_hash(const ScenarioConfig& cfg) {
    const std::string text = to_json(cfg).dump();
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void set_config_value(json& doc, const std::string& dotted_key, const json& value) {
    json* node = &doc;
    std::stringstream ss(dotted_key);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.')) parts.push_back(part);
    if (parts.empty()) throw ValidationError("empty config key");
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (!node->is_object() || !node->contains(parts[i])) {
            throw ValidationError("unknown config key '" + dotted_key + "'");
        }
        node = &(*node)[parts[i]];
    }
    *node = value;
}

}  // namespace rdv
