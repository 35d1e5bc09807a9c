#include "rdv/traffic.hpp"

#include <algorithm>
#include <cmath>

#include "rdv/errors.hpp"

namespace rdv {

HistoricalProfile HistoricalProfile::constant(double speed) {
    if (!(speed > 0.0)) throw ValidationError("constant profile speed must be > 0");
    HistoricalProfile p;
    p.form_ = Form::Constant;
    p.a_ = speed;
    return p;
}

HistoricalProfile HistoricalProfile::sinusoid(double offset, double amplitude, double period_scale) {
    if (!(period_scale > 0.0)) throw ValidationError("sinusoid profile: c must be > 0");
    if (!(offset - std::abs(amplitude) > 0.0)) {
        throw ValidationError("sinusoid profile: a - |b| must be > 0 so the driver always progresses");
    }
    HistoricalProfile p;
    p.form_ = Form::Sinusoid;
    p.a_ = offset;
    p.b_ = amplitude;
    p.c_ = period_scale;
    return p;
}

HistoricalProfile HistoricalProfile::table(std::vector<double> times, std::vector<double> speeds) {
    if (times.size() < 2 || times.size() != speeds.size()) {
        throw ValidationError("table profile: need >= 2 (t, speed) pairs of equal length");
    }
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (k > 0 && !(times[k] > times[k - 1])) {
            throw ValidationError("table profile: times must be strictly increasing (entry " +
                                  std::to_string(k) + ")");
        }
        if (!(speeds[k] > 0.0)) {
            throw ValidationError("table profile: speeds must be > 0 (entry " + std::to_string(k) + ")");
        }
    }
    if (times.front() > 0.0) throw ValidationError("table profile: first time must be <= 0");
    HistoricalProfile p;
    p.form_ = Form::Table;
    p.times_ = std::move(times);
    p.speeds_ = std::move(speeds);
    return p;
}

double HistoricalProfile::speed(double t) const {
    if (!(t >= 0.0)) throw DomainError("historical profile queried at negative time");
    switch (form_) {
        case Form::Constant:
            return a_;
        case Form::Sinusoid:
            return a_ + b_ * std::sin(t / c_);
        case Form::Table: {
            if (t > times_.back()) {
                throw DomainError("historical profile table ends at t=" + std::to_string(times_.back()) +
                                  ", queried at t=" + std::to_string(t));
            }
            auto it = std::upper_bound(times_.begin(), times_.end(), t);
            if (it == times_.end()) return speeds_.back();
            const auto k = static_cast<std::size_t>(it - times_.begin());
            const double w = (t - times_[k - 1]) / (times_[k] - times_[k - 1]);
            return speeds_[k - 1] + w * (speeds_[k] - speeds_[k - 1]);
        }
    }
    return a_;
}

double HistoricalProfile::min_speed(double horizon) const {
    switch (form_) {
        case Form::Constant:
            return a_;
        case Form::Sinusoid:
            return a_ - std::abs(b_);
        case Form::Table: {
            if (horizon > times_.back()) return 0.0;
            return *std::min_element(speeds_.begin(), speeds_.end());
        }
    }
    return a_;
}

nlohmann::json HistoricalProfile::to_json() const {
    switch (form_) {
        case Form::Constant:
            return {{"form", "constant"}, {"value", a_}};
        case Form::Sinusoid:
            return {{"form", "sinusoid"}, {"a", a_}, {"b", b_}, {"c", c_}};
        case Form::Table:
            return {{"form", "table"}, {"t", times_}, {"v", speeds_}};
    }
    return {};
}

HistoricalProfile HistoricalProfile::from_json(const nlohmann::json& j) {
    const std::string form = j.at("form").get<std::string>();
    auto only = [&](std::initializer_list<const char*> keys) {
        for (const auto& [key, _] : j.items()) {
            if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; })) {
                throw ValidationError("traffic.profile: unknown key '" + key + "'");
            }
        }
    };
    if (form == "constant") {
        only({"form", "value"});
        return constant(j.at("value").get<double>());
    }
    if (form == "sinusoid") {
        only({"form", "a", "b", "c"});
        return sinusoid(j.at("a").get<double>(), j.at("b").get<double>(), j.at("c").get<double>());
    }
    if (form == "table") {
        only({"form", "t", "v"});
        return table(j.at("t").get<std::vector<double>>(), j.at("v").get<std::vector<double>>());
    }
    throw ValidationError("traffic.profile.form: unknown form '" + form + "'");
}

double DeviationRule::operator()(double hist_speed) const {
    switch (kind) {
        case Kind::Zero:
            return 0.0;
        case Kind::Constant:
            return amplitude;
        case Kind::Sign: {
            const double s = hist_speed - center;
            return amplitude * static_cast<double>((s > 0.0) - (s < 0.0));
        }
        case Kind::Tanh:
            return amplitude * std::tanh((hist_speed - center) / width);
    }
    return 0.0;
}

nlohmann::json DeviationRule::to_json() const {
    switch (kind) {
        case Kind::Zero:
            return {{"rule", "zero"}};
        case Kind::Constant:
            return {{"rule", "constant"}, {"amplitude", amplitude}};
        case Kind::Sign:
            return {{"rule", "sign"}, {"amplitude", amplitude}, {"center", center}};
        case Kind::Tanh:
            return {{"rule", "tanh"}, {"amplitude", amplitude}, {"center", center}, {"width", width}};
    }
    return {};
}

DeviationRule DeviationRule::from_json(const nlohmann::json& j) {
    DeviationRule r;
    for (const auto& [key, _] : j.items()) {
        if (key != "rule" && key != "amplitude" && key != "center" && key != "width") {
            throw ValidationError("traffic.deviation: unknown key '" + key + "'");
        }
    }
    const std::string rule = j.at("rule").get<std::string>();
    if (rule == "zero") {
        r.kind = Kind::Zero;
    } else if (rule == "constant") {
        r.kind = Kind::Constant;
    } else if (rule == "sign") {
        r.kind = Kind::Sign;
    } else if (rule == "tanh") {
        r.kind = Kind::Tanh;
    } else {
        throw ValidationError("traffic.deviation.rule: unknown rule '" + rule + "'");
    }
    r.amplitude = j.value("amplitude", r.amplitude);
    r.center = j.value("center", r.center);
    r.width = j.value("width", r.width);
    if (r.kind == Kind::Tanh && !(r.width > 0.0)) {
        throw ValidationError("traffic.deviation.width must be > 0");
    }
    return r;
}

double driver_speed(const DriverTruth& truth, const HistoricalProfile& profile, double t) {
    const double h = profile.speed(t);
    return std::max(0.0, h + truth.deviation(h));
}

std::pair<DriverTruth, Measurement> step_driver(const DriverTruth& truth, const HistoricalProfile& profile,
                                                double dt, std::mt19937_64& rng) {
    if (!(dt > 0.0)) throw DomainError("step_driver: dt must be > 0");
    DriverTruth next = truth;
    const int substeps = std::max(1, static_cast<int>(std::ceil(dt / 0.1 - 1e-9)));
    const double h = dt / substeps;
    double t = truth.t;
    double v_prev = driver_speed(truth, profile, t);
    double theta = truth.theta;
    for (int k = 1; k <= substeps; ++k) {
        const double t_next = truth.t + dt * k / substeps;
        const double v_next = driver_speed(truth, profile, t_next);
        theta += 0.5 * (v_prev + v_next) * h;
        v_prev = v_next;
        t = t_next;
    }
    next.t = t;
    const bool stopped = theta >= truth.path_length;
    next.theta = std::min(theta, truth.path_length);

    std::normal_distribution<double> noise(0.0, 1.0);
    Measurement m;
    m.t = t;
    m.hist_speed = profile.speed(t);
    const double true_speed = stopped ? 0.0 : v_prev;
    m.theta_meas = next.theta + truth.sigma_position * noise(rng);
    m.speed_meas = true_speed + truth.sigma_speed * noise(rng);
    return {next, m};
}

}  // namespace rdv
