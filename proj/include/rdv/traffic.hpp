#ifndef RDV_TRAFFIC_HPP
#define RDV_TRAFFIC_HPP

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

namespace rdv {

/**
 * @brief Historical mean path speed as a function of time [m/s].
 *
 * Either an analytic form (constant, or a + b*sin(t/c)) or a sampled table
 * with linear interpolation. Speeds must stay positive over the horizon.
 */
class HistoricalProfile {
public:
    enum class Form { Constant, Sinusoid, Table };

    static HistoricalProfile constant(double speed);
    static HistoricalProfile sinusoid(double offset, double amplitude, double period_scale);
    static HistoricalProfile table(std::vector<double> times, std::vector<double> speeds);

    Form form() const { return form_; }

    /// Throws DomainError for t < 0 or t past the end of a table.
    double speed(double t) const;

    /// Lower bound of the speed over [0, horizon]; used for positivity validation.
    double min_speed(double horizon) const;

    nlohmann::json to_json() const;
    static HistoricalProfile from_json(const nlohmann::json& j);

private:
    Form form_ = Form::Constant;
    double a_ = 8.0;
    double b_ = 0.0;
    double c_ = 1.0;
    std::vector<double> times_;
    std::vector<double> speeds_;
};

inline double historical_speed(const HistoricalProfile& profile, double t) { return profile.speed(t); }

/// True driver deviation d as a function of the historical speed.
struct DeviationRule {
    enum class Kind { Zero, Constant, Sign, Tanh };
    Kind kind = Kind::Zero;
    double amplitude = 1.0;  // constant offset for Kind::Constant
    double center = 8.0;     // sign/tanh switch point [m/s]
    double width = 0.25;     // tanh transition width [m/s]

    double operator()(double hist_speed) const;

    nlohmann::json to_json() const;
    static DeviationRule from_json(const nlohmann::json& j);
};

struct Measurement {
    double t = 0.0;
    double theta_meas = 0.0;
    double speed_meas = 0.0;
    double hist_speed = 0.0;
};

struct DriverTruth {
    int chosen_path = 1;
    DeviationRule deviation;
    double t = 0.0;
    double theta = 0.0;
    double path_length = 1e300;  // the driver stops at the end of its path
    double sigma_speed = 0.25;
    double sigma_position = 1.0;
};

/// True path speed at time t: historical speed plus deviation.
double driver_speed(const DriverTruth& truth, const HistoricalProfile& profile, double t);

/**
 * Advance the driver by dt with trapezoidal substeps of at most 0.1 s and emit a
 * noisy measurement at the new time.
 */
std::pair<DriverTruth, Measurement> step_driver(const DriverTruth& truth, const HistoricalProfile& profile,
                                                double dt, std::mt19937_64& rng);

}  // namespace rdv

#endif  // RDV_TRAFFIC_HPP
