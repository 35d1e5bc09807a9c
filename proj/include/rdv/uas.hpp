#ifndef RDV_UAS_HPP
#define RDV_UAS_HPP

#include <algorithm>
#include <cmath>

namespace rdv {

/// Vehicle and mission constants shared by the sampler, planner and mission loop.
struct UasParams {
    double mass_loaded = 3.0;  // m_a [kg], carrying the package
    double mass_empty = 1.0;   // m_b [kg], after drop-off
    double alpha = 20.0;       // hover consumption per unit mass [W/kg]
    double v_max = 10.0;       // [m/s]
    double t_max = 400.0;      // bound on t1+t2+t3 and t1+t4 [s]
    double t_c = 2.0;          // minimum segment duration [s]
};

/// Energy of one constant-velocity segment: (m v^2 / 2 + alpha m) t.
inline double segment_energy(double mass, double speed, double duration, double alpha) {
    return (0.5 * mass * speed * speed + alpha * mass) * duration;
}

/// Same, parametrized by distance covered: m (d^2 / (2t) + alpha t).
inline double transit_energy(double mass, double dist, double duration, double alpha) {
    return mass * (0.5 * dist * dist / duration + alpha * duration);
}

/// Speed minimizing energy per meter, min(sqrt(2 alpha), v_max).
inline double economy_speed(double alpha, double v_max) { return std::min(std::sqrt(2.0 * alpha), v_max); }

/// Least energy to cover `dist` with mass `mass` at any admissible speed.
inline double min_transit_energy(double mass, double dist, double alpha, double v_max) {
    if (dist <= 0.0) return 0.0;
    const double v = economy_speed(alpha, v_max);
    return segment_energy(mass, v, dist / v, alpha);
}

}  // namespace rdv

#endif  // RDV_UAS_HPP
