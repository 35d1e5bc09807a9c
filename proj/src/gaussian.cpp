#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <boost/math/special_functions/erf.hpp>

#include "rdv/numerics.hpp"

namespace rdv {

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -std::numeric_limits<double>::infinity();
        if (p == 1.0) return std::numeric_limits<double>::infinity();
        throw DomainError("normal_quantile: p outside [0, 1]");
    }
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

namespace {

void check_gamma(double gamma) {
    if (!(gamma > 0.0 && gamma <= 1.0)) {
        throw DomainError("quantile level gamma must lie in (0, 1], got " + std::to_string(gamma));
    }
}

}  // namespace

double gaussian_var_lower(double mu, double sigma, double gamma) {
    check_gamma(gamma);
    if (sigma < 0.0) throw DomainError("sigma must be >= 0");
    if (sigma == 0.0) return mu;
    return mu + sigma * normal_quantile(gamma);
}

double gaussian_cvar_lower(double mu, double sigma, double gamma) {
    check_gamma(gamma);
    if (sigma < 0.0) throw DomainError("sigma must be >= 0");
    if (sigma == 0.0) return mu;
    // p = gamma * u^2 removes the endpoint singularity of the quantile at p = 0.
    auto integrand = [gamma](double u) {
        const double p = gamma * u * u;
        if (p <= 0.0) return 0.0;
        if (p >= 1.0) return 0.0;  // u = 1 with gamma = 1; nodes never land exactly there
        return 2.0 * u * normal_quantile(p);
    };
    QuadratureOptions opts;
    opts.abs_tol = 1e-11;
    opts.rel_tol = 1e-11;
    opts.max_intervals = 1000;
    const double tail_mean = integrate(integrand, 0.0, 1.0, opts).value;
    return mu + sigma * tail_mean;
}

double empirical_cvar_lower(std::span<const double> samples, double gamma) {
    check_gamma(gamma);
    if (samples.empty()) throw DomainError("empirical_cvar_lower: no samples");
    const auto n_tail = static_cast<std::size_t>(
        std::max(1.0, std::ceil(gamma * static_cast<double>(samples.size()) - 1e-9)));
    std::vector<double> v(samples.begin(), samples.end());
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n_tail - 1), v.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < n_tail; ++i) sum += v[i];
    return sum / static_cast<double>(n_tail);
}

}  // namespace rdv
