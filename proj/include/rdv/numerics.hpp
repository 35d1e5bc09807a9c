#ifndef RDV_NUMERICS_HPP
#define RDV_NUMERICS_HPP

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "rdv/errors.hpp"

namespace rdv {

// ----------------------------------------------------------------------------
// Adaptive Gauss-Kronrod quadrature
// ----------------------------------------------------------------------------

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    std::size_t evaluations = 0;
    std::size_t intervals = 0;
};

struct QuadratureOptions {
    double abs_tol = 1e-8;
    double rel_tol = 1e-6;
    std::size_t max_intervals = 200;
};

/// Subdivision limit hit; best_estimate carries the partial result.
class QuadratureNonConvergence : public NumericalError {
public:
    QuadratureNonConvergence(const std::string& what, QuadratureResult best)
        : NumericalError(what), best_estimate(best) {}
    QuadratureResult best_estimate;
};

/// One 15-point Kronrod / 7-point Gauss panel over [a, b] (QUADPACK qk15 error model).
QuadratureResult gauss_kronrod_15(const std::function<double(double)>& f, double a, double b);

/**
 * Globally adaptive quadrature: bisect the panel with the largest error
 * estimate until the total estimate is within max(abs_tol, rel_tol*|value|).
 */
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureOptions& opts = {});

// ----------------------------------------------------------------------------
// Partial selection
// ----------------------------------------------------------------------------

enum class SelectDirection { Min, Max };

/// Indices of the k best values, best first. Ties go to the lower index; NaN ranks last.
std::vector<std::size_t> select_top_k(std::span<const double> values, std::size_t k,
                                      SelectDirection direction = SelectDirection::Min);

// ----------------------------------------------------------------------------
// Gaussian utilities
// ----------------------------------------------------------------------------

double normal_pdf(double z);
double normal_cdf(double z);
double normal_quantile(double p);

/**
 * Expected value of the lower gamma-tail of N(mu, sigma^2): (1/gamma) times the
 * integral of the quantile function over (0, gamma], evaluated by quadrature.
 */
double gaussian_cvar_lower(double mu, double sigma, double gamma);

/// Lower gamma-quantile of N(mu, sigma^2).
double gaussian_var_lower(double mu, double sigma, double gamma);

/// Empirical lower-tail CVaR: mean of the ceil(gamma*n) smallest samples.
double empirical_cvar_lower(std::span<const double> samples, double gamma);

}  // namespace rdv

#endif  // RDV_NUMERICS_HPP
