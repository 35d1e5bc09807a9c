#ifndef RDV_GPR_HPP
#define RDV_GPR_HPP

#include <cstddef>
#include <deque>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "rdv/errors.hpp"

namespace rdv {

/// Matern covariance over a scalar input (historical speed, m/s).
struct KernelConfig {
    enum class Smoothness { Half, ThreeHalves, FiveHalves };
    Smoothness nu = Smoothness::ThreeHalves;
    double length_scale = 0.5;
    double signal_variance = 1.0;  // sigma_f^2
    double noise_variance = 0.0625;  // sigma_n^2

    double operator()(double x, double y) const;
    void validate() const;

    nlohmann::json to_json() const;
};

/**
 * @brief Training pairs x_i = historical speed, y_i = observed deviation.
 *
 * window == 0 keeps every point; otherwise only the most recent `window` points.
 */
class Dataset {
public:
    explicit Dataset(std::size_t window = 0) : window_(window) {}

    void append(double x, double y);
    std::size_t size() const { return x_.size(); }
    bool empty() const { return x_.empty(); }
    const std::deque<double>& inputs() const { return x_; }
    const std::deque<double>& targets() const { return y_; }

private:
    std::size_t window_;
    std::deque<double> x_;
    std::deque<double> y_;
};

struct Prediction {
    double mean = 0.0;
    double variance = 0.0;
};

enum class GPKind { Full, DTC };

class InsufficientData : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class ConditioningError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/**
 * @brief Immutable posterior snapshot; predict() is safe to call concurrently.
 *
 * Full: Cholesky of K + (sigma_n^2 + jitter) I.
 * DTC: inducing inputs at equally spaced quantiles of X; the posterior is held
 * as L_uu and L_B with B = sigma_n^2 I + V V^T, V = L_uu^{-1} K_uf.
 */
class GPModel {
public:
    GPModel() = default;

    GPKind kind() const { return kind_; }
    const KernelConfig& kernel() const { return kernel_; }
    const std::vector<double>& inducing_points() const { return inducing_; }
    std::size_t training_size() const { return static_cast<std::size_t>(x_.size()); }
    double observed_min() const { return observed_lo_; }
    double observed_max() const { return observed_hi_; }
    bool in_observed_set(double x) const { return x >= observed_lo_ && x <= observed_hi_; }
    double jitter() const { return jitter_; }
    bool fitted() const { return fitted_; }

    Prediction predict(double x_star) const;
    double mean(double x_star) const;
    double variance(double x_star) const { return predict(x_star).variance; }

    nlohmann::json to_json() const;

    /// Zero-mean prior with no data; predict() returns (0, sigma_f^2).
    static GPModel prior(const KernelConfig& kernel);

private:
    friend GPModel fit(std::span<const double>, std::span<const double>, const KernelConfig&, GPKind,
                       std::size_t);

    GPKind kind_ = GPKind::Full;
    KernelConfig kernel_;
    bool fitted_ = false;
    bool empty_ = true;
    double jitter_ = 0.0;
    double observed_lo_ = 0.0;
    double observed_hi_ = -1.0;
    Eigen::VectorXd x_;            // training inputs (full) or inducing inputs (DTC)
    Eigen::MatrixXd chol_;         // L of K + s I (full) or L_uu (DTC)
    Eigen::MatrixXd chol_b_;       // L_B (DTC only)
    Eigen::VectorXd weights_;      // alpha = (K + s I)^{-1} y (full) or L_uu^{-T} B^{-1} V y (DTC)
    std::vector<double> inducing_;
};

/**
 * Fit a posterior. Throws InsufficientData for fewer than 2 points and
 * ConditioningError when the factorization fails after jitter escalation
 * from 1e-10 to 1e-6.
 */
GPModel fit(std::span<const double> x, std::span<const double> y, const KernelConfig& cfg,
            GPKind kind = GPKind::Full, std::size_t n_inducing = 30);
GPModel fit(const Dataset& data, const KernelConfig& cfg, GPKind kind = GPKind::Full,
            std::size_t n_inducing = 30);

/// Inputs at equally spaced quantiles of x (sorted, duplicates removed).
std::vector<double> quantile_inducing_points(std::span<const double> x, std::size_t n);

/// Exact log marginal likelihood of the full GP; used by offline hyperparameter tuning.
double log_marginal_likelihood(std::span<const double> x, std::span<const double> y, const KernelConfig& cfg);

/// Grid search over length scale and signal variance maximizing the marginal likelihood.
KernelConfig tune_hyperparameters(std::span<const double> x, std::span<const double> y, KernelConfig start);

struct FitTiming {
    std::size_t m = 0;
    double full_median_us = 0.0;
    double full_stddev_us = 0.0;
    double dtc_median_us = 0.0;
    double dtc_stddev_us = 0.0;
};

/// Median wall times of full and DTC fits on synthetic sign-deviation data.
std::vector<FitTiming> benchmark_fit(std::span<const std::size_t> sizes, std::size_t repetitions = 50,
                                     std::size_t n_inducing = 30, unsigned seed = 7);

}  // namespace rdv

#endif  // RDV_GPR_HPP
