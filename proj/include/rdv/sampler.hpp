#ifndef RDV_SAMPLER_HPP
#define RDV_SAMPLER_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "rdv/geometry.hpp"
#include "rdv/gpr.hpp"
#include "rdv/numerics.hpp"
#include "rdv/traffic.hpp"
#include "rdv/uas.hpp"

namespace rdv {

/// Per-path Gaussian over rendezvous times with diagonal covariance.
struct ProposalDistribution {
    std::vector<double> mean;      // [s], absolute time
    std::vector<double> variance;  // [s^2]
    double lambda = 0.5;           // exploration floor [s^2]
    std::size_t n_s = 5;
    std::size_t n_e = 2;

    std::size_t paths() const { return mean.size(); }
    void validate() const;
};

/// mean = t0 + |uas - path midpoint| / v_max, variance = (0.25 * horizon)^2.
ProposalDistribution initial_proposal(const PathMap& map, Vec2 uas_position, double t0, double v_max,
                                      double horizon, double lambda, std::size_t n_s, std::size_t n_e);

/// N x n_s sample matrix and its per-sample evaluation, row-major.
struct SampleBatch {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> times;
    std::vector<double> theta;        // expected arc length at the sample time
    std::vector<Vec2> points;         // p_i(E[theta])
    std::vector<Vec2> points_plus;    // p_i(E[theta] + h)
    std::vector<Vec2> points_minus;   // p_i(E[theta] - h)
    std::vector<double> half_widths;  // h
    std::vector<double> energies;     // [J], +inf when infeasible
    std::vector<double> rho_r;        // downside range gain toward the UAS [m]
    std::vector<std::uint8_t> clamped;
    std::vector<std::uint8_t> active;  // per row

    SampleBatch() = default;
    SampleBatch(std::size_t n_rows, std::size_t n_cols);

    std::size_t index(std::size_t row, std::size_t col) const { return row * cols + col; }
    double time(std::size_t row, std::size_t col) const { return times[index(row, col)]; }
    double energy(std::size_t row, std::size_t col) const { return energies[index(row, col)]; }
};

/**
 * Draw n_s times per path from the proposal. Times must exceed t_min; violators are
 * redrawn up to 100 times and then clamped just above t_min. Rows of pruned paths
 * are drawn but flagged inactive.
 */
SampleBatch sample_batch(const ProposalDistribution& prop, std::mt19937_64& rng, const ReachableSet& active,
                         double t_min);

struct Propagation {
    double theta = 0.0;
    double half_width = 0.0;
    Vec2 point;
    Vec2 point_plus;
    Vec2 point_minus;
    bool clamped = false;
    bool valid = true;
};

struct PropagationOptions {
    double gamma_scale = 1.96;
    QuadratureOptions quadrature{1e-2, 1e-6, 200};  // position accuracy well below measurement noise
};

/**
 * Expected driver arc length at t_sample, theta0 + int (hist + mu_d(hist)) dt, and
 * half-width h = gamma_scale * int Sigma_d(hist) dt, both by adaptive quadrature.
 * Arc lengths are clamped to the path; quadrature failure marks the result invalid.
 */
Propagation propagate_position(const Path& path, const GPModel& gp, const HistoricalProfile& profile,
                               double theta0, double t0, double t_sample, const PropagationOptions& opts = {});

/// Everything energy_cost needs besides the sample itself.
struct CostContext {
    Vec2 uas_position;
    double t0 = 0.0;
    Vec2 landing_site;
    std::optional<double> t_landing;  // absolute landing time from the previous plan
    UasParams params;
};

struct SampleCost {
    double energy = 0.0;   // [J], +inf when the outbound speed exceeds v_max
    double rho_r = 0.0;    // downside range toward the UAS [m]
    double rho_l = 0.0;    // downside range toward the landing site [m]
    double v_r = 0.0;
    double v_l = 0.0;
};

/// Downside range gain max(r, r+, r-) - r of a candidate interval seen from `from`.
double downside_range(Vec2 from, Vec2 expected, Vec2 plus, Vec2 minus);

/**
 * Risk-adjusted two-leg energy: loaded flight from the UAS to the sample at
 * (r + rho_r)/(t_s - t0), then empty flight to the landing site at
 * (r_l + rho_l)/(t_l - t_s). The return term is dropped when no plan exists yet;
 * t_l is pushed back to the earliest arrival at v_max when it comes too soon.
 */
SampleCost energy_cost(Vec2 expected, Vec2 plus, Vec2 minus, double t_sample, const CostContext& ctx);

struct BatchInputs {
    const PathMap* map = nullptr;
    const GPModel* gp = nullptr;
    const HistoricalProfile* profile = nullptr;
    double driver_theta = 0.0;
    CostContext cost;
    PropagationOptions propagation;
};

/// Propagate and cost every sample in parallel (OpenMP); results match the serial reference bitwise.
void evaluate_batch(SampleBatch& batch, const BatchInputs& in);
/// Serial reference for evaluate_batch.
void evaluate_batch_reference(SampleBatch& batch, const BatchInputs& in);

enum class Strategy { BestFirst, WorstFirst };

struct EliteResult {
    std::size_t n_e = 0;
    std::vector<double> elite_times;          // N x n_e, best first per row
    std::vector<std::size_t> elite_columns;   // N x n_e
    std::vector<double> row_best_cost;        // per row, +inf for rows with no finite sample
    std::vector<std::uint8_t> row_infeasible; // fewer than n_e finite samples
    std::optional<PathId> target_path;
    Vec2 p_star;
    double t_rendezvous = 0.0;
    double theta_star = 0.0;
    double half_width_star = 0.0;
    double best_cost = 0.0;
    double rho_r_star = 0.0;
    bool fallback = false;  // target came from the worst feasible row, or only degraded rows remained

    double elite(std::size_t row, std::size_t k) const { return elite_times[row * n_e + k]; }
};

/**
 * Per-row top-n_e by energy, then the target path among active rows:
 * argmin of w_i*cost (best first) or -w_i*cost (worst first) over row-best costs.
 */
EliteResult rank_and_select(const SampleBatch& batch, std::size_t n_e, Strategy strategy,
                            const std::vector<double>& weights);

/// Row-wise mean and population variance of the elites, plus lambda.
ProposalDistribution update_parameters(const ProposalDistribution& prop, const EliteResult& elites);

}  // namespace rdv

#endif  // RDV_SAMPLER_HPP
