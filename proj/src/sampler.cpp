#include "rdv/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rdv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxRedraws = 100;
constexpr double kClampMargin = 1e-6;

}  // namespace

void ProposalDistribution::validate() const {
    if (mean.size() != variance.size() || mean.empty()) {
        throw ValidationError("proposal: mean and variance must be non-empty and equal length");
    }
    if (!(lambda > 0.0)) throw ValidationError("proposal: lambda must be > 0");
    if (!(n_e >= 1 && n_s > n_e)) throw ValidationError("proposal: need n_s > n_e >= 1");
    for (double v : variance) {
        if (!(v >= lambda)) throw ValidationError("proposal: variance below the lambda floor");
    }
}

ProposalDistribution initial_proposal(const PathMap& map, Vec2 uas_position, double t0, double v_max,
                                      double horizon, double lambda, std::size_t n_s, std::size_t n_e) {
    ProposalDistribution p;
    p.lambda = lambda;
    p.n_s = n_s;
    p.n_e = n_e;
    const double spread = 0.25 * horizon;
    for (const auto& path : map.paths()) {
        const Vec2 mid = path.evaluate(0.5 * path.length());
        p.mean.push_back(t0 + distance(uas_position, mid) / v_max);
        p.variance.push_back(std::max(spread * spread, lambda));
    }
    p.validate();
    return p;
}

SampleBatch::SampleBatch(std::size_t n_rows, std::size_t n_cols)
    : rows(n_rows),
      cols(n_cols),
      times(n_rows * n_cols, 0.0),
      theta(n_rows * n_cols, 0.0),
      points(n_rows * n_cols),
      points_plus(n_rows * n_cols),
      points_minus(n_rows * n_cols),
      half_widths(n_rows * n_cols, 0.0),
      energies(n_rows * n_cols, kInf),
      rho_r(n_rows * n_cols, 0.0),
      clamped(n_rows * n_cols, 0),
      active(n_rows, 1) {}

SampleBatch sample_batch(const ProposalDistribution& prop, std::mt19937_64& rng, const ReachableSet& active,
                         double t_min) {
    prop.validate();
    SampleBatch batch(prop.paths(), prop.n_s);
    std::normal_distribution<double> unit(0.0, 1.0);
    for (std::size_t i = 0; i < batch.rows; ++i) {
        batch.active[i] = active.contains(static_cast<PathId>(i + 1)) ? 1 : 0;
        const double sd = std::sqrt(prop.variance[i]);
        for (std::size_t j = 0; j < batch.cols; ++j) {
            double t = prop.mean[i] + sd * unit(rng);
            for (int retry = 0; retry < kMaxRedraws && !(t > t_min); ++retry) {
                t = prop.mean[i] + sd * unit(rng);
            }
            if (!(t > t_min)) t = t_min + kClampMargin;
            batch.times[batch.index(i, j)] = t;
        }
    }
    return batch;
}

Propagation propagate_position(const Path& path, const GPModel& gp, const HistoricalProfile& profile,
                               double theta0, double t0, double t_sample, const PropagationOptions& opts) {
    Propagation out;
    if (!(t_sample > t0)) {
        throw DomainError("propagate_position: sample time must be after t0");
    }
    try {
        const double advance =
            integrate([&](double t) {
                const double h = profile.speed(t);
                return h + gp.mean(h);
            }, t0, t_sample, opts.quadrature).value;
        const double spread =
            integrate([&](double t) { return gp.variance(profile.speed(t)); }, t0, t_sample, opts.quadrature)
                .value;
        out.theta = theta0 + advance;
        out.half_width = std::max(0.0, opts.gamma_scale * spread);
    } catch (const NumericalError&) {
        out.valid = false;
        return out;
    } catch (const DomainError&) {
        // table profile exhausted before t_sample
        out.valid = false;
        return out;
    }
    const double len = path.length();
    out.clamped = out.theta < 0.0 || out.theta > len;
    out.point = path.evaluate_clamped(out.theta);
    out.point_plus = path.evaluate_clamped(out.theta + out.half_width);
    out.point_minus = path.evaluate_clamped(out.theta - out.half_width);
    return out;
}

double downside_range(Vec2 from, Vec2 expected, Vec2 plus, Vec2 minus) {
    const double r = distance(expected, from);
    return std::max({r, distance(plus, from), distance(minus, from)}) - r;
}

SampleCost energy_cost(Vec2 expected, Vec2 plus, Vec2 minus, double t_sample, const CostContext& ctx) {
    const UasParams& u = ctx.params;
    SampleCost c;
    const double to_go = t_sample - ctx.t0;
    if (!(to_go > 0.0)) {
        c.energy = kInf;
        return c;
    }
    const double r = distance(expected, ctx.uas_position);
    c.rho_r = downside_range(ctx.uas_position, expected, plus, minus);
    c.v_r = (r + c.rho_r) / to_go;
    c.energy = segment_energy(u.mass_loaded, c.v_r, to_go, u.alpha);
    if (c.v_r > u.v_max) c.energy = kInf;

    if (ctx.t_landing) {
        const double r_l = distance(ctx.landing_site, expected);
        c.rho_l = downside_range(ctx.landing_site, expected, plus, minus);
        // the stale landing time slips to the earliest arrival at v_max
        const double back = std::max(*ctx.t_landing - t_sample, (r_l + c.rho_l) / u.v_max);
        if (!(back > 0.0)) return c;
        c.v_l = (r_l + c.rho_l) / back;
        c.energy += segment_energy(u.mass_empty, c.v_l, back, u.alpha);
    }
    return c;
}

namespace {

void evaluate_sample(SampleBatch& batch, const BatchInputs& in, std::size_t row, std::size_t col) {
    const std::size_t k = batch.index(row, col);
    const Path& path = in.map->path(static_cast<PathId>(row + 1));
    const Propagation pr = propagate_position(path, *in.gp, *in.profile, in.driver_theta, in.cost.t0,
                                              batch.times[k], in.propagation);
    batch.theta[k] = pr.theta;
    batch.points[k] = pr.point;
    batch.points_plus[k] = pr.point_plus;
    batch.points_minus[k] = pr.point_minus;
    batch.half_widths[k] = pr.half_width;
    batch.clamped[k] = pr.clamped ? 1 : 0;
    if (!pr.valid) {
        batch.energies[k] = kInf;
        batch.rho_r[k] = 0.0;
        return;
    }
    const SampleCost c = energy_cost(pr.point, pr.point_plus, pr.point_minus, batch.times[k], in.cost);
    batch.energies[k] = c.energy;
    batch.rho_r[k] = c.rho_r;
}

}  // namespace

void evaluate_batch(SampleBatch& batch, const BatchInputs& in) {
    const auto n = static_cast<long>(batch.rows * batch.cols);
#pragma omp parallel for schedule(dynamic)
    for (long k = 0; k < n; ++k) {
        const auto uk = static_cast<std::size_t>(k);
        evaluate_sample(batch, in, uk / batch.cols, uk % batch.cols);
    }
}

void evaluate_batch_reference(SampleBatch& batch, const BatchInputs& in) {
    for (std::size_t i = 0; i < batch.rows; ++i) {
        for (std::size_t j = 0; j < batch.cols; ++j) evaluate_sample(batch, in, i, j);
    }
}

EliteResult rank_and_select(const SampleBatch& batch, std::size_t n_e, Strategy strategy,
                            const std::vector<double>& weights) {
    if (n_e < 1 || n_e > batch.cols) throw DomainError("rank_and_select: need 1 <= n_e <= n_s");
    if (weights.size() != batch.rows) throw ValidationError("rank_and_select: one weight per path required");

    EliteResult res;
    res.n_e = n_e;
    res.elite_times.resize(batch.rows * n_e);
    res.elite_columns.resize(batch.rows * n_e);
    res.row_best_cost.assign(batch.rows, kInf);
    res.row_infeasible.assign(batch.rows, 0);

    for (std::size_t i = 0; i < batch.rows; ++i) {
        const std::span<const double> row(batch.energies.data() + i * batch.cols, batch.cols);
        const auto best = select_top_k(row, n_e, SelectDirection::Min);
        for (std::size_t k = 0; k < n_e; ++k) {
            res.elite_columns[i * n_e + k] = best[k];
            res.elite_times[i * n_e + k] = batch.time(i, best[k]);
        }
        res.row_best_cost[i] = row[best[0]];
        const auto finite = std::count_if(row.begin(), row.end(), [](double e) { return std::isfinite(e); });
        res.row_infeasible[i] = static_cast<std::size_t>(finite) < n_e ? 1 : 0;
    }

    auto score = [&](std::size_t i) {
        const double c = weights[i] * res.row_best_cost[i];
        return strategy == Strategy::BestFirst ? c : -c;
    };
    auto pick = [&](auto&& eligible) -> std::optional<std::size_t> {
        std::optional<std::size_t> best;
        for (std::size_t i = 0; i < batch.rows; ++i) {
            if (!batch.active[i] || !eligible(i)) continue;
            if (!best || score(i) < score(*best)) best = i;
        }
        return best;
    };

    const auto unrestricted = pick([](std::size_t) { return true; });
    auto chosen = pick([&](std::size_t i) { return !res.row_infeasible[i]; });
    if (!chosen) chosen = pick([&](std::size_t i) { return std::isfinite(res.row_best_cost[i]); });
    if (!chosen) {
        res.fallback = unrestricted.has_value();
        return res;
    }
    res.fallback = unrestricted != chosen;
    const std::size_t row = *chosen;
    const std::size_t k = batch.index(row, res.elite_columns[row * n_e]);
    res.target_path = static_cast<PathId>(row + 1);
    res.p_star = batch.points[k];
    res.t_rendezvous = batch.times[k];
    res.theta_star = batch.theta[k];
    res.half_width_star = batch.half_widths[k];
    res.best_cost = batch.energies[k];
    res.rho_r_star = batch.rho_r[k];
    return res;
}

ProposalDistribution update_parameters(const ProposalDistribution& prop, const EliteResult& elites) {
    if (elites.n_e == 0 || elites.elite_times.size() != prop.paths() * elites.n_e) {
        throw ValidationError("update_parameters: elite matrix does not match the proposal");
    }
    ProposalDistribution next = prop;
    const auto n = static_cast<double>(elites.n_e);
    for (std::size_t i = 0; i < prop.paths(); ++i) {
        double mean = 0.0;
        for (std::size_t k = 0; k < elites.n_e; ++k) mean += elites.elite(i, k);
        mean /= n;
        double var = 0.0;
        for (std::size_t k = 0; k < elites.n_e; ++k) {
            const double d = elites.elite(i, k) - mean;
            var += d * d;
        }
        next.mean[i] = mean;
        next.variance[i] = var / n + prop.lambda;
    }
    return next;
}

}  // namespace rdv
