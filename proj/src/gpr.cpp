#include "rdv/gpr.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <cmath>
#include <numbers>
#include <random>

namespace rdv {

double KernelConfig::operator()(double x, double y) const {
    const double r = std::abs(x - y) / length_scale;
    switch (nu) {
        case Smoothness::Half:
            return signal_variance * std::exp(-r);
        case Smoothness::ThreeHalves: {
            const double s = std::sqrt(3.0) * r;
            return signal_variance * (1.0 + s) * std::exp(-s);
        }
        case Smoothness::FiveHalves: {
            const double s = std::sqrt(5.0) * r;
            return signal_variance * (1.0 + s + s * s / 3.0) * std::exp(-s);
        }
    }
    return 0.0;
}

void KernelConfig::validate() const {
    if (!(length_scale > 0.0)) throw ValidationError("gp.length_scale must be > 0");
    if (!(signal_variance > 0.0)) throw ValidationError("gp signal variance must be > 0");
    if (!(noise_variance >= 0.0)) throw ValidationError("gp noise variance must be >= 0");
}

nlohmann::json KernelConfig::to_json() const {
    const double nu_value = nu == Smoothness::Half ? 0.5 : nu == Smoothness::ThreeHalves ? 1.5 : 2.5;
    return {{"family", "matern"},
            {"nu", nu_value},
            {"length_scale", length_scale},
            {"signal_variance", signal_variance},
            {"noise_variance", noise_variance}};
}

void Dataset::append(double x, double y) {
    x_.push_back(x);
    y_.push_back(y);
    if (window_ > 0 && x_.size() > window_) {
        x_.pop_front();
        y_.pop_front();
    }
}

namespace {

constexpr double kJitterStart = 1e-10;
constexpr double kJitterMax = 1e-6;

// Cholesky of a + jitter*scale*I, escalating jitter by decades until it succeeds.
Eigen::MatrixXd robust_cholesky(const Eigen::MatrixXd& a, double scale, double& jitter_used) {
    const auto n = a.rows();
    for (double jitter = kJitterStart; jitter <= kJitterMax * 1.0000001; jitter *= 10.0) {
        Eigen::MatrixXd m = a;
        m.diagonal().array() += jitter * scale;
        Eigen::LLT<Eigen::MatrixXd> llt(m);
        if (llt.info() == Eigen::Success) {
            jitter_used = jitter;
            return llt.matrixL();
        }
    }
    throw ConditioningError("Cholesky factorization of a " + std::to_string(n) + "x" + std::to_string(n) +
                            " kernel matrix failed at maximum jitter 1e-6");
}

}  // namespace

std::vector<double> quantile_inducing_points(std::span<const double> x, std::size_t n) {
    std::vector<double> sorted(x.begin(), x.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    if (n >= sorted.size()) return sorted;
    std::vector<double> out;
    out.reserve(n);
    if (n == 1) {
        out.push_back(sorted[sorted.size() / 2]);
        return out;
    }
    const double step = static_cast<double>(sorted.size() - 1) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(std::llround(step * static_cast<double>(i)));
        if (out.empty() || sorted[k] != out.back()) out.push_back(sorted[k]);
    }
    return out;
}

GPModel GPModel::prior(const KernelConfig& kernel) {
    kernel.validate();
    GPModel m;
    m.kernel_ = kernel;
    m.fitted_ = true;
    m.empty_ = true;
    return m;
}

GPModel fit(std::span<const double> x, std::span<const double> y, const KernelConfig& cfg, GPKind kind,
            std::size_t n_inducing) {
    cfg.validate();
    if (x.size() != y.size()) throw ValidationError("gp fit: X and Y differ in length");
    if (x.size() < 2) throw InsufficientData("gp fit: need at least 2 data points, got " + std::to_string(x.size()));
    const auto m = static_cast<Eigen::Index>(x.size());

    GPModel model;
    model.kind_ = kind;
    model.kernel_ = cfg;
    model.fitted_ = true;
    model.empty_ = false;
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    model.observed_lo_ = *lo;
    model.observed_hi_ = *hi;

    const Eigen::Map<const Eigen::VectorXd> yv(y.data(), m);

    if (kind == GPKind::Full) {
        model.x_ = Eigen::Map<const Eigen::VectorXd>(x.data(), m);
        Eigen::MatrixXd k(m, m);
        for (Eigen::Index i = 0; i < m; ++i) {
            k(i, i) = cfg.signal_variance + cfg.noise_variance;
            for (Eigen::Index j = 0; j < i; ++j) {
                const double v = cfg(x[static_cast<std::size_t>(i)], x[static_cast<std::size_t>(j)]);
                k(i, j) = v;
                k(j, i) = v;
            }
        }
        model.chol_ = robust_cholesky(k, cfg.signal_variance, model.jitter_);
        const Eigen::VectorXd z = model.chol_.triangularView<Eigen::Lower>().solve(yv);
        model.weights_ = model.chol_.transpose().triangularView<Eigen::Upper>().solve(z);
        return model;
    }

    if (n_inducing < 1 || n_inducing > x.size()) {
        throw ValidationError("gp fit: DTC needs 1 <= n_inducing <= M");
    }
    model.inducing_ = quantile_inducing_points(x, n_inducing);
    const auto u = static_cast<Eigen::Index>(model.inducing_.size());
    model.x_ = Eigen::Map<const Eigen::VectorXd>(model.inducing_.data(), u);

    Eigen::MatrixXd kuu(u, u);
    for (Eigen::Index i = 0; i < u; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double v = cfg(model.x_(i), model.x_(j));
            kuu(i, j) = v;
            kuu(j, i) = v;
        }
    }
    Eigen::MatrixXd kuf(u, m);
    for (Eigen::Index j = 0; j < m; ++j) {
        const double xj = x[static_cast<std::size_t>(j)];
        for (Eigen::Index i = 0; i < u; ++i) kuf(i, j) = cfg(model.x_(i), xj);
    }
    model.chol_ = robust_cholesky(kuu, cfg.signal_variance, model.jitter_);
    const Eigen::MatrixXd v = model.chol_.triangularView<Eigen::Lower>().solve(kuf);
    Eigen::MatrixXd b = Eigen::MatrixXd::Identity(u, u) * cfg.noise_variance;
    b.selfadjointView<Eigen::Lower>().rankUpdate(v);
    b = b.selfadjointView<Eigen::Lower>();
    double jitter_b = 0.0;
    model.chol_b_ = robust_cholesky(b, std::max(cfg.signal_variance, 1.0), jitter_b);
    model.jitter_ = std::max(model.jitter_, jitter_b);
    const Eigen::VectorXd z = model.chol_b_.triangularView<Eigen::Lower>().solve(v * yv);
    model.weights_ = model.chol_b_.transpose().triangularView<Eigen::Upper>().solve(z);
    model.weights_ = model.chol_.transpose().triangularView<Eigen::Upper>().solve(model.weights_);
    return model;
}

GPModel fit(const Dataset& data, const KernelConfig& cfg, GPKind kind, std::size_t n_inducing) {
    const std::vector<double> x(data.inputs().begin(), data.inputs().end());
    const std::vector<double> y(data.targets().begin(), data.targets().end());
    return fit(x, y, cfg, kind, std::min(n_inducing, std::max<std::size_t>(x.size(), 1)));
}

Prediction GPModel::predict(double x_star) const {
    const double kss = kernel_.signal_variance;
    if (empty_) return {0.0, kss};
    const auto n = x_.size();
    Eigen::VectorXd ks(n);
    for (Eigen::Index i = 0; i < n; ++i) ks(i) = kernel_(x_(i), x_star);

    Prediction p;
    p.mean = ks.dot(weights_);
    const Eigen::VectorXd w = chol_.triangularView<Eigen::Lower>().solve(ks);
    if (kind_ == GPKind::Full) {
        p.variance = kss - w.squaredNorm();
    } else {
        const Eigen::VectorXd wb = chol_b_.triangularView<Eigen::Lower>().solve(w);
        p.variance = kss - w.squaredNorm() + kernel_.noise_variance * wb.squaredNorm();
    }
    p.variance = std::max(0.0, p.variance);
    return p;
}

double GPModel::mean(double x_star) const {
    if (empty_) return 0.0;
    double m = 0.0;
    for (Eigen::Index i = 0; i < x_.size(); ++i) m += kernel_(x_(i), x_star) * weights_(i);
    return m;
}

nlohmann::json GPModel::to_json() const {
    nlohmann::json j;
    j["kind"] = kind_ == GPKind::Full ? "full" : "dtc";
    j["kernel"] = kernel_.to_json();
    j["training_size"] = empty_ ? 0 : training_size();
    j["inducing_points"] = inducing_;
    j["observed_set"] = empty_ ? nlohmann::json(nullptr) : nlohmann::json::array({observed_lo_, observed_hi_});
    j["jitter"] = jitter_;
    return j;
}

double log_marginal_likelihood(std::span<const double> x, std::span<const double> y, const KernelConfig& cfg) {
    cfg.validate();
    if (x.size() != y.size() || x.size() < 2) throw InsufficientData("log_marginal_likelihood: need >= 2 pairs");
    const auto m = static_cast<Eigen::Index>(x.size());
    Eigen::MatrixXd k(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            k(i, j) = cfg(x[static_cast<std::size_t>(i)], x[static_cast<std::size_t>(j)]);
        }
        k(i, i) += cfg.noise_variance;
    }
    double jitter = 0.0;
    const Eigen::MatrixXd l = robust_cholesky(k, cfg.signal_variance, jitter);
    const Eigen::Map<const Eigen::VectorXd> yv(y.data(), m);
    const Eigen::VectorXd z = l.triangularView<Eigen::Lower>().solve(yv);
    const double log_det = 2.0 * l.diagonal().array().log().sum();
    return -0.5 * z.squaredNorm() - 0.5 * log_det - 0.5 * static_cast<double>(m) * std::log(2.0 * std::numbers::pi);
}

KernelConfig tune_hyperparameters(std::span<const double> x, std::span<const double> y, KernelConfig start) {
    KernelConfig best = start;
    double best_ll = -std::numeric_limits<double>::infinity();
    constexpr int kGrid = 15;
    for (int i = 0; i < kGrid; ++i) {
        const double ell = 0.05 * std::pow(100.0, i / double(kGrid - 1));
        for (int j = 0; j < kGrid; ++j) {
            KernelConfig c = start;
            c.length_scale = ell;
            c.signal_variance = 0.05 * std::pow(100.0, j / double(kGrid - 1));
            try {
                const double ll = log_marginal_likelihood(x, y, c);
                if (ll > best_ll) {
                    best_ll = ll;
                    best = c;
                }
            } catch (const ConditioningError&) {
            }
        }
    }
    return best;
}

std::vector<FitTiming> benchmark_fit(std::span<const std::size_t> sizes, std::size_t repetitions,
                                     std::size_t n_inducing, unsigned seed) {
    using clock = std::chrono::steady_clock;
    KernelConfig cfg;
    std::vector<FitTiming> out;
    for (std::size_t m : sizes) {
        if (m > 10000) throw ValidationError("benchmark_fit: sizes must be <= 1e4");
        std::mt19937_64 rng(seed + m);
        std::normal_distribution<double> noise(0.0, 0.25);
        std::vector<double> x(m), y(m);
        for (std::size_t i = 0; i < m; ++i) {
            const double t = 0.1 * static_cast<double>(i);
            x[i] = 8.0 + std::sin(t / 10.0);
            y[i] = (x[i] > 8.0 ? 1.0 : x[i] < 8.0 ? -1.0 : 0.0) + noise(rng);
        }
        auto time_us = [&](GPKind kind) {
            std::vector<double> samples;
            samples.reserve(repetitions);
            for (std::size_t r = 0; r < repetitions; ++r) {
                const auto t0 = clock::now();
                volatile bool ok = fit(x, y, cfg, kind, std::min(n_inducing, m)).fitted();
                (void)ok;
                samples.push_back(std::chrono::duration<double, std::micro>(clock::now() - t0).count());
            }
            std::vector<double> sorted = samples;
            std::sort(sorted.begin(), sorted.end());
            const double median = sorted.size() % 2 ? sorted[sorted.size() / 2]
                                                    : 0.5 * (sorted[sorted.size() / 2 - 1] + sorted[sorted.size() / 2]);
            double mean = 0.0;
            for (double s : samples) mean += s;
            mean /= static_cast<double>(samples.size());
            double var = 0.0;
            for (double s : samples) var += (s - mean) * (s - mean);
            return std::pair{median, std::sqrt(var / static_cast<double>(samples.size()))};
        };
        FitTiming row;
        row.m = m;
        std::tie(row.full_median_us, row.full_stddev_us) = time_us(GPKind::Full);
        std::tie(row.dtc_median_us, row.dtc_stddev_us) = time_us(GPKind::DTC);
        out.push_back(row);
    }
    return out;
}

}  // namespace rdv
