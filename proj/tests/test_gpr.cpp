#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "rdv/gpr.hpp"
#include "rdv/traffic.hpp"

using rdv::GPKind;
using rdv::KernelConfig;

namespace {

// Matern 3/2 written out independently of the library kernel
double matern32(double a, double b, double ell, double sf2) {
    const double r = std::sqrt(3.0) * std::abs(a - b) / ell;
    return sf2 * (1.0 + r) * std::exp(-r);
}

struct Dense {
    double mean;
    double var;
};

Dense dense_posterior(const std::vector<double>& x, const std::vector<double>& y, double xs, const KernelConfig& k) {
    const auto n = static_cast<Eigen::Index>(x.size());
    Eigen::MatrixXd K(n, n);
    Eigen::VectorXd ks(n);
    Eigen::VectorXd yv(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) K(i, j) = matern32(x[i], x[j], k.length_scale, k.signal_variance);
        K(i, i) += k.noise_variance;
        ks(i) = matern32(x[i], xs, k.length_scale, k.signal_variance);
        yv(i) = y[i];
    }
    const Eigen::MatrixXd Kinv = K.inverse();
    return {ks.dot(Kinv * yv), k.signal_variance - ks.dot(Kinv * ks)};
}

// 10 Hz stream of (hist speed, deviation observation) from the traffic simulator
void stream(rdv::DeviationRule rule, double duration, unsigned seed, std::vector<double>& x, std::vector<double>& y) {
    rdv::DriverTruth d;
    d.deviation = rule;
    const auto prof = rdv::HistoricalProfile::sinusoid(8, 1, 10);
    std::mt19937_64 rng(seed);
    while (d.t + 1e-9 < duration) {
        auto [next, m] = rdv::step_driver(d, prof, 0.1, rng);
        d = next;
        x.push_back(m.hist_speed);
        y.push_back(m.speed_meas - m.hist_speed);
    }
}

rdv::DeviationRule sign_rule() {
    rdv::DeviationRule r;
    r.kind = rdv::DeviationRule::Kind::Sign;
    return r;
}

}  // namespace

TEST_CASE("noiseless interpolation") {
    KernelConfig k;
    k.noise_variance = 0.0;
    const std::vector<double> x = {7.2, 8.0, 8.9};
    const std::vector<double> y = {0.5, 0.5, 0.5};
    const auto gp = rdv::fit(x, y, k);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const auto p = gp.predict(x[i]);
        CHECK(p.mean == doctest::Approx(0.5).epsilon(1e-6));
        CHECK(p.variance <= 1e-6);
        CHECK(p.variance >= 0.0);
    }
}

TEST_CASE("full posterior matches a dense solve") {
    KernelConfig k;
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(7.0, 9.0);
    std::normal_distribution<double> n(0.0, 0.25);
    std::vector<double> x, y;
    for (int i = 0; i < 40; ++i) {
        x.push_back(u(rng));
        y.push_back(std::tanh((x.back() - 8.0) / 0.3) + n(rng));
    }
    const auto gp = rdv::fit(x, y, k);
    for (double xs = 6.5; xs <= 9.5; xs += 0.07) {
        const Dense d = dense_posterior(x, y, xs, k);
        const auto p = gp.predict(xs);
        CHECK(std::abs(p.mean - d.mean) <= 1e-6);
        CHECK(std::abs(p.variance - d.var) <= 1e-6);
    }
}

TEST_CASE("DTC with every input as inducing point equals the full GP") {
    KernelConfig k;
    std::vector<double> x = {7.1, 7.5, 7.9, 8.2, 8.6, 8.95};
    std::vector<double> y = {-1.0, -0.9, -0.2, 0.7, 1.1, 0.95};
    const auto full = rdv::fit(x, y, k, GPKind::Full);
    const auto dtc = rdv::fit(x, y, k, GPKind::DTC, x.size());
    CHECK(dtc.inducing_points().size() == x.size());
    for (double xi : x) CHECK(std::abs(dtc.mean(xi) - full.mean(xi)) <= 1e-6);
    for (double xs = 6.5; xs <= 9.5; xs += 0.1) CHECK(std::abs(dtc.variance(xs) - full.variance(xs)) <= 1e-6);
}

TEST_CASE("prior reversion far from data") {
    KernelConfig k;
    std::vector<double> x, y;
    stream(sign_rule(), 50.0, 3, x, y);
    for (GPKind kind : {GPKind::Full, GPKind::DTC}) {
        const auto gp = rdv::fit(x, y, k, kind);
        const auto p = gp.predict(gp.observed_max() + 10.0 * k.length_scale);
        CHECK(std::abs(p.mean) <= 1e-3);
        CHECK(p.variance == doctest::Approx(k.signal_variance).epsilon(1e-3));
        const auto mid = gp.predict(0.5 * (gp.observed_min() + gp.observed_max()));
        CHECK(mid.variance < gp.predict(gp.observed_min() - 1.0).variance);
        CHECK(mid.variance < gp.predict(gp.observed_max() + 1.0).variance);
    }
}

TEST_CASE("variance bounds and inducing points inside the observed set") {
    KernelConfig k;
    std::vector<double> x, y;
    stream(sign_rule(), 50.0, 5, x, y);
    const auto dtc = rdv::fit(x, y, k, GPKind::DTC, 30);
    CHECK(dtc.inducing_points().size() <= 30);
    for (double z : dtc.inducing_points()) CHECK(dtc.in_observed_set(z));
    const auto full = rdv::fit(x, y, k);
    for (double xs = 5.0; xs <= 11.0; xs += 0.05) {
        for (const auto* gp : {&full, &dtc}) {
            const double v = gp->variance(xs);
            CHECK(v >= 0.0);
            CHECK(v <= k.signal_variance + 1e-8);
        }
    }
}

TEST_CASE("adding a point at the query never raises its variance") {
    KernelConfig k;
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(7.0, 9.0);
    std::vector<double> x, y;
    for (int i = 0; i < 15; ++i) {
        x.push_back(u(rng));
        y.push_back(0.1 * i);
    }
    for (int trial = 0; trial < 20; ++trial) {
        const double xs = u(rng);
        const double before = rdv::fit(x, y, k).variance(xs);
        auto x2 = x;
        auto y2 = y;
        x2.push_back(xs);
        y2.push_back(0.0);
        CHECK(rdv::fit(x2, y2, k).variance(xs) <= before + 1e-12);
    }
}

TEST_CASE("sign stream: mean accuracy") {
    KernelConfig k;
    std::vector<double> x, y;
    stream(sign_rule(), 50.0, 42, x, y);
    const auto full = rdv::fit(x, y, k);
    const auto dtc = rdv::fit(x, y, k, GPKind::DTC, 30);
    const auto truth = sign_rule();
    double ss = 0.0;
    int n = 0;
    for (int i = 0; i <= 200; ++i) {
        const double xs = full.observed_min() + (full.observed_max() - full.observed_min()) * i / 200.0;
        if (std::abs(xs - 8.0) <= 0.1) continue;
        const double e = dtc.mean(xs) - truth(xs);
        ss += e * e;
        ++n;
    }
    CHECK(std::sqrt(ss / n) <= 0.3);
    CHECK(std::abs(full.mean(7.3) - truth(7.3)) <= 0.3);
}

TEST_CASE("predictive intervals cover a smooth deviation") {
    KernelConfig k;
    rdv::DeviationRule rule;
    rule.kind = rdv::DeviationRule::Kind::Tanh;
    rule.width = 0.5;
    std::vector<double> x, y;
    stream(rule, 60.0, 17, x, y);
    const auto gp = rdv::fit(x, y, k);
    int hit = 0;
    int n = 0;
    for (int i = 0; i <= 300; ++i) {
        const double xs = gp.observed_min() + (gp.observed_max() - gp.observed_min()) * i / 300.0;
        const auto p = gp.predict(xs);
        const double half = 1.96 * std::sqrt(p.variance + k.noise_variance);
        hit += std::abs(rule(xs) - p.mean) <= half ? 1 : 0;
        ++n;
    }
    CHECK(hit >= 0.85 * n);
}

TEST_CASE("fit errors and dataset window") {
    KernelConfig k;
    const std::vector<double> one = {8.0};
    CHECK_THROWS_AS(rdv::fit(one, one, k), rdv::InsufficientData);
    KernelConfig bad;
    bad.length_scale = 0.0;
    CHECK_THROWS_AS(bad.validate(), rdv::ValidationError);

    rdv::Dataset d(3);
    for (int i = 0; i < 5; ++i) d.append(i, 2 * i);
    CHECK(d.size() == 3);
    CHECK(d.inputs().front() == 2.0);
    CHECK(d.targets().back() == 8.0);

    // duplicated inputs with no noise need jitter but still factor
    KernelConfig k0;
    k0.noise_variance = 0.0;
    const std::vector<double> xd = {8.0, 8.0, 8.5};
    const std::vector<double> yd = {1.0, 1.0, 0.0};
    const auto gp = rdv::fit(xd, yd, k0);
    CHECK(gp.jitter() > 0.0);
    CHECK(gp.mean(8.0) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("prior model") {
    KernelConfig k;
    k.signal_variance = 0.04;
    const auto gp = rdv::GPModel::prior(k);
    CHECK(gp.mean(8.0) == 0.0);
    CHECK(gp.variance(8.0) == doctest::Approx(0.04));
}

TEST_CASE("benchmark smoke") {
    const std::vector<std::size_t> sizes = {10};
    const auto rows = rdv::benchmark_fit(sizes, 3);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].m == 10);
    CHECK(rows[0].full_median_us > 0.0);
    CHECK(rows[0].dtc_median_us > 0.0);
}
