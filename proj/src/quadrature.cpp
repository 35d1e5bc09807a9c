#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>

#include "rdv/numerics.hpp"

namespace rdv {

namespace {

// Kronrod abscissae on [0, 1) in increasing order; odd indices (1, 3, 5) and
// index 0 are not Gauss nodes, even indices 2, 4, 6 are.
constexpr std::array<double, 8> kNodes = {
    0.00000000000000000000000000000000000e+00,
    2.07784955007898467600689403773244913e-01,
    4.05845151377397166906606412076961463e-01,
    5.86087235467691130294144838258729598e-01,
    7.41531185599394439863864773280788407e-01,
    8.64864423359769072789712788640926201e-01,
    9.49107912342758524526189684047851262e-01,
    9.91455371120812639206854697526328517e-01,
};

constexpr std::array<double, 8> kKronrodWeights = {
    2.09482141084727828012999174891714264e-01,
    2.04432940075298892414161999234649085e-01,
    1.90350578064785409913256402421013683e-01,
    1.69004726639267902826583426598550284e-01,
    1.40653259715525918745189590510237920e-01,
    1.04790010322250183839876322541518017e-01,
    6.30920926299785532907006631892042867e-02,
    2.29353220105292249637320080589695920e-02,
};

// Gauss weights for the center and the nodes at kNodes[2], kNodes[4], kNodes[6].
constexpr std::array<double, 4> kGaussWeights = {
    4.17959183673469387755102040816326531e-01,
    3.81830050505118944950369775488975134e-01,
    2.79705391489276667901467771423779582e-01,
    1.29484966168869693270611432679082018e-01,
};

struct Panel {
    double a;
    double b;
    double value;
    double error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

}  // namespace

QuadratureResult gauss_kronrod_15(const std::function<double(double)>& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double abs_half = std::abs(half);

    std::array<double, 8> fplus{};
    std::array<double, 8> fminus{};
    const double fc = f(center);
    double kronrod = fc * kKronrodWeights[0];
    double gauss = fc * kGaussWeights[0];
    double resabs = std::abs(kronrod);
    for (std::size_t j = 1; j < 8; ++j) {
        const double dx = half * kNodes[j];
        fplus[j] = f(center + dx);
        fminus[j] = f(center - dx);
        const double sum = fplus[j] + fminus[j];
        kronrod += kKronrodWeights[j] * sum;
        resabs += kKronrodWeights[j] * (std::abs(fplus[j]) + std::abs(fminus[j]));
        if (j % 2 == 0) gauss += kGaussWeights[j / 2] * sum;
    }
    const double mean = 0.5 * kronrod;
    double resasc = kKronrodWeights[0] * std::abs(fc - mean);
    for (std::size_t j = 1; j < 8; ++j) {
        resasc += kKronrodWeights[j] * (std::abs(fplus[j] - mean) + std::abs(fminus[j] - mean));
    }

    QuadratureResult r;
    r.value = kronrod * half;
    r.evaluations = 15;
    r.intervals = 1;
    resabs *= abs_half;
    resasc *= abs_half;
    double err = std::abs((kronrod - gauss) * half);
    if (resasc != 0.0 && err != 0.0) {
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    }
    constexpr double eps = std::numeric_limits<double>::epsilon();
    constexpr double uflow = std::numeric_limits<double>::min();
    if (resabs > uflow / (50.0 * eps)) {
        err = std::max(eps * 50.0 * resabs, err);
    }
    r.error_estimate = err;
    return r;
}

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureOptions& opts) {
    if (!(a <= b)) throw DomainError("integrate: lower limit exceeds upper limit");
    if (a == b) return {};

    std::priority_queue<Panel> panels;
    QuadratureResult first = gauss_kronrod_15(f, a, b);
    panels.push({a, b, first.value, first.error_estimate});
    double total = first.value;
    double total_err = first.error_estimate;
    std::size_t evals = first.evaluations;

    auto converged = [&] {
        return total_err <= std::max(opts.abs_tol, opts.rel_tol * std::abs(total));
    };

    while (!converged()) {
        if (panels.size() >= opts.max_intervals) {
            QuadratureResult best{total, total_err, evals, panels.size()};
            throw QuadratureNonConvergence("integrate: subdivision limit of " +
                                               std::to_string(opts.max_intervals) + " intervals exceeded",
                                           best);
        }
        const Panel worst = panels.top();
        panels.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        const QuadratureResult left = gauss_kronrod_15(f, worst.a, mid);
        const QuadratureResult right = gauss_kronrod_15(f, mid, worst.b);
        evals += left.evaluations + right.evaluations;
        total += left.value + right.value - worst.value;
        total_err += left.error_estimate + right.error_estimate - worst.error;
        panels.push({worst.a, mid, left.value, left.error_estimate});
        panels.push({mid, worst.b, right.value, right.error_estimate});
        if (!std::isfinite(total)) {
            throw QuadratureNonConvergence("integrate: integrand produced a non-finite value",
                                           {total, total_err, evals, panels.size()});
        }
    }

    // Re-sum from the panels; the running totals accumulate cancellation error.
    double value = 0.0;
    double err = 0.0;
    const std::size_t n = panels.size();
    while (!panels.empty()) {
        value += panels.top().value;
        err += panels.top().error;
        panels.pop();
    }
    return {value, err, evals, n};
}

}  // namespace rdv
