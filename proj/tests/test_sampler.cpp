#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "rdv/sampler.hpp"

using rdv::Vec2;

namespace {

rdv::PathMap straight_map() {
    return rdv::PathMap({rdv::Path(1, {{0, 0}, {2000, 0}})}, {0, -100}, {0, -100});
}

rdv::PathMap two_map() {
    return rdv::PathMap({rdv::Path(1, {{0, 0}, {100, 0}, {100, 2000}}), rdv::Path(2, {{0, 0}, {100, 0}, {100, -2000}})},
                        {0, 50}, {0, 50});
}

rdv::SampleBatch costs_batch(const std::vector<std::vector<double>>& e) {
    rdv::SampleBatch b(e.size(), e[0].size());
    for (std::size_t i = 0; i < e.size(); ++i) {
        for (std::size_t j = 0; j < e[i].size(); ++j) {
            const auto k = b.index(i, j);
            b.energies[k] = e[i][j];
            b.times[k] = 10.0 * (i + 1) + j;
            b.points[k] = {static_cast<double>(i), static_cast<double>(j)};
        }
    }
    return b;
}

}  // namespace

TEST_CASE("tight proposal and determinism") {
    rdv::ProposalDistribution p;
    p.mean = {100.0, 100.0};
    p.variance = {1e-4, 1e-4};
    p.lambda = 1e-4;
    const auto map = two_map();
    std::mt19937_64 a(7), b(7);
    const auto ba = rdv::sample_batch(p, a, rdv::ReachableSet::all(map), 2.0);
    const auto bb = rdv::sample_batch(p, b, rdv::ReachableSet::all(map), 2.0);
    CHECK(ba.times == bb.times);
    CHECK(ba.cols == 5);
    for (double t : ba.times) CHECK(std::abs(t - 100.0) <= 0.05);
}

TEST_CASE("samples stay ahead of the minimum time and pruned rows are masked") {
    rdv::ProposalDistribution p;
    p.mean = {5.0, 5.0};
    p.variance = {100.0, 100.0};
    const auto map = two_map();
    rdv::ReachableSet rs = rdv::ReachableSet::all(map);
    rs.active = {2};
    std::mt19937_64 rng(3);
    const auto b = rdv::sample_batch(p, rng, rs, 12.0);
    for (double t : b.times) CHECK(t > 12.0);
    CHECK(b.active[0] == 0);
    CHECK(b.active[1] == 1);
}

TEST_CASE("propagation closed forms") {
    const auto map = straight_map();
    const auto prof = rdv::HistoricalProfile::constant(8.0);
    rdv::KernelConfig k;
    k.signal_variance = 0.04;
    const auto gp = rdv::GPModel::prior(k);
    const auto r = rdv::propagate_position(map.path(1), gp, prof, 0.0, 0.0, 10.0);
    CHECK(r.theta == doctest::Approx(80.0));
    CHECK(r.half_width == doctest::Approx(0.784));
    CHECK(r.point.x == doctest::Approx(80.0));
    CHECK_FALSE(r.clamped);

    const auto far = rdv::propagate_position(map.path(1), gp, prof, 1990.0, 0.0, 10.0);
    CHECK(far.clamped);
    CHECK(far.point == Vec2{2000, 0});
}

TEST_CASE("propagation on a fitted model agrees with a dense trapezoid") {
    rdv::DriverTruth d;
    d.deviation.kind = rdv::DeviationRule::Kind::Sign;
    const auto prof = rdv::HistoricalProfile::sinusoid(8, 1, 10);
    std::mt19937_64 rng(21);
    std::vector<double> x, y;
    while (d.t < 20.0 - 1e-9) {
        auto [next, m] = rdv::step_driver(d, prof, 0.1, rng);
        d = next;
        x.push_back(m.hist_speed);
        y.push_back(m.speed_meas - m.hist_speed);
    }
    const auto gp = rdv::fit(x, y, rdv::KernelConfig{}, rdv::GPKind::DTC, 30);
    const auto map = straight_map();
    const auto r = rdv::propagate_position(map.path(1), gp, prof, 100.0, 20.0, 50.0);
    const double dt = 1e-3;
    double oracle = 100.0;
    auto f = [&](double t) { return prof.speed(t) + gp.mean(prof.speed(t)); };
    for (double t = 20.0; t < 50.0 - 1e-12; t += dt) oracle += 0.5 * dt * (f(t) + f(std::min(50.0, t + dt)));
    CHECK(std::abs(r.theta - oracle) <= 2.0);
}

TEST_CASE("energy cost arithmetic") {
    rdv::CostContext ctx;
    ctx.uas_position = {0, 0};
    ctx.t0 = 0.0;
    ctx.landing_site = {0, 0};
    const Vec2 p{100, 0};
    const auto c = rdv::energy_cost(p, p, p, 10.0, ctx);
    CHECK(c.energy == doctest::Approx(2100.0));
    CHECK(c.rho_r == 0.0);

    // needs 20 m/s
    CHECK(std::isinf(rdv::energy_cost({200, 0}, {200, 0}, {200, 0}, 10.0, ctx).energy));

    // second leg once a landing time is known
    ctx.t_landing = 30.0;
    const auto c2 = rdv::energy_cost(p, p, p, 10.0, ctx);
    CHECK(c2.energy == doctest::Approx(2100.0 + 1.0 * 20.0 * (0.5 * 25.0 + 20.0)));

    // a landing time too soon for v_max slips to 100 m / 10 m/s after the sample
    ctx.t_landing = 12.0;
    const auto c3 = rdv::energy_cost(p, p, p, 10.0, ctx);
    CHECK(c3.v_l == doctest::Approx(10.0));
    CHECK(c3.energy == doctest::Approx(2100.0 + 1.0 * 10.0 * (0.5 * 100.0 + 20.0)));
}

TEST_CASE("downside range is nonnegative and zero without spread") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-500, 500);
    for (int k = 0; k < 500; ++k) {
        const Vec2 from{u(rng), u(rng)}, e{u(rng), u(rng)}, pl{u(rng), u(rng)}, mi{u(rng), u(rng)};
        CHECK(rdv::downside_range(from, e, pl, mi) >= 0.0);
        CHECK(rdv::downside_range(from, e, e, e) == 0.0);
    }
}

TEST_CASE("target path selection") {
    const auto b = costs_batch({{10, 30, 40}, {25, 50, 60}, {15, 20, 70}});
    const std::vector<double> w(3, 1.0);
    const auto worst = rdv::rank_and_select(b, 2, rdv::Strategy::WorstFirst, w);
    CHECK(worst.target_path == 2);
    CHECK(worst.best_cost == 25.0);
    const auto best = rdv::rank_and_select(b, 2, rdv::Strategy::BestFirst, w);
    CHECK(best.target_path == 1);
    CHECK(worst.best_cost >= best.best_cost);
    CHECK(best.elite(2, 0) == 30.0);
    CHECK(best.elite(2, 1) == 31.0);

    const auto single = costs_batch({{3, 1, 2}});
    const auto s1 = rdv::rank_and_select(single, 2, rdv::Strategy::WorstFirst, {1.0});
    const auto s2 = rdv::rank_and_select(single, 2, rdv::Strategy::BestFirst, {1.0});
    CHECK(s1.target_path == s2.target_path);
    CHECK(s1.t_rendezvous == s2.t_rendezvous);
}

TEST_CASE("weights and inactive rows") {
    auto b = costs_batch({{10, 30}, {25, 50}});
    const auto w = rdv::rank_and_select(b, 1, rdv::Strategy::WorstFirst, {3.0, 1.0});
    CHECK(w.target_path == 1);
    b.active[0] = 0;
    const auto m = rdv::rank_and_select(b, 1, rdv::Strategy::BestFirst, {1.0, 1.0});
    CHECK(m.target_path == 2);
}

TEST_CASE("row-infeasible fallback under worst first") {
    const double inf = std::numeric_limits<double>::infinity();
    const auto b = costs_batch({{10, 12, 14}, {100, inf, inf}});
    const auto r = rdv::rank_and_select(b, 2, rdv::Strategy::WorstFirst, {1.0, 1.0});
    CHECK(r.row_infeasible[1] == 1);
    CHECK(r.target_path == 1);
    CHECK(r.fallback);
}

TEST_CASE("selection is invariant to column permutation") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0, 100);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::vector<double>> e(3, std::vector<double>(5));
        for (auto& row : e)
            for (auto& v : row) v = u(rng);
        auto b = costs_batch(e);
        auto shuffled = b;
        for (std::size_t i = 0; i < 3; ++i) {
            std::vector<std::size_t> perm = {4, 2, 0, 3, 1};
            for (std::size_t j = 0; j < 5; ++j) {
                const auto from = b.index(i, perm[j]);
                const auto to = b.index(i, j);
                shuffled.energies[to] = b.energies[from];
                shuffled.times[to] = b.times[from];
                shuffled.points[to] = b.points[from];
            }
        }
        for (auto s : {rdv::Strategy::WorstFirst, rdv::Strategy::BestFirst}) {
            const auto r1 = rdv::rank_and_select(b, 2, s, {1, 1, 1});
            const auto r2 = rdv::rank_and_select(shuffled, 2, s, {1, 1, 1});
            CHECK(r1.target_path == r2.target_path);
            CHECK(r1.t_rendezvous == r2.t_rendezvous);
            CHECK(r1.elite_times == r2.elite_times);
        }
    }
}

TEST_CASE("parameter update") {
    rdv::ProposalDistribution p;
    p.mean = {0, 0};
    p.variance = {1, 1};
    p.lambda = 0.5;
    p.n_s = 3;
    p.n_e = 3;
    rdv::EliteResult e;
    e.n_e = 3;
    e.elite_times = {100, 100, 100, 90, 100, 110};
    const auto next = rdv::update_parameters(p, e);
    CHECK(next.mean[0] == 100.0);
    CHECK(next.variance[0] == 0.5);
    CHECK(next.mean[1] == doctest::Approx(100.0));
    CHECK(next.variance[1] == doctest::Approx(200.0 / 3.0 + 0.5));
    for (double v : next.variance) CHECK(v >= p.lambda);
}

TEST_CASE("parallel batch evaluation matches the serial reference") {
    const auto map = two_map();
    const auto prof = rdv::HistoricalProfile::sinusoid(8, 1, 10);
    std::vector<double> x, y;
    for (int i = 0; i < 100; ++i) {
        x.push_back(8.0 + std::sin(0.05 * i));
        y.push_back(x.back() > 8.0 ? 1.0 : -1.0);
    }
    const auto gp = rdv::fit(x, y, rdv::KernelConfig{}, rdv::GPKind::DTC, 30);
    auto prop = rdv::initial_proposal(map, {0, 0}, 0.0, 10.0, 60.0, 0.5, 40, 2);
    std::mt19937_64 rng(1);
    const auto base = rdv::sample_batch(prop, rng, rdv::ReachableSet::all(map), 2.0);
    rdv::BatchInputs in;
    in.map = &map;
    in.gp = &gp;
    in.profile = &prof;
    in.cost.landing_site = map.landing_site();
    auto a = base;
    auto b = base;
    rdv::evaluate_batch(a, in);
    rdv::evaluate_batch_reference(b, in);
    CHECK(a.theta == b.theta);
    CHECK(a.half_widths == b.half_widths);
    for (std::size_t k = 0; k < a.energies.size(); ++k) {
        CHECK((a.energies[k] == b.energies[k] || (std::isinf(a.energies[k]) && std::isinf(b.energies[k]))));
        CHECK(a.half_widths[k] >= 0.0);
    }
}
