#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "mixlab/distances.hpp"
#include "mixlab/experiments.hpp"

using namespace mixlab;
using namespace testing;

TEST_CASE("total variation") {
    CHECK(tv_distance({0.7, 0.3}, {0.2, 0.8}) == doctest::Approx(0.5));
    CHECK(tv_distance({0.25, 0.25, 0.5}, {0.25, 0.25, 0.5}) == 0.0);
    CHECK(tv_distance({1, 0, 0}, {0, 0, 1}) == 1.0);
}

TEST_CASE("evolution is a semigroup") {
    std::mt19937_64 rng(8);
    const Chain c = build_chain(random_network(9, rng), 0.5);
    const auto mu = point_mass(9, 3);
    const auto a = evolve(c, evolve(c, mu, 4), 7), b = evolve(c, mu, 11);
    for (std::size_t i = 0; i < 9; ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-14);
    const auto d = dense_power_row(c, 3, 11);
    for (std::size_t i = 0; i < 9; ++i) CHECK(std::abs(d[i] - b[i]) <= 1e-13);
}

TEST_CASE("two-state lazy profile") {
    const Chain c = build_chain(two_state(), 0.5);
    const auto p = tv_profile(c, 5);
    REQUIRE(p.values.size() == 6);
    CHECK(p.values[0] == doctest::Approx(0.5));
    for (std::size_t t = 1; t <= 5; ++t) CHECK(p.values[t] == doctest::Approx(0.0));
    const auto sep = separation_profile(c, 5);
    CHECK(sep.values[0] == 1.0);
    CHECK(sep.values[1] == doctest::Approx(0.0));
}

TEST_CASE("profile properties on random chains") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 20; ++trial) {
        const Chain c = build_chain(random_network(4 + trial, rng), 0.5);
        const auto pp = discrete_profiles(c, 60);
        double min_pi = 1.0;
        for (double p : c.stationary()) min_pi = std::min(min_pi, p);
        CHECK(std::abs(pp.tv.values[0] - (1.0 - min_pi)) <= 1e-14);
        for (std::size_t t = 1; t < pp.tv.values.size(); ++t) {
            CHECK(pp.tv.values[t] <= pp.tv.values[t - 1] + 1e-14);
            CHECK(pp.tv.values[t] <= pp.separation.values[t] + 1e-12);
        }
        // d-bar(s+t) <= d-bar(s) d-bar(t) with d-bar the pairwise distance; d <= d-bar <= 2d.
        for (std::size_t s = 1; s < 20; s += 3)
            for (std::size_t t = 1; t < 20; t += 4)
                CHECK(pp.tv.values[s + t] <= 4.0 * pp.tv.values[s] * pp.tv.values[t] + 1e-12);
        const auto l2 = l2_profile(c, 30);
        for (std::size_t t = 0; t <= 30; ++t) CHECK(2.0 * pp.tv.values[t] <= l2.values[t] + 1e-12);
    }
}

TEST_CASE("start sets") {
    std::mt19937_64 rng(21);
    const Chain c = build_chain(random_network(10, rng), 0.5);
    const auto all = tv_profile(c, 20);
    const auto one = tv_profile(c, 20, std::vector<State>{4});
    const auto row = evolve(c, point_mass(10, 4), 20);
    CHECK(one.values[20] == doctest::Approx(tv_distance(row, c.stationary())).epsilon(1e-12));
    for (std::size_t t = 0; t <= 20; ++t) CHECK(one.values[t] <= all.values[t] + 1e-15);
    CHECK_THROWS_AS(tv_profile(c, 20, std::vector<State>{10}), Rejection);
    CHECK_THROWS_AS(tv_profile(c, kExactStepCap + 1), Rejection);
}

TEST_CASE("continuous two-state swap") {
    const Chain swap = build_chain(two_state(), 0.0);
    const std::vector<double> grid = {0.0, 0.25, 1.0, 3.0};
    const auto pp = continuous_profiles(swap, grid, 1e-12);
    for (std::size_t i = 0; i < grid.size(); ++i)
        CHECK(std::abs(pp.tv.values[i] - 0.5 * std::exp(-2.0 * grid[i])) <= 1e-11);
}

TEST_CASE("continuous time and the lazy chain at double speed") {
    std::mt19937_64 rng(30);
    const auto net = random_network(8, rng);
    const std::vector<double> g = {0.5, 1.0, 4.0}, g2 = {1.0, 2.0, 8.0};
    const auto a = continuous_profiles(build_chain(net, 0.0), g, 1e-12);
    const auto b = continuous_profiles(build_chain(net, 0.5), g2, 1e-12);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(a.tv.values[i] - b.tv.values[i]) <= 1e-10);
}

TEST_CASE("mixing time") {
    DistanceProfile p;
    p.times = {0, 1, 2, 3};
    p.values = {1.0, 0.6, 0.3, 0.1};
    CHECK(mixing_time(p, 0.25).time == 3.0);
    CHECK(mixing_time(p, 0.3).time == 2.0);
    CHECK(mixing_time(p, 0.6).time == 1.0);
    const auto miss = mixing_time(p, 0.05);
    CHECK(miss.exhausted());
    CHECK(miss.final_value == 0.1);
}

TEST_CASE("cutoff diagnostics") {
    auto step_profile = [](std::size_t at, std::size_t len) {
        DistanceProfile p;
        for (std::size_t t = 0; t < len; ++t) {
            p.times.push_back(static_cast<double>(t));
            p.values.push_back(t < at ? 1.0 : 0.0);
        }
        return p;
    };
    auto geometric = [](double r, std::size_t len) {
        DistanceProfile p;
        for (std::size_t t = 0; t < len; ++t) {
            p.times.push_back(static_cast<double>(t));
            p.values.push_back(std::pow(r, static_cast<double>(t)));
        }
        return p;
    };
    const std::vector<double> eps = {0.25, 0.1, 0.01};
    SUBCASE("sharp steps") {
        const auto d = cutoff_diagnostics({{"a", step_profile(10, 50)}, {"b", step_profile(20, 60)}}, eps);
        for (const auto& r : d.rows) CHECK(r.ratio == 1.0);
        CHECK(d.cutoff_consistent);
    }
    SUBCASE("geometric decay grows with log(1/eps)") {
        const auto d = cutoff_diagnostics({{"a", geometric(0.9, 400)}, {"b", geometric(0.95, 800)}}, eps);
        CHECK(d.log_eps_growth);
        CHECK_FALSE(d.cutoff_consistent);
        CHECK(d.summary == "log-growth");
    }
    SUBCASE("constant members are flat") {
        const auto d = cutoff_diagnostics({{"a", geometric(0.9, 400)}, {"b", geometric(0.9, 400)}}, {0.25});
        CHECK(d.trend_by_eps.front().second == "flat");
    }
}
