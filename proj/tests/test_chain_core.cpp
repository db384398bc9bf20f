#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "helpers.hpp"
#include "mixlab/experiments.hpp"
#include "mixlab/io.hpp"
#include "mixlab/spectral.hpp"

using namespace mixlab;
using namespace testing;

TEST_CASE("single edge, holding 1/2") {
    const Chain c = build_chain(two_state(), 0.5);
    CHECK(c.at(0, 0) == doctest::Approx(0.5));
    CHECK(c.at(0, 1) == doctest::Approx(0.5));
    CHECK(c.stationary()[0] == doctest::Approx(0.5));
    CHECK(c.stationary()[1] == doctest::Approx(0.5));
}

TEST_CASE("path with weights (1,2) has pi = (1/6, 1/2, 1/3)") {
    const Chain c = build_chain(path({1.0, 2.0}), 0.0);
    CHECK(c.stationary()[0] == doctest::Approx(1.0 / 6).epsilon(1e-15));
    CHECK(c.stationary()[1] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(c.stationary()[2] == doctest::Approx(1.0 / 3).epsilon(1e-15));
}

TEST_CASE("lazy kernel is (I + P)/2 entrywise") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        const auto net = random_network(7, rng);
        const auto P = build_chain(net, 0.0).dense(), L = build_chain(net, 0.5).dense();
        for (std::size_t i = 0; i < 7; ++i)
            for (std::size_t j = 0; j < 7; ++j)
                CHECK(std::abs(L[i * 7 + j] - (0.5 * (i == j) + 0.5 * P[i * 7 + j])) <= 1e-15);
    }
}

TEST_CASE("self-loop counts once in the vertex conductance") {
    WeightedNetwork net = two_state();
    net.add_edge(1, 1, 2.0);
    CHECK(net.conductance(1) == doctest::Approx(3.0));
    CHECK(net.total_conductance() == doctest::Approx(4.0));
    const Chain c = build_chain(net, 0.0);
    CHECK(c.at(1, 1) == doctest::Approx(2.0 / 3));
    CHECK(c.stationary()[1] == doctest::Approx(0.75));
}

TEST_CASE("invalid networks are rejected") {
    WeightedNetwork net = two_state();
    CHECK_THROWS_AS(net.add_edge(0, 1, 1.0), Rejection);
    net.add_vertex("w");
    CHECK_THROWS_AS(net.add_edge(0, 2, 0.0), Rejection);
    CHECK_THROWS_AS(build_chain(net, 0.5), Rejection);  // w is isolated
    CHECK_THROWS_AS(build_chain(two_state(), 1.0), Rejection);
}

TEST_CASE("built chains are stochastic and stationary") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        const auto net = random_network(2 + trial % 15, rng);
        const Chain c = build_chain(net, trial % 2 ? 0.5 : 0.0);
        for (State x = 0; x < c.size(); ++x) {
            double s = 0.0;
            for (const auto& e : c.row(x)) {
                CHECK(e.p >= 0.0);
                s += e.p;
            }
            CHECK(std::abs(s - 1.0) <= 1e-12);
        }
        const auto pp = c.step(c.stationary());
        for (State x = 0; x < c.size(); ++x) CHECK(std::abs(pp[x] - c.stationary()[x]) <= 1e-10);
        CHECK(check_reversibility(c, 1e-12).reversible);
    }
}

TEST_CASE("lazy network chains have spectrum in [0,1]") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        const auto sp = spectrum(build_chain(random_network(5 + 20 * trial, rng), 0.5), SpectrumMode::Dense);
        CHECK(sp.eigenvalues.front() <= 1.0 + 1e-10);
        CHECK(sp.eigenvalues.back() >= -1e-10);
    }
}

TEST_CASE("heat kernel") {
    const Chain swap = build_chain(two_state(), 0.0);
    SUBCASE("t = 0 is the point mass") {
        const auto h = heat_kernel_row(swap, 1, 0.0);
        CHECK(h[0] == 0.0);
        CHECK(h[1] == 1.0);
    }
    SUBCASE("two-state closed form") {
        for (double t : {0.1, 0.7, 2.5, 10.0}) {
            const auto h = heat_kernel_row(swap, 0, t, 1e-12);
            CHECK(std::abs(h[0] - 0.5 * (1.0 + std::exp(-2.0 * t))) <= 1e-12);
        }
    }
    SUBCASE("running the lazy chain twice as fast") {
        std::mt19937_64 rng(9);
        for (int trial = 0; trial < 10; ++trial) {
            const auto net = random_network(6, rng);
            const Chain P = build_chain(net, 0.0), L = build_chain(net, 0.5);
            for (double t : {0.5, 3.0}) {
                const auto a = heat_kernel_row(P, 2, t, 1e-10), b = heat_kernel_row(L, 2, 2 * t, 1e-10);
                for (std::size_t y = 0; y < 6; ++y) CHECK(std::abs(a[y] - b[y]) <= 2e-10);
            }
        }
    }
}

TEST_CASE("directed 3-cycle is not reversible") {
    const Chain c(3, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 0, 1.0}}, {1.0 / 3, 1.0 / 3, 1.0 / 3}, 0.0, false);
    const auto rep = check_reversibility(c, 1e-12);
    CHECK_FALSE(rep.reversible);
    CHECK(rep.max_violation == doctest::Approx(1.0 / 3));
}

TEST_CASE("network JSON round trip") {
    WeightedNetwork net = path({0.5, 2.0, 1.0});
    net.add_label(1, "marked");
    net.add_edge(0, 0, 2.0, {"loop"});
    const auto back = io::network_from_json(io::network_to_json(net));
    REQUIRE(back.num_vertices() == net.num_vertices());
    REQUIRE(back.num_edges() == net.num_edges());
    CHECK(back.has_label(1, "marked"));
    CHECK(back.weight_between(2, 3) == 1.0);
    CHECK(back.weight_between(0, 0) == 2.0);

    const auto tmp = std::filesystem::temp_directory_path() / "mixlab_roundtrip.json";
    io::save_network(net, tmp);
    CHECK(io::network_to_json(io::load_network(tmp)) == io::network_to_json(net));
    std::filesystem::remove(tmp);
}

TEST_CASE("loader rejects bad input") {
    using io::json;
    const json neg = {{"vertices", {{{"id", "a"}}, {{"id", "b"}}}}, {"edges", {{{"u", "a"}, {"v", "b"}, {"w", -1.0}}}}};
    CHECK_THROWS_AS(io::network_from_json(neg), Rejection);
    const json asym = {{"vertices", {{{"id", "a"}}, {{"id", "b"}}}},
                       {"edges", {{{"u", "a"}, {"v", "b"}, {"w", 1.0}}, {{"u", "b"}, {"v", "a"}, {"w", 2.0}}}}};
    CHECK_THROWS_AS(io::network_from_json(asym), Rejection);
    const json unknown = {{"vertices", {{{"id", "a"}}}}, {"edges", {{{"u", "a"}, {"v", "z"}, {"w", 1.0}}}}};
    CHECK_THROWS_AS(io::network_from_json(unknown), Rejection);
    const json sym = {{"vertices", {{{"id", "a"}}, {{"id", "b"}}}},
                      {"edges", {{{"u", "a"}, {"v", "b"}, {"w", 1.0}}, {{"u", "b"}, {"v", "a"}, {"w", 1.0}}}}};
    CHECK(io::network_from_json(sym).num_edges() == 1);
}

TEST_CASE("girth") {
    CHECK(cycle(5).girth() == 5);
    CHECK_FALSE(path({1, 1, 1}).girth().has_value());
    CHECK(complete(4).girth() == 3);
}
