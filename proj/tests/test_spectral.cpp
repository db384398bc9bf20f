#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "mixlab/constructions.hpp"
#include "mixlab/distances.hpp"
#include "mixlab/experiments.hpp"
#include "mixlab/spectral.hpp"
#include "mixlab/transforms.hpp"

using namespace mixlab;
using namespace testing;

TEST_CASE("two-state and 4-cycle spectra") {
    const auto two = spectrum(build_chain(two_state(), 0.5));
    REQUIRE(two.eigenvalues.size() == 2);
    CHECK(two.eigenvalues[0] == doctest::Approx(1.0));
    CHECK(two.eigenvalues[1] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(two.t_rel == doctest::Approx(1.0));

    const auto c4 = spectrum(build_chain(cycle(4), 0.5));
    const std::vector<double> want = {1.0, 0.5, 0.5, 0.0};
    for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(c4.eigenvalues[i] - want[i]) <= 1e-12);
    CHECK(c4.t_rel == doctest::Approx(2.0));
}

TEST_CASE("eigenvalues match the non-symmetric kernel and its trace") {
    std::mt19937_64 rng(40);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 5 + 7 * trial;
        const Chain c = build_chain(random_network(n, rng), trial % 2 ? 0.5 : 0.2);
        const auto sp = spectrum(c, SpectrumMode::Dense);
        const auto P = c.dense();
        Eigen::MatrixXd M(n, n);
        double trace = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            trace += P[i * n + i];
            for (std::size_t j = 0; j < n; ++j) M(i, j) = P[i * n + j];
        }
        Eigen::EigenSolver<Eigen::MatrixXd> es(M, false);
        std::vector<double> ref;
        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
            CHECK(std::abs(es.eigenvalues()[i].imag()) <= 1e-8);
            ref.push_back(es.eigenvalues()[i].real());
        }
        std::sort(ref.rbegin(), ref.rend());
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(std::abs(ref[i] - sp.eigenvalues[i]) <= 1e-8);
            sum += sp.eigenvalues[i];
        }
        CHECK(std::abs(sum - trace) <= 1e-10);
        CHECK(sp.residual <= 1e-10);
    }
}

TEST_CASE("second eigenvector") {
    std::mt19937_64 rng(41);
    const Chain c = build_chain(random_network(12, rng), 0.5);
    const auto f = second_eigenvector(c);
    const double l2 = spectrum(c).lambda2;
    const auto P = c.dense();
    for (std::size_t i = 0; i < 12; ++i) {
        double pf = 0.0;
        for (std::size_t j = 0; j < 12; ++j) pf += P[i * 12 + j] * f[j];
        CHECK(std::abs(pf - l2 * f[i]) <= 1e-9);
    }
}

TEST_CASE("iterative and dense spectra agree") {
    std::mt19937_64 rng(42);
    const Chain c = build_chain(random_network(400, rng), 0.5);
    const auto d = spectrum(c, SpectrumMode::Dense), it = spectrum(c, SpectrumMode::Iterative);
    CHECK(std::abs(d.lambda2 - it.lambda2) <= 1e-8);
    CHECK(std::abs(d.lambda_min - it.lambda_min) <= 1e-8);
}

TEST_CASE("spectrum rejects non-reversible chains") {
    const Chain c(3, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 0, 1.0}}, {1.0 / 3, 1.0 / 3, 1.0 / 3}, 0.0, false);
    CHECK_THROWS_AS(spectrum(c), Rejection);
}

TEST_CASE("Cheeger constant") {
    CHECK(cheeger(build_chain(two_state(), 0.5), CheegerMode::Exact).phi == doctest::Approx(0.5));
    CHECK(cheeger(build_chain(cycle(4), 0.5), CheegerMode::Exact).phi == doctest::Approx(0.25));
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 20; ++trial) {
        const Chain c = build_chain(random_network(6 + trial % 10, rng), 0.5);
        const auto exact = cheeger(c, CheegerMode::Exact), sweep = cheeger(c, CheegerMode::Sweep);
        CHECK(sweep.phi >= exact.phi - 1e-12);
        CHECK(conductance_ratio(c, exact.set) == doctest::Approx(exact.phi));
        const auto ineq = check_cheeger_inequality(c);
        CHECK(ineq.holds);
        CHECK(ineq.lower <= ineq.gap + 1e-9);
        CHECK(ineq.gap <= ineq.upper + 1e-9);
    }
}

TEST_CASE("Cheeger inequality examples") {
    const auto two = check_cheeger_inequality(build_chain(two_state(), 0.5));
    CHECK(two.lower == doctest::Approx(0.125));
    CHECK(two.gap == doctest::Approx(1.0));
    CHECK(two.upper == doctest::Approx(1.0));
    const auto c4 = check_cheeger_inequality(build_chain(cycle(4), 0.5));
    CHECK(c4.lower == doctest::Approx(1.0 / 32));
    CHECK(c4.gap == doctest::Approx(0.5));
    CHECK(c4.upper == doctest::Approx(0.5));
}

TEST_CASE("relaxation time bounds the mixing time") {
    const Chain two = build_chain(two_state(), 0.5);
    const auto rep = check_trel_bounds(two, {0.25}, tv_profile(two, 10));
    CHECK(rep.rows[0].lower == doctest::Approx(0.0));
    CHECK(rep.rows[0].upper == doctest::Approx(std::log(8.0)));
    CHECK(rep.holds);
    std::mt19937_64 rng(44);
    for (int trial = 0; trial < 10; ++trial) {
        const Chain c = build_chain(random_network(10 + trial, rng), 0.5);
        CHECK(check_trel_bounds(c, {0.25, 0.1, 0.01}, tv_profile(c, 3000)).holds);
    }
}

TEST_CASE("induced sub-chain step count") {
    CHECK(prop46_steps(0.5, 6, 100, 0.3) == 65);
    CHECK(prop46_steps(1.0, 1, 1, 1.5) == 0);
}

TEST_CASE("L2 sandwich") {
    std::mt19937_64 rng(45);
    for (int trial = 0; trial < 10; ++trial) {
        const Chain c = build_chain(random_network(8 + trial, rng), 0.5);
        CHECK(check_l2_sandwich(c, point_mass(c.size(), 0), 50).holds);
    }
}

TEST_CASE("stretching an expander scales the relaxation time like s^2") {
    const auto ex = random_regular_expander(64, 3, 7, 0.02).network;
    std::vector<RelaxationMember> fam;
    for (int s : {2, 4, 8})
        fam.push_back({"s=" + std::to_string(s), static_cast<double>(s),
                       build_chain(stretch_edges(ex, EdgeSelector::all(), s), 0.5)});
    const auto rep = check_relaxation_lemma(fam, 2.0);
    CHECK(rep.band <= 4.0);
    CHECK(rep.exponent == doctest::Approx(2.0).epsilon(0.25));

    std::vector<RelaxationMember> same;
    for (int k : {1, 2, 3}) same.push_back({"k", static_cast<double>(k), build_chain(ex, 0.5)});
    CHECK(std::abs(check_relaxation_lemma(same, 2.0).exponent) <= 1e-9);
}

TEST_CASE("induced sub-chain bound on a path of cliques") {
    // Two dense blobs joined by a long path; A is the first blob plus a few path vertices.
    WeightedNetwork net;
    for (int i = 0; i < 12; ++i) net.add_vertex("k" + std::to_string(i));
    for (int i = 0; i < 12; ++i)
        for (int j = i + 1; j < 12; ++j) net.add_edge(i, j, 5.0);
    Vertex prev = 0;
    for (int i = 0; i < 6; ++i) {
        const Vertex v = net.add_vertex("p" + std::to_string(i));
        net.add_edge(prev, v, 0.01);
        prev = v;
    }
    std::vector<Vertex> A;
    for (Vertex v = 0; v < 14; ++v) A.push_back(v);
    const auto rep = induced_subchain_bound(net, A, 0.3, 3);
    CHECK(rep.start_in_interior);
    CHECK(rep.r > 0);
    if (rep.hypotheses_hold()) CHECK(rep.verdict);
}
