#include <doctest.h>

#include <Eigen/Dense>
#include <boost/math/distributions/binomial.hpp>
#include <cmath>

#include "helpers.hpp"
#include "mixlab/constructions.hpp"
#include "mixlab/hitting.hpp"
#include "mixlab/spectral.hpp"
#include "mixlab/transforms.hpp"

using namespace mixlab;
using namespace testing;

namespace {

// Expected hitting time of `targets` for the lazy walk, by a dense solve.
double expected_hitting_time(const WeightedNetwork& net, Vertex start, const std::vector<Vertex>& targets) {
    const Chain c = build_chain(net, 0.5);
    const std::size_t n = c.size();
    std::vector<int> idx(n, -1);
    std::vector<char> is_target(n, 0);
    for (Vertex t : targets) is_target[t] = 1;
    int m = 0;
    for (std::size_t x = 0; x < n; ++x)
        if (!is_target[x]) idx[x] = m++;
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(m, m);
    Eigen::VectorXd rhs = Eigen::VectorXd::Ones(m);
    for (std::size_t x = 0; x < n; ++x) {
        if (idx[x] < 0) continue;
        for (const auto& e : c.row(x))
            if (idx[e.col] >= 0) A(idx[x], idx[e.col]) -= e.p;
    }
    const Eigen::VectorXd h = A.partialPivLu().solve(rhs);
    return idx[start] < 0 ? 0.0 : h(idx[start]);
}

}  // namespace

TEST_CASE("example33") {
    const auto b = example33(2);
    const auto& net = b.network;
    CHECK(net.num_vertices() == 5);
    const Chain c = build_chain(net, 0.5);
    const Vertex z = net.at("z"), a1 = net.at("a1"), a2 = net.at("a2");
    CHECK(c.at(z, a1) == doctest::Approx(0.25));
    CHECK(c.at(z, z) == doctest::Approx(0.5));
    CHECK(c.at(a1, z) == doctest::Approx(0.5 * 0.5 / 0.75));
    CHECK(c.at(a1, a2) == doctest::Approx(0.5 * 0.25 / 0.75));
    CHECK(c.at(a2, a1) == doctest::Approx(0.5));
    CHECK(c.stationary()[z] / c.stationary()[a1] == doctest::Approx(4.0 / 3));
    CHECK(net.has_label(a2, "a"));
    CHECK(net.has_label(net.at("b2"), "b"));
    CHECK_THROWS_AS(example33(1), Rejection);
}

TEST_CASE("example33 is symmetric under swapping the branches") {
    const auto net = example33(6).network;
    const Chain c = build_chain(net, 0.5);
    for (int i = 1; i <= 6; ++i) {
        const auto a = "a" + std::to_string(i), b = "b" + std::to_string(i);
        CHECK(c.stationary()[net.at(a)] == c.stationary()[net.at(b)]);
    }
    const auto ha = hitting_pmf(c, net.at("z"), {net.at("a6")}, 500);
    const auto hb = hitting_pmf(c, net.at("z"), {net.at("b6")}, 500);
    for (std::size_t t = 0; t <= 500; ++t) CHECK(ha.mass[t] == doctest::Approx(hb.mass[t]));
}

TEST_CASE("theorem1 chain") {
    CHECK_THROWS_AS(theorem1_chain(16, 0.5, 2), Rejection);
    CHECK_THROWS_AS(theorem1_chain(16, 0.0, 2), Rejection);
    CHECK_THROWS_AS(theorem1_chain(16, 0.125, 1), Rejection);
    CHECK_THROWS_AS(theorem1_chain(8, 0.125, 2), Rejection);  // floor(delta n / 2) = 0
    for (int n : {16, 32, 48}) {
        const double delta = 0.125;
        const int s = 3;
        const auto b = theorem1_chain(n, delta, s);
        const auto& net = b.network;
        const int h = n / 16;
        CHECK(net.vertices_with_label("red").size() == static_cast<std::size_t>(h - 1));
        CHECK(net.vertices_with_label("yellow").size() == static_cast<std::size_t>(h * (s - 1)));
        CHECK(net.is_connected());
        const Chain c = build_chain(net, 0.5);
        const double pi_z = c.stationary()[net.at("z")];
        CHECK(pi_z == doctest::Approx(b.metadata.at("pi_z").get<double>()));
        const double scaled = pi_z * std::exp2(delta * n);
        CHECK(scaled >= 1.0 / 8);
        CHECK(scaled <= 8.0);
    }
}

TEST_CASE("tori") {
    const auto t2 = torus3d(2);
    CHECK(t2.num_vertices() == 8);
    for (Vertex v = 0; v < 8; ++v) CHECK(t2.degree(v) == 3);
    const auto t3 = torus3d(3);
    CHECK(t3.num_vertices() == 27);
    for (Vertex v = 0; v < 27; ++v) CHECK(t3.degree(v) == 6);
    CHECK(t3.is_connected());
}

TEST_CASE("random regular expander") {
    const auto ex = random_regular_expander(64, 6, 99, 0.05);
    const auto& net = ex.network;
    CHECK(net.num_vertices() == 64);
    for (Vertex v = 0; v < 64; ++v) CHECK(net.degree(v) == 6);
    for (const auto& e : net.edges()) CHECK_FALSE(e.is_loop());
    CHECK(ex.certificate.gap >= 0.05);
    CHECK(std::abs(spectrum(build_chain(net, 0.5)).gap - ex.certificate.gap) <= 1e-10);
    const auto again = random_regular_expander(64, 6, 99, 0.05);
    REQUIRE(again.network.num_edges() == net.num_edges());
    for (std::size_t e = 0; e < net.num_edges(); ++e) {
        CHECK(again.network.edge(e).u == net.edge(e).u);
        CHECK(again.network.edge(e).v == net.edge(e).v);
    }
    CHECK_THROWS_AS(random_regular_expander(7, 3, 1, 0.01), Rejection);  // odd n d
}

TEST_CASE("binary tree") {
    const auto t = binary_tree(4);
    CHECK(t.num_vertices() == 31);
    CHECK(t.vertices_with_label("leaf").size() == 16);
    CHECK(t.has_label(t.at("o0"), "left"));
    CHECK(t.has_label(t.at("o01"), "right"));
    CHECK(t.has_label(t.at("o011"), "level:3"));
}

TEST_CASE("theorem2a D sets match a brute-force path audit") {
    Theorem2Params p;
    p.depth = 8;
    p.C = 1;
    p.threshold = DThreshold{0.5, true};
    const auto b = theorem2a(p);
    const auto& net = b.network;
    std::size_t audited = 0, marked = 0;
    for (int i = 1; 2 * i <= p.depth; ++i) {
        for (unsigned bits = 0; bits < (1u << i); ++bits) {
            std::string id = "o";
            for (int k = i - 1; k >= 0; --k) id += ((bits >> k) & 1u) ? '1' : '0';
            bool in = true;
            for (int j = 1; j <= i && in; ++j) {
                int diff = 0;
                for (int k = std::max(i - j, 1); k <= i; ++k) diff += id[k] == '0' ? 1 : -1;
                in = diff >= p.threshold(static_cast<double>(j));
            }
            CHECK(net.has_label(net.at(id), "in_D") == in);
            ++audited;
            marked += in;
        }
        const auto Di = net.vertices_with_label("D:" + std::to_string(i));
        CHECK(b.metadata.at("D_sizes")[i].get<std::size_t>() == Di.size());
        const boost::math::binomial_distribution<double> bin(i, 0.5);
        // S_i >= thr  <=>  #left >= (i + thr) / 2
        const double k = std::ceil((i + p.threshold(static_cast<double>(i))) / 2.0);
        const double tail = k <= 0 ? 1.0 : k > i ? 0.0 : boost::math::cdf(boost::math::complement(bin, k - 1));
        CHECK(static_cast<double>(Di.size()) / std::exp2(i) <= tail + 1e-12);
    }
    CHECK(audited == 30);
    CHECK(marked > 0);
    CHECK(net.has_label(net.at("o"), "D:0"));
    // every D vertex carries an 8-vertex torus
    CHECK(net.num_vertices() == (std::size_t{1} << 9) - 1 + 7 * (marked + 1));
}

TEST_CASE("theorem2a rejects a mismatched expander") {
    Theorem2Params p;
    p.depth = 4;
    p.expander = cycle(10);
    CHECK_THROWS_AS(theorem2a(p), Rejection);
}

TEST_CASE("theorem2b") {
    Theorem2bParams q;
    q.base.depth = 8;
    q.base.threshold = DThreshold{0.5, true};
    SUBCASE("variant 1 is theorem2a") {
        const auto a = theorem2a(q.base), b = theorem2b(q);
        CHECK(a.network.num_vertices() == b.network.num_vertices());
        CHECK(a.metadata.at("D_sizes") == b.metadata.at("D_sizes"));
    }
    SUBCASE("variant 2 first block size is a binomial tail") {
        q.variant = 2;
        q.ell = 4;
        q.r = 2;
        q.m = 1;
        const auto b = theorem2b(q);
        const double D1 = b.metadata.at("D_sizes")[1].get<double>();
        // L - R over 4 steps >= 2  <=>  at least 3 left children
        CHECK(D1 / 16.0 == doctest::Approx(5.0 / 16));
        q.m = 3;
        CHECK_THROWS_AS(theorem2b(q), Rejection);
        q.m = 1;
        q.r = 3;
        CHECK_THROWS_AS(theorem2b(q), Rejection);
    }
    SUBCASE("block condition only reads its own block") {
        std::vector<bool> f(12, false);
        for (int l = 8; l < 12; ++l) f[l] = true;
        CHECK(theorem2b_block_condition(f, 3, 4, 1));
        f[2] = true;
        f[5] = true;
        CHECK(theorem2b_block_condition(f, 3, 4, 1));
        f[10] = false;
        f[11] = false;
        CHECK_FALSE(theorem2b_block_condition(f, 3, 4, 1));
    }
}

TEST_CASE("theorem2c pair") {
    Theorem2Params p;
    p.depth = 6;
    const auto base = theorem2a(p).network;
    const auto pair = theorem2c_pair(p);
    const std::size_t left_edges = EdgeSelector::query("tree&left").select(base).size();
    CHECK(pair.stretched.network.num_vertices() == base.num_vertices() + 2 * base.num_edges());
    CHECK(pair.lumped.network.num_vertices() == pair.stretched.network.num_vertices() - left_edges);
    std::size_t loops = 0;
    for (const auto& e : pair.lumped.network.edges())
        if (e.is_loop()) {
            CHECK(e.weight == 2.0);
            ++loops;
        }
    CHECK(loops == left_edges);
    CHECK(theorem2c_gadget_left_probability(true) == doctest::Approx(0.6));
    CHECK(theorem2c_gadget_left_probability(false) == doctest::Approx(0.5));
}

TEST_CASE("theorem3 window") {
    CHECK_THROWS_AS(theorem3_window(10, 8), Rejection);
    CHECK(theorem3_window(10, 4).threshold == 1);
    CHECK(theorem3_window(15, 8).threshold == 1);
    CHECK(theorem3_window(15, 4).threshold == 2);
    for (auto [m, b] : {std::pair{10, 4}, {15, 8}, {15, 4}}) {
        const auto w = theorem3_window(m, b);
        CHECK(w.fraction >= 1.0 / b);
        CHECK(w.fraction <= 2.0 / b);
        CHECK(w.g == doctest::Approx(m / 5.0 - w.threshold));
    }
    const auto L = theorem3_layout({3, 10, 4});
    CHECK(L.blocks == 36);
    CHECK(L.last_level == 360);
    CHECK(L.perturbation_factor == doctest::Approx(1.0 + std::pow(4.0, -1.0 / 3)));
}

TEST_CASE("implicit walker matches the explicit theorem3 graph") {
    Theorem3Params p;
    p.s = 2;
    p.m = 1;
    p.b = 2;
    const auto L = theorem3_layout(p);
    REQUIRE(L.window.threshold == 0);
    const auto b = theorem3(cycle(5), p, L.last_level);
    const auto& net = b.network;
    const double exact = expected_hitting_time(net, net.at("o"), net.vertices_with_label("boundary"));
    const auto mc = mc_hitting(theorem3_walker_spec(L, false), theorem3_stop_rule(L), 20000, 5);
    CHECK(std::abs(mc.mean - exact) <= 4.0 * mc.std_error);
    CHECK_FALSE(mc.flagged);

    // same tree with the perturbation applied explicitly
    const auto pert = perturb_edges(net, EdgeSelector::query("perturb"), L.perturbation_factor);
    const double exact_p = expected_hitting_time(pert, pert.at("o"), pert.vertices_with_label("boundary"));
    const auto mcp = mc_hitting(theorem3_walker_spec(L, true), theorem3_stop_rule(L), 20000, 6);
    CHECK(std::abs(mcp.mean - exact_p) <= 4.0 * mcp.std_error);
}

TEST_CASE("walker on a single lazy edge is geometric") {
    TreeWalkerSpec spec;
    spec.depth = 1;
    spec.root_children = 1;
    const auto mc = mc_hitting(spec, [](const ImplicitTreeWalker& w) { return w.level() == 1; }, 40000, 3);
    CHECK(std::abs(mc.mean - 2.0) <= 4.0 * mc.std_error);
    CHECK(mc.std_error == doctest::Approx(std::sqrt(2.0 / 40000)).epsilon(0.05));
}

TEST_CASE("walker step mechanics") {
    TreeWalkerSpec spec;
    spec.depth = 3;
    spec.stretch_left = 2;
    ImplicitTreeWalker w(spec);
    w.step_with(0.1, 0.0);  // hold
    CHECK(w.level() == 0);
    CHECK(w.steps() == 1);
    w.step_with(0.9, 0.0);  // first child is the left one, two steps long
    CHECK_FALSE(w.at_node());
    w.step_with(0.9, 0.9);
    CHECK(w.at_node());
    CHECK(w.level() == 1);
    CHECK(w.g() == 1);
    CHECK(w.left_count(0, 1) == 1);
}

TEST_CASE("Monte Carlo is reproducible") {
    TreeWalkerSpec spec;
    spec.depth = 6;
    auto stop = [](const ImplicitTreeWalker& w) { return w.level() == 6; };
    const auto a = mc_hitting(spec, stop, 500, 42), b = mc_hitting(spec, stop, 500, 42), c = mc_hitting(spec, stop, 500, 43);
    CHECK(a.times == b.times);
    CHECK(a.times != c.times);
    const auto capped = mc_hitting(spec, stop, 100, 42, 5);
    CHECK(capped.flagged);
    CHECK(derive_seed(1, "x") == derive_seed(1, "x"));
    CHECK(derive_seed(1, "x") != derive_seed(1, "y"));
    CHECK(derive_seed(1, "x", 0) != derive_seed(1, "x", 1));
}

TEST_CASE("fact41 bias") {
    for (double v : fact41_bias_check(10, 0.0)) CHECK(v == doctest::Approx(0.5));
    const auto deep = fact41_bias_check(20, 0.21);
    CHECK(std::abs(deep[0] - fact41_limit(0.21)) <= 1e-3);
    CHECK(fact41_limit(0.21) > 0.5);
    CHECK(fact41_limit(0.5) > fact41_limit(0.21));

    // harmonic-measure oracle on the explicit tree
    const int depth = 6;
    const double eps = 0.3;
    const auto tree = perturb_edges(binary_tree(depth), EdgeSelector::query("left"), 1.0 + eps);
    const Chain c = build_chain(tree, 0.5);
    std::vector<State> left, right;
    for (Vertex v : tree.vertices_with_label("leaf")) (tree.id(v)[1] == '0' ? left : right).push_back(v);
    const double p = absorption_probability(c, point_mass(c.size(), tree.at("o")), left, right);
    CHECK(p == doctest::Approx(fact41_bias_check(depth, eps)[0]).epsilon(1e-10));
}

TEST_CASE("last visit to a level versus any visit") {
    // Leaves absorb; the last level-n vertex visited is the level-n ancestor of
    // the absorbing leaf, whose law is uniform on an unbiased tree.
    const int depth = 10, n = 5;
    const auto tree = binary_tree(depth);
    const Chain c = build_chain(tree, 0.5);
    const auto leaves = tree.vertices_with_label("leaf");
    const auto level = tree.vertices_with_label("level:" + std::to_string(n));
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<State> D;
        for (Vertex v : level)
            if (rng() % 4 == 0) D.push_back(v);
        if (D.empty()) D.push_back(level[trial % level.size()]);
        const double last = static_cast<double>(D.size()) / level.size();
        const double any = absorption_probability(c, point_mass(c.size(), tree.at("o")), D, leaves);
        CHECK(last / any <= 1.0 + 1e-12);
        CHECK(last / any >= 0.25);
    }
}
