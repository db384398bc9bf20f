#include <doctest.h>

#include <boost/math/distributions/binomial.hpp>
#include <cmath>

#include "helpers.hpp"
#include "mixlab/experiments.hpp"
#include "mixlab/hitting.hpp"

using namespace mixlab;
using namespace testing;

TEST_CASE("hitting pmf basics") {
    const Chain two = build_chain(two_state(), 0.5);
    const auto here = hitting_pmf(two, 0, {0}, 10);
    CHECK(here.mass[0] == 1.0);
    CHECK(here.residual == 0.0);

    const auto geo = hitting_pmf(two, 0, {1}, 30);
    CHECK(geo.mass[0] == 0.0);
    for (std::size_t k = 1; k <= 30; ++k) CHECK(geo.mass[k] == doctest::Approx(std::ldexp(1.0, -static_cast<int>(k))));
    CHECK(geo.residual == doctest::Approx(std::ldexp(1.0, -30)));
}

TEST_CASE("mass is conserved") {
    std::mt19937_64 rng(50);
    for (int trial = 0; trial < 20; ++trial) {
        const Chain c = build_chain(random_network(10, rng), 0.5);
        const auto h = hitting_pmf(c, 0, {7, 9}, 200);
        double s = h.residual;
        for (double m : h.mass) s += m;
        CHECK(std::abs(s - 1.0) <= 1e-12);
    }
}

TEST_CASE("double hitting") {
    const Chain two = build_chain(two_state(), 0.5);
    SUBCASE("x = y = z is the point mass at 0") {
        const auto a = hitting_pmf(two, 0, {0}, 10);
        const auto d = double_hitting_pmf(a, a);
        CHECK(d.mass[0] == 1.0);
    }
    SUBCASE("sum of two geometrics is negative binomial") {
        const auto a = hitting_pmf(two, 0, {1}, 60);
        const auto d = double_hitting_pmf(a, a);
        CHECK(d.mass[2] == doctest::Approx(0.25));
        CHECK(d.mass[3] == doctest::Approx(2.0 / 8));
        for (std::size_t k = 2; k <= 60; ++k)
            CHECK(d.mass[k] == doctest::Approx((k - 1) * std::ldexp(1.0, -static_cast<int>(k))));
        CHECK(std::abs(d.partial_mean() - 2.0 * a.partial_mean()) <= 1e-12);
    }
}

TEST_CASE("branched hitting") {
    // x - z - y: every path from x to y passes z, so the "before" part is zero.
    const Chain c = build_chain(path({1.0, 2.0}), 0.5);
    const auto b = branched_hitting_pmf(c, 0, 2, 1, 100);
    for (double m : b.before) CHECK(m == 0.0);
    const auto d = double_hitting_pmf(hitting_pmf(c, 0, {1}, 100), hitting_pmf(c, 2, {1}, 100));
    for (std::size_t t = 0; t <= 100; ++t) CHECK(std::abs(b.cdf(t) - d.cdf(t)) <= 1e-12);

    const auto same = branched_hitting_pmf(c, 1, 1, 0, 10);
    CHECK(same.before[0] == 1.0);
}

TEST_CASE("two-target split sums to one") {
    std::mt19937_64 rng(51);
    for (int trial = 0; trial < 10; ++trial) {
        const Chain c = build_chain(random_network(8, rng), 0.5);
        const auto sp = two_target_absorption(c, 0, 3, 6, 5000);
        double s = sp.residual;
        for (std::size_t k = 0; k < sp.at_y.size(); ++k) s += sp.at_y[k] + sp.at_z[k];
        CHECK(std::abs(s - 1.0) <= 1e-12);
        CHECK(sp.residual <= 1e-10);
        double to_y = 0.0;
        for (double m : sp.at_y) to_y += m;
        CHECK(std::abs(to_y - absorption_probability(c, point_mass(8, 0), {3}, {6})) <= 1e-9);
    }
}

TEST_CASE("decomposition through a separating state") {
    std::mt19937_64 rng(52);
    const Chain c = build_chain(path({1, 2, 1, 3, 1, 1, 2, 1}), 0.5);
    const auto rep = verify_lemma32(c, 1, 7, 4, 200);
    CHECK(rep.separated);
    REQUIRE(rep.equality_residual.has_value());
    CHECK(*rep.equality_residual <= 1e-12);
    CHECK(rep.min_margin_branched >= -1e-12);
    for (int trial = 0; trial < 20; ++trial) {
        const Chain r = build_chain(random_network(7, rng), 0.5);
        const auto rr = verify_lemma32(r, 0, 5, 3, 150);
        CHECK(rr.min_margin_branched >= -1e-12);
        CHECK(rr.min_margin_direct >= -1e-12);
    }
    const auto trivial = verify_lemma32(c, 3, 3, 3, 50);
    CHECK(*trivial.equality_residual <= 1e-14);
}

TEST_CASE("Poissonization") {
    HittingPMF one;
    one.mass = {0.0, 1.0};
    for (double t : {0.1, 1.0, 2.0}) CHECK(poissonize(one, 2.0, t).value == doctest::Approx(1.0 - std::exp(-2.0 * t)));
    HittingPMF zero;
    zero.mass = {1.0};
    CHECK(poissonize(zero, 2.0, 0.5).value == 1.0);

    HittingPMF part;
    part.mass = {0.0, 0.5};
    part.residual = 0.5;
    const auto pc = poissonize(part, 2.0, 1.0);
    CHECK(pc.error_bound == doctest::Approx(0.5));
}

TEST_CASE("quantiles") {
    const Chain two = build_chain(two_state(), 0.5);
    const auto geo = hitting_pmf(two, 0, {1}, 60);
    const auto sure = hitting_pmf(build_chain(two_state(), 0.0), 0, {1}, 10);
    CHECK(quantile_t_delta(sure, 0.0, 10).time == 1.0);
    const auto q1 = quantile_t_delta(geo, 0.1, 10);  // threshold 1/2
    CHECK(q1.time == 1.0);
    double last = 0.0;
    for (double d : {0.05, 0.1, 0.2, 0.4}) {
        const auto q = quantile_t_delta(geo, d, 10);
        REQUIRE(q.time.has_value());
        if (last > 0.0) CHECK(*q.time <= last);
        last = *q.time;
        const auto tau = quantile_tau_delta(geo, d, 10);
        CHECK(tau.time.has_value());
    }
}

TEST_CASE("rate function") {
    SUBCASE("printed form boundary") {
        const double la = psi_lambda_alpha(0.5, PsiForm::Printed);
        CHECK(la == doctest::Approx(-0.27503).epsilon(1e-4));
        CHECK(std::abs(psi_discriminant(0.5, la, PsiForm::Printed)) <= 1e-12);
        CHECK(psi_F(0.5, la, PsiForm::Printed) == doctest::Approx(3.0 * (std::exp(-la) - 0.5)));
    }
    SUBCASE("consistent form") {
        CHECK(psi_F(0.5, 0.0, PsiForm::Consistent) == doctest::Approx(1.0));
        const double la = psi_lambda_alpha(0.5, PsiForm::Consistent);
        CHECK(std::abs(psi_discriminant(0.5, la, PsiForm::Consistent)) <= 1e-12);
        // Mean passage time per level is F'(0) = 6.
        const double h = 1e-6;
        CHECK((psi_F(0.5, h, PsiForm::Consistent) - psi_F(0.5, -h, PsiForm::Consistent)) / (2 * h) ==
              doctest::Approx(6.0).epsilon(1e-5));
        CHECK(rate_function_psi(0.5, 6.0).value == doctest::Approx(0.0).epsilon(1e-8));
        double prev = -1.0;
        for (double r : {1.0, 2.0, 3.0, 4.0}) {
            const double v = rate_function_psi(0.5, r).value;
            CHECK(v >= 0.0);
            if (prev >= 0.0) CHECK(v < prev);
            prev = v;
        }
    }
}

TEST_CASE("local CLT values") {
    const auto a = local_clt_check(400, 1);
    CHECK(a.value >= 0.1);
    CHECK(a.value <= 10.0);
    const boost::math::binomial_distribution<double> bin(400, 0.5);
    CHECK(a.tail == doctest::Approx(boost::math::cdf(boost::math::complement(bin, 209.0))).epsilon(1e-10));
    const auto b = local_clt_check(400, 4);
    CHECK(b.value >= 0.05);
    CHECK(b.value <= 20.0);
    CHECK_FALSE(local_clt_check(4, 2).degenerate);
    CHECK_THROWS_AS(local_clt_check(401, 1), Rejection);
}

TEST_CASE("binomial log tail") {
    CHECK(std::exp(log_binomial_upper_tail(10, 0)) == doctest::Approx(1.0));
    CHECK(std::exp(log_binomial_upper_tail(10, 10)) == doctest::Approx(std::ldexp(1.0, -10)));
    CHECK(std::exp(log_binomial_upper_tail(10, 6)) == doctest::Approx(386.0 / 1024));
}

TEST_CASE("absorption probability against gambler's ruin") {
    const Chain c = build_chain(path({1, 1, 1, 1, 1, 1}), 0.5);
    for (State x = 0; x <= 6; ++x)
        CHECK(absorption_probability(c, point_mass(7, x), {6}, {0}) == doctest::Approx(x / 6.0));
}
