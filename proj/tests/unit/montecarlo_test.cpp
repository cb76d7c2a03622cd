#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "recon/analysis.hpp"
#include "recon/evolve.hpp"
#include "recon/montecarlo.hpp"

using namespace recon;

TEST_CASE("sampling is deterministic in the seed") {
    const auto tree = build_regular_tree(2, 3, channel_from_theta_delta(0.6, 0.0));
    const auto a = sample_leaves(tree, RootCondition::stationary, 42);
    const auto b = sample_leaves(tree, RootCondition::stationary, 42);
    CHECK(a == b);
    const auto c = sample_leaves(tree, RootCondition::stationary, 43);
    CHECK(a != c);  // astronomically unlikely to collide

    const auto m1 = estimate_moments(tree, 2000, 7);
    const auto m2 = estimate_moments(tree, 2000, 7);
    CHECK(m1.m.mean == m2.m.mean);
    CHECK(m1.m.std_error == m2.m.std_error);
    CHECK(m1.m_plus.mean == m2.m_plus.mean);
    CHECK(m1.m_minus.mean == m2.m_minus.mean);
}

TEST_CASE("worker count does not change estimates") {
    const auto tree = build_regular_tree(2, 4, channel_from_theta_delta(0.6, 0.01));
    setenv("RECON_THREADS", "1", 1);
    const auto serial = estimate_moments(tree, 5000, 11);
    setenv("RECON_THREADS", "4", 1);
    const auto parallel = estimate_moments(tree, 5000, 11);
    unsetenv("RECON_THREADS");
    CHECK(serial.m.mean == parallel.m.mean);
    CHECK(serial.m.std_error == parallel.m.std_error);
    CHECK(serial.m_plus.mean == parallel.m_plus.mean);
    CHECK(serial.m_minus_rn.mean == parallel.m_minus_rn.mean);
}

TEST_CASE("forced-root depth-1 leaf frequencies match the channel row") {
    const auto tree = build_regular_tree(2, 1, channel_from_theta_delta(0.6, 0.0));
    int plus_count = 0;
    const int trials = 20000;
    for (int s = 0; s < trials; ++s) {
        const auto leaves = sample_leaves(tree, RootCondition::plus, s);
        for (Spin leaf : leaves)
            if (leaf == Spin::plus) ++plus_count;
    }
    const double freq = double(plus_count) / (2.0 * trials);
    CHECK(std::abs(freq - 0.8) < 0.01);  // ~4.6 sigma margin at n = 40000
}

TEST_CASE("zero-information channel gives exactly zero estimates") {
    const auto tree = build_regular_tree(2, 3, channel_from_theta_delta(0.0, 0.0));
    const auto moments = estimate_moments(tree, 100, 3);
    CHECK(moments.m.mean == 0.0);
    CHECK(moments.m.std_error == 0.0);
    CHECK(moments.m_plus.mean == 0.0);
    CHECK(estimate_tv(tree, 100, 3).mean == 0.0);
}

TEST_CASE("estimates agree with the exact depth-1 values") {
    const auto tree = build_regular_tree(2, 1, channel_from_theta_delta(0.6, 0.0));
    const auto moments = estimate_moments(tree, 200000, 123);
    const double exact = 153.0 / 289.0;
    CHECK(std::abs(moments.m.mean - exact) <= 4.0 * moments.m.std_error);
    CHECK(std::abs(moments.m_plus.mean - exact) <= 4.0 * moments.m_plus.std_error);
    CHECK(std::abs(moments.mixture_residual) <=
          4.0 * (moments.m.std_error + moments.m_plus.std_error + moments.m_minus.std_error));
    // RN-weighted diagnostics estimate the same quantities
    CHECK(std::abs(moments.m_plus_rn.mean - exact) <= 4.0 * moments.m_plus_rn.std_error);

    const auto tv = estimate_tv(tree, 200000, 9);
    CHECK(std::abs(tv.mean - 0.6) <= 4.0 * tv.std_error);
}

TEST_CASE("MC cross-validates the binned evolution at depth 8") {
    const Channel ch = channel_from_theta_delta(0.6, 0.05);
    const auto trace = evolve(2, ch, 8, BinningPolicy{1e-6, 20'000, true});
    const double exact = trace.levels[8].second_moment();
    const auto tree = build_regular_tree(2, 8, ch);
    const auto moments = estimate_moments(tree, 40000, 2718);
    CHECK(std::abs(moments.m.mean - exact) <= 4.0 * moments.m.std_error);
}

TEST_CASE("sampled magnetizations stay in range") {
    const Channel ch = channel_from_theta_delta(0.5, 0.1);
    const auto tree = build_regular_tree(2, 4, ch);
    const double lo = -ch.pi_plus / ch.pi_minus;
    for (int s = 0; s < 200; ++s) {
        const auto leaves = sample_leaves(tree, RootCondition::stationary, s);
        const double x = (root_posterior(tree, leaves) - ch.pi_plus) / ch.pi_minus;
        CHECK(x >= lo - 1e-12);
        CHECK(x <= 1.0 + 1e-12);
    }
    for (int s = 0; s < 50; ++s) {
        const auto moments = estimate_moments(tree, 64, s);
        CHECK(moments.m.mean >= 0.0);
        CHECK(moments.m.mean <= 1.0 + 1e-12);
    }
}

TEST_CASE("unbiasedness: every estimate within 4 sigma for >= 99 of 100 seeds") {
    const Channel ch = channel_from_theta_delta(0.5, 0.1);
    const auto tree = build_regular_tree(2, 2, ch);
    const MomentTriple exact = moments(brute_force_distribution(tree));
    const double exact_tv = tv_distance(brute_force_distribution(tree));
    int ok_m = 0, ok_plus = 0, ok_minus = 0, ok_tv = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto est = estimate_moments(tree, 4000, seed);
        const auto tv = estimate_tv(tree, 4000, seed);
        if (std::abs(est.m.mean - exact.m) <= 4.0 * est.m.std_error) ++ok_m;
        if (std::abs(est.m_plus.mean - exact.m_plus) <= 4.0 * est.m_plus.std_error) ++ok_plus;
        if (std::abs(est.m_minus.mean - exact.m_minus) <= 4.0 * est.m_minus.std_error) ++ok_minus;
        if (std::abs(tv.mean - exact_tv) <= 4.0 * tv.std_error) ++ok_tv;
    }
    CHECK(ok_m >= 99);
    CHECK(ok_plus >= 99);
    CHECK(ok_minus >= 99);
    CHECK(ok_tv >= 99);
}

TEST_CASE("single-vertex tree reproduces the observed-root law") {
    const Channel ch = channel_from_theta_delta(0.5, 0.1);
    const auto tree = build_regular_tree(2, 0, ch);
    const auto est = estimate_second_moment(tree, 50000, 5);
    // E[X^2] = pi+ * 1 + pi- * (pi+/pi-)^2, = 2/3 for this channel
    const double exact = ch.pi_plus + ch.pi_minus * (ch.pi_plus / ch.pi_minus) *
                                          (ch.pi_plus / ch.pi_minus);
    CHECK(std::abs(est.mean - exact) <= 4.0 * est.std_error);
}

TEST_CASE("estimate preconditions") {
    const auto tree = build_regular_tree(2, 2, channel_from_theta_delta(0.6, 0.0));
    CHECK_THROWS_AS(estimate_moments(tree, 1, 0), std::invalid_argument);
    CHECK_THROWS_AS(estimate_tv(tree, 0, 0), std::invalid_argument);
}
