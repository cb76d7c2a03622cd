// Acceptance suite: one pass/fail line per criterion, exit code = number of
// failures. An optional argument selects a single criterion by number.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "recon/analysis.hpp"
#include "recon/evolve.hpp"
#include "recon/montecarlo.hpp"

using namespace recon;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", x);
    return buf;
}

// ---------------------------------------------------------------------------
// 1. Appendix values: delta_bar(0) = 1/3 exactly, delta_bar(1/sqrt 2) ~ 0.016.
Outcome criterion_appendix_values() {
    Outcome out;
    const BoundReport zero = delta0_bound(0.0);
    out.require(std::abs(zero.delta_bar - 1.0 / 3.0) <= 1e-12,
                "delta_bar(0) = " + fmt(zero.delta_bar) + " != 1/3");
    const BoundReport ks = delta0_bound(1.0 / std::sqrt(2.0));
    out.require(ks.delta_bar >= 0.014 && ks.delta_bar <= 0.018,
                "delta_bar(1/sqrt2) = " + fmt(ks.delta_bar) + " outside [0.014, 0.018]");
    out.detail = "delta_bar(0) = " + fmt(zero.delta_bar) +
                 ", delta_bar(1/sqrt2) = " + fmt(ks.delta_bar);
    return out;
}

// ---------------------------------------------------------------------------
// 2. Oracle equivalence on all complete binary/ternary trees of depth <= 3
//    for four channels; float discrepancy <= 1e-10, exact mode identical.
Outcome criterion_oracle_equivalence() {
    Outcome out;
    const std::vector<std::pair<std::string, std::string>> params = {
        {"0.6", "0"}, {"0.5", "0.1"}, {"-0.4", "0.05"}, {"0.3", "0.02"}};
    double worst = 0.0;
    for (const auto& [theta_text, delta_text] : params) {
        const ExactChannel exact_ch = channel_from_theta_delta(
            rational_from_decimal(theta_text), rational_from_decimal(delta_text));
        const Channel ch = to_double_channel(exact_ch);
        for (int arity : {2, 3}) {
            for (int depth = 0; depth <= 3; ++depth) {
                const std::string label = "(" + theta_text + "," + delta_text + ") d=" +
                                          std::to_string(arity) + " n=" + std::to_string(depth);
                const ExactTreeSpec exact_tree = build_regular_tree(arity, depth, exact_ch);
                // reference law: enumeration when it fits the cap, otherwise the
                // distributive likelihood-pair marginalization (identical on overlap)
                const ExactMagnetization oracle =
                    exact_tree.n_leaves() <= 20 ? brute_force_distribution(exact_tree)
                                                : likelihood_pair_distribution(exact_tree);
                if (exact_tree.n_leaves() <= 20) {
                    const ExactMagnetization pair_law = likelihood_pair_distribution(exact_tree);
                    out.require(pair_law.values == oracle.values && pair_law.probs == oracle.probs,
                                label + ": pair-law route disagrees with enumeration");
                }

                // exact mode: atom-for-atom identical
                const auto exact_run = evolve_exact(arity, exact_ch, depth);
                out.require(exact_run[depth].values == oracle.values &&
                                exact_run[depth].probs == oracle.probs,
                            label + ": exact evolve differs from the oracle");

                // float mode: discrepancy <= 1e-10
                const auto run = evolve(arity, ch, depth, BinningPolicy::none());
                const double disc = recon::detail::distribution_discrepancy(
                    run.levels[depth], to_double_distribution(oracle), 1e-9);
                worst = std::max(worst, disc);
                out.require(disc <= 1e-10, label + ": float discrepancy " + fmt(disc));
            }
        }
    }
    out.detail = "max float atom discrepancy " + fmt(worst);
    return out;
}

// ---------------------------------------------------------------------------
// 3. Identity suite on 50 random shared-stationary trees.
Outcome criterion_identity_suite() {
    Outcome out;
    std::mt19937 rng(20240811);
    std::uniform_real_distribution<double> gap_draw(0.0, 0.15);
    std::uniform_int_distribution<int> arity_draw(0, 3);
    double worst = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
        const double g = gap_draw(rng);
        const double neg_limit = (1.0 - g) / (1.0 + g);
        std::uniform_real_distribution<double> theta_draw(-std::min(0.75, neg_limit * 0.999),
                                                          0.75);
        TreeSpec tree;
        do {
            tree = TreeSpec{};
            tree.parent = {-1};
            tree.edge_channel = {-1};
            std::vector<int> depth{0};
            for (std::size_t v = 0; v < tree.parent.size(); ++v) {
                if (depth[v] >= 3) continue;
                int kids = arity_draw(rng);
                if (v == 0 && kids == 0) kids = 1;
                for (int c = 0; c < kids; ++c) {
                    const double theta = theta_draw(rng);
                    tree.channels.push_back(channel_from_theta_delta(theta, g * (1.0 - theta)));
                    tree.parent.push_back(static_cast<std::int32_t>(v));
                    tree.edge_channel.push_back(
                        static_cast<std::int32_t>(tree.channels.size() - 1));
                    depth.push_back(depth[v] + 1);
                }
            }
            tree.finalize();
        } while (tree.n_leaves() > 14);
        const IdentityReport report = verify_identities(tree, 1e-10);
        worst = std::max(worst, report.max_residual);
        out.require(report.pass, "tree " + std::to_string(rep) + " max residual " +
                                     fmt(report.max_residual));
    }
    out.detail = "max residual over 50 trees " + fmt(worst);
    return out;
}

// ---------------------------------------------------------------------------
// 4. Symmetric moment recursion at depth <= 15 plus the exact depth-1 value.
Outcome criterion_symmetric_recursion() {
    Outcome out;
    double worst_slack = 1e300;
    for (double theta : {0.3, 0.5, 0.6, 1.0 / std::sqrt(2.0)}) {
        const Channel ch = channel_from_theta_delta(theta, 0.0);
        const EvolutionTrace trace = evolve(2, ch, 15, BinningPolicy{1e-6, 20'000, true});
        double prev = trace.levels[0].second_moment();
        for (int n = 1; n <= 15; ++n) {
            const double m = trace.levels[n].second_moment();
            const double slack = symmetric_recursion_bound(prev, 2, theta) - m;
            worst_slack = std::min(worst_slack, slack);
            out.require(slack >= -1e-10, "theta " + fmt(theta) + " depth " + std::to_string(n) +
                                             " slack " + fmt(slack));
            prev = m;
        }
        if (theta == 0.6) {
            const double m1 = trace.levels[1].second_moment();
            out.require(std::abs(m1 - 153.0 / 289.0) <= 1e-12,
                        "depth-1 moment " + fmt(m1) + " != 153/289");
        }
    }
    out.detail = "min slack " + fmt(worst_slack);
    return out;
}

// ---------------------------------------------------------------------------
// 5. Non-reconstruction decay at the KS point for admissible asymmetries,
//    plus the level-cutset bound.
Outcome criterion_nonreconstruction_decay() {
    Outcome out;
    const double theta = 1.0 / std::sqrt(2.0);
    std::string decays;
    for (double delta : {0.0, 0.005, 0.015}) {
        const Channel ch = channel_from_theta_delta(theta, delta);
        const EvolutionTrace trace = evolve(2, ch, 25, BinningPolicy{1e-6, 24'000, true});
        std::vector<double> m(trace.levels.size());
        for (std::size_t n = 0; n < m.size(); ++n) m[n] = trace.levels[n].second_moment();
        for (int n = 3; n <= 25; ++n)
            out.require(m[n] <= m[n - 1],
                        "delta " + fmt(delta) + ": m increased at depth " + std::to_string(n));
        out.require(m[25] < 0.5 * m[5], "delta " + fmt(delta) + ": m25 = " + fmt(m[25]) +
                                            " not below m5/2 = " + fmt(0.5 * m[5]));
        // level-cutset bound: m_n <= sum over level k of eta = (2 theta^2)^k
        const double level_ratio = 2.0 * theta * theta;
        for (int n = 1; n <= 25; ++n) {
            double bound = 1.0;
            for (int k = 1; k <= n; ++k) {
                bound *= level_ratio;
                out.require(m[n] <= bound + 1e-12, "delta " + fmt(delta) + ": cutset bound at (" +
                                                       std::to_string(n) + "," +
                                                       std::to_string(k) + ")");
            }
        }
        decays += (decays.empty() ? "" : ", ") + std::string("m25/m5(") + fmt(delta) +
                  ") = " + fmt(m[25] / m[5]);
    }
    out.detail = decays;
    return out;
}

// ---------------------------------------------------------------------------
// 6. Supercritical contrast: moments and TV stay bounded away from zero.
Outcome criterion_supercritical_contrast() {
    Outcome out;
    const Channel ch = channel_from_theta_delta(0.8, 0.0);
    const EvolutionTrace trace = evolve(2, ch, 25, BinningPolicy{1e-6, 24'000, true});
    double min_m = 1e300, min_tv = 1e300;
    for (int n = 10; n <= 25; ++n) {
        const double m = trace.levels[n].second_moment();
        const double tv = tv_distance(trace.levels[n]);
        min_m = std::min(min_m, m);
        min_tv = std::min(min_tv, tv);
        out.require(m > 0.05, "m = " + fmt(m) + " at depth " + std::to_string(n));
        out.require(tv > 0.1, "tv = " + fmt(tv) + " at depth " + std::to_string(n));
    }
    out.detail = "min m " + fmt(min_m) + ", min tv " + fmt(min_tv) + " over depths [10,25]";
    return out;
}

// ---------------------------------------------------------------------------
// 7. Basic-inequality grid at 0.9 * delta_bar for signed thetas.
Outcome criterion_basic_inequality_grid() {
    Outcome out;
    double worst_gap = 1e300;
    for (double theta : {0.3, -0.3, 0.6, -0.6, 0.707, -0.707}) {
        const double delta = 0.9 * delta0_bound(std::abs(theta)).delta_bar;
        const GridCheck check = basic_inequality_grid(theta, delta, 101);
        worst_gap = std::min(worst_gap, check.min_gap);
        out.require(check.min_gap >= -1e-12,
                    "theta " + fmt(theta) + ": min(A - Delta B) = " + fmt(check.min_gap));
        out.require(check.min_A >= check.a_lower - 1e-12,
                    "theta " + fmt(theta) + ": min A " + fmt(check.min_A) + " below " +
                        fmt(check.a_lower));
    }
    out.detail = "min(A - Delta B) over all grids " + fmt(worst_gap);
    return out;
}

// ---------------------------------------------------------------------------
// 8. Monte Carlo consistency against the exact evolution at depth 10.
Outcome criterion_mc_consistency() {
    Outcome out;
    const Channel ch = channel_from_theta_delta(0.6, 0.01);
    const double exact =
        evolve(2, ch, 10, BinningPolicy{1e-6, 24'000, true}).levels[10].second_moment();
    const TreeSpec tree = build_regular_tree(2, 10, ch);
    int hits = 0;
    double worst_pull = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const McEstimate est = estimate_second_moment(tree, 100'000, seed);
        const double pull = std::abs(est.mean - exact) / est.std_error;
        worst_pull = std::max(worst_pull, pull);
        if (pull <= 4.0) ++hits;
    }
    out.require(hits >= 99, "only " + std::to_string(hits) + "/100 seeds within 4 sigma");
    out.detail = std::to_string(hits) + "/100 seeds within 4 sigma, worst pull " + fmt(worst_pull) +
                 ", exact m10 = " + fmt(exact);
    return out;
}

// ---------------------------------------------------------------------------
// 9. Branching-number estimates for regular trees at depth 20.
Outcome criterion_branching_number() {
    Outcome out;
    const struct {
        int arity;
        double theta;
    } cases[] = {{2, 0.5}, {2, 1.0 / std::sqrt(2.0)}, {3, 0.5}};
    std::string values;
    for (const auto& c : cases) {
        const BranchingEstimate est = branching_number_estimate(c.arity, c.theta, 20, 1e-6);
        const double target = c.arity * c.theta * c.theta;
        out.require(est.converged, "bisection did not converge");
        out.require(std::abs(est.value - target) <= 1e-3,
                    "estimate " + fmt(est.value) + " vs " + fmt(target));
        values += (values.empty() ? "" : ", ") + fmt(est.value);
    }
    out.detail = "estimates " + values;
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    const struct {
        const char* name;
        std::function<Outcome()> run;
    } criteria[] = {
        {"appendix delta_bar values", criterion_appendix_values},
        {"evolve/brute-force oracle equivalence", criterion_oracle_equivalence},
        {"identity suite on random trees", criterion_identity_suite},
        {"symmetric moment recursion", criterion_symmetric_recursion},
        {"non-reconstruction decay at the KS point", criterion_nonreconstruction_decay},
        {"supercritical contrast", criterion_supercritical_contrast},
        {"basic-inequality grid", criterion_basic_inequality_grid},
        {"Monte Carlo consistency", criterion_mc_consistency},
        {"branching-number estimates", criterion_branching_number},
    };

    int only = 0;
    if (argc > 1) {
        only = std::atoi(argv[1]);
        if (only < 1 || only > 9) {
            std::fprintf(stderr, "usage: %s [criterion 1..9]\n", argv[0]);
            return 64;
        }
    }

    int failures = 0;
    for (int k = 1; k <= 9; ++k) {
        if (only && k != only) continue;
        const auto start = std::chrono::steady_clock::now();
        const Outcome outcome = criteria[k - 1].run();
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("[%s] criterion %d: %s (%s) [%.1fs]\n", outcome.pass ? "PASS" : "FAIL", k,
                    criteria[k - 1].name, outcome.detail.c_str(), secs);
        std::fflush(stdout);
        if (!outcome.pass) ++failures;
    }
    return failures;
}
