#pragma once

#include <cmath>

namespace recon {

template <typename S>
IdentityReport verify_identities(const BasicTreeSpec<S>& tree, double tol) {
    if (tree.n_leaves() > 20)
        throw std::invalid_argument("verify_identities: tree is not brute-forceable");
    IdentityReport report;
    report.tol = tol;
    auto add = [&report](const char* name, double residual) {
        report.items.push_back({name, std::abs(residual)});
    };

    const auto& pi = tree.channels.at(0);
    const S ratio = pi.pi_minus / pi.pi_plus;

    bool has_pos = false, has_neg = false;
    for (std::int32_t v = 1; v < tree.n_vertices(); ++v) {
        if (tree.edge(v).theta > S(0)) has_pos = true;
        if (tree.edge(v).theta < S(0)) has_neg = true;
    }
    report.mixed_sign_theta = has_pos && has_neg;

    const auto dist = brute_force_distribution(tree);
    const auto tilt_plus = tilt(dist, Spin::plus);
    const auto tilt_minus = tilt(dist, Spin::minus);

    {
        double worst = 0.0;
        S sum_plus{}, sum_minus{}, mean_plus{}, mean_minus{}, m2{};
        for (std::size_t i = 0; i < dist.size(); ++i) {
            worst = std::max(worst,
                             std::abs(to_double(pi.pi_plus * tilt_plus.probs[i] +
                                                pi.pi_minus * tilt_minus.probs[i] -
                                                dist.probs[i])));
            sum_plus += tilt_plus.probs[i];
            sum_minus += tilt_minus.probs[i];
            mean_plus += tilt_plus.probs[i] * dist.values[i];
            mean_minus += tilt_minus.probs[i] * dist.values[i];
            m2 += dist.probs[i] * dist.values[i] * dist.values[i];
        }
        add("rn_mixture", worst);
        add("rn_normalization", std::max(std::abs(to_double(sum_plus - S(1))),
                                         std::abs(to_double(sum_minus - S(1)))));
        add("rn_plus_mean", to_double(mean_plus - ratio * m2));
        add("rn_minus_mean", to_double(mean_minus + m2));
    }

    // per-root-child identities: edge prepend scaling and the child moment relations
    std::vector<BasicMagnetization<S>> child_dists;
    double worst_add_edge = 0.0, worst_child_mean = 0.0, worst_child_second = 0.0;
    double worst_scaling_pointwise = 0.0;
    for (std::int32_t ci = tree.child_begin[0]; ci < tree.child_begin[1]; ++ci) {
        const std::int32_t c = tree.child_list[ci];
        const auto& ch = tree.edge(c);
        const S theta = ch.theta;
        BasicTreeSpec<S> sub = subtree(tree, c);
        BasicMagnetization<S> dc = brute_force_distribution(sub);
        BasicMagnetization<S> dhat = add_edge(dc, ch);
        worst_add_edge = std::max(
            worst_add_edge,
            std::abs(to_double(dhat.second_moment() - theta * theta * dc.second_moment())));

        S a1{}, b1{}, a1m{}, b1m{}, a2{}, a2m{}, m2{}, m2p{}, m2m{};
        for (std::size_t i = 0; i < dc.size(); ++i) {
            const S v = dc.values[i], p = dc.probs[i];
            const S hv = theta * v;
            a1 += p * v * (S(1) + ratio * hv);
            b1 += p * v * (S(1) + ratio * v);
            a1m += p * v * (S(1) - hv);
            b1m += p * v * (S(1) - v);
            a2 += p * v * v * (S(1) + ratio * hv);
            a2m += p * v * v * (S(1) - hv);
            m2 += p * v * v;
            m2p += p * v * v * (S(1) + ratio * v);
            m2m += p * v * v * (S(1) - v);
        }
        worst_child_mean =
            std::max({worst_child_mean, std::abs(to_double(a1 - theta * b1)),
                      std::abs(to_double(a1m - theta * b1m))});
        worst_child_second = std::max(
            {worst_child_second,
             std::abs(to_double(a2 - ((S(1) - theta) * m2 + theta * m2p))),
             std::abs(to_double(a2m - ((S(1) - theta) * m2 + theta * m2m)))});

        // pointwise over the subtree's configurations: X_hat(sigma) = theta X(sigma)
        BasicTreeSpec<S> rooted = add_root_edge(sub, ch);
        const int L = sub.n_leaves();
        std::vector<Spin> config(L, Spin::plus);
        std::vector<S> lp, lm, lp2, lm2;
        for (std::uint64_t mask = 0; mask < (1ULL << L); ++mask) {
            for (int k = 0; k < L; ++k)
                config[k] = (mask >> k) & 1 ? Spin::minus : Spin::plus;
            detail::upward_likelihoods(sub, config, lp, lm, false);
            if (pi.pi_plus * lp[0] + pi.pi_minus * lm[0] == S(0)) continue;
            detail::upward_likelihoods(rooted, config, lp2, lm2, false);
            const S post_sub = pi.pi_plus * lp[0] / (pi.pi_plus * lp[0] + pi.pi_minus * lm[0]);
            const S post_hat =
                pi.pi_plus * lp2[0] / (pi.pi_plus * lp2[0] + pi.pi_minus * lm2[0]);
            const S x_sub = (post_sub - pi.pi_plus) / pi.pi_minus;
            const S x_hat = (post_hat - pi.pi_plus) / pi.pi_minus;
            worst_scaling_pointwise =
                std::max(worst_scaling_pointwise, std::abs(to_double(x_hat - theta * x_sub)));
        }

        child_dists.push_back(std::move(dhat));
    }
    add("add_edge_second_moment", worst_add_edge);
    add("child_moment_mean", worst_child_mean);
    add("child_moment_second", worst_child_second);
    add("add_edge_pointwise", worst_scaling_pointwise);

    // merge formula against the direct posterior, pointwise over full configurations,
    // plus the add/merge-built law against the enumeration oracle
    {
        const int L = tree.n_leaves();
        const S Delta = ratio - 1;
        std::vector<std::int32_t> children;
        for (std::int32_t ci = tree.child_begin[0]; ci < tree.child_begin[1]; ++ci)
            children.push_back(tree.child_list[ci]);

        double worst_merge = 0.0;
        S tv_direct{};
        std::vector<Spin> config(L, Spin::plus);
        std::vector<S> lp, lm;
        for (std::uint64_t mask = 0; mask < (1ULL << L); ++mask) {
            for (int k = 0; k < L; ++k)
                config[k] = (mask >> k) & 1 ? Spin::minus : Spin::plus;
            detail::upward_likelihoods(tree, config, lp, lm, false);
            const S prob = pi.pi_plus * lp[0] + pi.pi_minus * lm[0];
            tv_direct += detail::abs_of(lp[0] - lm[0]);
            if (prob == S(0) || children.empty()) continue;
            const S x_direct = (pi.pi_plus * lp[0] / prob - pi.pi_plus) / pi.pi_minus;
            bool first = true;
            S folded{};
            bool degenerate = false;
            for (const std::int32_t c : children) {
                const S pc = pi.pi_plus * lp[c] + pi.pi_minus * lm[c];
                if (pc == S(0)) {
                    degenerate = true;
                    break;
                }
                const S xc = (pi.pi_plus * lp[c] / pc - pi.pi_plus) / pi.pi_minus;
                const S shifted = tree.edge(c).theta * xc;
                if (first) {
                    folded = shifted;
                    first = false;
                } else {
                    folded = (folded + shifted + Delta * folded * shifted) /
                             (S(1) + ratio * folded * shifted);
                }
            }
            if (degenerate) continue;
            worst_merge = std::max(worst_merge, std::abs(to_double(x_direct - folded)));
        }
        add("merge_pointwise", worst_merge);
        add("tv_direct", tv_distance(dist) - 0.5 * to_double(tv_direct));

        if (!children.empty()) {
            BasicMagnetization<S> folded = child_dists[0];
            for (std::size_t k = 1; k < child_dists.size(); ++k)
                folded = merge(folded, child_dists[k], tree.channels.at(0));
            add("add_merge_distribution", detail::distribution_discrepancy(folded, dist));
        }
    }

    report.max_residual = 0.0;
    for (const auto& item : report.items)
        report.max_residual = std::max(report.max_residual, item.residual);
    report.pass = report.max_residual <= tol;
    return report;
}

}  // namespace recon
