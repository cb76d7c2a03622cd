#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include "recon/tree.hpp"

namespace recon {

/// Atomic law of the weighted root magnetization X under the stationary leaf
/// measure. Values are sorted ascending; all values lie in [-1/pi_ratio, 1]
/// and the mean is zero. The root-conditioned laws are recovered from this
/// one by tilting with the densities (1 + pi_ratio * X) and (1 - X).
template <typename S>
struct BasicMagnetization {
    std::vector<S> values;
    std::vector<S> probs;
    S pi_plus{};
    S pi_minus{};

    std::size_t size() const { return values.size(); }
    S pi_ratio() const { return pi_minus / pi_plus; }
    S asym() const { return pi_ratio() - 1; }

    S second_moment() const {
        S m{};
        for (std::size_t i = 0; i < values.size(); ++i) m += probs[i] * values[i] * values[i];
        return m;
    }
    S abs_moment() const {
        S m{};
        for (std::size_t i = 0; i < values.size(); ++i)
            m += probs[i] * detail::abs_of(values[i]);
        return m;
    }

    bool same_stationary(const BasicMagnetization& other, double tol = 1e-9) const {
        return detail::near(pi_plus, other.pi_plus, S(tol)) &&
               detail::near(pi_minus, other.pi_minus, S(tol));
    }
};

using MagnetizationDistribution = BasicMagnetization<double>;
using ExactMagnetization = BasicMagnetization<Rational>;

namespace detail {

inline constexpr double kAtomMergeEps = 1e-12;

/// Sorts atoms and folds together values closer than eps (exact equality for
/// rational scalars); mass- and mean-preserving.
template <typename S>
void consolidate(std::vector<std::pair<S, S>>& atoms, double eps = kAtomMergeEps) {
    std::sort(atoms.begin(), atoms.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::size_t out = 0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        bool mergeable = false;
        if (out > 0) {
            if constexpr (std::is_same_v<S, double>) {
                mergeable = atoms[i].first - atoms[out - 1].first <= eps;
            } else {
                mergeable = atoms[i].first == atoms[out - 1].first;
            }
        }
        if (mergeable) {
            auto& acc = atoms[out - 1];
            const S total = acc.second + atoms[i].second;
            if constexpr (std::is_same_v<S, double>) {
                if (total > 0.0 && acc.first != atoms[i].first)
                    acc.first = (acc.first * acc.second + atoms[i].first * atoms[i].second) / total;
            }
            acc.second = total;
        } else {
            atoms[out++] = atoms[i];
        }
    }
    atoms.resize(out);
}

template <typename S>
BasicMagnetization<S> from_atoms(std::vector<std::pair<S, S>> atoms, S pi_plus, S pi_minus,
                                 double eps = kAtomMergeEps) {
    consolidate(atoms, eps);
    BasicMagnetization<S> dist;
    dist.pi_plus = pi_plus;
    dist.pi_minus = pi_minus;
    dist.values.reserve(atoms.size());
    dist.probs.reserve(atoms.size());
    for (auto& [v, p] : atoms) {
        dist.values.push_back(v);
        dist.probs.push_back(p);
    }
    return dist;
}

/// Bottom-up likelihood pass: fills lik_plus/lik_minus with
/// P[sigma_subtree(v) | state(v)] for every vertex. With `normalize` the pair
/// at each vertex is rescaled when it risks underflow (posterior-safe,
/// probability-unsafe).
template <typename S>
void upward_likelihoods(const BasicTreeSpec<S>& tree, const std::vector<Spin>& leaf_config,
                        std::vector<S>& lik_plus, std::vector<S>& lik_minus,
                        bool normalize) {
    if (leaf_config.size() != tree.leaves.size())
        throw std::invalid_argument("upward_likelihoods: every leaf must be assigned");
    const std::int32_t n = tree.n_vertices();
    lik_plus.assign(n, S(1));
    lik_minus.assign(n, S(1));
    {
        std::size_t k = 0;
        for (std::int32_t v : tree.leaves) {
            lik_plus[v] = leaf_config[k] == Spin::plus ? S(1) : S(0);
            lik_minus[v] = leaf_config[k] == Spin::minus ? S(1) : S(0);
            ++k;
        }
    }
    for (std::int32_t v = n - 1; v > 0; --v) {
        const auto& ch = tree.edge(v);
        const std::int32_t p = tree.parent[v];
        const S up = (S(1) - ch.eps_plus) * lik_plus[v] + ch.eps_plus * lik_minus[v];
        const S um = (S(1) - ch.eps_minus) * lik_plus[v] + ch.eps_minus * lik_minus[v];
        lik_plus[p] *= up;
        lik_minus[p] *= um;
        if constexpr (std::is_same_v<S, double>) {
            if (normalize) {
                const double mag = lik_plus[p] + lik_minus[p];
                if (mag > 0.0 && mag < 1e-250) {
                    lik_plus[p] /= mag;
                    lik_minus[p] /= mag;
                }
            }
        }
    }
}

}  // namespace detail

/// Depth-0 base case: the root is itself observed, X = 1 on + (prob pi_plus)
/// and X = -1/pi_ratio on - (prob pi_minus).
template <typename S>
BasicMagnetization<S> leaf_base_distribution(const BasicChannel<S>& ch) {
    BasicMagnetization<S> dist;
    dist.pi_plus = ch.pi_plus;
    dist.pi_minus = ch.pi_minus;
    dist.values = {-ch.pi_plus / ch.pi_minus, S(1)};
    dist.probs = {ch.pi_minus, ch.pi_plus};
    return dist;
}

/// Reweights the stationary law into the root-conditioned law via the
/// Radon-Nikodym densities (1 + pi_ratio X) for + and (1 - X) for -.
template <typename S>
BasicMagnetization<S> tilt(const BasicMagnetization<S>& dist, Spin root_state) {
    const S ratio = dist.pi_ratio();
    BasicMagnetization<S> out = dist;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const S w = (root_state == Spin::plus) ? S(1) + ratio * dist.values[i]
                                               : S(1) - dist.values[i];
        if constexpr (std::is_same_v<S, double>) {
            if (w < -1e-12)
                throw std::domain_error("tilt: negative reweighting density (corrupted distribution)");
        } else {
            if (w < S(0))
                throw std::domain_error("tilt: negative reweighting density (corrupted distribution)");
        }
        out.probs[i] = dist.probs[i] * (w < S(0) ? S(0) : w);
    }
    return out;
}

/// Prepends an edge above the root: X scales by theta, the stationary leaf
/// measure (and hence all probabilities) is unchanged.
template <typename S>
BasicMagnetization<S> add_edge(const BasicMagnetization<S>& dist, const BasicChannel<S>& ch) {
    if (!detail::near(ch.pi_plus, dist.pi_plus, S(1e-9)) ||
        !detail::near(ch.pi_minus, dist.pi_minus, S(1e-9)))
        throw std::invalid_argument("add_edge: channel stationary distribution mismatch");
    std::vector<std::pair<S, S>> atoms;
    atoms.reserve(dist.size());
    for (std::size_t i = 0; i < dist.size(); ++i)
        atoms.emplace_back(ch.theta * dist.values[i], dist.probs[i]);
    return detail::from_atoms(std::move(atoms), dist.pi_plus, dist.pi_minus);
}

namespace detail {

/// Pairwise-product kernel shared by the public merge and the binned
/// evolution engine.
template <typename S>
BasicMagnetization<S> merge_atoms(const BasicMagnetization<S>& a, const BasicMagnetization<S>& b) {
    if (static_cast<std::int64_t>(a.size()) * static_cast<std::int64_t>(b.size()) > (1LL << 26))
        throw std::length_error("merge: atom count explosion (use binned evolution)");
    const S ratio = a.pi_ratio();
    const S Delta = ratio - 1;
    std::vector<std::pair<S, S>> atoms;
    atoms.reserve(a.size() * b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            const S y = a.values[i], z = b.values[j];
            const S denom = S(1) + ratio * y * z;  // also the pair likelihood weight
            const S q = a.probs[i] * b.probs[j] * denom;
            if constexpr (std::is_same_v<S, double>) {
                // the y=1, z=-1/ratio corner carries zero mass but rounds to
                // a tiny denominator of either sign
                if (denom <= 1e-13) {
                    if (std::abs(q) > 1e-12)
                        throw std::domain_error("merge: nonpositive posterior normalizer at positive mass");
                    continue;
                }
            } else {
                if (denom <= S(0)) {
                    if (q != S(0))
                        throw std::domain_error("merge: nonpositive posterior normalizer at positive mass");
                    continue;  // contradictory certainty, zero-probability pair
                }
            }
            atoms.emplace_back((y + z + Delta * y * z) / denom, q);
        }
    }
    return from_atoms(std::move(atoms), a.pi_plus, a.pi_minus);
}

}  // namespace detail

/// Joins two subtrees below a common root. The joint pair law is the
/// stationary mixture of the product measures of the tilted marginals, which
/// collapses to the pair weight (1 + pi_ratio * y * z); the merged
/// magnetization is (y + z + Delta y z) / (1 + pi_ratio y z), whose
/// denominator is that same weight.
template <typename S>
BasicMagnetization<S> merge(const BasicMagnetization<S>& a, const BasicMagnetization<S>& b,
                            const BasicChannel<S>& context) {
    if (!a.same_stationary(b) || !detail::near(context.pi_plus, a.pi_plus, S(1e-9)))
        throw std::invalid_argument("merge: stationary distribution mismatch");
    return detail::merge_atoms(a, b);
}

/// D_V(mu_+^n, mu_-^n) = (1/2)(1 + pi_ratio) E|X|.
template <typename S>
double tv_distance(const BasicMagnetization<S>& dist) {
    return 0.5 * to_double((S(1) + dist.pi_ratio()) * dist.abs_moment());
}

/// P[root = + | sigma] by the bottom-up likelihood recursion, normalized per
/// vertex so deep trees do not underflow. `leaf_config` is indexed like
/// tree.leaves.
template <typename S>
S root_posterior(const BasicTreeSpec<S>& tree, const std::vector<Spin>& leaf_config) {
    std::vector<S> lik_plus, lik_minus;
    detail::upward_likelihoods(tree, leaf_config, lik_plus, lik_minus, /*normalize=*/true);
    const auto& pi = tree.channels.at(0);
    const S num = pi.pi_plus * lik_plus[0];
    const S den = num + pi.pi_minus * lik_minus[0];
    if (den == S(0))
        throw std::domain_error("root_posterior: zero-probability leaf configuration");
    return num / den;
}

/// Ground-truth oracle: enumerates every leaf configuration, computes the
/// root posterior by the upward pass, and aggregates the magnetization atoms.
template <typename S>
BasicMagnetization<S> brute_force_distribution(const BasicTreeSpec<S>& tree, int max_leaves = 20) {
    const int L = tree.n_leaves();
    if (L > max_leaves)
        throw std::length_error("brute_force_distribution: leaf count exceeds enumeration cap");
    const auto& pi = tree.channels.at(0);
    std::vector<S> lik_plus, lik_minus;
    std::vector<std::pair<S, S>> atoms;
    std::vector<Spin> config(L, Spin::plus);
    const std::uint64_t total = 1ULL << L;
    for (std::uint64_t mask = 0; mask < total; ++mask) {
        for (int k = 0; k < L; ++k)
            config[k] = (mask >> k) & 1 ? Spin::minus : Spin::plus;
        detail::upward_likelihoods(tree, config, lik_plus, lik_minus, /*normalize=*/false);
        const S prob = pi.pi_plus * lik_plus[0] + pi.pi_minus * lik_minus[0];
        if (prob == S(0)) continue;
        const S posterior = pi.pi_plus * lik_plus[0] / prob;
        // X = pi_ratio^{-1} (posterior / pi_plus - 1) = (posterior - pi_plus)/pi_minus
        atoms.emplace_back((posterior - pi.pi_plus) / pi.pi_minus, prob);
    }
    return detail::from_atoms(std::move(atoms), pi.pi_plus, pi.pi_minus);
}

/// Distributive form of the leaf marginalization: propagates the joint law of
/// the conditional leaf likelihood pair (P[sigma|+], P[sigma|-]) bottom-up,
/// aggregating equal pairs with their configuration counts. Exact scalars
/// collapse the configuration space combinatorially, which makes trees far
/// beyond the enumeration cap tractable; uses only matrix-vector products,
/// no magnetization algebra.
template <typename S>
BasicMagnetization<S> likelihood_pair_distribution(const BasicTreeSpec<S>& tree) {
    using Pair = std::pair<S, S>;
    using Law = std::map<Pair, std::uint64_t>;  // (P[.|+], P[.|-]) -> config count
    const std::int32_t n = tree.n_vertices();
    if (tree.n_leaves() > 50)
        throw std::length_error("likelihood_pair_distribution: configuration count overflows");
    std::vector<Law> law(n);
    for (std::int32_t v = n - 1; v >= 0; --v) {
        Law mine;
        if (tree.is_leaf(v)) {
            mine[{S(1), S(0)}] = 1;
            mine[{S(0), S(1)}] = 1;
        } else {
            mine[{S(1), S(1)}] = 1;
            for (std::int32_t i = tree.child_begin[v]; i < tree.child_begin[v + 1]; ++i) {
                const std::int32_t c = tree.child_list[i];
                const auto& ch = tree.edge(c);
                Law incoming;
                for (const auto& [pr, cnt] : law[c]) {
                    const S up = (S(1) - ch.eps_plus) * pr.first + ch.eps_plus * pr.second;
                    const S um = (S(1) - ch.eps_minus) * pr.first + ch.eps_minus * pr.second;
                    incoming[{up, um}] += cnt;
                }
                law[c].clear();
                Law next;
                for (const auto& [pa, ca] : mine)
                    for (const auto& [pb, cb] : incoming)
                        next[{pa.first * pb.first, pa.second * pb.second}] += ca * cb;
                mine = std::move(next);
            }
        }
        law[v] = std::move(mine);
    }
    const auto& pi = tree.channels.at(0);
    std::vector<std::pair<S, S>> atoms;
    atoms.reserve(law[0].size());
    for (const auto& [pr, cnt] : law[0]) {
        const S prob = (pi.pi_plus * pr.first + pi.pi_minus * pr.second) * S(cnt);
        if (prob == S(0)) continue;
        const S posterior = pi.pi_plus * pr.first / (pi.pi_plus * pr.first + pi.pi_minus * pr.second);
        atoms.emplace_back((posterior - pi.pi_plus) / pi.pi_minus, prob);
    }
    return detail::from_atoms(std::move(atoms), pi.pi_plus, pi.pi_minus);
}

inline MagnetizationDistribution to_double_distribution(const ExactMagnetization& dist) {
    MagnetizationDistribution out;
    out.pi_plus = to_double(dist.pi_plus);
    out.pi_minus = to_double(dist.pi_minus);
    out.values.reserve(dist.size());
    out.probs.reserve(dist.size());
    for (std::size_t i = 0; i < dist.size(); ++i) {
        out.values.push_back(to_double(dist.values[i]));
        out.probs.push_back(to_double(dist.probs[i]));
    }
    return out;
}

}  // namespace recon
