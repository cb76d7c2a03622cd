#include "recon/tree.hpp"

#include <algorithm>
#include <cmath>

namespace recon {

TreeSpec to_double_tree(const ExactTreeSpec& tree) {
    TreeSpec out;
    out.parent = tree.parent;
    out.edge_channel = tree.edge_channel;
    out.channels.reserve(tree.channels.size());
    for (const auto& ch : tree.channels) out.channels.push_back(to_double_channel(ch));
    out.finalize();
    return out;
}

double eta(const TreeSpec& tree, std::int32_t v) {
    if (v < 0 || v >= tree.n_vertices()) throw std::invalid_argument("eta: unknown vertex");
    double w = 1.0;
    for (std::int32_t x = v; x != 0; x = tree.parent[x]) {
        const double t = tree.edge(x).theta;
        w *= t * t;
    }
    return w;
}

std::pair<double, CutSet> min_cutset_weight(const TreeSpec& tree, double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("min_cutset_weight: lambda must be > 0");
    const std::int32_t n = tree.n_vertices();
    std::vector<double> eta_v(n), own(n), best(n);
    std::vector<char> take(n, 1);
    eta_v[0] = 1.0;
    for (std::int32_t v = 1; v < n; ++v) {
        const double t = tree.edge(v).theta;
        eta_v[v] = eta_v[tree.parent[v]] * t * t;
    }
    for (std::int32_t v = n - 1; v >= 0; --v) {
        own[v] = eta_v[v] * std::pow(lambda, -static_cast<double>(tree.vertex_depth[v]));
        if (tree.is_leaf(v)) {
            best[v] = own[v];
            continue;
        }
        double children = 0.0;
        for (std::int32_t i = tree.child_begin[v]; i < tree.child_begin[v + 1]; ++i)
            children += best[tree.child_list[i]];
        // ties go to the vertex itself: shallowest minimizing antichain
        if (own[v] <= children) {
            best[v] = own[v];
        } else {
            best[v] = children;
            take[v] = 0;
        }
    }
    CutSet cut;
    cut.antichain = true;
    std::vector<std::int32_t> stack{0};
    while (!stack.empty()) {
        const std::int32_t v = stack.back();
        stack.pop_back();
        if (take[v]) {
            cut.vertices.push_back(v);
        } else {
            for (std::int32_t i = tree.child_begin[v]; i < tree.child_begin[v + 1]; ++i)
                stack.push_back(tree.child_list[i]);
        }
    }
    std::sort(cut.vertices.begin(), cut.vertices.end());
    return {best[0], cut};
}

double regular_min_cutset_weight(int arity, double theta, double lambda, int depth) {
    if (!(lambda > 0.0)) throw std::invalid_argument("regular_min_cutset_weight: lambda must be > 0");
    if (arity < 1 || depth < 0) throw std::invalid_argument("regular_min_cutset_weight: bad tree shape");
    const double ratio = arity * theta * theta / lambda;
    double w = 1.0, level = 1.0;
    for (int k = 1; k <= depth; ++k) {
        level *= ratio;
        w = std::min(w, level);
    }
    return w;
}

BranchingEstimate branching_number_estimate(int arity, double theta, int max_depth, double tol) {
    if (max_depth < 2) throw std::invalid_argument("branching_number_estimate: max_depth must be >= 2");
    if (!(tol > 0.0) || tol >= 1.0)
        throw std::invalid_argument("branching_number_estimate: tol must lie in (0,1)");
    BranchingEstimate est;
    if (theta == 0.0) {  // eta vanishes off the root, weight 0 for every lambda
        est.converged = true;
        return est;
    }
    const int max_iters = 200;
    double lo = 0.0;  // weight(lo) >= tol
    double hi = 1.0;
    int it = 0;
    while (regular_min_cutset_weight(arity, theta, hi, max_depth) >= tol && it < max_iters) {
        hi *= 2.0;
        ++it;
    }
    while (it < max_iters && (hi - lo) > 1e-12 * std::max(1.0, hi)) {
        const double mid = 0.5 * (lo + hi);
        if (regular_min_cutset_weight(arity, theta, mid, max_depth) >= tol)
            lo = mid;
        else
            hi = mid;
        ++it;
    }
    est.iterations = it;
    est.converged = it < max_iters;
    // The crossing sits at br * tol^(-1/depth); strip the finite-depth bias.
    est.value = 0.5 * (lo + hi) * std::pow(tol, 1.0 / max_depth);
    return est;
}

}  // namespace recon
