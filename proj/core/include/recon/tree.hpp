#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "recon/channel.hpp"

namespace recon {

/// Finite rooted tree with one channel per edge, all sharing a stationary
/// distribution. Vertex 0 is the root; parents precede children in index
/// order, so a single forward (or reverse) sweep is a topological pass.
template <typename S>
struct BasicTreeSpec {
    std::vector<std::int32_t> parent;        // parent[0] == -1
    std::vector<std::int32_t> vertex_depth;  // |v| = d(root, v)
    std::vector<std::int32_t> edge_channel;  // channel id of edge (parent[v], v); -1 at root
    std::vector<BasicChannel<S>> channels;   // shared edge-channel table

    // derived adjacency
    std::vector<std::int32_t> child_begin;  // CSR offsets, size n+1
    std::vector<std::int32_t> child_list;
    std::vector<std::int32_t> leaves;  // childless vertices, ascending

    std::int32_t n_vertices() const { return static_cast<std::int32_t>(parent.size()); }
    std::int32_t n_leaves() const { return static_cast<std::int32_t>(leaves.size()); }
    bool is_leaf(std::int32_t v) const { return child_begin[v] == child_begin[v + 1]; }
    std::int32_t max_depth() const;

    const BasicChannel<S>& edge(std::int32_t v) const { return channels[edge_channel[v]]; }

    /// Populates adjacency/leaf tables and validates the structural and
    /// shared-stationary invariants. Must be called after filling the raw
    /// parent/channel fields.
    void finalize();
};

using TreeSpec = BasicTreeSpec<double>;
using ExactTreeSpec = BasicTreeSpec<Rational>;

inline constexpr std::int64_t kMaxTreeVertices = 10'000'000;

template <typename S>
BasicTreeSpec<S> build_regular_tree(int arity, int depth, const BasicChannel<S>& channel);

TreeSpec to_double_tree(const ExactTreeSpec& tree);

/// eta(v) = product of theta(e)^2 along the root path; eta(root) = 1.
double eta(const TreeSpec& tree, std::int32_t v);

struct CutSet {
    std::vector<std::int32_t> vertices;
    bool antichain = false;
};

/// Minimal cutset weight sum_{x in S} eta(x) lambda^{-|x|} over all cutsets of
/// the finite tree, with one minimizing antichain (ties resolved toward the
/// shallowest vertices).
std::pair<double, CutSet> min_cutset_weight(const TreeSpec& tree, double lambda);

/// Closed-form minimal level-cutset weight for the regular tree: min over
/// levels k <= depth of (arity * theta^2 / lambda)^k. Equals the cutset DP
/// on regular trees without materializing them.
double regular_min_cutset_weight(int arity, double theta, double lambda, int depth);

struct BranchingEstimate {
    double value = 0.0;
    bool converged = false;
    int iterations = 0;
};

/// Finite-depth bisection estimate of the branching number br(T, theta) for
/// the regular tree: locates the lambda where the depth-limited cutset weight
/// crosses tol and removes the finite-depth bias factor tol^(-1/depth).
BranchingEstimate branching_number_estimate(int arity, double theta, int max_depth, double tol);

// --- template definitions ---

template <typename S>
std::int32_t BasicTreeSpec<S>::max_depth() const {
    std::int32_t d = 0;
    for (std::int32_t x : vertex_depth) d = std::max(d, x);
    return d;
}

template <typename S>
void BasicTreeSpec<S>::finalize() {
    const std::int32_t n = n_vertices();
    if (n == 0) throw std::invalid_argument("tree: no vertices");
    if (parent[0] != -1) throw std::invalid_argument("tree: vertex 0 must be the root");
    vertex_depth.assign(n, 0);
    child_begin.assign(n + 1, 0);
    for (std::int32_t v = 1; v < n; ++v) {
        if (parent[v] < 0 || parent[v] >= v)
            throw std::invalid_argument("tree: parents must precede children");
        if (edge_channel[v] < 0 || edge_channel[v] >= static_cast<std::int32_t>(channels.size()))
            throw std::invalid_argument("tree: bad channel id");
        vertex_depth[v] = vertex_depth[parent[v]] + 1;
        ++child_begin[parent[v] + 1];
    }
    for (std::int32_t v = 0; v < n; ++v) child_begin[v + 1] += child_begin[v];
    child_list.assign(std::max<std::int32_t>(n - 1, 0), 0);
    std::vector<std::int32_t> fill(child_begin.begin(), child_begin.end() - 1);
    for (std::int32_t v = 1; v < n; ++v) child_list[fill[parent[v]]++] = v;
    leaves.clear();
    for (std::int32_t v = 0; v < n; ++v)
        if (is_leaf(v)) leaves.push_back(v);
    for (std::size_t i = 1; i < channels.size(); ++i)
        if (!channels[i].same_stationary(channels[0]))
            throw std::invalid_argument("tree: edge channels must share one stationary distribution");
}

/// The subtree hanging at `root`, re-indexed with `root` as vertex 0.
template <typename S>
BasicTreeSpec<S> subtree(const BasicTreeSpec<S>& tree, std::int32_t root) {
    if (root < 0 || root >= tree.n_vertices()) throw std::invalid_argument("subtree: unknown vertex");
    const std::int32_t n = tree.n_vertices();
    std::vector<std::int32_t> remap(n, -1);
    BasicTreeSpec<S> out;
    out.channels = tree.channels;
    remap[root] = 0;
    out.parent.push_back(-1);
    out.edge_channel.push_back(-1);
    for (std::int32_t v = root + 1; v < n; ++v) {
        const std::int32_t p = tree.parent[v];
        if (p < 0 || remap[p] < 0) continue;
        remap[v] = static_cast<std::int32_t>(out.parent.size());
        out.parent.push_back(remap[p]);
        out.edge_channel.push_back(tree.edge_channel[v]);
    }
    out.finalize();
    return out;
}

/// A new tree with a fresh root joined to the old root by `channel`.
template <typename S>
BasicTreeSpec<S> add_root_edge(const BasicTreeSpec<S>& tree, const BasicChannel<S>& channel) {
    BasicTreeSpec<S> out;
    out.channels = tree.channels;
    out.channels.push_back(channel);
    const auto new_id = static_cast<std::int32_t>(out.channels.size() - 1);
    out.parent.push_back(-1);
    out.edge_channel.push_back(-1);
    out.parent.push_back(0);
    out.edge_channel.push_back(new_id);
    for (std::int32_t v = 1; v < tree.n_vertices(); ++v) {
        out.parent.push_back(tree.parent[v] + 1);
        out.edge_channel.push_back(tree.edge_channel[v]);
    }
    out.finalize();
    return out;
}

template <typename S>
BasicTreeSpec<S> build_regular_tree(int arity, int depth, const BasicChannel<S>& channel) {
    if (arity < 1) throw std::invalid_argument("build_regular_tree: arity must be >= 1");
    if (depth < 0) throw std::invalid_argument("build_regular_tree: depth must be >= 0");
    std::int64_t total = 1, level = 1;
    for (int k = 0; k < depth; ++k) {
        level *= arity;
        total += level;
        if (total > kMaxTreeVertices)
            throw std::invalid_argument("build_regular_tree: vertex count exceeds guard");
    }
    BasicTreeSpec<S> tree;
    tree.parent.reserve(total);
    tree.edge_channel.reserve(total);
    tree.channels.push_back(channel);
    tree.parent.push_back(-1);
    tree.edge_channel.push_back(-1);
    std::int32_t level_begin = 0, level_end = 1;
    for (int k = 0; k < depth; ++k) {
        for (std::int32_t p = level_begin; p < level_end; ++p) {
            for (int c = 0; c < arity; ++c) {
                tree.parent.push_back(p);
                tree.edge_channel.push_back(0);
            }
        }
        level_begin = level_end;
        level_end = static_cast<std::int32_t>(tree.parent.size());
    }
    tree.finalize();
    return tree;
}

}  // namespace recon
