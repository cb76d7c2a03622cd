#include "recon/montecarlo.hpp"

#include <cmath>
#include <stdexcept>

#include "recon/parallel.hpp"

namespace recon {

const char* quantity_name(Quantity q) {
    switch (q) {
        case Quantity::m: return "m";
        case Quantity::m_plus: return "m_plus";
        case Quantity::m_minus: return "m_minus";
        case Quantity::abs_mean: return "abs_mean";
        case Quantity::tv: return "tv";
    }
    return "?";
}

namespace detail {

double pairwise_sum(const double* x, std::size_t n) {
    if (n <= 32) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += x[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(x, half) + pairwise_sum(x + half, n - half);
}

namespace {

constexpr std::uint64_t kDomainStationary = 0;
constexpr std::uint64_t kDomainPlus = 1;
constexpr std::uint64_t kDomainMinus = 2;

std::uint64_t domain_of(RootCondition c) {
    switch (c) {
        case RootCondition::stationary: return kDomainStationary;
        case RootCondition::plus: return kDomainPlus;
        case RootCondition::minus: return kDomainMinus;
    }
    return kDomainStationary;
}

struct Scratch {
    std::vector<std::int8_t> state;
    std::vector<double> lik_plus, lik_minus;
};

// Simulates one broadcast sample and returns X evaluated by the upward pass.
double sample_magnetization(const TreeSpec& tree, RootCondition root, std::uint64_t seed,
                            std::uint64_t index, Scratch& s) {
    const CounterRng rng(seed, domain_of(root), index);
    const std::int32_t n = tree.n_vertices();
    const auto& pi = tree.channels[0];
    s.state.resize(n);
    s.lik_plus.assign(n, 1.0);
    s.lik_minus.assign(n, 1.0);
    std::uint64_t draw = 0;
    if (root == RootCondition::stationary)
        s.state[0] = rng.uniform(draw++) < pi.pi_plus ? 0 : 1;
    else
        s.state[0] = root == RootCondition::plus ? 0 : 1;
    for (std::int32_t v = 1; v < n; ++v) {
        const auto& ch = tree.edge(v);
        const double to_minus = s.state[tree.parent[v]] == 0 ? ch.eps_plus : ch.eps_minus;
        s.state[v] = rng.uniform(draw++) < to_minus ? 1 : 0;
    }
    if (n == 1)  // the root is itself the observed leaf
        return s.state[0] == 0 ? 1.0 : -pi.pi_plus / pi.pi_minus;
    for (std::int32_t v = n - 1; v > 0; --v) {
        const auto& ch = tree.edge(v);
        const std::int32_t p = tree.parent[v];
        double up, um;
        if (tree.is_leaf(v)) {
            if (s.state[v] == 0) {
                up = 1.0 - ch.eps_plus;
                um = 1.0 - ch.eps_minus;
            } else {
                up = ch.eps_plus;
                um = ch.eps_minus;
            }
        } else {
            up = (1.0 - ch.eps_plus) * s.lik_plus[v] + ch.eps_plus * s.lik_minus[v];
            um = (1.0 - ch.eps_minus) * s.lik_plus[v] + ch.eps_minus * s.lik_minus[v];
        }
        s.lik_plus[p] *= up;
        s.lik_minus[p] *= um;
        const double mag = s.lik_plus[p] + s.lik_minus[p];
        if (mag > 0.0 && mag < 1e-250) {
            s.lik_plus[p] /= mag;
            s.lik_minus[p] /= mag;
        }
    }
    const double num = pi.pi_plus * s.lik_plus[0];
    const double den = num + pi.pi_minus * s.lik_minus[0];
    const double posterior = den > 0.0 ? num / den : pi.pi_plus;
    return (posterior - pi.pi_plus) / pi.pi_minus;
}

// Fills xs[i] = X(sample i); slices are distributed over workers but each
// slot depends only on (seed, index).
void sample_block(const TreeSpec& tree, RootCondition root, std::uint64_t seed,
                  std::vector<double>& xs) {
    const std::int64_t n = static_cast<std::int64_t>(xs.size());
    const int blocks = std::min<std::int64_t>(std::max<std::int64_t>(n / 4096, 1), 256);
    const std::int64_t per = (n + blocks - 1) / blocks;
    parallel_blocks(blocks, [&](int b) {
        Scratch scratch;
        const std::int64_t first = static_cast<std::int64_t>(b) * per;
        const std::int64_t last = std::min(n, first + per);
        for (std::int64_t i = first; i < last; ++i)
            xs[i] = sample_magnetization(tree, root, seed, static_cast<std::uint64_t>(i), scratch);
    });
}

McEstimate reduce(const std::vector<double>& vals, std::uint64_t seed, Quantity q) {
    const std::size_t n = vals.size();
    const double mean = detail::pairwise_sum(vals.data(), n) / static_cast<double>(n);
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = vals[i] - mean;
        sq[i] = d * d;
    }
    const double var = detail::pairwise_sum(sq.data(), n) / static_cast<double>(n - 1);
    McEstimate est;
    est.mean = mean;
    est.std_error = std::sqrt(std::max(var, 0.0) / static_cast<double>(n));
    est.n_samples = static_cast<std::int64_t>(n);
    est.seed = seed;
    est.quantity = q;
    return est;
}

}  // namespace
}  // namespace detail

std::vector<Spin> sample_leaves(const TreeSpec& tree, RootCondition root, std::uint64_t seed) {
    const detail::CounterRng rng(seed, detail::domain_of(root), 0);
    const std::int32_t n = tree.n_vertices();
    const auto& pi = tree.channels[0];
    std::vector<std::int8_t> state(n);
    std::uint64_t draw = 0;
    if (root == RootCondition::stationary)
        state[0] = rng.uniform(draw++) < pi.pi_plus ? 0 : 1;
    else
        state[0] = root == RootCondition::plus ? 0 : 1;
    for (std::int32_t v = 1; v < n; ++v) {
        const auto& ch = tree.edge(v);
        const double to_minus = state[tree.parent[v]] == 0 ? ch.eps_plus : ch.eps_minus;
        state[v] = rng.uniform(draw++) < to_minus ? 1 : 0;
    }
    std::vector<Spin> leaves;
    leaves.reserve(tree.leaves.size());
    for (std::int32_t v : tree.leaves) leaves.push_back(state[v] == 0 ? Spin::plus : Spin::minus);
    return leaves;
}

McMoments estimate_moments(const TreeSpec& tree, std::int64_t n_samples, std::uint64_t seed) {
    if (n_samples < 2) throw std::invalid_argument("estimate_moments: need n_samples >= 2");
    const auto& pi = tree.channels[0];
    const double ratio = pi.pi_minus / pi.pi_plus;
    McMoments out;

    std::vector<double> xs(static_cast<std::size_t>(n_samples));
    detail::sample_block(tree, RootCondition::stationary, seed, xs);
    std::vector<double> work(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) work[i] = xs[i] * xs[i];
    out.m = detail::reduce(work, seed, Quantity::m);
    for (std::size_t i = 0; i < xs.size(); ++i) work[i] = xs[i] * xs[i] * (1.0 + ratio * xs[i]);
    out.m_plus_rn = detail::reduce(work, seed, Quantity::m_plus);
    for (std::size_t i = 0; i < xs.size(); ++i) work[i] = xs[i] * xs[i] * (1.0 - xs[i]);
    out.m_minus_rn = detail::reduce(work, seed, Quantity::m_minus);

    detail::sample_block(tree, RootCondition::plus, seed, xs);
    for (std::size_t i = 0; i < xs.size(); ++i) work[i] = xs[i] * xs[i];
    out.m_plus = detail::reduce(work, seed, Quantity::m_plus);

    detail::sample_block(tree, RootCondition::minus, seed, xs);
    for (std::size_t i = 0; i < xs.size(); ++i) work[i] = xs[i] * xs[i];
    out.m_minus = detail::reduce(work, seed, Quantity::m_minus);

    out.mixture_residual =
        pi.pi_plus * out.m_plus.mean + pi.pi_minus * out.m_minus.mean - out.m.mean;
    return out;
}

McEstimate estimate_second_moment(const TreeSpec& tree, std::int64_t n_samples,
                                  std::uint64_t seed) {
    if (n_samples < 2) throw std::invalid_argument("estimate_second_moment: need n_samples >= 2");
    std::vector<double> xs(static_cast<std::size_t>(n_samples));
    detail::sample_block(tree, RootCondition::stationary, seed, xs);
    for (std::size_t i = 0; i < xs.size(); ++i) xs[i] *= xs[i];
    return detail::reduce(xs, seed, Quantity::m);
}

McEstimate estimate_tv(const TreeSpec& tree, std::int64_t n_samples, std::uint64_t seed) {
    if (n_samples < 2) throw std::invalid_argument("estimate_tv: need n_samples >= 2");
    const auto& pi = tree.channels[0];
    const double scale = 0.5 * (1.0 + pi.pi_minus / pi.pi_plus);
    std::vector<double> xs(static_cast<std::size_t>(n_samples));
    detail::sample_block(tree, RootCondition::stationary, seed, xs);
    for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = std::abs(xs[i]);
    McEstimate est = detail::reduce(xs, seed, Quantity::tv);
    est.mean *= scale;
    est.std_error *= scale;
    return est;
}

}  // namespace recon
