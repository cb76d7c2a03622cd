#include "recon/evolve.hpp"

#include <cmath>

namespace recon {

namespace {

constexpr std::int64_t kExactPairLimit = 1 << 20;  // below this, materialize pairs exactly

inline void compensated_add(double& sum, double& comp, double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
        comp += (sum - t) + x;
    else
        comp += (x - t) + sum;
    sum = t;
}

struct RawAtoms {
    std::vector<double> values;  // ascending
    std::vector<double> probs;
    std::vector<double> pv;  // prob * value, kept exact for mean-preserving clustering
};

// Windowed consolidation: sorted atoms within a window of `threshold` collapse to
// their probability-weighted mean; the window doubles until at most max_atoms
// clusters remain. Returns the realized window.
double cluster_atoms(RawAtoms& atoms, double threshold, std::size_t max_atoms,
                     std::vector<double>& out_values, std::vector<double>& out_probs) {
    for (;;) {
        out_values.clear();
        out_probs.clear();
        const std::size_t n = atoms.values.size();
        std::size_t i = 0;
        while (i < n) {
            const double start = atoms.values[i];
            double mass = atoms.probs[i], mean_num = atoms.pv[i];
            std::size_t j = i + 1;
            while (j < n && atoms.values[j] - start < threshold) {
                mass += atoms.probs[j];
                mean_num += atoms.pv[j];
                ++j;
            }
            out_values.push_back(mass > 0.0 ? mean_num / mass : start);
            out_probs.push_back(mass);
            i = j;
        }
        if (out_values.size() <= max_atoms) return threshold;
        threshold = threshold > 0.0 ? threshold * 2.0 : 1e-12;
    }
}

// Pairwise product of two magnetization laws accumulated into a value grid.
// For fixed y the merged value is monotone in z, so bin writes stream in
// order. The pair weight (1 + ratio*y*z) equals the posterior normalizer,
// so prob and prob*value accumulate division-free.
RawAtoms grid_pair_atoms(const MagnetizationDistribution& a, const MagnetizationDistribution& b,
                         double w_grid, double& m2_pre) {
    const double ratio = a.pi_ratio();
    const double Delta = ratio - 1.0;
    const double lo = -a.pi_plus / a.pi_minus - w_grid;
    const double inv_w = 1.0 / w_grid;
    const std::size_t cells = static_cast<std::size_t>((1.0 - lo) * inv_w) + 2;

    std::vector<double> Q(cells, 0.0), Qc(cells, 0.0);
    std::vector<double> S(cells, 0.0), Sc(cells, 0.0);
    std::vector<double> V2(cells, 0.0);

    const bool same = &a == &b;
    const std::size_t na = a.size(), nb = b.size();
    constexpr std::size_t kBlock = 512;
    double xb[kBlock], qb[kBlock], sb[kBlock];

    for (std::size_t i = 0; i < na; ++i) {
        const double y = a.values[i];
        const double pa = a.probs[i];
        const double c_num = 1.0 + Delta * y;  // numerator  = y + c_num * z
        const double c_den = ratio * y;        // normalizer = 1 + c_den * z
        std::size_t j0 = same ? i : 0;
        while (j0 < nb) {
            const std::size_t len = std::min(kBlock, nb - j0);
            for (std::size_t k = 0; k < len; ++k) {
                const double z = b.values[j0 + k];
                const double denom = 1.0 + c_den * z;
                const double num = y + c_num * z;
                double pab = pa * b.probs[j0 + k];
                if (same && j0 + k != i) pab *= 2.0;  // symmetric off-diagonal pair
                xb[k] = num / denom;
                qb[k] = pab * denom;
                sb[k] = pab * num;
            }
            for (std::size_t k = 0; k < len; ++k) {
                std::size_t cell = static_cast<std::size_t>((xb[k] - lo) * inv_w);
                if (cell >= cells) cell = cells - 1;
                compensated_add(Q[cell], Qc[cell], qb[k]);
                compensated_add(S[cell], Sc[cell], sb[k]);
                V2[cell] += sb[k] * xb[k];
            }
            j0 += len;
        }
    }

    RawAtoms atoms;
    double m2c = 0.0;
    m2_pre = 0.0;
    for (std::size_t c = 0; c < cells; ++c) {
        const double q = Q[c] + Qc[c];
        if (q <= 0.0) continue;
        const double s = S[c] + Sc[c];
        atoms.values.push_back(s / q);
        atoms.probs.push_back(q);
        atoms.pv.push_back(s);
        compensated_add(m2_pre, m2c, V2[c]);
    }
    m2_pre += m2c;
    return atoms;
}

MagnetizationDistribution binned_merge(const MagnetizationDistribution& a,
                                       const MagnetizationDistribution& b,
                                       const BinningPolicy& policy, LevelStats& stats) {
    RawAtoms raw;
    double m2_pre = 0.0;
    const std::int64_t pairs =
        static_cast<std::int64_t>(a.size()) * static_cast<std::int64_t>(b.size());
    if (pairs <= kExactPairLimit) {
        const MagnetizationDistribution exact = detail::merge_atoms(a, b);
        raw.values = exact.values;
        raw.probs = exact.probs;
        raw.pv.resize(exact.size());
        double m2c = 0.0;
        for (std::size_t i = 0; i < exact.size(); ++i) {
            raw.pv[i] = exact.probs[i] * exact.values[i];
            compensated_add(m2_pre, m2c, raw.pv[i] * exact.values[i]);
        }
        m2_pre += m2c;
    } else {
        const double span = 1.0 + a.pi_plus / a.pi_minus;
        const double w_grid =
            std::max(policy.bin_width * 0.5, span / (2.0 * static_cast<double>(policy.max_atoms)));
        raw = grid_pair_atoms(a, b, w_grid, m2_pre);
        stats.bin_threshold = std::max(stats.bin_threshold, 2.0 * w_grid);
    }

    MagnetizationDistribution out;
    out.pi_plus = a.pi_plus;
    out.pi_minus = a.pi_minus;
    const double realized =
        cluster_atoms(raw, policy.bin_width, policy.max_atoms, out.values, out.probs);

    double mass = 0.0, mass_c = 0.0, m2_post = 0.0, m2_post_c = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        compensated_add(mass, mass_c, out.probs[i]);
        compensated_add(m2_post, m2_post_c, out.probs[i] * out.values[i] * out.values[i]);
    }
    stats.atoms = out.size();
    stats.bin_threshold = std::max(stats.bin_threshold, realized);
    stats.m2_shift += std::max(m2_pre - (m2_post + m2_post_c), 0.0);
    stats.mass_error = std::abs(mass + mass_c - 1.0);
    return out;
}

}  // namespace

EvolutionTrace evolve(int arity, const Channel& channel, int depth, const BinningPolicy& policy) {
    if (arity < 1) throw std::invalid_argument("evolve: arity must be >= 1");
    if (depth < 0) throw std::invalid_argument("evolve: depth must be >= 0");
    if (policy.enabled && !(policy.bin_width > 0.0))
        throw std::invalid_argument("evolve: bin_width must be > 0 when binning is enabled");
    if (policy.max_atoms < 16) throw std::invalid_argument("evolve: max_atoms too small");

    EvolutionTrace trace;
    trace.levels.push_back(leaf_base_distribution(channel));
    trace.stats.push_back(LevelStats{trace.levels.back().size(), 0.0, 0.0, 0.0});
    for (int n = 1; n <= depth; ++n) {
        const MagnetizationDistribution shifted = add_edge(trace.levels.back(), channel);
        MagnetizationDistribution acc = shifted;
        LevelStats stats{acc.size(), 0.0, 0.0, 0.0};
        for (int child = 2; child <= arity; ++child) {
            if (policy.enabled) {
                const MagnetizationDistribution& lhs = child == 2 ? shifted : acc;
                acc = binned_merge(lhs, shifted, policy, stats);
            } else {
                acc = merge(acc, shifted, channel);
                if (acc.size() > policy.max_atoms)
                    throw std::length_error("evolve: atom count exceeded the cap without binning");
                stats.atoms = acc.size();
            }
        }
        trace.levels.push_back(std::move(acc));
        trace.stats.push_back(stats);
    }
    return trace;
}

std::vector<ExactMagnetization> evolve_exact(int arity, const ExactChannel& channel, int depth,
                                             std::size_t max_atoms) {
    if (arity < 1) throw std::invalid_argument("evolve_exact: arity must be >= 1");
    if (depth < 0) throw std::invalid_argument("evolve_exact: depth must be >= 0");
    std::vector<ExactMagnetization> levels;
    levels.push_back(leaf_base_distribution(channel));
    for (int n = 1; n <= depth; ++n) {
        const ExactMagnetization shifted = add_edge(levels.back(), channel);
        ExactMagnetization acc = shifted;
        for (int child = 2; child <= arity; ++child) {
            acc = merge(acc, shifted, channel);
            if (acc.size() > max_atoms)
                throw std::length_error("evolve_exact: atom count exceeded the cap");
        }
        levels.push_back(std::move(acc));
    }
    return levels;
}

}  // namespace recon
