#pragma once

#include <cstdint>
#include <vector>

#include "recon/tree.hpp"

namespace recon {

enum class Quantity { m, m_plus, m_minus, abs_mean, tv };

const char* quantity_name(Quantity q);

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;  // sample standard deviation / sqrt(n)
    std::int64_t n_samples = 0;
    std::uint64_t seed = 0;
    Quantity quantity = Quantity::m;
};

enum class RootCondition { plus, minus, stationary };

/// One top-down simulation of the broadcast chain; returns the leaf states in
/// tree.leaves order. Identical (seed, parameters) give identical output.
std::vector<Spin> sample_leaves(const TreeSpec& tree, RootCondition root, std::uint64_t seed);

struct McMoments {
    McEstimate m;        // from the stationary run
    McEstimate m_plus;   // from the forced-plus run
    McEstimate m_minus;  // from the forced-minus run
    // Radon-Nikodym-weighted alternatives computed from the stationary run,
    // as a consistency diagnostic for the forced-run estimates.
    McEstimate m_plus_rn;
    McEstimate m_minus_rn;
    double mixture_residual = 0.0;  // pi+ m_plus + pi- m_minus - m
};

/// Estimates (xbar, xbar+, xbar-) by sampling leaf states under the three
/// root conditionings and evaluating X exactly through the upward pass.
McMoments estimate_moments(const TreeSpec& tree, std::int64_t n_samples, std::uint64_t seed);

/// xbar alone from the stationary run (same sampler and reduction as
/// estimate_moments, a third of the work).
McEstimate estimate_second_moment(const TreeSpec& tree, std::int64_t n_samples,
                                  std::uint64_t seed);

/// Estimates D_V = (1/2)(1 + pi_ratio) E|X| from stationary samples.
McEstimate estimate_tv(const TreeSpec& tree, std::int64_t n_samples, std::uint64_t seed);

namespace detail {

/// Counter-based stream: draw j of sample i depends only on (seed, domain, i, j),
/// so worker partitioning cannot change any estimate.
struct CounterRng {
    std::uint64_t key;

    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    CounterRng(std::uint64_t seed, std::uint64_t domain, std::uint64_t sample_index)
        : key(mix(mix(seed) ^ (0xD1B54A32D192ED03ULL * (domain + 1))) +
              0x9E3779B97F4A7C15ULL * sample_index) {}

    double uniform(std::uint64_t draw_index) const {
        return static_cast<double>(mix(key + 0xC2B2AE3D27D4EB4FULL * draw_index) >> 11) *
               0x1.0p-53;
    }
};

/// Deterministic pairwise summation (order independent of worker count).
double pairwise_sum(const double* x, std::size_t n);

}  // namespace detail

}  // namespace recon
