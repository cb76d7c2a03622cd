#pragma once

#include "recon/distribution.hpp"

namespace recon {

/// Atom consolidation policy for deep evolutions. Sorted atoms within a
/// window of bin_width collapse to their probability-weighted mean (mass- and
/// mean-preserving); if more than max_atoms survive, the window doubles until
/// they fit. The realized window and the exact second-moment shift are
/// reported per level.
struct BinningPolicy {
    double bin_width = 1e-6;
    std::size_t max_atoms = 200'000;
    bool enabled = true;

    static BinningPolicy none() { return BinningPolicy{0.0, 200'000, false}; }
};

struct LevelStats {
    std::size_t atoms = 0;
    double bin_threshold = 0.0;   // realized consolidation window
    double m2_shift = 0.0;        // second moment removed by consolidation (>= 0)
    double mass_error = 0.0;      // |sum p - 1|
};

struct EvolutionTrace {
    std::vector<MagnetizationDistribution> levels;  // levels[n] = depth-n law
    std::vector<LevelStats> stats;
};

/// Exact distribution evolution on the regular tree: level n arises from
/// level n-1 by one edge prepend followed by (arity - 1) pairwise merges of
/// edge-prepended copies.
EvolutionTrace evolve(int arity, const Channel& channel, int depth,
                      const BinningPolicy& policy = BinningPolicy{});

/// Rational-arithmetic evolution (no binning; atoms are exact).
std::vector<ExactMagnetization> evolve_exact(int arity, const ExactChannel& channel, int depth,
                                             std::size_t max_atoms = 200'000);

}  // namespace recon
