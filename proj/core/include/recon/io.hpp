#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "recon/analysis.hpp"
#include "recon/distribution.hpp"
#include "recon/evolve.hpp"
#include "recon/montecarlo.hpp"

namespace recon {

/// Fixed-precision scientific formatting (12 significant digits by default)
/// so outputs diff cleanly across implementations.
std::string format_double(double x, int significant = 12);

// Line-oriented tree format: one vertex per line as
//   id parent_id theta delta
// with parent_id = "-" for the root; '#' starts a comment.
TreeSpec parse_tree(std::istream& in);
ExactTreeSpec parse_tree_exact(std::istream& in);
std::string format_tree(const TreeSpec& tree);

nlohmann::json channel_json(const Channel& ch);
nlohmann::json distribution_json(const MagnetizationDistribution& dist);
nlohmann::json distribution_json(const ExactMagnetization& dist);
nlohmann::json estimate_json(const McEstimate& est);
nlohmann::json moments_json(const McMoments& moments);
nlohmann::json identity_report_json(const IdentityReport& report);
nlohmann::json bound_report_json(const BoundReport& report);
nlohmann::json cutset_json(const CutSet& cut, double weight);

void write_distribution_csv(std::ostream& out, const MagnetizationDistribution& dist);
void write_distribution_csv(std::ostream& out, const ExactMagnetization& dist);

}  // namespace recon
