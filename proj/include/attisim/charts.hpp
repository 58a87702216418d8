#pragma once

#include <string>
#include <vector>

#include "attisim/survey.hpp"

namespace attisim {

// SVG 1.1 documents with a fixed 800x480 viewport. Output depends only on
// the arguments.

// Simulated favorable/unfavorable percentages per year, plus the ground
// truth pair when `gt` overlaps the simulated years.
std::string favorability_svg(const std::vector<YearlyResult>& results, const GroundTruthSeries& gt);

// Mean 1-4 survey score per year.
std::string mean_score_svg(const std::vector<YearlyResult>& results);

// One bar per domain: mean post-update valence over the whole run.
std::string domain_influence_svg(const DomainInfluence& influence);

}  // namespace attisim
