#pragma once

// Deterministic generators for the shipped fixtures and for the larger
// inputs built at test time.

#include <cstdint>
#include <string>
#include <vector>

namespace fixtures {

// 30 social-media + 30 survey records. Most pairs agree exactly; a few
// differ on one feature, one survey region has no social candidate and one
// survey's only candidate shares a single feature.
std::vector<std::string> profile_social_lines();
std::vector<std::string> profile_survey_lines();

// A small corpus where each row carries "expect_reject": true/false, set by
// construction from whether the headline or subheader mentions China.
std::vector<std::string> corpus_gate_lines();

// Ten years (2005-2014) of articles whose share of net-negative texts ramps
// from 30% to 100%. Headlines carry no lexicon words.
std::vector<std::string> negative_corpus_lines(int articles_per_year = 80);
std::vector<double> negative_fraction_schedule();

// Uniform corpus of `n` articles spread over [first_year, last_year].
std::vector<std::string> synthetic_corpus_lines(std::size_t n, int first_year, int last_year, std::uint64_t seed);

// Exactly-matching social/survey populations of size n.
struct Population {
    std::vector<std::string> social;
    std::vector<std::string> survey;
};
Population synthetic_population(std::size_t n, std::uint64_t seed);

// year,favorable_pct,unfavorable_pct for an invented declining series.
std::string ground_truth_csv(int first_year, int last_year);

void write_lines(const std::string& path, const std::vector<std::string>& lines);

}  // namespace fixtures
