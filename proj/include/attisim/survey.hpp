#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "attisim/gateway.hpp"

namespace attisim {

struct AgentProfile;
struct OpinionState;
struct DomainUpdateLog;
struct PromptLibrary;
class TopicTaxonomy;

// Exposure-weighted mean valence; 0 when nothing has been read yet.
double overall_valence(const OpinionState& state);

// Threshold table over [-2, 2]: <-1 -> 1, [-1, 0) -> 2, (0, 1] -> 3, >1 -> 4.
// Exactly 0 repeats the previous answer, or 2 when there is none.
int mock_survey_response(double overall, std::optional<int> previous);

struct SurveyContext {
    const TopicTaxonomy& taxonomy;
    const Gateway& gateway;
    const PromptLibrary& prompts;
};

int survey_response(const AgentProfile* profile, const OpinionState& state, double overall, int year,
                    const SurveyContext& ctx, Journal& journal);

struct AgentYearResult {
    std::string agent_id;
    double overall_valence = 0.0;
    int response = 0;
};

struct YearlyResult {
    int year = 0;
    std::vector<AgentYearResult> agents;
    double favorable_pct = 0.0;
    double unfavorable_pct = 0.0;
    double mean_score = 0.0;           // mean of 1-4 responses
    double mean_overall_valence = 0.0;
    std::map<std::string, double> domain_mean_update;  // mean new valence this year
    long payloads_reflected = 0;
    long failed_reflections = 0;

    nlohmann::json to_json() const;
    static YearlyResult from_json(const nlohmann::json& j);
};

// Population percentages and means. Throws FatalDataError when any response
// is missing (outside 1-4).
YearlyResult aggregate_year(int year, const std::vector<AgentYearResult>& responses);

struct GroundTruthPoint {
    double favorable_pct = 0.0;
    double unfavorable_pct = 0.0;
};

using GroundTruthSeries = std::map<int, GroundTruthPoint>;

// CSV with header year,favorable_pct,unfavorable_pct. An empty file (or a
// header-only file) yields an empty series.
GroundTruthSeries load_ground_truth(const std::string& path);
GroundTruthSeries parse_ground_truth(const std::string& csv);

enum class MaeBasis { favorable, unfavorable, both };
MaeBasis mae_basis_from_string(const std::string& s);

using PctSeries = std::map<int, GroundTruthPoint>;
PctSeries to_series(const std::vector<YearlyResult>& results);

// Mean absolute error over overlapping years. Throws ValidationError when
// the series share no year.
double mae(const PctSeries& sim, const PctSeries& gt, MaeBasis basis = MaeBasis::both);

struct DomainInfluence {
    std::map<std::string, std::map<int, double>> by_year;  // absent cells = no updates
    std::map<std::string, double> overall;
};

DomainInfluence domain_influence(const std::vector<DomainUpdateLog>& logs);

struct GroupFavorability {
    std::string group;
    std::size_t n = 0;
    double favorable_pct = 0.0;
};

// group_by: gender, race, party, region or age-band.
std::vector<GroupFavorability> demographic_breakdown(const std::vector<AgentYearResult>& responses,
                                                     const std::vector<AgentProfile>& profiles,
                                                     const std::string& group_by);

}  // namespace attisim
