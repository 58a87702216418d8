#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "attisim/survey.hpp"

namespace attisim {

struct AgentProfile;
struct DomainUpdateLog;

// results.json: the YearlyResult series plus MAE against the ground truth
// (null when there is no overlapping ground truth).
nlohmann::json results_document(const std::vector<YearlyResult>& results, const GroundTruthSeries& gt,
                                MaeBasis basis);
std::vector<YearlyResult> results_from_document(const nlohmann::json& doc);

// MAE for each basis, or null when the series share no year.
nlohmann::json mae_summary(const std::vector<YearlyResult>& results, const GroundTruthSeries& gt);

std::string results_csv(const std::vector<YearlyResult>& results, const GroundTruthSeries& gt);

// Rows domain,year,mean_new_valence,updates; year "all" carries the overall mean.
std::string domain_influence_csv(const std::vector<DomainUpdateLog>& logs);

// Rows year,group_by,group,n,favorable_pct for every grouping.
std::string demographics_csv(const std::vector<YearlyResult>& results, const std::vector<AgentProfile>& agents);

std::vector<DomainUpdateLog> parse_update_log(const std::string& jsonl);
std::string update_log_jsonl(const std::vector<DomainUpdateLog>& logs);

}  // namespace attisim
