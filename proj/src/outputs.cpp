#include "attisim/outputs.hpp"

#include <sstream>

#include <fmt/format.h>

#include "attisim/common.hpp"
#include "attisim/profiles.hpp"
#include "attisim/reflection.hpp"

namespace attisim {

nlohmann::json mae_summary(const std::vector<YearlyResult>& results, const GroundTruthSeries& gt) {
    const auto sim = to_series(results);
    try {
        return {{"favorable", mae(sim, gt, MaeBasis::favorable)},
                {"unfavorable", mae(sim, gt, MaeBasis::unfavorable)},
                {"both", mae(sim, gt, MaeBasis::both)}};
    } catch (const ValidationError&) {
        return nullptr;
    }
}

nlohmann::json results_document(const std::vector<YearlyResult>& results, const GroundTruthSeries& gt,
                                MaeBasis basis) {
    nlohmann::json years = nlohmann::json::array();
    for (const auto& r : results) years.push_back(r.to_json());
    nlohmann::json mae_j = nullptr;
    if (auto s = mae_summary(results, gt); !s.is_null()) {
        const char* key = basis == MaeBasis::favorable ? "favorable" : basis == MaeBasis::unfavorable ? "unfavorable" : "both";
        mae_j = {{"basis", key}, {"value", s[key]}, {"all", s}};
    }
    return {{"years", years}, {"mae", mae_j}};
}

std::vector<YearlyResult> results_from_document(const nlohmann::json& doc) {
    std::vector<YearlyResult> out;
    for (const auto& y : doc.at("years")) out.push_back(YearlyResult::from_json(y));
    return out;
}

std::string results_csv(const std::vector<YearlyResult>& results, const GroundTruthSeries& gt) {
    std::string out =
        "year,favorable_pct,unfavorable_pct,mean_score,mean_overall_valence,payloads_reflected,failed_reflections,"
        "gt_favorable_pct,gt_unfavorable_pct\n";
    for (const auto& r : results) {
        out += fmt::format("{},{},{},{},{},{},{}", r.year, r.favorable_pct, r.unfavorable_pct, r.mean_score,
                           r.mean_overall_valence, r.payloads_reflected, r.failed_reflections);
        auto it = gt.find(r.year);
        if (it != gt.end()) {
            out += fmt::format(",{},{}\n", it->second.favorable_pct, it->second.unfavorable_pct);
        } else {
            out += ",,\n";
        }
    }
    return out;
}

std::string domain_influence_csv(const std::vector<DomainUpdateLog>& logs) {
    const auto influence = domain_influence(logs);
    std::map<std::string, std::map<int, long>> counts;
    std::map<std::string, long> totals;
    for (const auto& l : logs) {
        ++counts[l.domain][l.year];
        ++totals[l.domain];
    }
    std::string out = "domain,year,mean_new_valence,updates\n";
    for (const auto& [domain, years] : influence.by_year) {
        for (const auto& [year, v] : years) out += fmt::format("{},{},{},{}\n", domain, year, v, counts[domain][year]);
        out += fmt::format("{},all,{},{}\n", domain, influence.overall.at(domain), totals[domain]);
    }
    return out;
}

std::string demographics_csv(const std::vector<YearlyResult>& results, const std::vector<AgentProfile>& agents) {
    std::string out = "year,group_by,group,n,favorable_pct\n";
    for (const auto& r : results) {
        for (const char* g : {"gender", "race", "party", "region", "age-band"}) {
            for (const auto& row : demographic_breakdown(r.agents, agents, g)) {
                out += fmt::format("{},{},{},{},{}\n", r.year, g, row.group, row.n, row.favorable_pct);
            }
        }
    }
    return out;
}

std::vector<DomainUpdateLog> parse_update_log(const std::string& jsonl) {
    std::vector<DomainUpdateLog> out;
    std::istringstream in(jsonl);
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        out.push_back(DomainUpdateLog::from_json(nlohmann::json::parse(line)));
    }
    return out;
}

std::string update_log_jsonl(const std::vector<DomainUpdateLog>& logs) {
    std::string out;
    for (const auto& l : logs) out += l.to_json().dump() + "\n";
    return out;
}

}  // namespace attisim
