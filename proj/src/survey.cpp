#include "attisim/survey.hpp"

#include <cmath>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "attisim/common.hpp"
#include "attisim/profiles.hpp"
#include "attisim/prompts.hpp"
#include "attisim/reflection.hpp"
#include "attisim/taxonomy.hpp"

namespace attisim {

double overall_valence(const OpinionState& state) {
    double weighted = 0.0;
    long total = 0;
    for (std::size_t d = 0; d < state.valence.size(); ++d) {
        weighted += state.valence[d] * static_cast<double>(state.exposure[d]);
        total += state.exposure[d];
    }
    if (total == 0) return 0.0;
    return weighted / static_cast<double>(total);
}

int mock_survey_response(double overall, std::optional<int> previous) {
    if (overall == 0.0) return previous.value_or(2);
    if (overall < -1.0) return 1;
    if (overall < 0.0) return 2;
    if (overall <= 1.0) return 3;
    return 4;
}

int survey_response(const AgentProfile* profile, const OpinionState& state, double overall, int year,
                    const SurveyContext& ctx, Journal& journal) {
    const int fallback = mock_survey_response(overall, state.last_response);
    const auto tag = fmt::format("y{}/{}/survey", year, state.agent_id);
    auto request = survey_request(ctx.prompts, profile, state.opinions(ctx.taxonomy.names()), overall,
                                  state.last_response, tag);
    try {
        return ctx.gateway.generate(request, [&] { return nlohmann::json{{"answer", fallback}}; }, journal)
            .get<int>();
    } catch (const SchemaError& e) {
        spdlog::warn("survey {} fell back to threshold mapping: {}", tag, e.what());
        return fallback;
    }
}

// ---------------------------------------------------------------------------

nlohmann::json YearlyResult::to_json() const {
    nlohmann::json agents_j = nlohmann::json::array();
    for (const auto& a : agents) {
        agents_j.push_back({{"agent_id", a.agent_id}, {"overall_valence", a.overall_valence}, {"response", a.response}});
    }
    return {{"year", year},
            {"favorable_pct", favorable_pct},
            {"unfavorable_pct", unfavorable_pct},
            {"mean_score", mean_score},
            {"mean_overall_valence", mean_overall_valence},
            {"domain_mean_update", domain_mean_update},
            {"payloads_reflected", payloads_reflected},
            {"failed_reflections", failed_reflections},
            {"agents", agents_j}};
}

YearlyResult YearlyResult::from_json(const nlohmann::json& j) {
    YearlyResult r;
    r.year = j.at("year").get<int>();
    r.favorable_pct = j.at("favorable_pct").get<double>();
    r.unfavorable_pct = j.at("unfavorable_pct").get<double>();
    r.mean_score = j.at("mean_score").get<double>();
    r.mean_overall_valence = j.at("mean_overall_valence").get<double>();
    r.domain_mean_update = j.at("domain_mean_update").get<std::map<std::string, double>>();
    r.payloads_reflected = j.value("payloads_reflected", 0L);
    r.failed_reflections = j.value("failed_reflections", 0L);
    for (const auto& a : j.at("agents")) {
        r.agents.push_back({a.at("agent_id").get<std::string>(), a.at("overall_valence").get<double>(),
                            a.at("response").get<int>()});
    }
    return r;
}

YearlyResult aggregate_year(int year, const std::vector<AgentYearResult>& responses) {
    if (responses.empty()) throw FatalDataError(fmt::format("year {}: no survey responses", year));
    YearlyResult r;
    r.year = year;
    r.agents = responses;
    std::size_t favorable = 0;
    double score_sum = 0.0;
    double valence_sum = 0.0;
    for (const auto& a : responses) {
        if (a.response < 1 || a.response > 4) {
            throw FatalDataError(fmt::format("year {}: agent {} has no valid survey response", year, a.agent_id));
        }
        if (a.response >= 3) ++favorable;
        score_sum += a.response;
        valence_sum += a.overall_valence;
    }
    const auto n = static_cast<double>(responses.size());
    r.favorable_pct = 100.0 * static_cast<double>(favorable) / n;
    r.unfavorable_pct = 100.0 - r.favorable_pct;
    r.mean_score = score_sum / n;
    r.mean_overall_valence = valence_sum / n;
    return r;
}

// ---------------------------------------------------------------------------

GroundTruthSeries parse_ground_truth(const std::string& csv) {
    GroundTruthSeries out;
    std::istringstream in(csv);
    std::string line;
    bool header = true;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty()) continue;
        if (header) {
            header = false;
            if (line != "year,favorable_pct,unfavorable_pct") {
                throw ValidationError("ground truth: expected header year,favorable_pct,unfavorable_pct");
            }
            continue;
        }
        std::istringstream row(line);
        std::string year_s, fav_s, unfav_s;
        std::getline(row, year_s, ',');
        std::getline(row, fav_s, ',');
        std::getline(row, unfav_s, ',');
        try {
            GroundTruthPoint p{std::stod(fav_s), std::stod(unfav_s)};
            if (p.favorable_pct < 0 || p.favorable_pct > 100 || p.unfavorable_pct < 0 || p.unfavorable_pct > 100 ||
                p.favorable_pct + p.unfavorable_pct > 100.0 + 1e-9) {
                throw ValidationError("percentages out of range");
            }
            out[std::stoi(year_s)] = p;
        } catch (const std::exception& e) {
            throw ValidationError(fmt::format("ground truth line {}: {}", line_no, e.what()));
        }
    }
    if (!out.empty()) {
        const int first = out.begin()->first;
        const int last = out.rbegin()->first;
        if (static_cast<int>(out.size()) != last - first + 1) {
            throw ValidationError("ground truth years must be contiguous");
        }
    }
    return out;
}

GroundTruthSeries load_ground_truth(const std::string& path) { return parse_ground_truth(read_file(path)); }

MaeBasis mae_basis_from_string(const std::string& s) {
    if (s == "favorable") return MaeBasis::favorable;
    if (s == "unfavorable") return MaeBasis::unfavorable;
    if (s == "both" || s == "both-averaged") return MaeBasis::both;
    throw ConfigError("unknown MAE basis: " + s);
}

PctSeries to_series(const std::vector<YearlyResult>& results) {
    PctSeries s;
    for (const auto& r : results) s[r.year] = {r.favorable_pct, r.unfavorable_pct};
    return s;
}

double mae(const PctSeries& sim, const PctSeries& gt, MaeBasis basis) {
    double fav = 0.0;
    double unfav = 0.0;
    std::size_t n = 0;
    for (const auto& [year, s] : sim) {
        auto it = gt.find(year);
        if (it == gt.end()) continue;
        fav += std::fabs(s.favorable_pct - it->second.favorable_pct);
        unfav += std::fabs(s.unfavorable_pct - it->second.unfavorable_pct);
        ++n;
    }
    if (n == 0) throw ValidationError("MAE: simulated and ground-truth series share no year");
    fav /= static_cast<double>(n);
    unfav /= static_cast<double>(n);
    switch (basis) {
        case MaeBasis::favorable: return fav;
        case MaeBasis::unfavorable: return unfav;
        case MaeBasis::both: return (fav + unfav) / 2.0;
    }
    return (fav + unfav) / 2.0;
}

DomainInfluence domain_influence(const std::vector<DomainUpdateLog>& logs) {
    std::map<std::string, std::map<int, std::pair<double, long>>> cells;
    std::map<std::string, std::pair<double, long>> totals;
    for (const auto& l : logs) {
        auto& c = cells[l.domain][l.year];
        c.first += l.new_valence;
        ++c.second;
        auto& t = totals[l.domain];
        t.first += l.new_valence;
        ++t.second;
    }
    DomainInfluence out;
    for (const auto& [domain, years] : cells) {
        for (const auto& [year, c] : years) out.by_year[domain][year] = c.first / static_cast<double>(c.second);
    }
    for (const auto& [domain, t] : totals) out.overall[domain] = t.first / static_cast<double>(t.second);
    return out;
}

std::vector<GroupFavorability> demographic_breakdown(const std::vector<AgentYearResult>& responses,
                                                     const std::vector<AgentProfile>& profiles,
                                                     const std::string& group_by) {
    static const std::map<std::string, std::string> kFields{
        {"gender", "gender"}, {"race", "race"}, {"party", "party"}, {"region", "region"}, {"age-band", "age_band"}};
    auto field = kFields.find(group_by);
    if (field == kFields.end()) throw ConfigError("unknown demographic grouping: " + group_by);

    std::map<std::string, const AgentProfile*> by_id;
    for (const auto& p : profiles) by_id[p.agent_id] = &p;
    std::map<std::string, std::pair<std::size_t, std::size_t>> counts;  // group -> (n, favorable)
    for (const auto& r : responses) {
        auto it = by_id.find(r.agent_id);
        if (it == by_id.end()) throw ValidationError("no profile for agent " + r.agent_id);
        auto dem = it->second->demographics.find(field->second);
        const std::string group = dem == it->second->demographics.end() ? "unknown" : dem->second;
        auto& c = counts[group];
        ++c.first;
        if (r.response >= 3) ++c.second;
    }
    std::vector<GroupFavorability> out;
    for (const auto& [group, c] : counts) {
        out.push_back({group, c.first, 100.0 * static_cast<double>(c.second) / static_cast<double>(c.first)});
    }
    return out;
}

}  // namespace attisim
