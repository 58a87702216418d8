#include "attisim/profiles.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "attisim/common.hpp"
#include "attisim/prompts.hpp"
#include "attisim/rng.hpp"
#include "attisim/taxonomy.hpp"

namespace attisim {

// ---------------------------------------------------------------------------
// Schema

ProfileSchema ProfileSchema::from_json(const nlohmann::json& j) {
    ProfileSchema s;
    s.unknown_token = j.value("unknown_token", std::string("unknown"));
    s.demographics = j.at("demographics").get<std::vector<std::string>>();
    s.political_preferences = j.at("political_preferences").get<std::vector<std::string>>();
    s.media_preferences = j.at("media_preferences").get<std::vector<std::string>>();
    s.domestic_views = j.at("domestic_views").get<std::vector<std::string>>();
    auto check = [](const std::vector<std::string>& v, std::size_t n, const char* group) {
        if (v.size() != n) {
            throw ValidationError(fmt::format("profile schema: {} needs {} fields, found {}", group, n, v.size()));
        }
        if (std::set<std::string>(v.begin(), v.end()).size() != v.size()) {
            throw ValidationError(fmt::format("profile schema: duplicate field in {}", group));
        }
    };
    check(s.demographics, kDemographics, "demographics");
    check(s.political_preferences, kPolitical, "political_preferences");
    check(s.media_preferences, kMedia, "media_preferences");
    check(s.domestic_views, kViews, "domestic_views");
    for (const char* required : {"gender", "race", "party", "state", "region"}) {
        if (std::find(s.demographics.begin(), s.demographics.end(), required) == s.demographics.end()) {
            throw ValidationError(std::string("profile schema: demographics must include ") + required);
        }
    }
    return s;
}

ProfileSchema ProfileSchema::load(const std::string& path) {
    return from_json(nlohmann::json::parse(read_file(path)));
}

// ---------------------------------------------------------------------------
// Census regions

namespace {

struct StateRegion {
    const char* state;
    const char* region;
};

constexpr StateRegion kStateRegions[] = {
    {"CT", "New England"},        {"ME", "New England"},        {"MA", "New England"},
    {"NH", "New England"},        {"RI", "New England"},        {"VT", "New England"},
    {"NJ", "Middle Atlantic"},    {"NY", "Middle Atlantic"},    {"PA", "Middle Atlantic"},
    {"IL", "East North Central"}, {"IN", "East North Central"}, {"MI", "East North Central"},
    {"OH", "East North Central"}, {"WI", "East North Central"}, {"IA", "West North Central"},
    {"KS", "West North Central"}, {"MN", "West North Central"}, {"MO", "West North Central"},
    {"NE", "West North Central"}, {"ND", "West North Central"}, {"SD", "West North Central"},
    {"DE", "South Atlantic"},     {"FL", "South Atlantic"},     {"GA", "South Atlantic"},
    {"MD", "South Atlantic"},     {"NC", "South Atlantic"},     {"SC", "South Atlantic"},
    {"VA", "South Atlantic"},     {"WV", "South Atlantic"},     {"AL", "East South Central"},
    {"KY", "East South Central"}, {"MS", "East South Central"}, {"TN", "East South Central"},
    {"AR", "West South Central"}, {"LA", "West South Central"}, {"OK", "West South Central"},
    {"TX", "West South Central"}, {"AZ", "Mountain"},           {"CO", "Mountain"},
    {"ID", "Mountain"},           {"MT", "Mountain"},           {"NV", "Mountain"},
    {"NM", "Mountain"},           {"UT", "Mountain"},           {"WY", "Mountain"},
    {"AK", "Pacific"},            {"CA", "Pacific"},            {"HI", "Pacific"},
    {"OR", "Pacific"},            {"WA", "Pacific"},
};
static_assert(std::size(kStateRegions) == 50);

std::string field_string(const nlohmann::json& j, const char* key) {
    if (!j.contains(key)) throw ValidationError(std::string("missing field '") + key + "'");
    const auto& v = j[key];
    if (v.is_string()) return v.get<std::string>();
    if (v.is_null()) return {};
    return v.dump();
}

FieldMap parse_group(const nlohmann::json& j, const char* key, const std::vector<std::string>& fields,
                     const std::string& unknown) {
    FieldMap out;
    const nlohmann::json* group = j.contains(key) && j[key].is_object() ? &j[key] : nullptr;
    for (const auto& f : fields) {
        std::string value;
        if (group && group->contains(f) && !(*group)[f].is_null()) {
            value = (*group)[f].is_string() ? (*group)[f].get<std::string>() : (*group)[f].dump();
        }
        out[f] = trim(value).empty() ? unknown : value;
    }
    return out;
}

std::string normalize_category(const std::string& field, const std::string& value, const TopicTaxonomy& taxonomy) {
    auto v = to_lower(trim(value));
    if (v.empty()) v = "unknown";
    if (!taxonomy.in_vocabulary(field, v)) {
        throw ValidationError(fmt::format("{} value '{}' not in vocabulary", field, value));
    }
    return v;
}

}  // namespace

const std::vector<std::string>& census_regions() {
    static const std::vector<std::string> regions{
        "New England",        "Middle Atlantic",    "East North Central", "West North Central", "South Atlantic",
        "East South Central", "West South Central", "Mountain",           "Pacific"};
    return regions;
}

std::string state_to_region(std::string_view state) {
    std::string code(state);
    std::transform(code.begin(), code.end(), code.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    for (const auto& sr : kStateRegions) {
        if (code == sr.state) return sr.region;
    }
    throw ValidationError("unknown state code: '" + std::string(state) + "'");
}

// ---------------------------------------------------------------------------
// Records

SocialMediaRecord parse_social_record(const nlohmann::json& j, const TopicTaxonomy& taxonomy) {
    SocialMediaRecord r;
    r.record_id = field_string(j, "record_id");
    if (r.record_id.empty()) throw ValidationError("empty record_id");
    r.state = to_lower(trim(field_string(j, "state")));
    std::transform(r.state.begin(), r.state.end(), r.state.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    state_to_region(r.state);  // validates
    r.gender = normalize_category("gender", field_string(j, "gender"), taxonomy);
    r.race = normalize_category("race", field_string(j, "race"), taxonomy);
    r.party = normalize_category("party", field_string(j, "party"), taxonomy);
    r.bio = j.value("bio", std::string{});
    if (j.contains("posts") && j["posts"].is_array()) {
        for (const auto& p : j["posts"]) {
            if (p.is_string()) r.posts.push_back(p.get<std::string>());
        }
    }
    return r;
}

SurveyRespondentRecord parse_survey_record(const nlohmann::json& j, const ProfileSchema& schema,
                                           const TopicTaxonomy& taxonomy) {
    SurveyRespondentRecord r;
    r.record_id = field_string(j, "record_id");
    if (r.record_id.empty()) throw ValidationError("empty record_id");
    r.region = trim(field_string(j, "region"));
    const auto& regions = census_regions();
    if (std::find(regions.begin(), regions.end(), r.region) == regions.end()) {
        throw ValidationError("unknown census region: '" + r.region + "'");
    }
    r.gender = normalize_category("gender", field_string(j, "gender"), taxonomy);
    r.race = normalize_category("race", field_string(j, "race"), taxonomy);
    r.party = normalize_category("party", field_string(j, "party"), taxonomy);
    for (const auto& f : schema.demographics) {
        if (f == "gender" || f == "race" || f == "party" || f == "state" || f == "region") continue;
        std::string value;
        if (j.contains(f) && !j[f].is_null()) value = j[f].is_string() ? j[f].get<std::string>() : j[f].dump();
        r.demographics[f] = trim(value).empty() ? schema.unknown_token : value;
    }
    r.media_preferences = parse_group(j, "media_preferences", schema.media_preferences, schema.unknown_token);
    r.political_preferences =
        parse_group(j, "political_preferences", schema.political_preferences, schema.unknown_token);
    r.domestic_views = parse_group(j, "domestic_views", schema.domestic_views, schema.unknown_token);
    return r;
}

// ---------------------------------------------------------------------------
// Profiles (de)serialization

const std::string& AgentProfile::demographic(const std::string& field) const {
    auto it = demographics.find(field);
    if (it == demographics.end()) throw ValidationError("profile has no demographic field " + field);
    return it->second;
}

nlohmann::json profile_to_json(const AgentProfile& p) {
    nlohmann::json prov{{"social_record_id", p.provenance.social_record_id},
                        {"survey_record_id", p.provenance.survey_record_id},
                        {"compromised_feature", p.provenance.compromised_feature
                                                    ? nlohmann::json(*p.provenance.compromised_feature)
                                                    : nlohmann::json(nullptr)}};
    return {{"agent_id", p.agent_id},
            {"demographics", p.demographics},
            {"political_preferences", p.political_preferences},
            {"media_preferences", p.media_preferences},
            {"domestic_views", p.domestic_views},
            {"interests", p.interests},
            {"provenance", prov}};
}

AgentProfile profile_from_json(const nlohmann::json& j) {
    AgentProfile p;
    p.agent_id = j.at("agent_id").get<std::string>();
    p.demographics = j.at("demographics").get<FieldMap>();
    p.political_preferences = j.at("political_preferences").get<FieldMap>();
    p.media_preferences = j.at("media_preferences").get<FieldMap>();
    p.domestic_views = j.at("domestic_views").get<FieldMap>();
    p.interests = j.at("interests").get<std::vector<std::string>>();
    if (j.contains("provenance")) {
        const auto& prov = j["provenance"];
        p.provenance.social_record_id = prov.value("social_record_id", std::string{});
        p.provenance.survey_record_id = prov.value("survey_record_id", std::string{});
        if (prov.contains("compromised_feature") && prov["compromised_feature"].is_string()) {
            p.provenance.compromised_feature = prov["compromised_feature"].get<std::string>();
        }
    }
    return p;
}

std::vector<AgentProfile> load_profiles(const std::string& path) {
    auto j = nlohmann::json::parse(read_file(path));
    if (!j.is_array()) throw ValidationError("profile file must be a JSON array: " + path);
    std::vector<AgentProfile> out;
    out.reserve(j.size());
    for (const auto& e : j) out.push_back(profile_from_json(e));
    return out;
}

std::string profiles_to_string(const std::vector<AgentProfile>& profiles) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& p : profiles) arr.push_back(profile_to_json(p));
    return arr.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Matching

MatchResult match_records(const std::vector<SocialMediaRecord>& social,
                          const std::vector<SurveyRespondentRecord>& survey) {
    std::vector<const SocialMediaRecord*> soc;
    for (const auto& s : social) soc.push_back(&s);
    std::sort(soc.begin(), soc.end(), [](auto* a, auto* b) { return a->record_id < b->record_id; });
    std::vector<const SurveyRespondentRecord*> sur;
    for (const auto& s : survey) sur.push_back(&s);
    std::sort(sur.begin(), sur.end(), [](auto* a, auto* b) { return a->record_id < b->record_id; });

    std::vector<std::string> soc_region;
    soc_region.reserve(soc.size());
    for (auto* s : soc) soc_region.push_back(state_to_region(s->state));

    MatchResult result;
    std::vector<bool> used(soc.size(), false);
    for (auto* sv : sur) {
        std::optional<std::size_t> best;
        int best_score = -1;
        for (std::size_t i = 0; i < soc.size(); ++i) {
            if (used[i] || soc_region[i] != sv->region) continue;
            int score = (soc[i]->gender == sv->gender) + (soc[i]->race == sv->race) + (soc[i]->party == sv->party);
            // social records are visited in id order, so strict > keeps the lowest id on ties
            if (score >= 2 && score > best_score) {
                best = i;
                best_score = score;
            }
        }
        if (!best) {
            result.unmatched_survey.push_back(sv->record_id);
            spdlog::debug("survey record {} has no admissible social candidate", sv->record_id);
            continue;
        }
        used[*best] = true;
        MatchedPair pair{soc[*best], sv, std::nullopt};
        if (soc[*best]->gender != sv->gender) pair.compromised_feature = "gender";
        else if (soc[*best]->race != sv->race) pair.compromised_feature = "race";
        else if (soc[*best]->party != sv->party) pair.compromised_feature = "party";
        result.pairs.push_back(pair);
    }
    for (std::size_t i = 0; i < soc.size(); ++i) {
        if (!used[i]) result.unused_social.push_back(soc[i]->record_id);
    }
    return result;
}

// ---------------------------------------------------------------------------
// Interests

std::string interest_text(const MatchedPair& pair) {
    std::string text;
    for (const auto& post : pair.social->posts) text += post + "\n";
    if (!pair.social->bio.empty()) text += pair.social->bio + "\n";
    for (const auto& [field, value] : pair.survey->media_preferences) {
        if (value != "unknown") text += value + "\n";
    }
    return text;
}

std::vector<std::string> mock_interests(std::string_view text, const TopicTaxonomy& taxonomy) {
    const auto counts = taxonomy.keyword_counts(text);
    std::vector<std::string> out;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (counts[i] > 0) out.push_back(taxonomy.topics()[i].name);
    }
    if (!out.empty()) return out;
    auto best = std::max_element(counts.begin(), counts.end());
    return {taxonomy.topics()[static_cast<std::size_t>(best - counts.begin())].name};
}

std::vector<std::string> assign_interests(const MatchedPair& pair, const TopicTaxonomy& taxonomy,
                                          const Gateway& gateway, const PromptLibrary& prompts, Journal& journal) {
    const auto text = interest_text(pair);
    const auto names = taxonomy.names();
    auto mock = [&] { return nlohmann::json(mock_interests(text, taxonomy)); };
    auto all_valid = [&](const nlohmann::json& v) {
        for (const auto& t : v) {
            if (!taxonomy.contains(t.get<std::string>())) return false;
        }
        return true;
    };

    const std::string tag = "profiles/" + pair.survey->record_id + "/interests";
    nlohmann::json topics;
    try {
        topics = gateway.generate(interest_request(prompts, text, names, tag), mock, journal);
        if (!all_valid(topics)) {
            topics = gateway.generate(interest_request(prompts, text, names, tag + "/retry"), mock, journal);
        }
    } catch (const SchemaError& e) {
        spdlog::warn("interest tagging for {} failed: {}", pair.survey->record_id, e.what());
        topics = nlohmann::json::array();
    }

    std::set<std::string> chosen;
    for (const auto& t : topics) {
        auto name = t.get<std::string>();
        if (taxonomy.contains(name)) chosen.insert(name);
    }
    if (chosen.empty()) {
        auto fallback = mock_interests(text, taxonomy);
        chosen.insert(fallback.begin(), fallback.end());
    }
    std::vector<std::string> ordered;
    for (const auto& n : names) {
        if (chosen.count(n)) ordered.push_back(n);
    }
    return ordered;
}

// ---------------------------------------------------------------------------
// Build

nlohmann::json MatchingReport::to_json() const {
    return {{"social_records", social_records},
            {"survey_records", survey_records},
            {"matched", matched},
            {"unmatched_survey", unmatched_survey},
            {"unused_social", unused_social},
            {"skipped_social_rows", skipped_social_rows},
            {"skipped_survey_rows", skipped_survey_rows},
            {"compromised_by_feature", compromised_by_feature},
            {"unmatched_survey_ids", unmatched_survey_ids},
            {"marginals", marginals},
            {"diagnostics", diagnostics}};
}

std::string MatchingReport::to_text() const {
    std::ostringstream out;
    out << "social records:   " << social_records << " (" << skipped_social_rows << " rows skipped)\n";
    out << "survey records:   " << survey_records << " (" << skipped_survey_rows << " rows skipped)\n";
    out << "matched pairs:    " << matched << "\n";
    out << "unmatched survey: " << unmatched_survey << "\n";
    out << "unused social:    " << unused_social << "\n";
    out << "compromised:\n";
    for (const auto& [f, n] : compromised_by_feature) out << "  " << f << ": " << n << "\n";
    for (const auto& [field, counts] : marginals) {
        out << field << " marginals:\n";
        for (const auto& [value, n] : counts) {
            out << fmt::format("  {:<22} {:>6} ({:.1f}%)\n", value, n,
                               matched ? 100.0 * static_cast<double>(n) / static_cast<double>(matched) : 0.0);
        }
    }
    return out.str();
}

ProfileBuildResult build_profiles(const std::vector<std::string>& social_lines,
                                  const std::vector<std::string>& survey_lines, const ProfileSchema& schema,
                                  const TopicTaxonomy& taxonomy, const Gateway& gateway,
                                  const PromptLibrary& prompts) {
    ProfileBuildResult result;
    auto& report = result.report;

    std::vector<SocialMediaRecord> social;
    std::set<std::string> social_ids;
    for (std::size_t i = 0; i < social_lines.size(); ++i) {
        if (trim(social_lines[i]).empty()) continue;
        try {
            auto rec = parse_social_record(nlohmann::json::parse(social_lines[i]), taxonomy);
            if (!social_ids.insert(rec.record_id).second) throw ValidationError("duplicate record_id " + rec.record_id);
            social.push_back(std::move(rec));
        } catch (const std::exception& e) {
            ++report.skipped_social_rows;
            report.diagnostics.push_back(fmt::format("social line {}: {}", i + 1, e.what()));
        }
    }
    std::vector<SurveyRespondentRecord> survey;
    std::set<std::string> survey_ids;
    for (std::size_t i = 0; i < survey_lines.size(); ++i) {
        if (trim(survey_lines[i]).empty()) continue;
        try {
            auto rec = parse_survey_record(nlohmann::json::parse(survey_lines[i]), schema, taxonomy);
            if (!survey_ids.insert(rec.record_id).second) throw ValidationError("duplicate record_id " + rec.record_id);
            survey.push_back(std::move(rec));
        } catch (const std::exception& e) {
            ++report.skipped_survey_rows;
            report.diagnostics.push_back(fmt::format("survey line {}: {}", i + 1, e.what()));
        }
    }
    for (const auto& d : report.diagnostics) spdlog::warn("build-profiles: {}", d);
    if (social.empty() || survey.empty()) throw FatalDataError("build-profiles: no valid social or survey records");

    report.social_records = social.size();
    report.survey_records = survey.size();

    auto matches = match_records(social, survey);
    report.matched = matches.pairs.size();
    report.unmatched_survey = matches.unmatched_survey.size();
    report.unused_social = matches.unused_social.size();
    report.unmatched_survey_ids = matches.unmatched_survey;
    for (const char* f : {"gender", "race", "party"}) report.compromised_by_feature[f] = 0;
    if (matches.pairs.empty()) throw FatalDataError("build-profiles: zero matched records");

    // Tagging runs in parallel; journals are merged in pair order afterwards.
    const auto n = static_cast<std::ptrdiff_t>(matches.pairs.size());
    std::vector<std::vector<std::string>> interests(matches.pairs.size());
    std::vector<Journal> journals(matches.pairs.size());
    std::vector<std::string> errors(matches.pairs.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        try {
            interests[idx] = assign_interests(matches.pairs[idx], taxonomy, gateway, prompts, journals[idx]);
        } catch (const std::exception& e) {
            errors[idx] = e.what();
        }
    }
    for (const auto& e : errors) {
        if (!e.empty()) throw TransportError("interest tagging failed: " + e);
    }

    for (std::size_t i = 0; i < matches.pairs.size(); ++i) {
        const auto& pair = matches.pairs[i];
        AgentProfile p;
        p.agent_id = fmt::format("agent-{:05d}", i + 1);
        const auto& sv = *pair.survey;
        // survey values take precedence on conflicts
        p.demographics["gender"] = sv.gender;
        p.demographics["race"] = sv.race;
        p.demographics["party"] = sv.party;
        p.demographics["region"] = sv.region;
        p.demographics["state"] = pair.social->state;
        for (const auto& [k, v] : sv.demographics) p.demographics[k] = v;
        p.political_preferences = sv.political_preferences;
        p.media_preferences = sv.media_preferences;
        p.domestic_views = sv.domestic_views;
        p.interests = interests[i];
        p.provenance = {pair.social->record_id, sv.record_id, pair.compromised_feature};
        if (pair.compromised_feature) ++report.compromised_by_feature[*pair.compromised_feature];
        for (const char* field : {"gender", "party", "region", "race"}) ++report.marginals[field][p.demographics[field]];
        result.journal.insert(result.journal.end(), journals[i].begin(), journals[i].end());
        result.profiles.push_back(std::move(p));
    }
    return result;
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open file: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(std::move(line));
    return lines;
}

ProfileBuildResult build_profiles_from_files(const std::string& social_path, const std::string& survey_path,
                                             const ProfileSchema& schema, const TopicTaxonomy& taxonomy,
                                             const Gateway& gateway, const PromptLibrary& prompts) {
    return build_profiles(read_lines(social_path), read_lines(survey_path), schema, taxonomy, gateway, prompts);
}

// ---------------------------------------------------------------------------
// Sampling

std::vector<AgentProfile> sample_agents(const std::vector<AgentProfile>& profiles, std::size_t n,
                                        std::uint64_t seed) {
    if (n > profiles.size()) {
        throw ConfigError(fmt::format("n_agents = {} exceeds the {} available profiles", n, profiles.size()));
    }
    Rng rng(mix_seed(seed, 0x5a4d504cULL, "sample_agents"));
    std::vector<AgentProfile> out;
    out.reserve(n);
    for (auto idx : rng.sample_indices(profiles.size(), n)) out.push_back(profiles[idx]);
    return out;
}

}  // namespace attisim
