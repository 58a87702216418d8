#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "attisim/gateway.hpp"

namespace attisim {

class TopicTaxonomy;

using FieldMap = std::map<std::string, std::string>;

// Field names for the four profile feature groups (8 + 5 + 7 + 30).
struct ProfileSchema {
    static constexpr std::size_t kDemographics = 8;
    static constexpr std::size_t kPolitical = 5;
    static constexpr std::size_t kMedia = 7;
    static constexpr std::size_t kViews = 30;

    std::string unknown_token = "unknown";
    std::vector<std::string> demographics;
    std::vector<std::string> political_preferences;
    std::vector<std::string> media_preferences;
    std::vector<std::string> domestic_views;

    static ProfileSchema from_json(const nlohmann::json& j);
    static ProfileSchema load(const std::string& path);
};

struct SocialMediaRecord {
    std::string record_id;
    std::string state;
    std::string gender;
    std::string race;
    std::string party;
    std::string bio;
    std::vector<std::string> posts;
};

struct SurveyRespondentRecord {
    std::string record_id;
    std::string region;
    std::string gender;
    std::string race;
    std::string party;
    FieldMap demographics;  // remaining demographic fields (age_band, ...)
    FieldMap media_preferences;
    FieldMap political_preferences;
    FieldMap domestic_views;
};

struct Provenance {
    std::string social_record_id;
    std::string survey_record_id;
    std::optional<std::string> compromised_feature;
};

struct AgentProfile {
    std::string agent_id;
    FieldMap demographics;
    FieldMap political_preferences;
    FieldMap media_preferences;
    FieldMap domestic_views;
    std::vector<std::string> interests;  // taxonomy order
    Provenance provenance;

    std::size_t feature_count() const {
        return demographics.size() + political_preferences.size() + media_preferences.size() +
               domestic_views.size();
    }
    const std::string& demographic(const std::string& field) const;
};

nlohmann::json profile_to_json(const AgentProfile& p);
AgentProfile profile_from_json(const nlohmann::json& j);
std::vector<AgentProfile> load_profiles(const std::string& path);
std::string profiles_to_string(const std::vector<AgentProfile>& profiles);

// The nine census divisions.
const std::vector<std::string>& census_regions();

// Census region of a two-letter state code (case-insensitive).
// Throws ValidationError naming the code when it is not one of the 50 states.
std::string state_to_region(std::string_view state);

// Parsing. Missing preference/view fields become the schema's unknown token.
SocialMediaRecord parse_social_record(const nlohmann::json& j, const TopicTaxonomy& taxonomy);
SurveyRespondentRecord parse_survey_record(const nlohmann::json& j, const ProfileSchema& schema,
                                           const TopicTaxonomy& taxonomy);

struct MatchedPair {
    const SocialMediaRecord* social = nullptr;
    const SurveyRespondentRecord* survey = nullptr;
    std::optional<std::string> compromised_feature;  // gender, race or party
};

struct MatchResult {
    std::vector<MatchedPair> pairs;            // survey record_id order
    std::vector<std::string> unmatched_survey;  // no admissible candidate
    std::vector<std::string> unused_social;
};

// Greedy deterministic pairing. Survey records are visited in record_id
// order; each takes the unused social record in the same region with the
// most exact matches on {gender, race, party} (at least 2), ties broken by
// social record_id. Every record is used at most once.
MatchResult match_records(const std::vector<SocialMediaRecord>& social,
                          const std::vector<SurveyRespondentRecord>& survey);

// Text used for interest tagging: posts, bio and media-preference values.
std::string interest_text(const MatchedPair& pair);

// Keyword tagger: every topic with a keyword hit; else the single topic with
// the most hits; else the first taxonomy topic.
std::vector<std::string> mock_interests(std::string_view text, const TopicTaxonomy& taxonomy);

struct PromptLibrary;

std::vector<std::string> assign_interests(const MatchedPair& pair, const TopicTaxonomy& taxonomy,
                                          const Gateway& gateway, const PromptLibrary& prompts,
                                          Journal& journal);

struct MatchingReport {
    std::size_t social_records = 0;
    std::size_t survey_records = 0;
    std::size_t matched = 0;
    std::size_t unmatched_survey = 0;
    std::size_t unused_social = 0;
    std::size_t skipped_social_rows = 0;
    std::size_t skipped_survey_rows = 0;
    std::map<std::string, std::size_t> compromised_by_feature;
    std::vector<std::string> unmatched_survey_ids;
    std::vector<std::string> diagnostics;
    // Marginals of emitted profiles for gender, party, region, race.
    std::map<std::string, std::map<std::string, std::size_t>> marginals;

    nlohmann::json to_json() const;
    std::string to_text() const;
};

struct ProfileBuildResult {
    std::vector<AgentProfile> profiles;
    MatchingReport report;
    Journal journal;
};

// Throws FatalDataError when nothing matches.
ProfileBuildResult build_profiles(const std::vector<std::string>& social_lines,
                                  const std::vector<std::string>& survey_lines, const ProfileSchema& schema,
                                  const TopicTaxonomy& taxonomy, const Gateway& gateway,
                                  const PromptLibrary& prompts);
ProfileBuildResult build_profiles_from_files(const std::string& social_path, const std::string& survey_path,
                                             const ProfileSchema& schema, const TopicTaxonomy& taxonomy,
                                             const Gateway& gateway, const PromptLibrary& prompts);

// Uniform sample of `n` profiles without replacement. Throws ConfigError
// when n exceeds the population.
std::vector<AgentProfile> sample_agents(const std::vector<AgentProfile>& profiles, std::size_t n,
                                        std::uint64_t seed);

std::vector<std::string> read_lines(const std::string& path);

}  // namespace attisim
