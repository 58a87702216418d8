#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "attisim/corpus.hpp"
#include "attisim/gateway.hpp"
#include "attisim/prompts.hpp"

namespace attisim {

struct AgentProfile;
class TopicTaxonomy;
class MockLexicon;
struct AblationFlags;

enum class DissonanceAction { confirm, revise, reinforce, dismiss, none };

std::string to_string(DissonanceAction a);
std::optional<DissonanceAction> action_from_string(const std::string& s);

// Per-agent opinions over the taxonomy domains (taxonomy order).
struct OpinionState {
    std::string agent_id;
    std::vector<double> valence;  // each in [-2, 2], starts at 0
    std::vector<long> exposure;   // articles read per domain
    std::optional<int> last_response;
    int year_cursor = 0;  // first year not yet completed

    static OpinionState initial(const std::string& agent_id, std::size_t domains, int first_year);

    std::vector<DomainOpinion> opinions(const std::vector<std::string>& domains) const;
    nlohmann::json to_json() const;
    static OpinionState from_json(const nlohmann::json& j);
};

struct DomainUpdate {
    std::string domain;
    DissonanceAction action = DissonanceAction::none;
    std::vector<std::string> cognitions;
    double new_valence = 0.0;
};

struct ReflectionOutcome {
    std::vector<std::string> themes;
    std::vector<DomainUpdate> updates;              // one per domain in D_news
    std::map<std::string, long> article_counts;     // batch articles per resolved domain
    std::string reasoning;
    bool failed = false;                            // backend gave up; no updates

    std::vector<std::string> touched_domains() const;
    nlohmann::json to_json() const;
};

struct DomainUpdateLog {
    std::string agent_id;
    int year = 0;
    std::string domain;
    double old_valence = 0.0;
    double delta = 0.0;
    double new_valence = 0.0;
    DissonanceAction action = DissonanceAction::none;
    int batch = 0;

    nlohmann::json to_json() const;
    static DomainUpdateLog from_json(const nlohmann::json& j);
};

// Domain of a payload: its category, or the keyword categorization of
// headline + text. nullopt when neither resolves.
std::optional<std::string> resolve_domain(const Payload& payload, const TopicTaxonomy& taxonomy);

struct MockDecision {
    DissonanceAction action;
    double new_valence;
};

// Dissonance rule for one domain given its current valence and the batch's
// mean sentiment on it.
MockDecision mock_decide(double current, double mean_sentiment, bool no_cognitive);

struct ReflectionContext {
    const TopicTaxonomy& taxonomy;
    const MockLexicon& lexicon;
    const Gateway& gateway;
    const PromptLibrary& prompts;
};

struct ReflectionInput {
    const AgentProfile* profile = nullptr;
    const OpinionState* state = nullptr;
    std::vector<Payload> payloads;
    std::optional<std::string> critique;  // devil's-advocate mode when non-empty
    int year = 0;
    int batch = 0;
};

// Sentiment dampening applied by the mock when a devil's-advocate critique
// accompanies the batch.
constexpr double kCritiqueDampening = 0.5;

ReflectionOutcome reflect_batch(const ReflectionInput& in, const ReflectionContext& ctx, const AblationFlags& flags,
                                Journal& journal);

// Opinion update: touched domains take their new valence and gain the batch's
// article counts; all other domains stay bit-identical. Returns the logs.
std::vector<DomainUpdateLog> apply_updates(OpinionState& state, const ReflectionOutcome& outcome,
                                           const TopicTaxonomy& taxonomy, int year, int batch);

}  // namespace attisim
