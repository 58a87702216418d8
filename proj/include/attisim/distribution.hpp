#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "attisim/corpus.hpp"
#include "attisim/gateway.hpp"

namespace attisim {

struct AgentProfile;
class TopicTaxonomy;
class MockLexicon;
struct PromptLibrary;

// At most one flag may be set per run.
struct AblationFlags {
    bool no_cognitive = false;
    bool no_profile = false;
    bool no_selection = false;
    bool title_only = false;

    int count() const { return no_cognitive + no_profile + no_selection + title_only; }
    void validate() const;  // ConfigError when more than one flag is set
    std::string name() const;
    static AblationFlags from_name(const std::string& name);  // none|no-cognitive|...
};

class YearEmptyError : public std::runtime_error {
  public:
    explicit YearEmptyError(int year)
        : std::runtime_error("no articles published in " + std::to_string(year)), year(year) {}
    int year;
};

struct HeadlineItem {
    std::string article_id;
    std::string headline;
};

// Headline text only: no source, subheader, category or date.
struct HeadlineOffer {
    std::string agent_id;
    int year = 0;
    std::vector<HeadlineItem> offers;

    std::vector<std::string> ids() const;
    nlohmann::json to_json() const;
};

struct SelectionResult {
    std::string agent_id;
    std::vector<std::string> selected_ids;
    std::vector<Payload> payloads;
    bool used_fallback = false;
};

// Seed of one agent's offer for one year; depends only on its inputs.
std::uint64_t offer_seed(std::uint64_t run_seed, int year, const std::string& agent_id);

// Uniform sample without replacement of min(k, |A_Y|) articles from the
// year's pool. Throws YearEmptyError when the pool is empty.
HeadlineOffer sample_headlines(const CorpusIndex& index, int year, const std::string& agent_id, std::size_t k,
                               std::uint64_t run_seed);

// Ranks the offer by (interest keyword hits, |headline sentiment|,
// article_id), all descending, and returns the top m ids.
std::vector<std::string> mock_rank(const AgentProfile& agent, const HeadlineOffer& offer, std::size_t m,
                                   const TopicTaxonomy& taxonomy, const MockLexicon& lexicon);

struct SelectionContext {
    const TopicTaxonomy& taxonomy;
    const MockLexicon& lexicon;
    const Gateway& gateway;
    const PromptLibrary& prompts;
};

// Exactly m distinct ids from the offer. Under no_selection the first m
// offered ids are returned without consulting the backend.
std::vector<std::string> select_articles(const AgentProfile& agent, const HeadlineOffer& offer, std::size_t m,
                                         const SelectionContext& ctx, const AblationFlags& flags, Journal& journal,
                                         bool* used_fallback = nullptr);

// Payloads in selection order; full_text emptied under title_only.
// Throws FatalDataError on an unknown id.
std::vector<Payload> retrieve_full_text(const CorpusIndex& index, const std::vector<std::string>& selected,
                                        const AblationFlags& flags);

nlohmann::json payload_to_json(const Payload& p);
Payload payload_from_json(const nlohmann::json& j);

}  // namespace attisim
