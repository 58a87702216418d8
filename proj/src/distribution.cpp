#include "attisim/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include <spdlog/spdlog.h>

#include "attisim/common.hpp"
#include "attisim/lexicon.hpp"
#include "attisim/profiles.hpp"
#include "attisim/prompts.hpp"
#include "attisim/rng.hpp"
#include "attisim/taxonomy.hpp"

namespace attisim {

void AblationFlags::validate() const {
    if (count() > 1) throw ConfigError("ablation flags are mutually exclusive; got " + name());
}

std::string AblationFlags::name() const {
    std::vector<std::string> parts;
    if (no_cognitive) parts.push_back("no-cognitive");
    if (no_profile) parts.push_back("no-profile");
    if (no_selection) parts.push_back("no-selection");
    if (title_only) parts.push_back("title-only");
    return parts.empty() ? "none" : join(parts, "+");
}

AblationFlags AblationFlags::from_name(const std::string& name) {
    AblationFlags f;
    if (name == "none" || name.empty()) return f;
    if (name == "no-cognitive") f.no_cognitive = true;
    else if (name == "no-profile") f.no_profile = true;
    else if (name == "no-selection") f.no_selection = true;
    else if (name == "title-only") f.title_only = true;
    else throw ConfigError("unknown ablation: " + name);
    return f;
}

std::vector<std::string> HeadlineOffer::ids() const {
    std::vector<std::string> out;
    out.reserve(offers.size());
    for (const auto& o : offers) out.push_back(o.article_id);
    return out;
}

nlohmann::json HeadlineOffer::to_json() const {
    nlohmann::json items = nlohmann::json::array();
    for (const auto& o : offers) items.push_back({{"article_id", o.article_id}, {"headline", o.headline}});
    return {{"agent_id", agent_id}, {"year", year}, {"offers", items}};
}

std::uint64_t offer_seed(std::uint64_t run_seed, int year, const std::string& agent_id) {
    return mix_seed(run_seed, static_cast<std::uint64_t>(year), agent_id);
}

HeadlineOffer sample_headlines(const CorpusIndex& index, int year, const std::string& agent_id, std::size_t k,
                               std::uint64_t run_seed) {
    if (k == 0) throw ConfigError("headlines per agent must be at least 1");
    const auto& pool = index.articles_for_year(year);
    if (pool.empty()) throw YearEmptyError(year);
    Rng rng(offer_seed(run_seed, year, agent_id));
    HeadlineOffer offer{agent_id, year, {}};
    for (auto i : rng.sample_indices(pool.size(), std::min(k, pool.size()))) {
        const auto& a = index.at(pool[i]);
        offer.offers.push_back({a.article_id, a.headline});
    }
    return offer;
}

std::vector<std::string> mock_rank(const AgentProfile& agent, const HeadlineOffer& offer, std::size_t m,
                                   const TopicTaxonomy& taxonomy, const MockLexicon& lexicon) {
    std::vector<std::size_t> interest_idx;
    for (const auto& name : agent.interests) {
        if (auto i = taxonomy.index_of(name)) interest_idx.push_back(*i);
    }
    using Key = std::tuple<std::size_t, double, std::string>;
    std::vector<Key> keys;
    keys.reserve(offer.offers.size());
    for (const auto& item : offer.offers) {
        const auto counts = taxonomy.keyword_counts(item.headline);
        std::size_t hits = 0;
        for (auto i : interest_idx) hits += counts[i];
        keys.emplace_back(hits, std::fabs(mock_sentiment(item.headline, lexicon)), item.article_id);
    }
    std::sort(keys.begin(), keys.end(), std::greater<>());
    std::vector<std::string> out;
    for (std::size_t i = 0; i < std::min(m, keys.size()); ++i) out.push_back(std::get<2>(keys[i]));
    return out;
}

std::vector<std::string> select_articles(const AgentProfile& agent, const HeadlineOffer& offer, std::size_t m,
                                         const SelectionContext& ctx, const AblationFlags& flags, Journal& journal,
                                         bool* used_fallback) {
    if (m > offer.offers.size()) {
        throw ConfigError("cannot select " + std::to_string(m) + " of " + std::to_string(offer.offers.size()) +
                          " offered headlines");
    }
    if (used_fallback) *used_fallback = false;
    if (flags.no_selection) {
        std::vector<std::string> out;
        for (std::size_t i = 0; i < m; ++i) out.push_back(offer.offers[i].article_id);
        return out;
    }
    if (m == 0) return {};

    const auto ranked = mock_rank(agent, offer, m, ctx.taxonomy, ctx.lexicon);
    std::vector<std::string> headlines;
    for (const auto& o : offer.offers) headlines.push_back(o.headline);
    auto mock = [&] {
        nlohmann::json picks = nlohmann::json::array();
        for (const auto& id : ranked) {
            for (std::size_t i = 0; i < offer.offers.size(); ++i) {
                if (offer.offers[i].article_id == id) picks.push_back(i + 1);
            }
        }
        return picks;
    };

    std::vector<std::string> chosen;
    std::set<std::string> seen;
    const std::string tag = "y" + std::to_string(offer.year) + "/" + agent.agent_id + "/select";
    try {
        auto picks = ctx.gateway.generate(selection_request(ctx.prompts, agent, headlines, m, tag), mock, journal);
        for (const auto& p : picks) {
            const int n = p.get<int>();
            if (n < 1 || static_cast<std::size_t>(n) > offer.offers.size()) continue;
            const auto& id = offer.offers[static_cast<std::size_t>(n - 1)].article_id;
            if (!seen.insert(id).second) continue;
            chosen.push_back(id);
            if (chosen.size() == m) break;
        }
    } catch (const SchemaError& e) {
        spdlog::warn("selection for {} in {} fell back to mock ranking: {}", agent.agent_id, offer.year, e.what());
    }
    if (chosen.size() < m) {
        if (used_fallback) *used_fallback = true;
        for (const auto& id : mock_rank(agent, offer, offer.offers.size(), ctx.taxonomy, ctx.lexicon)) {
            if (chosen.size() == m) break;
            if (seen.insert(id).second) chosen.push_back(id);
        }
    }
    return chosen;
}

std::vector<Payload> retrieve_full_text(const CorpusIndex& index, const std::vector<std::string>& selected,
                                        const AblationFlags& flags) {
    std::vector<Payload> out;
    out.reserve(selected.size());
    for (const auto& id : selected) {
        const auto& a = index.at(id);
        Payload p;
        p.article_id = a.article_id;
        p.headline = a.headline;
        p.full_text = flags.title_only ? std::string{} : a.full_text;
        p.category = a.category;
        out.push_back(std::move(p));
    }
    return out;
}

nlohmann::json payload_to_json(const Payload& p) {
    nlohmann::json j{{"article_id", p.article_id}, {"headline", p.headline}, {"full_text", p.full_text}};
    j["category"] = p.category ? nlohmann::json(*p.category) : nlohmann::json(nullptr);
    if (p.debiased) j["debiased"] = true;
    if (p.debias_failed) j["debias_failed"] = true;
    return j;
}

Payload payload_from_json(const nlohmann::json& j) {
    Payload p;
    p.article_id = j.at("article_id").get<std::string>();
    p.headline = j.at("headline").get<std::string>();
    p.full_text = j.at("full_text").get<std::string>();
    if (j.contains("category") && j["category"].is_string()) p.category = j["category"].get<std::string>();
    p.debiased = j.value("debiased", false);
    p.debias_failed = j.value("debias_failed", false);
    return p;
}

}  // namespace attisim
