#include "attisim/reflection.hpp"

#include <cmath>
#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "attisim/common.hpp"
#include "attisim/distribution.hpp"
#include "attisim/lexicon.hpp"
#include "attisim/profiles.hpp"
#include "attisim/taxonomy.hpp"

namespace attisim {

std::string to_string(DissonanceAction a) {
    switch (a) {
        case DissonanceAction::confirm: return "confirm";
        case DissonanceAction::revise: return "revise";
        case DissonanceAction::reinforce: return "reinforce";
        case DissonanceAction::dismiss: return "dismiss";
        case DissonanceAction::none: return "none";
    }
    return "none";
}

std::optional<DissonanceAction> action_from_string(const std::string& s) {
    for (auto a : {DissonanceAction::confirm, DissonanceAction::revise, DissonanceAction::reinforce,
                   DissonanceAction::dismiss, DissonanceAction::none}) {
        if (to_string(a) == s) return a;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// OpinionState

OpinionState OpinionState::initial(const std::string& agent_id, std::size_t domains, int first_year) {
    OpinionState s;
    s.agent_id = agent_id;
    s.valence.assign(domains, 0.0);
    s.exposure.assign(domains, 0);
    s.year_cursor = first_year;
    return s;
}

std::vector<DomainOpinion> OpinionState::opinions(const std::vector<std::string>& domains) const {
    std::vector<DomainOpinion> out;
    for (std::size_t i = 0; i < domains.size() && i < valence.size(); ++i) {
        out.push_back({domains[i], valence[i], exposure[i]});
    }
    return out;
}

nlohmann::json OpinionState::to_json() const {
    return {{"agent_id", agent_id},
            {"valence", valence},
            {"exposure", exposure},
            {"last_response", last_response ? nlohmann::json(*last_response) : nlohmann::json(nullptr)},
            {"year_cursor", year_cursor}};
}

OpinionState OpinionState::from_json(const nlohmann::json& j) {
    OpinionState s;
    s.agent_id = j.at("agent_id").get<std::string>();
    s.valence = j.at("valence").get<std::vector<double>>();
    s.exposure = j.at("exposure").get<std::vector<long>>();
    if (j.contains("last_response") && !j["last_response"].is_null()) s.last_response = j["last_response"].get<int>();
    s.year_cursor = j.at("year_cursor").get<int>();
    return s;
}

// ---------------------------------------------------------------------------
// Outcome / logs

std::vector<std::string> ReflectionOutcome::touched_domains() const {
    std::vector<std::string> out;
    for (const auto& u : updates) out.push_back(u.domain);
    return out;
}

nlohmann::json ReflectionOutcome::to_json() const {
    nlohmann::json ups = nlohmann::json::array();
    for (const auto& u : updates) {
        ups.push_back({{"domain", u.domain},
                       {"action", to_string(u.action)},
                       {"cognitions", u.cognitions},
                       {"new_valence", u.new_valence}});
    }
    return {{"themes", themes},
            {"updates", ups},
            {"article_counts", article_counts},
            {"reasoning", reasoning},
            {"failed", failed}};
}

nlohmann::json DomainUpdateLog::to_json() const {
    return {{"agent_id", agent_id},       {"year", year},   {"domain", domain},
            {"old_valence", old_valence}, {"delta", delta}, {"new_valence", new_valence},
            {"action", to_string(action)}, {"batch", batch}};
}

DomainUpdateLog DomainUpdateLog::from_json(const nlohmann::json& j) {
    DomainUpdateLog l;
    l.agent_id = j.at("agent_id").get<std::string>();
    l.year = j.at("year").get<int>();
    l.domain = j.at("domain").get<std::string>();
    l.old_valence = j.at("old_valence").get<double>();
    l.delta = j.at("delta").get<double>();
    l.new_valence = j.at("new_valence").get<double>();
    l.action = action_from_string(j.at("action").get<std::string>()).value_or(DissonanceAction::none);
    l.batch = j.value("batch", 0);
    return l;
}

// ---------------------------------------------------------------------------
// Mock rules

std::optional<std::string> resolve_domain(const Payload& payload, const TopicTaxonomy& taxonomy) {
    if (payload.category && taxonomy.contains(*payload.category)) return payload.category;
    return taxonomy.categorize(payload.headline + " " + payload.full_text);
}

namespace {
int sign(double x) { return (x > 0) - (x < 0); }
}  // namespace

MockDecision mock_decide(double current, double mean_sentiment, bool no_cognitive) {
    if (no_cognitive) return {DissonanceAction::none, clamp_valence(current + mean_sentiment)};
    // Neutral news contradicts nothing.
    if (current == 0.0 || mean_sentiment == 0.0 || sign(mean_sentiment) == sign(current)) {
        return {DissonanceAction::confirm, clamp_valence(current + mean_sentiment)};
    }
    if (std::fabs(mean_sentiment) >= std::fabs(current)) {
        return {DissonanceAction::revise, clamp_valence(current + mean_sentiment)};
    }
    if (std::fabs(current) < 0.25) return {DissonanceAction::dismiss, current * 0.5};
    return {DissonanceAction::reinforce, current * 0.9};
}

namespace {

struct DomainBatch {
    std::vector<double> sentiments;
    std::vector<std::string> headlines;
};

nlohmann::json mock_reflection(const ReflectionInput& in, const std::map<std::string, DomainBatch>& batches,
                               const TopicTaxonomy& taxonomy, bool no_cognitive, double dampening) {
    nlohmann::json updates = nlohmann::json::array();
    nlohmann::json themes = nlohmann::json::array();
    // taxonomy order keeps the output independent of map ordering details
    for (const auto& name : taxonomy.names()) {
        auto it = batches.find(name);
        if (it == batches.end()) continue;
        const auto& b = it->second;
        double sum = 0.0;
        for (double s : b.sentiments) sum += s;
        const double mean = sum / static_cast<double>(b.sentiments.size()) * dampening;
        const double current = in.state->valence[*taxonomy.index_of(name)];
        const auto decision = mock_decide(current, mean, no_cognitive);

        nlohmann::json cognitions = nlohmann::json::array();
        for (std::size_t i = 0; i < b.headlines.size(); ++i) {
            cognitions.push_back(fmt::format("{} (tone {:+.2f})", b.headlines[i], b.sentiments[i]));
        }
        if (decision.action == DissonanceAction::reinforce) {
            cognitions.push_back(fmt::format("The reports on {} do not outweigh what I already know.", name));
        } else if (decision.action == DissonanceAction::dismiss) {
            cognitions.push_back(fmt::format("My view on {} matters less to me than I thought.", name));
        }
        themes.push_back(name);
        updates.push_back({{"domain", name},
                           {"action", to_string(decision.action)},
                           {"cognitions", cognitions},
                           {"new_valence", decision.new_valence}});
    }
    return {{"themes", themes},
            {"reasoning", fmt::format("mock reflection over {} articles", in.payloads.size())},
            {"updates", updates}};
}

}  // namespace

ReflectionOutcome reflect_batch(const ReflectionInput& in, const ReflectionContext& ctx, const AblationFlags& flags,
                                Journal& journal) {
    if (!in.state) throw std::invalid_argument("reflect_batch: missing opinion state");
    if (in.payloads.empty()) throw std::invalid_argument("reflect_batch: empty batch");

    ReflectionOutcome outcome;
    std::map<std::string, DomainBatch> batches;
    for (const auto& p : in.payloads) {
        auto domain = resolve_domain(p, ctx.taxonomy);
        if (!domain) {
            spdlog::debug("article {} has no resolvable domain", p.article_id);
            continue;
        }
        ++outcome.article_counts[*domain];
        auto& b = batches[*domain];
        b.sentiments.push_back(mock_sentiment(p.headline + " " + p.full_text, ctx.lexicon));
        b.headlines.push_back(p.headline);
    }

    const bool da = in.critique && !in.critique->empty();
    const double dampening = da ? kCritiqueDampening : 1.0;
    const auto domains = ctx.taxonomy.names();

    ReflectionPromptInput prompt;
    prompt.profile = flags.no_profile ? nullptr : in.profile;
    prompt.opinions = in.state->opinions(domains);
    prompt.payloads = in.payloads;
    prompt.domains = domains;
    prompt.no_cognitive = flags.no_cognitive;
    if (da) prompt.critique = in.critique;

    const std::string tag =
        fmt::format("y{}/{}/reflect/b{}", in.year, in.state->agent_id, in.batch);
    auto mock = [&] { return mock_reflection(in, batches, ctx.taxonomy, flags.no_cognitive, dampening); };
    auto validate_actions = [&](const nlohmann::json& v) -> std::string {
        if (flags.no_cognitive) return {};
        for (const auto& u : v["updates"]) {
            auto a = action_from_string(u["action"].get<std::string>());
            if (!a || *a == DissonanceAction::none) {
                return "reflection_update: action must be confirm, revise, reinforce or dismiss";
            }
        }
        return {};
    };

    nlohmann::json parsed;
    try {
        parsed = ctx.gateway.generate(reflection_request(ctx.prompts, prompt, tag), mock, journal, validate_actions);
    } catch (const SchemaError& e) {
        spdlog::warn("reflection {} failed, no update applied: {}", tag, e.what());
        outcome.failed = true;
        return outcome;
    }

    outcome.themes = parsed["themes"].get<std::vector<std::string>>();
    outcome.reasoning = parsed["reasoning"].get<std::string>();
    std::set<std::string> seen;
    for (const auto& u : parsed["updates"]) {
        DomainUpdate du;
        du.domain = u["domain"].get<std::string>();
        auto idx = ctx.taxonomy.index_of(du.domain);
        if (!idx) {
            spdlog::warn("{}: update for unknown domain '{}' rejected", tag, du.domain);
            continue;
        }
        if (!seen.insert(du.domain).second) continue;
        du.action = flags.no_cognitive ? DissonanceAction::none
                                       : action_from_string(u["action"].get<std::string>()).value();
        du.cognitions = u["cognitions"].get<std::vector<std::string>>();
        du.new_valence = u["new_valence"].get<double>();
        if (!ctx.gateway.mock_semantics() && du.new_valence == in.state->valence[*idx]) {
            du.new_valence = clamp_valence(du.new_valence + (du.new_valence < kValenceMax ? 0.01 : -0.01));
        }
        outcome.updates.push_back(std::move(du));
    }
    return outcome;
}

std::vector<DomainUpdateLog> apply_updates(OpinionState& state, const ReflectionOutcome& outcome,
                                           const TopicTaxonomy& taxonomy, int year, int batch) {
    std::vector<DomainUpdateLog> logs;
    for (const auto& u : outcome.updates) {
        auto idx = taxonomy.index_of(u.domain);
        if (!idx) {
            spdlog::warn("update for domain '{}' outside taxonomy rejected", u.domain);
            continue;
        }
        const double old = state.valence[*idx];
        // o + (new - old) == new up to rounding; assign new directly so no drift accumulates
        const double next = clamp_valence(u.new_valence);
        state.valence[*idx] = next;
        auto cnt = outcome.article_counts.find(u.domain);
        if (cnt != outcome.article_counts.end()) state.exposure[*idx] += cnt->second;
        logs.push_back({state.agent_id, year, u.domain, old, next - old, next, u.action, batch});
    }
    return logs;
}

}  // namespace attisim
