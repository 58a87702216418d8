#include "attisim/interventions.hpp"

#include <stdexcept>

#include <spdlog/spdlog.h>

#include "attisim/common.hpp"
#include "attisim/distribution.hpp"
#include "attisim/lexicon.hpp"
#include "attisim/prompts.hpp"

namespace attisim {

std::string to_string(InterventionMode m) {
    switch (m) {
        case InterventionMode::baseline: return "baseline";
        case InterventionMode::debias: return "debias";
        case InterventionMode::devils_advocate: return "devils_advocate";
    }
    return "baseline";
}

InterventionMode intervention_from_string(const std::string& s) {
    if (s == "baseline") return InterventionMode::baseline;
    if (s == "debias") return InterventionMode::debias;
    if (s == "devils_advocate" || s == "devils-advocate") return InterventionMode::devils_advocate;
    throw ConfigError("unknown intervention: " + s);
}

Payload debias_article(const Payload& payload, const InterventionContext& ctx, Journal& journal) {
    if (payload.full_text.empty()) {
        throw std::invalid_argument("debias_article: article " + payload.article_id + " has no full text");
    }
    Payload out = payload;
    auto mock = [&] {
        auto text = strip_lexicon_words(payload.full_text, ctx.lexicon);
        // a text made only of loaded words leaves nothing to report
        if (text.empty()) text = "No factual content remains.";
        return nlohmann::json{{"debiased_text", text}};
    };
    try {
        auto v = ctx.gateway.generate(debias_request(ctx.prompts, payload.full_text, "debias/" + payload.article_id),
                                      mock, journal);
        out.full_text = v["debiased_text"].get<std::string>();
        out.debiased = true;
    } catch (const SchemaError& e) {
        spdlog::warn("debias of {} failed, keeping original text: {}", payload.article_id, e.what());
        out.debias_failed = true;
    }
    return out;
}

std::string mock_critique(const std::vector<Payload>& payloads, const MockLexicon& lexicon) {
    std::string out = "Hey, before you take these at face value:\n";
    for (const auto& p : payloads) {
        const double s = mock_sentiment(p.headline + " " + p.full_text, lexicon);
        out += "- \"" + p.headline + "\": ";
        if (s < 0) out += "this is probably not as bad as it sounds, and there is a more hopeful side the story leaves out.\n";
        else if (s > 0) out += "this is probably not as rosy as it sounds, and the story skips the downsides.\n";
        else out += "there is more context here than the report gives.\n";
    }
    out.pop_back();
    return out;
}

std::string devils_advocate_critique(const std::vector<Payload>& payloads, const std::string& tag,
                                     const InterventionContext& ctx, Journal& journal) {
    if (payloads.empty()) throw std::invalid_argument("devils_advocate_critique: empty batch");
    auto mock = [&] { return nlohmann::json{{"critique", mock_critique(payloads, ctx.lexicon)}}; };
    try {
        return ctx.gateway.generate(critique_request(ctx.prompts, payloads, tag), mock, journal)["critique"]
            .get<std::string>();
    } catch (const SchemaError& e) {
        spdlog::warn("critique {} failed, reflecting without it: {}", tag, e.what());
        return {};
    }
}

std::optional<Payload> DebiasCache::find(const std::string& article_id) const {
    std::lock_guard lock(mu_);
    auto it = items_.find(article_id);
    if (it == items_.end()) return std::nullopt;
    return it->second;
}

void DebiasCache::put(const Payload& debiased) {
    std::lock_guard lock(mu_);
    items_.emplace(debiased.article_id, debiased);
}

std::size_t DebiasCache::size() const {
    std::lock_guard lock(mu_);
    return items_.size();
}

nlohmann::json DebiasCache::to_json() const {
    std::lock_guard lock(mu_);
    nlohmann::json j = nlohmann::json::array();
    for (const auto& [id, p] : items_) j.push_back(payload_to_json(p));
    return j;
}

DebiasCache DebiasCache::from_json(const nlohmann::json& j) {
    DebiasCache c;
    for (const auto& e : j) c.put(payload_from_json(e));
    return c;
}

InterventionResult apply_intervention(InterventionMode mode, const std::vector<Payload>& payloads,
                                      const std::string& critique_tag, DebiasCache& cache,
                                      const InterventionContext& ctx, Journal& journal) {
    InterventionResult out;
    switch (mode) {
        case InterventionMode::baseline:
            out.payloads = payloads;
            break;
        case InterventionMode::debias:
            for (const auto& p : payloads) {
                if (p.full_text.empty()) {  // nothing to rewrite (title-only corpora)
                    Payload q = p;
                    q.debiased = true;
                    out.payloads.push_back(std::move(q));
                    continue;
                }
                auto cached = cache.find(p.article_id);
                if (!cached) {
                    cached = debias_article(p, ctx, journal);
                    cache.put(*cached);
                }
                out.payloads.push_back(*cached);
            }
            break;
        case InterventionMode::devils_advocate:
            out.payloads = payloads;
            out.critique = devils_advocate_critique(payloads, critique_tag, ctx, journal);
            break;
    }
    return out;
}

}  // namespace attisim
