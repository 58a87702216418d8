#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "attisim/corpus.hpp"
#include "attisim/gateway.hpp"

namespace attisim {

class MockLexicon;
struct PromptLibrary;

enum class InterventionMode { baseline, debias, devils_advocate };

std::string to_string(InterventionMode m);
InterventionMode intervention_from_string(const std::string& s);  // accepts devils-advocate too

struct InterventionContext {
    const MockLexicon& lexicon;
    const Gateway& gateway;
    const PromptLibrary& prompts;
};

// Rewrites full_text only; headline, id and category are untouched. Falls
// back to the original text flagged debias_failed when the backend gives up.
Payload debias_article(const Payload& payload, const InterventionContext& ctx, Journal& journal);

// Deterministic stand-in for a critique: one line per headline with the
// sentiment framing inverted.
std::string mock_critique(const std::vector<Payload>& payloads, const MockLexicon& lexicon);

// Throws std::invalid_argument on an empty batch. Returns "" when the backend
// fails, which makes reflection proceed in baseline form.
std::string devils_advocate_critique(const std::vector<Payload>& payloads, const std::string& tag,
                                     const InterventionContext& ctx, Journal& journal);

// Debiased full texts shared by every agent reading the same article.
class DebiasCache {
  public:
    DebiasCache() = default;
    DebiasCache(DebiasCache&& other) noexcept : items_(std::move(other.items_)) {}
    DebiasCache& operator=(DebiasCache&& other) noexcept {
        items_ = std::move(other.items_);
        return *this;
    }

    std::optional<Payload> find(const std::string& article_id) const;
    void put(const Payload& debiased);
    nlohmann::json to_json() const;
    static DebiasCache from_json(const nlohmann::json& j);
    std::size_t size() const;

  private:
    mutable std::mutex mu_;
    std::map<std::string, Payload> items_;
};

struct InterventionResult {
    std::vector<Payload> payloads;
    std::optional<std::string> critique;
};

// baseline -> identity; debias -> every payload's text debiased (cached per
// article); devils_advocate -> payloads unchanged plus a critique.
InterventionResult apply_intervention(InterventionMode mode, const std::vector<Payload>& payloads,
                                      const std::string& critique_tag, DebiasCache& cache,
                                      const InterventionContext& ctx, Journal& journal);

}  // namespace attisim
