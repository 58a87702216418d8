#include "attisim/taxonomy.hpp"

#include <algorithm>
#include <set>

#include "attisim/common.hpp"

namespace attisim {

namespace {
constexpr const char* kRequiredTopics[] = {"economics", "politics",  "health",       "technology",
                                           "lifestyle", "sports",    "entertainment"};
}

TopicTaxonomy TopicTaxonomy::from_json(const nlohmann::json& j) {
    TopicTaxonomy t;
    if (!j.contains("topics") || !j["topics"].is_array()) {
        throw ValidationError("taxonomy: missing 'topics' array");
    }
    std::set<std::string> seen;
    for (const auto& entry : j["topics"]) {
        Topic topic;
        topic.name = entry.at("name").get<std::string>();
        if (!seen.insert(topic.name).second) {
            throw ValidationError("taxonomy: duplicate topic '" + topic.name + "'");
        }
        if (entry.contains("keywords")) {
            topic.keywords = entry["keywords"].get<std::vector<std::string>>();
        }
        for (const auto& kw : topic.keywords) topic.keyword_tokens.push_back(tokenize(kw));
        t.topics_.push_back(std::move(topic));
    }
    if (t.topics_.size() != kTopicCount) {
        throw ValidationError("taxonomy: expected 15 topics, found " + std::to_string(t.topics_.size()));
    }
    for (const char* req : kRequiredTopics) {
        if (!seen.count(req)) throw ValidationError(std::string("taxonomy: required topic missing: ") + req);
    }
    if (j.contains("vocabularies")) {
        for (const auto& [field, values] : j["vocabularies"].items()) {
            t.vocabularies_[field] = values.get<std::vector<std::string>>();
        }
    }
    for (const char* field : {"gender", "race", "party"}) {
        if (!t.vocabularies_.count(field)) {
            throw ValidationError(std::string("taxonomy: vocabulary missing for ") + field);
        }
    }
    return t;
}

TopicTaxonomy TopicTaxonomy::load(const std::string& path) {
    return from_json(nlohmann::json::parse(read_file(path)));
}

std::vector<std::string> TopicTaxonomy::names() const {
    std::vector<std::string> out;
    out.reserve(topics_.size());
    for (const auto& t : topics_) out.push_back(t.name);
    return out;
}

bool TopicTaxonomy::contains(std::string_view name) const { return index_of(name).has_value(); }

std::optional<std::size_t> TopicTaxonomy::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < topics_.size(); ++i) {
        if (topics_[i].name == name) return i;
    }
    return std::nullopt;
}

std::vector<std::size_t> TopicTaxonomy::keyword_counts(std::string_view text) const {
    const auto tokens = tokenize(text);
    std::vector<std::size_t> counts(topics_.size(), 0);
    for (std::size_t i = 0; i < topics_.size(); ++i) {
        for (const auto& kw : topics_[i].keyword_tokens) counts[i] += count_phrase(tokens, kw);
    }
    return counts;
}

std::optional<std::string> TopicTaxonomy::categorize(std::string_view text) const {
    const auto counts = keyword_counts(text);
    auto best = std::max_element(counts.begin(), counts.end());  // first maximum wins ties
    if (best == counts.end() || *best == 0) return std::nullopt;
    return topics_[static_cast<std::size_t>(best - counts.begin())].name;
}

const std::vector<std::string>& TopicTaxonomy::vocabulary(const std::string& field) const {
    auto it = vocabularies_.find(field);
    if (it == vocabularies_.end()) throw ValidationError("taxonomy: no vocabulary for " + field);
    return it->second;
}

bool TopicTaxonomy::in_vocabulary(const std::string& field, const std::string& value) const {
    const auto& vocab = vocabulary(field);
    return std::find(vocab.begin(), vocab.end(), value) != vocab.end();
}

}  // namespace attisim
