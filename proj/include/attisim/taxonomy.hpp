#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace attisim {

struct Topic {
    std::string name;
    std::vector<std::string> keywords;
    std::vector<std::vector<std::string>> keyword_tokens;  // tokenized keywords
};

// The 15 opinion domains plus the closed demographic vocabularies.
class TopicTaxonomy {
  public:
    static constexpr std::size_t kTopicCount = 15;

    static TopicTaxonomy from_json(const nlohmann::json& j);
    static TopicTaxonomy load(const std::string& path);

    const std::vector<Topic>& topics() const { return topics_; }
    std::vector<std::string> names() const;
    std::size_t size() const { return topics_.size(); }
    bool contains(std::string_view name) const;
    std::optional<std::size_t> index_of(std::string_view name) const;

    // Keyword occurrence count per topic in `text`, in taxonomy order.
    std::vector<std::size_t> keyword_counts(std::string_view text) const;

    // Topic with the highest keyword count, ties to taxonomy order; nullopt
    // when nothing matches.
    std::optional<std::string> categorize(std::string_view text) const;

    const std::vector<std::string>& vocabulary(const std::string& field) const;
    bool in_vocabulary(const std::string& field, const std::string& value) const;

  private:
    std::vector<Topic> topics_;
    std::map<std::string, std::vector<std::string>> vocabularies_;
};

}  // namespace attisim
