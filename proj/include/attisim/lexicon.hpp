#pragma once

#include <string>
#include <string_view>
#include <unordered_map>

#include <nlohmann/json.hpp>

namespace attisim {

// Weighted sentiment word lists backing the deterministic mock backend.
// Weights lie in (0, 2]; the positive and negative word sets are disjoint.
class MockLexicon {
  public:
    static MockLexicon from_json(const nlohmann::json& j);
    static MockLexicon load(const std::string& path);

    void add(const std::string& word, double signed_weight);

    // Signed weight of a lower-cased token, 0 when absent.
    double weight(const std::string& token) const;
    bool contains(const std::string& token) const { return words_.count(token) != 0; }
    std::size_t size() const { return words_.size(); }

  private:
    std::unordered_map<std::string, double> words_;
};

// Mean signed weight of lexicon hits scaled by 2, clamped to [-2, 2].
// Case-insensitive, word-boundary matching; 0 when nothing matches.
double mock_sentiment(std::string_view text, const MockLexicon& lexicon);

// `text` with every lexicon word removed (word boundary, case-insensitive).
// Whitespace left behind is collapsed.
std::string strip_lexicon_words(std::string_view text, const MockLexicon& lexicon);

}  // namespace attisim
