#include "attisim/lexicon.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "attisim/common.hpp"

namespace attisim {

MockLexicon MockLexicon::from_json(const nlohmann::json& j) {
    MockLexicon lex;
    for (const auto& [word, w] : j.at("positive").items()) lex.add(word, w.get<double>());
    for (const auto& [word, w] : j.at("negative").items()) lex.add(word, -w.get<double>());
    return lex;
}

MockLexicon MockLexicon::load(const std::string& path) {
    return from_json(nlohmann::json::parse(read_file(path)));
}

void MockLexicon::add(const std::string& word, double signed_weight) {
    const double mag = std::fabs(signed_weight);
    if (!(mag > 0.0 && mag <= 2.0)) {
        throw ValidationError("lexicon: weight out of (0, 2] for '" + word + "'");
    }
    auto tokens = tokenize(word);
    if (tokens.size() != 1) throw ValidationError("lexicon: entries must be single words: '" + word + "'");
    if (!words_.emplace(tokens.front(), signed_weight).second) {
        throw ValidationError("lexicon: word listed twice: '" + word + "'");
    }
}

double MockLexicon::weight(const std::string& token) const {
    auto it = words_.find(token);
    return it == words_.end() ? 0.0 : it->second;
}

double mock_sentiment(std::string_view text, const MockLexicon& lexicon) {
    double sum = 0.0;
    std::size_t matched = 0;
    for (const auto& tok : tokenize(text)) {
        if (lexicon.contains(tok)) {
            sum += lexicon.weight(tok);
            ++matched;
        }
    }
    const double score = sum / static_cast<double>(std::max<std::size_t>(1, matched)) * 2.0;
    return clamp_valence(score);
}

std::string strip_lexicon_words(std::string_view text, const MockLexicon& lexicon) {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        auto c = static_cast<unsigned char>(text[i]);
        if (std::isalnum(c)) {
            std::size_t j = i;
            while (j < text.size() && std::isalnum(static_cast<unsigned char>(text[j]))) ++j;
            std::string word(text.substr(i, j - i));
            if (!lexicon.contains(to_lower(word))) out += word;
            i = j;
        } else {
            out.push_back(text[i]);
            ++i;
        }
    }
    // collapse runs of spaces left by removed words
    std::string collapsed;
    collapsed.reserve(out.size());
    for (char ch : out) {
        if (ch == ' ' && !collapsed.empty() && collapsed.back() == ' ') continue;
        collapsed.push_back(ch);
    }
    return trim(collapsed);
}

}  // namespace attisim
