#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace attisim {

class TopicTaxonomy;

struct Article {
    std::string article_id;
    int year = 0;
    std::string source;
    std::string headline;
    std::optional<std::string> subheader;
    std::optional<std::string> category;
    std::string full_text;
};

// What an agent receives after selecting a headline: no source, subheader
// or date. `full_text` is empty under the title-only ablation.
struct Payload {
    std::string article_id;
    std::string headline;
    std::string full_text;
    std::optional<std::string> category;
    bool debiased = false;
    bool debias_failed = false;
};

// Headline or subheader mentions China/Chinese (word match, any case).
bool mentions_china(const Article& article);

struct CorpusConfig {
    int first_year = 2005;
    int last_year = 2025;
    bool headline_only = false;       // full_text may be empty
    double reject_warn_fraction = 0.10;
};

struct IngestReport {
    std::size_t lines = 0;
    std::size_t accepted = 0;
    std::size_t unparsable = 0;
    std::size_t rejected_criterion = 0;
    std::size_t rejected_year = 0;
    std::size_t rejected_empty_text = 0;
    std::size_t dropped_categories = 0;
    std::vector<std::string> diagnostics;

    std::size_t rejected() const { return unparsable + rejected_criterion + rejected_year + rejected_empty_text; }
    nlohmann::json to_json() const;
};

// Immutable after construction; safe for concurrent reads.
class CorpusIndex {
  public:
    CorpusIndex() = default;
    // Throws FatalDataError on a duplicate article_id.
    explicit CorpusIndex(std::vector<Article> articles);

    const Article& at(const std::string& article_id) const;
    bool contains(const std::string& article_id) const { return store_.count(article_id) != 0; }
    std::size_t size() const { return store_.size(); }
    bool empty() const { return store_.empty(); }

    // Sorted ids of articles published in `year`; empty when none.
    const std::vector<std::string>& articles_for_year(int year) const;
    const std::map<int, std::vector<std::string>>& by_year() const { return by_year_; }
    const std::map<std::string, Article>& store() const { return store_; }

  private:
    std::map<int, std::vector<std::string>> by_year_;
    std::map<std::string, Article> store_;
};

struct IngestResult {
    CorpusIndex index;
    IngestReport report;
};

// Reads a JSON Lines corpus. Unparsable rows and rows failing the China
// criterion, year range or text requirement are skipped and counted. When
// `taxonomy` is given, categories outside it are dropped.
IngestResult ingest_corpus(const std::string& path, const CorpusConfig& config,
                           const TopicTaxonomy* taxonomy = nullptr);
IngestResult ingest_lines(const std::vector<std::string>& lines, const CorpusConfig& config,
                          const TopicTaxonomy* taxonomy = nullptr);

std::optional<Article> parse_article(const nlohmann::json& j, std::string& error);
nlohmann::json article_to_json(const Article& a);

struct CorpusStats {
    std::size_t total = 0;
    std::map<std::string, double> source_pct;
    std::map<std::string, std::size_t> source_counts;
    std::map<int, std::size_t> year_counts;
    std::map<std::string, std::size_t> category_counts;  // "uncategorized" for missing

    nlohmann::json to_json() const;
};

CorpusStats corpus_stats(const CorpusIndex& index);

}  // namespace attisim
