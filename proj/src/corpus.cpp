#include "attisim/corpus.hpp"

#include <algorithm>
#include <fstream>

#include <spdlog/spdlog.h>

#include "attisim/common.hpp"
#include "attisim/taxonomy.hpp"

namespace attisim {

namespace {

bool has_china_word(const std::string& text) {
    for (const auto& tok : tokenize(text)) {
        if (tok == "china" || tok == "chinese") return true;
    }
    return false;
}

std::optional<std::string> optional_string(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    auto s = j[key].get<std::string>();
    if (trim(s).empty()) return std::nullopt;
    return s;
}

}  // namespace

bool mentions_china(const Article& article) {
    return has_china_word(article.headline) || (article.subheader && has_china_word(*article.subheader));
}

nlohmann::json IngestReport::to_json() const {
    return {{"lines", lines},
            {"accepted", accepted},
            {"rejected", rejected()},
            {"unparsable", unparsable},
            {"rejected_criterion", rejected_criterion},
            {"rejected_year", rejected_year},
            {"rejected_empty_text", rejected_empty_text},
            {"dropped_categories", dropped_categories},
            {"diagnostics", diagnostics}};
}

CorpusIndex::CorpusIndex(std::vector<Article> articles) {
    for (auto& a : articles) {
        const auto id = a.article_id;
        const int year = a.year;
        if (!store_.emplace(id, std::move(a)).second) {
            throw FatalDataError("duplicate article_id in corpus: " + id);
        }
        by_year_[year].push_back(id);
    }
    for (auto& [year, ids] : by_year_) std::sort(ids.begin(), ids.end());
}

const Article& CorpusIndex::at(const std::string& article_id) const {
    auto it = store_.find(article_id);
    if (it == store_.end()) throw FatalDataError("dangling article id: " + article_id);
    return it->second;
}

const std::vector<std::string>& CorpusIndex::articles_for_year(int year) const {
    static const std::vector<std::string> kEmpty;
    auto it = by_year_.find(year);
    return it == by_year_.end() ? kEmpty : it->second;
}

std::optional<Article> parse_article(const nlohmann::json& j, std::string& error) {
    try {
        Article a;
        const auto& id = j.at("article_id");
        a.article_id = id.is_string() ? id.get<std::string>() : id.dump();
        a.year = j.at("year").get<int>();
        a.source = j.value("source", std::string{});
        a.headline = j.at("headline").get<std::string>();
        a.subheader = optional_string(j, "subheader");
        a.category = optional_string(j, "category");
        if (a.category) a.category = to_lower(trim(*a.category));
        a.full_text = j.value("full_text", std::string{});
        if (a.article_id.empty()) {
            error = "empty article_id";
            return std::nullopt;
        }
        return a;
    } catch (const nlohmann::json::exception& e) {
        error = e.what();
        return std::nullopt;
    }
}

nlohmann::json article_to_json(const Article& a) {
    nlohmann::json j{{"article_id", a.article_id}, {"year", a.year},           {"source", a.source},
                     {"headline", a.headline},     {"full_text", a.full_text}};
    if (a.subheader) j["subheader"] = *a.subheader;
    if (a.category) j["category"] = *a.category;
    return j;
}

IngestResult ingest_lines(const std::vector<std::string>& lines, const CorpusConfig& config,
                          const TopicTaxonomy* taxonomy) {
    IngestReport report;
    std::vector<Article> accepted;
    std::size_t line_no = 0;
    for (const auto& line : lines) {
        ++line_no;
        if (trim(line).empty()) continue;
        ++report.lines;
        auto j = nlohmann::json::parse(line, nullptr, false);
        std::string error;
        std::optional<Article> article;
        if (j.is_discarded() || !j.is_object()) {
            error = "not a JSON object";
        } else {
            article = parse_article(j, error);
        }
        if (!article) {
            ++report.unparsable;
            report.diagnostics.push_back("line " + std::to_string(line_no) + ": unparsable: " + error);
            continue;
        }
        if (!mentions_china(*article)) {
            ++report.rejected_criterion;
            report.diagnostics.push_back("line " + std::to_string(line_no) + ": " + article->article_id +
                                         ": headline/subheader lacks China/Chinese");
            continue;
        }
        if (article->year < config.first_year || article->year > config.last_year) {
            ++report.rejected_year;
            report.diagnostics.push_back("line " + std::to_string(line_no) + ": " + article->article_id +
                                         ": year " + std::to_string(article->year) + " out of range");
            continue;
        }
        if (!config.headline_only && trim(article->full_text).empty()) {
            ++report.rejected_empty_text;
            report.diagnostics.push_back("line " + std::to_string(line_no) + ": " + article->article_id +
                                         ": empty full_text");
            continue;
        }
        if (taxonomy && article->category && !taxonomy->contains(*article->category)) {
            ++report.dropped_categories;
            report.diagnostics.push_back("line " + std::to_string(line_no) + ": " + article->article_id +
                                         ": category '" + *article->category + "' not in taxonomy, dropped");
            article->category.reset();
        }
        accepted.push_back(std::move(*article));
    }
    report.accepted = accepted.size();
    for (const auto& d : report.diagnostics) spdlog::debug("ingest: {}", d);
    if (report.lines > 0 &&
        static_cast<double>(report.rejected()) > config.reject_warn_fraction * static_cast<double>(report.lines)) {
        spdlog::warn("ingest rejected {} of {} rows", report.rejected(), report.lines);
    }
    return {CorpusIndex(std::move(accepted)), std::move(report)};
}

IngestResult ingest_corpus(const std::string& path, const CorpusConfig& config, const TopicTaxonomy* taxonomy) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open corpus: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(std::move(line));
    return ingest_lines(lines, config, taxonomy);
}

nlohmann::json CorpusStats::to_json() const {
    nlohmann::json years = nlohmann::json::object();
    for (const auto& [y, n] : year_counts) years[std::to_string(y)] = n;
    return {{"total", total},
            {"source_pct", source_pct},
            {"source_counts", source_counts},
            {"year_counts", years},
            {"category_counts", category_counts}};
}

CorpusStats corpus_stats(const CorpusIndex& index) {
    CorpusStats stats;
    stats.total = index.size();
    for (const auto& [id, a] : index.store()) {
        ++stats.source_counts[a.source];
        ++stats.year_counts[a.year];
        ++stats.category_counts[a.category.value_or("uncategorized")];
    }
    if (stats.total > 0) {
        for (const auto& [src, n] : stats.source_counts) {
            stats.source_pct[src] = 100.0 * static_cast<double>(n) / static_cast<double>(stats.total);
        }
    }
    return stats;
}

}  // namespace attisim
