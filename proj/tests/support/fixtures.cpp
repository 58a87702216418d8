#include "fixtures.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "attisim/rng.hpp"

namespace fixtures {

namespace {

using nlohmann::json;

const std::vector<std::string> kRegions{"New England",        "Middle Atlantic",    "East North Central",
                                        "West North Central", "South Atlantic",     "East South Central",
                                        "West South Central", "Mountain",           "Pacific"};
const std::vector<std::vector<std::string>> kRegionStates{{"MA", "CT"}, {"NY", "PA"}, {"OH", "IL"},
                                                          {"MN", "MO"}, {"FL", "GA"}, {"TN", "KY"},
                                                          {"TX", "LA"}, {"CO", "AZ"}, {"CA", "WA"}};
const std::vector<std::string> kGenders{"female", "male"};
const std::vector<std::string> kRaces{"white", "black", "hispanic", "asian"};
const std::vector<std::string> kParties{"democrat", "republican", "independent"};
const std::vector<std::string> kAgeBands{"18-29", "30-49", "50-64", "65+"};
const std::vector<std::string> kEducation{"high school", "some college", "bachelor", "graduate"};
const std::vector<std::string> kIncome{"<30k", "30-75k", "75-150k", ">150k"};

const std::vector<std::string> kTopics{"economics", "politics",    "health",    "technology", "lifestyle",
                                       "sports",    "entertainment", "science", "military",   "environment",
                                       "culture",   "education",   "diplomacy", "business",   "society"};
// One taxonomy keyword per topic, used in posts.
const std::vector<std::string> kTopicWord{"trade",   "election", "vaccine", "smartphone", "travel",
                                          "olympics", "movie",   "space",   "navy",       "climate",
                                          "museum",  "university", "summit", "startup",   "workers"};
// Neutral headline phrases; each holds a keyword of its topic and no lexicon word.
const std::vector<std::string> kTopicPhrase{"trade figures",      "government policy",   "hospital capacity",
                                            "semiconductor plans", "tourism season",      "olympic team",
                                            "film industry",       "space program",       "navy exercises",
                                            "climate targets",     "museum exhibition",   "university admissions",
                                            "diplomatic talks",    "company earnings",    "population trends"};
const std::vector<std::string> kHeadlineForms{"China {} in focus", "What China's {} mean",
                                              "China {}: a closer look", "Report on Chinese {}",
                                              "Chinese {} under review"};
const std::vector<std::string> kNegative{"alarming", "crackdown", "crisis", "tensions", "threat",
                                         "sanctions", "scandal",  "collapse", "espionage", "hostile"};
const std::vector<std::string> kPositive{"cooperation", "breakthrough", "growth", "progress", "prosperity",
                                         "success",     "partnership",  "peace",  "thriving", "innovative"};
const std::vector<std::string> kSources{"Harbor Tribune", "Capital Wire", "Evening Ledger", "Northern Dispatch"};

const std::vector<std::string> kPolitical{"political_interest", "party_strength", "trust_in_people",
                                          "corruption_views", "wealth_equality"};
const std::vector<std::string> kMedia{"news_frequency", "tv_news", "newspapers", "internet_news",
                                      "social_media",   "radio_news", "press_confidence"};
const std::vector<std::string> kViews{
    "spending_space",   "spending_environment", "spending_health",     "spending_cities",
    "spending_crime",   "spending_drugs",       "spending_education",  "spending_race",
    "spending_defense", "spending_foreign_aid", "spending_welfare",    "spending_roads",
    "spending_social_security", "spending_transit", "spending_parks",  "spending_childcare",
    "spending_science", "spending_energy",      "gun_permits",         "death_penalty",
    "abortion_any_reason", "marijuana",         "same_sex_relations",  "courts_harshness",
    "reduce_income_gaps", "help_poor",          "help_sick",           "help_minorities",
    "immigration_levels", "school_prayer"};

const std::vector<std::string> kLevels{"very", "somewhat", "slightly", "not at all"};
const std::vector<std::string> kFrequency{"daily", "weekly", "rarely", "never"};
const std::vector<std::string> kSpending{"too little", "about right", "too much"};
const std::vector<std::string> kStance{"favor", "oppose"};

template <class T>
const T& pick(const std::vector<T>& v, std::size_t i) {
    return v[i % v.size()];
}

json survey_body(std::size_t k) {
    json pol, media, views;
    for (std::size_t f = 0; f < kPolitical.size(); ++f) pol[kPolitical[f]] = pick(kLevels, k + f);
    for (std::size_t f = 0; f < kMedia.size(); ++f) media[kMedia[f]] = pick(kFrequency, k * 3 + f);
    for (std::size_t f = 0; f < kViews.size(); ++f) {
        views[kViews[f]] = kViews[f].rfind("spending_", 0) == 0 ? pick(kSpending, k + f) : pick(kStance, k * 5 + f);
    }
    return {{"political_preferences", pol}, {"media_preferences", media}, {"domestic_views", views}};
}

std::vector<std::string> posts_for(std::size_t a, std::size_t b) {
    return {fmt::format("Been reading about {} all week.", pick(kTopicWord, a)),
            fmt::format("Anyone else following the {} news?", pick(kTopicWord, b))};
}

std::string sentiment_sentence(int sign, std::size_t salt) {
    if (sign < 0) {
        return fmt::format(" Observers described the {} and {} surrounding the issue.", pick(kNegative, salt),
                           pick(kNegative, salt + 3));
    }
    if (sign > 0) {
        return fmt::format(" Observers pointed to {} and {} in the outcome.", pick(kPositive, salt),
                           pick(kPositive, salt + 3));
    }
    return " Observers said more details would follow.";
}

json article(const std::string& id, int year, std::size_t topic, std::size_t form, int sign, std::size_t salt) {
    const auto& phrase = pick(kTopicPhrase, topic);
    return {{"article_id", id},
            {"year", year},
            {"source", pick(kSources, salt)},
            {"headline", fmt::vformat(pick(kHeadlineForms, form), fmt::make_format_args(phrase))},
            {"category", pick(kTopics, topic)},
            {"full_text", fmt::format("Officials and analysts in China discussed {} this year.", phrase) +
                              sentiment_sentence(sign, salt)}};
}

}  // namespace

std::vector<std::string> profile_social_lines() {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < 30; ++i) {
        const std::size_t r = i % 9;
        std::string gender = pick(kGenders, i);
        std::string race = pick(kRaces, i / 2);
        std::string party = pick(kParties, i / 3);
        if (i == 4) party = pick(kParties, i / 3 + 1);     // one-feature compromise
        if (i == 9) gender = pick(kGenders, i + 1);        // one-feature compromise
        if (i == 13) {                                      // shares only party with its survey twin
            gender = pick(kGenders, i + 1);
            race = pick(kRaces, i / 2 + 1);
        }
        json j{{"record_id", fmt::format("sm-{:02}", i + 1)},
               {"state", kRegionStates[r][i % 2]},
               {"gender", gender},
               {"race", race},
               {"party", party},
               {"bio", fmt::format("Posting from {} about things I care about.", kRegionStates[r][i % 2])},
               {"posts", posts_for(i, i * 7 + 3)}};
        out.push_back(j.dump());
    }
    return out;
}

std::vector<std::string> profile_survey_lines() {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < 30; ++i) {
        json j = survey_body(i);
        j["record_id"] = fmt::format("sv-{:02}", i + 1);
        // The last respondent lives in a region whose social records are all
        // claimed by earlier respondents.
        j["region"] = i == 29 ? std::string("Pacific") : kRegions[i % 9];
        j["gender"] = pick(kGenders, i);
        j["race"] = pick(kRaces, i / 2);
        j["party"] = pick(kParties, i / 3);
        j["age_band"] = pick(kAgeBands, i);
        j["education"] = pick(kEducation, i / 2);
        if (i != 7) j["income"] = pick(kIncome, i / 3);
        out.push_back(j.dump());
    }
    return out;
}

std::vector<std::string> corpus_gate_lines() {
    struct Row {
        std::string headline;
        std::string subheader;
        std::string text;
        bool reject;
    };
    const std::vector<Row> rows{
        {"China announces new trade figures", "", "Trade grew modestly.", false},
        {"Chinese university admissions rise", "", "More students applied.", false},
        {"Markets react to policy change", "Beijing and China's central bank respond", "Rates were held.", false},
        {"Asian markets open higher", "", "China was mentioned only in the text.", true},
        {"CHINA space program update", "", "A launch is planned.", false},
        {"Election season begins", "Candidates debate", "No mention of the country in titles.", true},
        {"Film industry looks to chinese audiences", "", "Box office numbers grew.", false},
        {"Chinatown festival draws crowds", "", "A local festival.", true},
        {"Navy exercises in the Pacific", "Analysts watch Chinese vessels", "Exercises continued.", false},
        {"Climate talks resume", "", "Delegates met in Geneva.", true},
        {"China-US summit scheduled", "", "Diplomats confirmed the date.", false},
        {"Company earnings beat forecasts", "Exporters to China lead gains", "Shares rose.", false},
        {"Olympic team named", "", "The roster was published.", true},
        {"Museum exhibition of Chinese art opens", "", "The exhibition runs until May.", false},
        {"Tourism season outlook", "Sino relations in focus", "Bookings are steady.", true},
        {"Population trends in China", "", "Census data were released.", false},
    };
    std::vector<std::string> out;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        json j{{"article_id", fmt::format("gate-{:02}", i + 1)},
               {"year", 2005 + static_cast<int>(i % 10)},
               {"source", pick(kSources, i)},
               {"headline", rows[i].headline},
               {"full_text", rows[i].text},
               {"expect_reject", rows[i].reject}};
        if (!rows[i].subheader.empty()) j["subheader"] = rows[i].subheader;
        out.push_back(j.dump());
    }
    return out;
}

std::vector<double> negative_fraction_schedule() { return {0.3, 0.5, 0.7, 0.8, 0.8, 0.9, 0.9, 0.9, 1.0, 1.0}; }

std::vector<std::string> negative_corpus_lines(int articles_per_year) {
    const auto schedule = negative_fraction_schedule();
    const auto n = static_cast<std::size_t>(articles_per_year);
    std::vector<std::string> out;
    for (std::size_t t = 0; t < schedule.size(); ++t) {
        const int year = 2005 + static_cast<int>(t);
        const auto negatives = static_cast<std::size_t>(std::lround(schedule[t] * static_cast<double>(n)));
        for (std::size_t j = 0; j < n; ++j) {
            // (j * 37) mod n permutes 0..n-1 when gcd(37, n) = 1, spreading
            // negative articles over every topic.
            const bool negative = (j * 37) % n < negatives;
            out.push_back(article(fmt::format("neg-{}-{:03}", year, j + 1), year, j % 15, j / 15, negative ? -1 : 1,
                                  j + t)
                              .dump());
        }
    }
    return out;
}

std::vector<std::string> synthetic_corpus_lines(std::size_t n, int first_year, int last_year, std::uint64_t seed) {
    attisim::Rng rng(seed);
    const auto years = static_cast<std::uint64_t>(last_year - first_year + 1);
    std::vector<std::string> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        // Round-robin years keep every year populated.
        const int year = first_year + static_cast<int>(i % years);
        const auto topic = rng.below(kTopics.size());
        const auto form = rng.below(kHeadlineForms.size());
        const auto roll = rng.below(100);
        const int sign = roll < 45 ? -1 : roll < 80 ? 1 : 0;
        out.push_back(article(fmt::format("syn-{:06}", i + 1), year, topic, form, sign, rng.below(1000)).dump());
    }
    return out;
}

Population synthetic_population(std::size_t n, std::uint64_t seed) {
    attisim::Rng rng(seed);
    Population p;
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = rng.below(kRegions.size());
        const auto& state = pick(kRegionStates[r], rng.below(2));
        const auto& gender = pick(kGenders, rng.below(2));
        const auto& race = pick(kRaces, rng.below(4));
        const auto& party = pick(kParties, rng.below(3));
        json social{{"record_id", fmt::format("ps-{:05}", i + 1)},
                    {"state", state},
                    {"gender", gender},
                    {"race", race},
                    {"party", party},
                    {"bio", "Just here for the news."},
                    {"posts", posts_for(rng.below(15), rng.below(15))}};
        json survey = survey_body(rng.below(1000));
        survey["record_id"] = fmt::format("pv-{:05}", i + 1);
        survey["region"] = kRegions[r];
        survey["gender"] = gender;
        survey["race"] = race;
        survey["party"] = party;
        survey["age_band"] = pick(kAgeBands, rng.below(4));
        survey["education"] = pick(kEducation, rng.below(4));
        survey["income"] = pick(kIncome, rng.below(4));
        p.social.push_back(social.dump());
        p.survey.push_back(survey.dump());
    }
    return p;
}

std::string ground_truth_csv(int first_year, int last_year) {
    std::string out = "year,favorable_pct,unfavorable_pct\n";
    for (int y = first_year; y <= last_year; ++y) {
        const double fav = std::max(15.0, 52.0 - 1.75 * (y - first_year));
        out += fmt::format("{},{:.1f},{:.1f}\n", y, fav, 95.0 - fav);
    }
    return out;
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (const auto& l : lines) out << l << '\n';
}

}  // namespace fixtures
