#include <doctest.h>

#include <set>

#include "attisim/common.hpp"
#include "attisim/profiles.hpp"
#include "fixtures.hpp"
#include "harness.hpp"

using namespace attisim;

namespace {

SocialMediaRecord social(std::string id, std::string state, std::string gender, std::string race, std::string party) {
    SocialMediaRecord r;
    r.record_id = std::move(id);
    r.state = std::move(state);
    r.gender = std::move(gender);
    r.race = std::move(race);
    r.party = std::move(party);
    return r;
}

SurveyRespondentRecord survey(std::string id, std::string region, std::string gender, std::string race,
                              std::string party) {
    SurveyRespondentRecord r;
    r.record_id = std::move(id);
    r.region = std::move(region);
    r.gender = std::move(gender);
    r.race = std::move(race);
    r.party = std::move(party);
    return r;
}

ProfileBuildResult build(const std::vector<std::string>& soc, const std::vector<std::string>& sur,
                         const Gateway& gateway) {
    const auto& e = harness::env();
    return build_profiles(soc, sur, e.schema, e.taxonomy, gateway, e.prompts);
}

}  // namespace

TEST_SUITE("profiles") {
    TEST_CASE("state_to_region") {
        CHECK(state_to_region("CA") == "Pacific");
        CHECK(state_to_region("NY") == "Middle Atlantic");
        CHECK(state_to_region("tx") == "West South Central");
        try {
            state_to_region("ZZ");
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            CHECK(std::string(e.what()).find("ZZ") != std::string::npos);
        }
        CHECK(census_regions().size() == 9);
    }

    TEST_CASE("match_records examples") {
        SUBCASE("exact match") {
            std::vector<SocialMediaRecord> s{social("s1", "TX", "female", "white", "republican")};
            std::vector<SurveyRespondentRecord> v{survey("v1", "West South Central", "female", "white", "republican")};
            auto m = match_records(s, v);
            REQUIRE(m.pairs.size() == 1);
            CHECK_FALSE(m.pairs[0].compromised_feature.has_value());
        }
        SUBCASE("one non-region mismatch") {
            std::vector<SocialMediaRecord> s{social("s1", "TX", "female", "white", "democrat")};
            std::vector<SurveyRespondentRecord> v{survey("v1", "West South Central", "female", "white", "republican")};
            auto m = match_records(s, v);
            REQUIRE(m.pairs.size() == 1);
            CHECK(m.pairs[0].compromised_feature == std::optional<std::string>("party"));
        }
        SUBCASE("region is never compromised") {
            std::vector<SocialMediaRecord> s{social("s1", "CA", "female", "white", "republican")};
            std::vector<SurveyRespondentRecord> v{survey("v1", "New England", "female", "white", "republican")};
            auto m = match_records(s, v);
            CHECK(m.pairs.empty());
            CHECK(m.unmatched_survey == std::vector<std::string>{"v1"});
            CHECK(m.unused_social == std::vector<std::string>{"s1"});
        }
        SUBCASE("two mismatches are inadmissible") {
            std::vector<SocialMediaRecord> s{social("s1", "TX", "male", "white", "democrat")};
            std::vector<SurveyRespondentRecord> v{survey("v1", "West South Central", "female", "white", "republican")};
            CHECK(match_records(s, v).pairs.empty());
        }
        SUBCASE("best score wins, ties go to the lowest social id, each record used once") {
            std::vector<SocialMediaRecord> s{social("s3", "TX", "female", "white", "republican"),
                                             social("s2", "TX", "female", "white", "democrat"),
                                             social("s1", "TX", "female", "white", "republican")};
            std::vector<SurveyRespondentRecord> v{survey("v2", "West South Central", "female", "white", "republican"),
                                                  survey("v1", "West South Central", "female", "white", "republican")};
            auto m = match_records(s, v);
            REQUIRE(m.pairs.size() == 2);
            CHECK(m.pairs[0].survey->record_id == "v1");
            CHECK(m.pairs[0].social->record_id == "s1");
            CHECK(m.pairs[1].social->record_id == "s3");
            CHECK(m.unused_social == std::vector<std::string>{"s2"});
        }
    }

    TEST_CASE("mock interests") {
        const auto& tax = harness::env().taxonomy;
        CHECK(mock_interests("Watching the stock market and new tariffs", tax) == std::vector<std::string>{"economics"});
        CHECK(mock_interests("", tax) == std::vector<std::string>{tax.names().front()});
        CHECK(mock_interests("olympics and the army", tax) == std::vector<std::string>{"sports", "military"});
    }

    TEST_CASE("empty posts and media fields fall back to the first topic") {
        const auto& e = harness::env();
        auto s = social("s1", "TX", "female", "white", "republican");
        auto v = survey("v1", "West South Central", "female", "white", "republican");
        Journal journal;
        auto out = assign_interests({&s, &v, std::nullopt}, e.taxonomy, *e.gateway, e.prompts, journal);
        CHECK(out == std::vector<std::string>{e.taxonomy.names().front()});
    }

    TEST_CASE("invalid backend topics are retried once then dropped") {
        const auto& e = harness::env();
        auto s = social("s1", "TX", "female", "white", "republican");
        auto v = survey("v1", "West South Central", "female", "white", "republican");
        auto sg = harness::scripted_gateway({R"(["economics", "astrology"])"});
        Journal journal;
        auto out = assign_interests({&s, &v, std::nullopt}, e.taxonomy, *sg.gateway, e.prompts, journal);
        CHECK(out == std::vector<std::string>{"economics"});
        CHECK(sg.transport->requests().size() == 2);

        auto junk = harness::scripted_gateway({R"(["astrology"])"});
        s.posts = {"Following the olympics"};
        Journal j2;
        CHECK(assign_interests({&s, &v, std::nullopt}, e.taxonomy, *junk.gateway, e.prompts, j2) ==
              std::vector<std::string>{"sports"});
    }

    TEST_CASE("30 exact-matchable pairs give 30 profiles and no compromises") {
        auto pop = fixtures::synthetic_population(30, 3);
        auto r = build(pop.social, pop.survey, *harness::env().gateway);
        CHECK(r.profiles.size() == 30);
        CHECK(r.report.matched == 30);
        for (const auto& [f, n] : r.report.compromised_by_feature) CHECK_MESSAGE(n == 0, f);
        for (const auto& p : r.profiles) CHECK_FALSE(p.provenance.compromised_feature.has_value());
    }

    TEST_CASE("survey values take precedence and unmatched regions are reported") {
        const auto& sch = harness::env().schema;
        (void)sch;
        std::vector<std::string> soc{
            R"({"record_id":"s1","state":"TX","gender":"male","race":"white","party":"republican","posts":["trade"]})",
            R"({"record_id":"s2","state":"CA","gender":"female","race":"asian","party":"democrat"})"};
        std::vector<std::string> sur{
            R"({"record_id":"v1","region":"West South Central","gender":"female","race":"white","party":"republican"})",
            R"({"record_id":"v2","region":"New England","gender":"female","race":"asian","party":"democrat"})"};
        auto r = build(soc, sur, *harness::env().gateway);
        REQUIRE(r.profiles.size() == 1);
        const auto& p = r.profiles[0];
        CHECK(p.demographic("gender") == "female");
        CHECK(p.demographic("state") == "TX");
        CHECK(p.provenance.compromised_feature == std::optional<std::string>("gender"));
        CHECK(p.feature_count() == 50);
        CHECK(r.report.unmatched_survey_ids == std::vector<std::string>{"v2"});
        CHECK(r.report.compromised_by_feature.at("gender") == 1);
        CHECK(r.report.marginals.at("region").at("West South Central") == 1);
    }

    TEST_CASE("malformed rows are skipped, zero matches is fatal") {
        std::vector<std::string> soc{"garbage", R"({"record_id":"s1","state":"ZZ","gender":"male"})",
                                     R"({"record_id":"s2","state":"CA","gender":"male","race":"white","party":"democrat"})"};
        std::vector<std::string> sur{R"({"record_id":"v1","region":"New England","gender":"male","race":"white","party":"democrat"})"};
        try {
            build(soc, sur, *harness::env().gateway);
            FAIL("expected FatalDataError");
        } catch (const FatalDataError&) {
        }
        sur.push_back(R"({"record_id":"v2","region":"Pacific","gender":"male","race":"white","party":"democrat"})");
        auto r = build(soc, sur, *harness::env().gateway);
        CHECK(r.report.skipped_social_rows == 2);
        CHECK(r.profiles.size() == 1);
    }

    TEST_CASE("shipped 60-record fixture") {
        CHECK(read_lines(harness::fixture("profiles_social.jsonl")) == fixtures::profile_social_lines());
        CHECK(read_lines(harness::fixture("profiles_survey.jsonl")) == fixtures::profile_survey_lines());
        const auto& e = harness::env();
        auto r = build_profiles_from_files(harness::fixture("profiles_social.jsonl"),
                                           harness::fixture("profiles_survey.jsonl"), e.schema, e.taxonomy, *e.gateway,
                                           e.prompts);
        CHECK(r.report.matched + r.report.unmatched_survey == r.report.survey_records);
        CHECK(r.report.survey_records == 30);
        CHECK(r.report.matched == 28);
        for (const auto& p : r.profiles) {
            CHECK(p.feature_count() == 50);
            CHECK(state_to_region(p.demographic("state")) == p.demographic("region"));
            CHECK(p.provenance.compromised_feature != std::optional<std::string>("region"));
            CHECK_FALSE(p.interests.empty());
        }
        // same inputs, same bytes
        auto again = build_profiles_from_files(harness::fixture("profiles_social.jsonl"),
                                               harness::fixture("profiles_survey.jsonl"), e.schema, e.taxonomy,
                                               *e.gateway, e.prompts);
        CHECK(profiles_to_string(again.profiles) == profiles_to_string(r.profiles));
        CHECK(r.report.to_text().find("survey records") != std::string::npos);
    }

    TEST_CASE("missing survey values become unknown") {
        const auto& e = harness::env();
        auto rec = parse_survey_record(
            nlohmann::json::parse(R"({"record_id":"v1","region":"Pacific","gender":"male","race":"white","party":"other"})"),
            e.schema, e.taxonomy);
        CHECK(rec.domestic_views.size() == ProfileSchema::kViews);
        for (const auto& [k, v] : rec.domestic_views) CHECK(v == "unknown");
        for (const auto& [k, v] : rec.demographics) CHECK(v == "unknown");
        CHECK_THROWS_AS(parse_survey_record(nlohmann::json::parse(R"({"record_id":"v1","region":"Atlantis"})"),
                                            e.schema, e.taxonomy),
                        ValidationError);
    }

    TEST_CASE("profile json round-trip") {
        auto p = harness::make_profile("a1", {"economics"});
        p.provenance.compromised_feature = "party";
        CHECK(profile_to_json(profile_from_json(profile_to_json(p))) == profile_to_json(p));
    }

    TEST_CASE("sample_agents") {
        const auto all = load_profiles(harness::fixture("agents.json"));
        REQUIRE(all.size() == 200);
        auto full = sample_agents(all, all.size(), 5);
        std::multiset<std::string> a, b;
        for (const auto& p : full) a.insert(p.agent_id);
        for (const auto& p : all) b.insert(p.agent_id);
        CHECK(a == b);

        auto s1 = sample_agents(all, 100, 11);
        auto s2 = sample_agents(all, 100, 11);
        std::set<std::string> ids;
        for (std::size_t i = 0; i < s1.size(); ++i) {
            CHECK(s1[i].agent_id == s2[i].agent_id);
            ids.insert(s1[i].agent_id);
        }
        CHECK(ids.size() == 100);
        CHECK_THROWS_AS(sample_agents(all, 201, 1), ConfigError);
    }

    TEST_CASE("100 agents drawn from 2000 profiles are distinct") {
        auto pop = fixtures::synthetic_population(2000, 21);
        auto built = build(pop.social, pop.survey, *harness::env().gateway);
        REQUIRE(built.profiles.size() == 2000);
        std::set<std::string> ids;
        for (const auto& p : sample_agents(built.profiles, 100, 42)) ids.insert(p.agent_id);
        CHECK(ids.size() == 100);
    }
}
