// Randomized checks of the model invariants. Each property runs a fixed
// number of cases from a seeded generator so failures are reproducible.

#include <doctest.h>

#include <algorithm>
#include <cstring>
#include <random>
#include <set>

#include "attisim/common.hpp"
#include "attisim/corpus.hpp"
#include "attisim/distribution.hpp"
#include "attisim/interventions.hpp"
#include "attisim/lexicon.hpp"
#include "attisim/reflection.hpp"
#include "attisim/survey.hpp"
#include "fixtures.hpp"
#include "harness.hpp"

using namespace attisim;

namespace {

constexpr int kCases = 300;

class Gen {
  public:
    explicit Gen(std::uint64_t seed) : eng_(seed) {}
    double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
    long integer(long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(eng_); }
    bool coin() { return integer(0, 1) == 1; }
    template <class T>
    const T& pick(const std::vector<T>& v) {
        return v[static_cast<std::size_t>(integer(0, static_cast<long>(v.size()) - 1))];
    }

    OpinionState state(std::size_t domains) {
        auto s = OpinionState::initial("agent-" + std::to_string(integer(0, 999)), domains, 2005);
        for (std::size_t d = 0; d < domains; ++d) {
            if (coin()) s.valence[d] = real(-2.0, 2.0);
            if (coin()) s.exposure[d] = integer(0, 40);
        }
        return s;
    }

    // Sentence mixing lexicon words, topic keywords and filler.
    std::string text() {
        static const std::vector<std::string> words{
            "growth", "crisis", "hostile", "peace", "success", "alarming", "trade", "economy", "army",
            "technology", "school", "film", "summit", "climate", "the", "officials", "said", "on", "monday", "China"};
        std::string out;
        const auto n = integer(0, 12);
        for (long i = 0; i < n; ++i) out += pick(words) + " ";
        return out;
    }

    Payload payload(int i) {
        static const std::vector<std::string> cats{"economics", "military", "technology", "society"};
        Payload p{"art-" + std::to_string(i), "China " + text(), text(), std::nullopt, false, false};
        if (coin()) p.category = pick(cats);
        return p;
    }

    std::mt19937_64& engine() { return eng_; }

  private:
    std::mt19937_64 eng_;
};

const TopicTaxonomy& tax() { return harness::env().taxonomy; }
const std::vector<std::string>& domain_names() {
    static const auto names = tax().names();
    return names;
}

ReflectionContext rctx() {
    const auto& e = harness::env();
    return {e.taxonomy, e.lexicon, *e.gateway, e.prompts};
}

}  // namespace

TEST_SUITE("properties") {
    TEST_CASE("valences stay in range under arbitrary outcomes") {
        Gen g(1);
        for (int c = 0; c < kCases; ++c) {
            auto s = g.state(tax().size());
            ReflectionOutcome out;
            const auto n = g.integer(0, 6);
            for (long i = 0; i < n; ++i) {
                const auto& d = g.pick(domain_names());
                out.updates.push_back({d, DissonanceAction::revise, {}, g.real(-10.0, 10.0)});
                out.article_counts[d] = g.integer(0, 3);
            }
            auto logs = apply_updates(s, out, tax(), 2005, 0);
            for (double v : s.valence) CHECK((v >= kValenceMin && v <= kValenceMax));
            for (const auto& l : logs) {
                CHECK(l.delta == doctest::Approx(l.new_valence - l.old_valence));
                CHECK(std::fabs(l.delta) <= 4.0);
            }
        }
    }

    TEST_CASE("untouched domains are bit-identical and exposures never shrink") {
        Gen g(2);
        for (int c = 0; c < kCases; ++c) {
            auto s = g.state(tax().size());
            const auto before = s;
            ReflectionOutcome out;
            std::set<std::string> touched;
            const auto n = g.integer(0, 4);
            for (long i = 0; i < n; ++i) {
                const auto& d = g.pick(domain_names());
                if (!touched.insert(d).second) continue;
                out.updates.push_back({d, DissonanceAction::confirm, {}, g.real(-2.0, 2.0)});
                out.article_counts[d] = g.integer(1, 3);
            }
            apply_updates(s, out, tax(), 2005, 0);
            for (std::size_t d = 0; d < tax().size(); ++d) {
                CHECK(s.exposure[d] >= before.exposure[d]);
                if (touched.count(domain_names()[d])) continue;
                CHECK(std::memcmp(&s.valence[d], &before.valence[d], sizeof(double)) == 0);
                CHECK(s.exposure[d] == before.exposure[d]);
            }
        }
    }

    TEST_CASE("overall valence is homogeneous in exposure and bounded by read domains") {
        Gen g(3);
        for (int c = 0; c < kCases; ++c) {
            auto s = g.state(tax().size());
            const double o = overall_valence(s);
            auto scaled = s;
            const long k = g.integer(2, 9);
            for (auto& e : scaled.exposure) e *= k;
            CHECK(overall_valence(scaled) == doctest::Approx(o).epsilon(1e-12));

            double lo = 0.0, hi = 0.0;
            bool any = false;
            for (std::size_t d = 0; d < s.valence.size(); ++d) {
                if (s.exposure[d] == 0) continue;
                lo = any ? std::min(lo, s.valence[d]) : s.valence[d];
                hi = any ? std::max(hi, s.valence[d]) : s.valence[d];
                any = true;
            }
            if (!any) {
                CHECK(o == 0.0);
                continue;
            }
            CHECK(o >= lo - 1e-12);
            CHECK(o <= hi + 1e-12);
        }
    }

    TEST_CASE("mock survey mapping is monotone in overall valence") {
        Gen g(4);
        for (int c = 0; c < kCases; ++c) {
            double a = g.real(-2.0, 2.0), b = g.real(-2.0, 2.0);
            if (a > b) std::swap(a, b);
            const std::optional<int> prev = g.coin() ? std::optional<int>(2) : std::nullopt;
            CHECK(mock_survey_response(a, prev) <= mock_survey_response(b, prev));
        }
        for (double x = -2.0; x <= 2.0; x += 0.125) {
            const int r = mock_survey_response(x, std::nullopt);
            CHECK((r >= 1 && r <= 4));
        }
    }

    TEST_CASE("aggregate percentages sum to 100") {
        Gen g(5);
        for (int c = 0; c < kCases; ++c) {
            std::vector<AgentYearResult> rs;
            const auto n = g.integer(1, 120);
            for (long i = 0; i < n; ++i) rs.push_back({"a" + std::to_string(i), 0.0, static_cast<int>(g.integer(1, 4))});
            auto y = aggregate_year(2005, rs);
            CHECK(y.favorable_pct + y.unfavorable_pct == doctest::Approx(100.0).epsilon(1e-12));
            CHECK((y.mean_score >= 1.0 && y.mean_score <= 4.0));
        }
    }

    TEST_CASE("mae is zero on identical series and symmetric") {
        Gen g(6);
        for (int c = 0; c < kCases; ++c) {
            PctSeries a, b;
            const int first = static_cast<int>(g.integer(2005, 2010));
            const auto len = g.integer(1, 15);
            for (int y = first; y < first + len; ++y) {
                a[y] = {g.real(0, 100), g.real(0, 100)};
                b[y] = {g.real(0, 100), g.real(0, 100)};
            }
            for (auto basis : {MaeBasis::favorable, MaeBasis::unfavorable, MaeBasis::both}) {
                CHECK(mae(a, a, basis) == 0.0);
                CHECK(mae(a, b, basis) == mae(b, a, basis));
                CHECK(mae(a, b, basis) >= 0.0);
            }
        }
    }

    TEST_CASE("ingest does not depend on line order") {
        auto lines = fixtures::synthetic_corpus_lines(400, 2005, 2010, 8);
        const auto ref = ingest_lines(lines, {});
        Gen g(7);
        for (int c = 0; c < 20; ++c) {
            std::shuffle(lines.begin(), lines.end(), g.engine());
            const auto r = ingest_lines(lines, {});
            CHECK(r.index.by_year() == ref.index.by_year());
            CHECK(r.report.accepted == ref.report.accepted);
        }
    }

    TEST_CASE("exposure increments equal the resolved payload count") {
        Gen g(8);
        for (int c = 0; c < 120; ++c) {
            auto s = g.state(tax().size());
            std::vector<Payload> batch;
            const auto n = g.integer(1, 10);
            for (long i = 0; i < n; ++i) batch.push_back(g.payload(static_cast<int>(i)));
            long resolved = 0;
            for (const auto& p : batch) resolved += resolve_domain(p, tax()).has_value();

            ReflectionInput in;
            in.state = &s;
            in.payloads = batch;
            AblationFlags flags;
            flags.no_cognitive = g.coin();
            Journal journal;
            auto out = reflect_batch(in, rctx(), flags, journal);
            long before = 0, after = 0;
            for (auto e : s.exposure) before += e;
            apply_updates(s, out, tax(), 2005, 0);
            for (auto e : s.exposure) after += e;
            CHECK(after - before == resolved);
            for (const auto& u : out.updates) {
                if (flags.no_cognitive) {
                    CHECK(u.action == DissonanceAction::none);
                } else {
                    CHECK(u.action != DissonanceAction::none);
                }
            }
        }
    }

    TEST_CASE("selections are exactly m distinct offered ids") {
        Gen g(9);
        std::vector<Article> arts;
        for (int i = 0; i < 200; ++i) {
            arts.push_back({"x" + std::to_string(i), 2005, "S", "China " + g.text(), std::nullopt, std::nullopt, "t"});
        }
        const CorpusIndex index(std::move(arts));
        const auto& e = harness::env();
        SelectionContext ctx{e.taxonomy, e.lexicon, *e.gateway, e.prompts};
        for (int c = 0; c < 100; ++c) {
            const auto k = static_cast<std::size_t>(g.integer(1, 50));
            const auto m = static_cast<std::size_t>(g.integer(0, static_cast<long>(k)));
            auto offer = sample_headlines(index, 2005, "agent-" + std::to_string(c), k, 17);
            AblationFlags flags;
            flags.no_selection = g.coin();
            auto agent = harness::make_profile(offer.agent_id, {g.pick(domain_names())});
            Journal journal;
            auto picked = select_articles(agent, offer, m, ctx, flags, journal);
            const auto offered = offer.ids();
            const std::set<std::string> pool(offered.begin(), offered.end());
            CHECK(picked.size() == m);
            CHECK(std::set<std::string>(picked.begin(), picked.end()).size() == m);
            for (const auto& id : picked) CHECK(pool.count(id) == 1);
        }
    }

    TEST_CASE("debias only ever changes full_text") {
        Gen g(10);
        const auto& e = harness::env();
        InterventionContext ctx{e.lexicon, *e.gateway, e.prompts};
        for (int c = 0; c < kCases; ++c) {
            auto p = g.payload(c);
            if (trim(p.full_text).empty()) p.full_text = "filler";
            Journal journal;
            auto out = debias_article(p, ctx, journal);
            CHECK(out.article_id == p.article_id);
            CHECK(out.headline == p.headline);
            CHECK(out.category == p.category);
            CHECK(mock_sentiment(out.full_text, e.lexicon) == 0.0);
        }
    }

    TEST_CASE("mock sentiment stays in range") {
        Gen g(11);
        for (int c = 0; c < kCases; ++c) {
            const double s = mock_sentiment(g.text(), harness::env().lexicon);
            CHECK((s >= -2.0 && s <= 2.0));
        }
    }
}
