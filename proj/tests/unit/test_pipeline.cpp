#include <doctest.h>

#include <set>

#include "elr/components.hpp"
#include "elr/pipeline.hpp"
#include "support.hpp"

using namespace elr;
using nlohmann::json;

namespace {

class FixedLinker final : public LinkerBackend {
  public:
    explicit FixedLinker(std::vector<std::string> titles) : titles_(std::move(titles)) {}
    std::vector<std::string> link(std::string_view, std::size_t) override { return titles_; }
    [[nodiscard]] std::string describe() const override { return "fixed"; }

  private:
    std::vector<std::string> titles_;
};

Components components(std::shared_ptr<const InvertedIndex> index, std::vector<std::string> entity_titles)
{
    TitleProviders p{std::make_shared<FixedLinker>(std::move(entity_titles)),
                     std::make_shared<FixedLinker>(std::vector<std::string>{}), nullptr, nullptr};
    return {std::move(index), p, std::make_shared<LexicalScorer>()};
}

}  // namespace

TEST_SUITE("pipeline")
{
    TEST_CASE("small pools pass through whole")
    {
        auto index = test::make_index({{"A", test::words(450, "a")}, {"B", test::words(150, "b")}, {"C", "c stuff"}});
        PipelineConfig cfg;
        cfg.k_final = 200;
        Pipeline p(components(index, {"A", "B"}), cfg);
        auto t = p.retrieve("a1 b2");
        CHECK(t.coarse.size() == 7);
        CHECK(t.final.size() == 7);
        for (const auto& r : t.final) {
            CHECK((r.page_title == "A" || r.page_title == "B"));
            REQUIRE_FALSE(r.title_provenance.empty());
            CHECK(r.title_provenance[0].source == TitleSource::entity_link_query);
        }
    }

    TEST_CASE("empty title set gives an empty but valid trace")
    {
        auto index = test::make_index({{"A", "x"}});
        Pipeline p(components(index, {}), {});
        auto t = p.retrieve("anything");
        CHECK(t.final.empty());
        CHECK(t.coarse.empty());
        REQUIRE_FALSE(t.warnings.empty());
        CHECK(std::any_of(t.warnings.begin(), t.warnings.end(), [](const auto& w) { return w.rfind("no titles", 0) == 0; }));
    }

    TEST_CASE("titles outside the corpus are reported")
    {
        auto index = test::make_index({{"A", "x y"}});
        Pipeline p(components(index, {"A", "Nowhere"}), {});
        auto t = p.retrieve("x");
        CHECK(t.final.size() == 1);
        CHECK(std::any_of(t.warnings.begin(), t.warnings.end(),
                          [](const auto& w) { return w.find("not in the corpus") != std::string::npos; }));
    }

    TEST_CASE("funnel and k_final")
    {
        auto index = test::mini_wiki_index();
        auto store = index->shared_store();
        auto providers = make_title_providers(ProviderSettings{}, *store);
        PipelineConfig cfg;
        cfg.k_final = 2;
        Pipeline p({index, providers, std::make_shared<LexicalScorer>()}, cfg);
        auto t = p.retrieve("Who composed the opera The Magic Flute?");
        CHECK(t.final.size() <= 2);
        std::set<std::string> coarse;
        for (const auto& c : t.coarse) coarse.insert(c.passage_id);
        std::set<std::string> titles(t.titles.unique_titles.begin(), t.titles.unique_titles.end());
        for (const auto& r : t.final) {
            CHECK(coarse.count(r.passage_id) == 1);
            CHECK(titles.count(r.page_title) == 1);
        }
        CHECK(t.generated.size() == 5);
        CHECK(p.retrieve("Who composed the opera The Magic Flute?", "x", 1).final.size() <= 1);
        CHECK_THROWS_AS((void)p.retrieve("q", "x", 0), std::invalid_argument);
        CHECK_THROWS_AS((void)p.retrieve("   "), std::invalid_argument);
    }

    TEST_CASE("batch retrieval is order-preserving and matches single calls")
    {
        auto index = test::mini_wiki_index();
        auto providers = make_title_providers(ProviderSettings{}, index->store());
        Pipeline p({index, providers, nullptr}, {});
        std::vector<QueryInput> qs{{"1", "capital of France"}, {"2", ""}, {"3", "largest planet Jupiter"}, {"4", "Mozart Salzburg"}};
        auto seq = p.retrieve_batch(qs, 1);
        auto par = p.retrieve_batch(qs, 3);
        REQUIRE(seq.size() == 4);
        for (std::size_t i = 0; i < qs.size(); ++i) {
            CHECK(seq[i].qid == qs[i].qid);
            CHECK(to_json(seq[i])["final"] == to_json(par[i])["final"]);
        }
        CHECK(seq[1].final.empty());
        CHECK(seq[1].warnings.front().rfind("query skipped", 0) == 0);
        CHECK(to_json(seq[0])["final"] == to_json(p.retrieve("capital of France", "1"))["final"]);
    }

    TEST_CASE("trace JSON round-trip and replay")
    {
        auto index = test::mini_wiki_index();
        auto providers = make_title_providers(ProviderSettings{}, index->store());
        Pipeline p({index, providers, nullptr}, {});
        auto t = p.retrieve("Which river flows through Salzburg?", "q9");
        auto j = to_json(t);
        for (const char* key : {"qid", "query", "config_fingerprint", "decompositions", "titles", "coarse", "final", "warnings", "timings_ms"}) {
            CHECK(j.contains(key));
        }
        auto back = trace_from_json(j);
        CHECK(back.titles.unique_titles == t.titles.unique_titles);
        CHECK(back.generated == t.generated);
        auto replayed = p.replay(back);
        CHECK(to_json(replayed)["final"] == j["final"]);
    }

    TEST_CASE("config validation and fingerprint")
    {
        PipelineConfig cfg;
        CHECK(cfg.n_coarse == 200);
        CHECK(cfg.titles.n_entity == 10);
        auto fp = cfg.fingerprint();
        auto other = cfg;
        other.jobs = 8;
        CHECK(other.fingerprint() == fp);
        other.n_coarse = 50;
        CHECK(other.fingerprint() != fp);
        CHECK(PipelineConfig::from_json(cfg.to_json()).fingerprint() == fp);

        auto bad = cfg;
        bad.k_final = 300;
        CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
        bad = cfg;
        bad.n_coarse = 0;
        CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
        CHECK_THROWS_AS(Pipeline({nullptr, {}, nullptr}, cfg), std::invalid_argument);
    }

    TEST_CASE("provider settings")
    {
        auto s = ProviderSettings::from_json(json{{"entity_link", "replay:/tmp/x.jsonl"}, {"decompose", {{"endpoint", "builtin"}}}});
        CHECK(s.entity_link.endpoint == "replay:/tmp/x.jsonl");
        CHECK(s.event_link.is_builtin());
        CHECK_THROWS((void)ProviderSettings::from_json(json{{"entity_lnk", "builtin"}}));
        CHECK(ScorerSettings::from_json(json{{"endpoint", "builtin"}, {"batch_size", 8}}).batch_size == 8);
    }
}
