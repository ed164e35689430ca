#include <doctest.h>

#include <set>

#include "elr/rerank.hpp"
#include "support.hpp"

using namespace elr;
using nlohmann::json;

namespace {

class ConstantScorer final : public RelevanceScorer {
  public:
    explicit ConstantScorer(double v) : v_(v) {}
    std::vector<double> score_batch(std::span<const ScorerRequest> batch, Warnings&) override
    {
        return std::vector<double>(batch.size(), v_);
    }
    [[nodiscard]] std::string describe() const override { return "constant"; }

  private:
    double v_;
};

class MarkerScorer final : public RelevanceScorer {
  public:
    std::vector<double> score_batch(std::span<const ScorerRequest> batch, Warnings&) override
    {
        std::vector<double> out;
        for (const auto& r : batch) out.push_back(r.context.find("marker") != std::string_view::npos ? 1.0 : 0.0);
        return out;
    }
    [[nodiscard]] std::string describe() const override { return "marker"; }
};

}  // namespace

TEST_SUITE("rerank")
{
    TEST_CASE("lexical scorer is content-token overlap")
    {
        CHECK(LexicalScorer::score("capital of France", "Paris is the capital of France.") == 1.0);
        CHECK(LexicalScorer::score("capital of France", "Bananas are yellow.") == 0.0);
        CHECK(LexicalScorer::score("capital of France Germany", "capital of France") == doctest::Approx(2.0 / 3.0));
        CHECK(LexicalScorer::score("the of and", "the of and") == 0.0);
        CHECK(LexicalScorer::score("France France", "France") == 1.0);
    }

    TEST_CASE("remote scorer passes scores through and falls back per batch")
    {
        auto g = json::parse(test::read_file(test::fixture("protocol/score.json")));
        std::map<std::string, json> rec{{g["request"].dump(), g["response"]}};
        RemoteScorer scorer(std::make_shared<ReplayTransport>(rec), std::make_shared<LexicalScorer>(), 0);
        std::vector<std::string> qs, cs;
        for (const auto& p : g["request"]["pairs"]) {
            qs.push_back(p["q"]);
            cs.push_back(p["c"]);
        }
        std::vector<ScorerRequest> batch;
        for (std::size_t i = 0; i < qs.size(); ++i) batch.push_back({qs[i], cs[i]});
        Warnings w;
        CHECK(scorer.score_batch(batch, w) == std::vector<double>{0.87, 0.02, 0.64});
        CHECK(w.empty());
        CHECK(score_pair(batch[0], scorer, w) == doctest::Approx(LexicalScorer::score(qs[0], cs[0])));
        CHECK_FALSE(w.empty());
    }

    TEST_CASE("remote scorer batching and timeouts")
    {
        int calls = 0;
        auto transport = std::make_shared<FunctionTransport>([&](const json& req) {
            ++calls;
            json scores = json::array();
            for (const auto& p : req["pairs"]) scores.push_back(p["c"].get<std::string>() == "bad" ? 2.0 : 0.5);
            return json{{"scores", scores}};
        });
        RemoteScorer scorer(transport, std::make_shared<ConstantScorer>(0.25), 0, 2);
        std::vector<ScorerRequest> batch{{"q", "a"}, {"q", "b"}, {"q", "bad"}, {"q", "c"}, {"q", "d"}};
        Warnings w;
        auto s = scorer.score_batch(batch, w);
        CHECK(calls == 3);
        CHECK(s == std::vector<double>{0.5, 0.5, 0.25, 0.25, 0.5});
        CHECK(w.size() == 1);

        auto down = std::make_shared<FunctionTransport>([](const json&) -> json { throw TransportError("timeout"); });
        RemoteScorer dead(down, std::make_shared<ConstantScorer>(0.1), 1);
        w.clear();
        CHECK(dead.score_batch(batch, w) == std::vector<double>(5, 0.1));
        CHECK_FALSE(w.empty());
    }

    TEST_CASE("rerank ordering rules")
    {
        auto store = test::make_store({{"A", "alpha one"}, {"B", "beta marker"}, {"C", "gamma"}, {"D", "delta"}});
        std::vector<ScoredPassage> cands{{0, "A#0", 3.0}, {2, "C#0", 3.0}, {3, "D#0", 2.0}, {1, "B#0", 0.5}};
        Warnings w;

        ConstantScorer flat(0.5);
        auto r = rerank("q", cands, *store, flat, 10, w);
        REQUIRE(r.size() == 4);
        CHECK(r[0].passage_id == "A#0");
        CHECK(r[1].passage_id == "C#0");
        CHECK(r[2].passage_id == "D#0");
        CHECK(r[3].passage_id == "B#0");
        CHECK(r[0].text == "alpha one");
        CHECK(r[0].page_title == "A");

        MarkerScorer marker;
        r = rerank("q", cands, *store, marker, 2, w);
        REQUIRE(r.size() == 2);
        CHECK(r[0].passage_id == "B#0");
        CHECK(r[0].relevance_score == 1.0);
        CHECK(r[0].bm25_score == 0.5);
        CHECK(r[1].passage_id == "A#0");

        CHECK(rerank("q", {}, *store, flat, 5, w).empty());
    }

    TEST_CASE("rerank keeps every candidate when top_k is large")
    {
        auto store = test::make_store({{"A", "x"}, {"B", "y"}, {"C", "z"}});
        std::vector<ScoredPassage> cands{{0, "A#0", 1.0}, {1, "B#0", 2.0}, {2, "C#0", 3.0}};
        LexicalScorer lex;
        Warnings w;
        auto r = rerank("x y", cands, *store, lex, 100, w);
        std::set<std::string> ids;
        for (const auto& p : r) ids.insert(p.passage_id);
        CHECK(ids == std::set<std::string>{"A#0", "B#0", "C#0"});
    }
}
