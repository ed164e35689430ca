#include <doctest.h>

#include <cmath>
#include <set>

#include "elr/index.hpp"
#include "support.hpp"

using namespace elr;

namespace {

// Independent evaluation of the BM25 formula on pre-tokenized documents.
double oracle_bm25(const std::vector<std::vector<std::string>>& docs, std::size_t d, const std::string& term, double k1, double b)
{
    double n = static_cast<double>(docs.size());
    double total = 0;
    double df = 0;
    for (const auto& doc : docs) {
        total += static_cast<double>(doc.size());
        df += std::count(doc.begin(), doc.end(), term) > 0 ? 1 : 0;
    }
    double avgdl = total / n;
    double tf = static_cast<double>(std::count(docs[d].begin(), docs[d].end(), term));
    double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
    double dl = static_cast<double>(docs[d].size());
    return idf * tf * (k1 + 1) / (tf + k1 * (1 - b + b * dl / avgdl));
}

const std::vector<std::pair<std::string, std::string>> kThreeDocs{{"d1", "a b b"}, {"d2", "b c"}, {"d3", "c c c"}};

}  // namespace

TEST_SUITE("index")
{
    TEST_CASE("bm25 on the three-document corpus")
    {
        std::vector<std::vector<std::string>> docs{{"a", "b", "b"}, {"b", "c"}, {"c", "c", "c"}};
        const double expected = oracle_bm25(docs, 0, "b", 0.9, 0.4);
        CHECK(expected == doctest::Approx(0.6065).epsilon(1e-4));

        auto index = test::make_index(kThreeDocs);
        CHECK(index->stats().passage_count == 3);
        CHECK(index->stats().avg_passage_length == doctest::Approx(8.0 / 3.0));
        CHECK(index->df("b") == 2);
        CHECK(bm25_idf(3, 2) == doctest::Approx(std::log(1.6)));

        std::vector<std::string> q{"b"};
        CHECK(std::abs(index->score(q, 0) - expected) < 1e-12);
        CHECK(std::abs(index->score(q, 1) - oracle_bm25(docs, 1, "b", 0.9, 0.4)) < 1e-12);
        CHECK(index->score(q, 2) == 0.0);

        auto top = index->top_k("b", 1);
        REQUIRE(top.size() == 1);
        CHECK(top[0].passage_id == "d1#0");
        CHECK(std::abs(top[0].bm25_score - expected) < 1e-12);
    }

    TEST_CASE("unseen and duplicate query terms")
    {
        auto index = test::make_index(kThreeDocs);
        std::vector<std::string> unseen{"zzz", "qqq"};
        for (std::uint32_t i = 0; i < 3; ++i) {
            CHECK(index->score(unseen, i) == 0.0);
        }
        std::vector<std::string> once{"b"};
        std::vector<std::string> twice{"b", "b"};
        CHECK(index->score(once, 0) == index->score(twice, 0));

        auto padded = index->top_k("zzz", 3);
        REQUIRE(padded.size() == 3);
        CHECK(padded[0].passage_id == "d1#0");
        CHECK(padded[2].passage_id == "d3#0");
        for (const auto& p : padded) CHECK(p.bm25_score == 0.0);
    }

    TEST_CASE("b = 0 removes length normalization")
    {
        IndexOptions opts;
        opts.bm25.b = 0.0;
        auto index = test::make_index({{"short", "x y"}, {"long", "x y z z z z z z z z"}}, opts);
        std::vector<std::string> q{"x"};
        CHECK(index->score(q, 0) == index->score(q, 1));
    }

    TEST_CASE("top_k ordering, padding and restriction")
    {
        auto index = test::make_index({{"A", "apple apple banana"}, {"B", test::words(150, "b") + " apple"},
                                       {"C", "cherry"}, {"D", "apple banana " + test::words(210, "d")}});
        auto all = index->top_k("apple", 200);
        CHECK(all.size() == index->store().size());
        for (std::size_t i = 1; i < all.size(); ++i) {
            bool ordered = all[i - 1].bm25_score > all[i].bm25_score ||
                           (all[i - 1].bm25_score == all[i].bm25_score && all[i - 1].passage_id < all[i].passage_id);
            CHECK(ordered);
        }

        std::vector<std::string> two{"B", "D"};
        auto restricted = index->top_k("apple", 200, std::span<const std::string>(two));
        CHECK(restricted.size() == 5);
        for (const auto& p : restricted) {
            auto title = index->store().at(p.ordinal).page_title;
            CHECK((title == "B" || title == "D"));
        }

        std::vector<std::string> none;
        CHECK(index->top_k("apple", 10, std::span<const std::string>(none)).empty());

        for (std::size_t k = 1; k <= all.size(); ++k) {
            auto prefix = index->top_k("apple", k);
            REQUIRE(prefix.size() == k);
            for (std::size_t i = 0; i < k; ++i) CHECK(prefix[i].passage_id == all[i].passage_id);
        }
        CHECK_THROWS_AS((void)index->top_k("apple", 0), std::invalid_argument);
    }

    TEST_CASE("restricted scoring uses whole-corpus statistics")
    {
        auto index = test::make_index(kThreeDocs);
        std::vector<std::string> only_d1{"d1"};
        auto r = index->top_k("b", 5, std::span<const std::string>(only_d1));
        REQUIRE(r.size() == 1);
        CHECK(r[0].bm25_score == index->top_k("b", 1)[0].bm25_score);
    }

    TEST_CASE("persistence round-trip")
    {
        test::TempDir dir;
        auto index = test::mini_wiki_index();
        index->save(dir / "idx");
        auto loaded = InvertedIndex::load(dir / "idx");
        CHECK(loaded.stats().passage_count == index->stats().passage_count);
        CHECK(loaded.stats().term_count == index->stats().term_count);
        CHECK(loaded.store().checksum() == index->store().checksum());
        for (const char* q : {"capital of france", "mozart opera", "largest planet", "nothing matches xyzzy", "iron"}) {
            auto a = index->top_k(q, 50);
            auto b = loaded.top_k(q, 50);
            REQUIRE(a.size() == b.size());
            for (std::size_t i = 0; i < a.size(); ++i) {
                CHECK(a[i].passage_id == b[i].passage_id);
                CHECK(a[i].bm25_score == b[i].bm25_score);
            }
        }
        for (const char* f : {"manifest.json", "terms.tsv", "postings.bin", "doclens.bin", "passages.jsonl"}) {
            CHECK(std::filesystem::exists(dir / "idx" / f));
        }

        index->save(dir / "again");
        for (const char* f : {"manifest.json", "terms.tsv", "postings.bin", "doclens.bin", "passages.jsonl"}) {
            CHECK(test::read_file(dir / "idx" / f) == test::read_file(dir / "again" / f));
        }
    }

    TEST_CASE("parallel build is byte-identical")
    {
        test::TempDir dir;
        auto store = std::make_shared<const PassageStore>(ingest_corpus_file(test::fixture("corpus/mini_wiki.jsonl")));
        InvertedIndex::build(store, {}, 1).save(dir / "one");
        InvertedIndex::build(store, {}, 3).save(dir / "three");
        for (const char* f : {"manifest.json", "terms.tsv", "postings.bin", "doclens.bin", "passages.jsonl"}) {
            CHECK(test::read_file(dir / "one" / f) == test::read_file(dir / "three" / f));
        }
    }

    TEST_CASE("load rejects missing or corrupt indexes")
    {
        test::TempDir dir;
        CHECK_THROWS_AS((void)InvertedIndex::load(dir / "nope"), IndexError);
        test::make_index(kThreeDocs)->save(dir / "idx");
        {
            std::ofstream out(dir / "idx" / "postings.bin", std::ios::binary | std::ios::trunc);
            out << "xx";
        }
        CHECK_THROWS_AS((void)InvertedIndex::load(dir / "idx"), IndexError);
    }

    TEST_CASE("parameter validation")
    {
        Bm25Params p;
        p.k1 = -1;
        CHECK_THROWS_AS(p.validate(), std::invalid_argument);
        p = {};
        p.b = 1.5;
        CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    }
}
