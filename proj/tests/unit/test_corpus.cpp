#include <doctest.h>

#include <sstream>

#include "elr/corpus.hpp"
#include "elr/text.hpp"
#include "support.hpp"

using namespace elr;

namespace {

std::vector<std::uint32_t> counts(const std::vector<Passage>& ps)
{
    std::vector<std::uint32_t> out;
    for (const auto& p : ps) out.push_back(p.word_count);
    return out;
}

}  // namespace

TEST_SUITE("corpus")
{
    TEST_CASE("chunk_document block sizes")
    {
        CHECK(counts(chunk_document({"1", "T", test::words(250)})) == std::vector<std::uint32_t>{100, 100, 50});
        CHECK(counts(chunk_document({"1", "T", test::words(230)})) == std::vector<std::uint32_t>{100, 100, 30});
        CHECK(counts(chunk_document({"1", "T", test::words(99)})) == std::vector<std::uint32_t>{99});
        CHECK(counts(chunk_document({"1", "T", test::words(100)})) == std::vector<std::uint32_t>{100});
        CHECK(counts(chunk_document({"1", "T", test::words(101)})) == std::vector<std::uint32_t>{100, 1});
        CHECK(chunk_document({"1", "T", " \n\t "}).empty());
        CHECK(chunk_document({"1", "T", ""}).empty());
    }

    TEST_CASE("chunk_document normalizes whitespace and numbers blocks")
    {
        auto ps = chunk_document({"7", "Joe Biden", "alpha \t beta\n\ngamma"});
        REQUIRE(ps.size() == 1);
        CHECK(ps[0].text == "alpha beta gamma");
        CHECK(ps[0].passage_id == "Joe%20Biden#0");
        CHECK(ps[0].page_title == "Joe Biden");
        CHECK(ps[0].block_index == 0);

        auto many = chunk_document({"8", "X", test::words(205)});
        REQUIRE(many.size() == 3);
        for (std::uint32_t i = 0; i < 3; ++i) {
            CHECK(many[i].block_index == i);
            CHECK(many[i].passage_id == "X#" + std::to_string(i));
        }
        CHECK(many[1].text.rfind("w100 ", 0) == 0);
    }

    TEST_CASE("ingest_corpus examples")
    {
        std::istringstream in(R"({"id":"1","title":"A","text":")" + test::words(230) + R"("}
{"id":"2","title":"B","text":")" + test::words(100) + R"("}
{"id":"3","title":"Empty","text":""}
)");
        auto store = ingest_corpus(in);
        CHECK(store.size() == 4);
        CHECK(store.title_count() == 3);
        CHECK(store.has_title("Empty"));
        CHECK(store.passages_of("Empty").empty());
        CHECK(counts({store.passages_of("A").begin(), store.passages_of("A").end()}) == std::vector<std::uint32_t>{100, 100, 30});
        REQUIRE(store.passages_of("B").size() == 1);
        CHECK(store.passages_of("B")[0].block_index == 0);
        CHECK(store.stats().documents == 3);
        CHECK(store.stats().words == 330);
    }

    TEST_CASE("ingest_corpus errors carry line numbers")
    {
        std::istringstream bad_json("{\"id\":\"1\",\"title\":\"A\",\"text\":\"x\"}\n{not json}\n");
        try {
            (void)ingest_corpus(bad_json);
            FAIL("expected CorpusError");
        } catch (const CorpusError& e) {
            CHECK(e.line() == 2);
        }

        std::istringstream dup("{\"id\":\"1\",\"title\":\"A\",\"text\":\"x\"}\n{\"id\":\"2\",\"title\":\"A\",\"text\":\"y\"}\n");
        try {
            (void)ingest_corpus(dup);
            FAIL("expected CorpusError");
        } catch (const CorpusError& e) {
            CHECK(std::string(e.what()).find("A") != std::string::npos);
        }

        std::istringstream missing("{\"id\":\"1\",\"text\":\"x\"}\n");
        CHECK_THROWS_AS((void)ingest_corpus(missing), CorpusError);
        std::istringstream empty_title("{\"id\":\"1\",\"title\":\"\",\"text\":\"x\"}\n");
        CHECK_THROWS_AS((void)ingest_corpus(empty_title), CorpusError);
    }

    TEST_CASE("passages_for_titles")
    {
        auto store = test::make_store({{"A", test::words(250)}, {"B", test::words(10)}, {"C", test::words(120)}});
        std::vector<std::string> known_and_unknown{"A", "Z"};
        auto sel = store->passages_for_titles(known_and_unknown);
        CHECK(sel.passages.size() == 3);
        CHECK(sel.missing == std::vector<std::string>{"Z"});

        CHECK(store->passages_for_titles(std::vector<std::string>{}).passages.empty());

        auto all = store->titles();
        CHECK(store->passages_for_titles(all).passages.size() == store->size());

        std::vector<std::string> dup{"B", "B"};
        CHECK(store->passages_for_titles(dup).passages.size() == 1);
    }

    TEST_CASE("ingestion is deterministic and independent of thread count")
    {
        std::vector<Document> docs;
        for (int i = 0; i < 200; ++i) {
            docs.push_back({std::to_string(i), "Page " + std::to_string(199 - i), test::words(static_cast<std::size_t>(i * 7 % 330))});
        }
        auto one = PassageStore::from_documents(docs, 1);
        auto four = PassageStore::from_documents(docs, 4);
        CHECK(one == four);
        CHECK(one.checksum() == four.checksum());
    }

    TEST_CASE("store round-trips through its file format")
    {
        test::TempDir dir;
        auto store = test::make_store({{"Zürich", "Zürich is a city."}, {"A", test::words(150)}, {"Empty", ""}});
        store->save(dir / "store.jsonl");
        auto loaded = PassageStore::load(dir / "store.jsonl");
        CHECK(loaded == *store);
        CHECK(loaded.checksum() == store->checksum());
        CHECK(loaded.has_title("Empty"));

        auto body = test::read_file(dir / "store.jsonl");
        auto pos = body.find("is a city.");
        REQUIRE(pos != std::string::npos);
        body.replace(pos, 9, "is a town");
        std::istringstream tampered(body);
        CHECK_THROWS_AS((void)PassageStore::read(tampered), CorpusError);
    }
}
