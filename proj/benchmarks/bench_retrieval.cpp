#include <benchmark/benchmark.h>

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "elr/corpus.hpp"
#include "elr/index.hpp"
#include "elr/rerank.hpp"
#include "elr/text.hpp"

namespace {

std::string random_text(std::mt19937_64& rng, std::size_t words, int vocab)
{
    std::string out;
    for (std::size_t i = 0; i < words; ++i) {
        double u = std::uniform_real_distribution<double>(0, 1)(rng);
        out += "word" + std::to_string(static_cast<int>(vocab * u * u)) + " ";
    }
    return out;
}

std::shared_ptr<const elr::PassageStore> make_store(std::size_t pages)
{
    std::mt19937_64 rng(7);
    std::vector<elr::Document> docs;
    for (std::size_t p = 0; p < pages; ++p) {
        docs.push_back({std::to_string(p), "Page " + std::to_string(p), random_text(rng, 200 + rng() % 800, 5000)});
    }
    return std::make_shared<const elr::PassageStore>(elr::PassageStore::from_documents(docs));
}

void BM_TopKFull(benchmark::State& state)
{
    auto index = elr::InvertedIndex::build(make_store(static_cast<std::size_t>(state.range(0))));
    std::mt19937_64 rng(1);
    std::vector<std::string> queries;
    for (int i = 0; i < 64; ++i) queries.push_back(random_text(rng, 8, 5000));
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(index.top_k(queries[i++ % queries.size()], 200));
    }
    state.counters["passages"] = static_cast<double>(index.store().size());
}
BENCHMARK(BM_TopKFull)->Arg(1000)->Arg(10000);

void BM_TopKRestricted(benchmark::State& state)
{
    auto store = make_store(10000);
    auto index = elr::InvertedIndex::build(store);
    auto titles = store->titles();
    std::mt19937_64 rng(2);
    std::vector<std::string> restrict;
    for (int i = 0; i < state.range(0); ++i) restrict.push_back(titles[rng() % titles.size()]);
    auto query = random_text(rng, 8, 5000);
    for (auto _ : state) {
        benchmark::DoNotOptimize(index.top_k(query, 200, std::span<const std::string>(restrict)));
    }
}
BENCHMARK(BM_TopKRestricted)->Arg(10)->Arg(90);

void BM_Chunk(benchmark::State& state)
{
    std::mt19937_64 rng(3);
    elr::Document doc{"1", "Doc", random_text(rng, static_cast<std::size_t>(state.range(0)), 5000)};
    for (auto _ : state) {
        benchmark::DoNotOptimize(elr::chunk_document(doc));
    }
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * doc.text.size()));
}
BENCHMARK(BM_Chunk)->Arg(1000)->Arg(20000);

void BM_Tokenize(benchmark::State& state)
{
    std::mt19937_64 rng(4);
    auto text = random_text(rng, 100, 5000) + " Café Zürich 東京 naïve";
    for (auto _ : state) {
        benchmark::DoNotOptimize(elr::text::tokenize(text));
    }
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_Tokenize);

void BM_RerankLexical(benchmark::State& state)
{
    auto store = make_store(2000);
    auto index = elr::InvertedIndex::build(store);
    std::mt19937_64 rng(5);
    auto query = random_text(rng, 8, 5000);
    auto coarse = index.top_k(query, 200);
    elr::LexicalScorer scorer;
    for (auto _ : state) {
        elr::Warnings warnings;
        benchmark::DoNotOptimize(elr::rerank(query, coarse, *store, scorer, 100, warnings));
    }
}
BENCHMARK(BM_RerankLexical);

}  // namespace

BENCHMARK_MAIN();
