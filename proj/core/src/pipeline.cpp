#include "elr/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <thread>

#include "elr/text.hpp"

namespace elr {

using nlohmann::json;

void PipelineConfig::validate() const
{
    titles.validate();
    if (n_coarse == 0) {
        throw std::invalid_argument("n_coarse must be >= 1");
    }
    if (k_final < 1 || k_final > n_coarse) {
        throw std::invalid_argument("k_final must be in [1, n_coarse]");
    }
}

json PipelineConfig::to_json() const
{
    return {{"n_entity", titles.n_entity},
            {"n_event", titles.n_event},
            {"n_sets", titles.n_sets},
            {"n_sentences", titles.n_sentences},
            {"corrector_enabled", titles.corrector_enabled},
            {"link_parallelism", titles.link_parallelism},
            {"n_coarse", n_coarse},
            {"k_final", k_final},
            {"seed", seed},
            {"jobs", jobs}};
}

PipelineConfig PipelineConfig::from_json(const json& j)
{
    return from_json(j, PipelineConfig{});
}

PipelineConfig PipelineConfig::from_json(const json& j, PipelineConfig base)
{
    auto& t = base.titles;
    t.n_entity = j.value("n_entity", t.n_entity);
    t.n_event = j.value("n_event", t.n_event);
    t.n_sets = j.value("n_sets", t.n_sets);
    t.n_sentences = j.value("n_sentences", t.n_sentences);
    t.corrector_enabled = j.value("corrector_enabled", t.corrector_enabled);
    t.link_parallelism = j.value("link_parallelism", t.link_parallelism);
    base.n_coarse = j.value("n_coarse", base.n_coarse);
    base.k_final = j.value("k_final", base.k_final);
    base.seed = j.value("seed", base.seed);
    base.jobs = j.value("jobs", base.jobs);
    return base;
}

std::string PipelineConfig::fingerprint() const
{
    auto j = to_json();
    j.erase("jobs");
    j.erase("link_parallelism");
    return text::fnv1a_hex(j.dump());
}

Pipeline::Pipeline(Components components, PipelineConfig config)
    : components_(std::move(components)),
      config_(config),
      generator_(components_.providers, config.titles)
{
    if (!components_.index) {
        throw std::invalid_argument("pipeline: no index loaded");
    }
    config_.validate();
    if (!components_.scorer) {
        components_.scorer = std::make_shared<LexicalScorer>();
    }
}

namespace {

double ms_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

void Pipeline::select_passages(QueryTrace& trace, std::size_t k_final) const
{
    const auto& index = *components_.index;
    const auto& titles = trace.titles.unique_titles;
    if (titles.empty()) {
        trace.warnings.push_back("no titles: every title provider came back empty; nothing to retrieve");
        return;
    }
    std::size_t missing = 0;
    for (const auto& t : titles) {
        if (!index.store().has_title(t)) {
            ++missing;
        }
    }
    if (missing > 0) {
        trace.warnings.push_back(std::to_string(missing) + " of " + std::to_string(titles.size()) +
                                 " linked title(s) not in the corpus");
    }

    auto t0 = std::chrono::steady_clock::now();
    trace.coarse = index.top_k(trace.query, config_.n_coarse, std::span<const std::string>(titles));
    trace.timings.coarse_ms = ms_since(t0);
    if (trace.coarse.empty()) {
        trace.warnings.push_back("no passages: linked titles hold no passages in the corpus");
        return;
    }

    t0 = std::chrono::steady_clock::now();
    trace.final = rerank(trace.query, trace.coarse, index.store(), *components_.scorer, k_final, trace.warnings);
    trace.timings.rerank_ms = ms_since(t0);

    auto provenance = trace.titles.provenance_map();
    for (auto& r : trace.final) {
        r.title_provenance = provenance[r.page_title];
    }
}

QueryTrace Pipeline::retrieve(std::string_view query, std::string_view qid, std::optional<std::size_t> k_final) const
{
    if (text::trim(query).empty()) {
        throw std::invalid_argument("retrieve: query must be non-empty");
    }
    const std::size_t k = k_final.value_or(config_.k_final);
    if (k < 1 || k > config_.n_coarse) {
        throw std::invalid_argument("retrieve: k must be in [1, n_coarse]");
    }
    auto t0 = std::chrono::steady_clock::now();
    QueryTrace trace;
    trace.qid = std::string(qid);
    trace.query = std::string(query);
    trace.config_fingerprint = config_.fingerprint();

    auto t1 = std::chrono::steady_clock::now();
    auto generated = generator_.generate(query, trace.warnings);
    trace.timings.titles_ms = ms_since(t1);
    trace.generated = std::move(generated.generated);
    trace.corrected = std::move(generated.corrected);
    trace.titles = std::move(generated.titles);

    select_passages(trace, k);
    trace.timings.total_ms = ms_since(t0);
    return trace;
}

QueryTrace Pipeline::replay(const QueryTrace& stored) const
{
    QueryTrace trace;
    trace.qid = stored.qid;
    trace.query = stored.query;
    trace.generated = stored.generated;
    trace.corrected = stored.corrected;
    trace.titles = stored.titles;
    trace.config_fingerprint = config_.fingerprint();
    auto t0 = std::chrono::steady_clock::now();
    select_passages(trace, config_.k_final);
    trace.timings.total_ms = ms_since(t0);
    return trace;
}

std::vector<QueryTrace> Pipeline::retrieve_batch(std::span<const QueryInput> queries, unsigned parallelism) const
{
    std::vector<QueryTrace> out(queries.size());
    auto run_one = [&](std::size_t i) {
        try {
            out[i] = retrieve(queries[i].query, queries[i].qid);
        } catch (const std::invalid_argument& e) {
            out[i].qid = queries[i].qid;
            out[i].query = queries[i].query;
            out[i].config_fingerprint = config_.fingerprint();
            out[i].warnings.push_back(std::string("query skipped: ") + e.what());
        }
    };
    parallelism = std::max(1U, parallelism);
    if (parallelism == 1 || queries.size() < 2) {
        for (std::size_t i = 0; i < queries.size(); ++i) {
            run_one(i);
        }
        return out;
    }
    std::atomic<std::size_t> next{0};
    {
        std::vector<std::jthread> workers;
        auto n = std::min<std::size_t>(parallelism, queries.size());
        for (std::size_t w = 0; w < n; ++w) {
            workers.emplace_back([&] {
                for (auto i = next.fetch_add(1); i < queries.size(); i = next.fetch_add(1)) {
                    run_one(i);
                }
            });
        }
    }
    return out;
}

// --- JSON -------------------------------------------------------------------

json to_json(const QueryTrace& trace)
{
    json generated = json::array();
    for (const auto& d : trace.generated) generated.push_back(to_json(d));
    json corrected = json::array();
    for (const auto& d : trace.corrected) corrected.push_back(to_json(d));
    json candidates = json::array();
    for (const auto& c : trace.titles.candidates) candidates.push_back(to_json(c));
    json coarse = json::array();
    for (const auto& c : trace.coarse) coarse.push_back({{"pid", c.passage_id}, {"bm25", c.bm25_score}});
    json final_list = json::array();
    for (const auto& r : trace.final) {
        json prov = json::array();
        for (const auto& c : r.title_provenance) prov.push_back(to_json(c));
        final_list.push_back({{"pid", r.passage_id},
                              {"title", r.page_title},
                              {"text", r.text},
                              {"bm25", r.bm25_score},
                              {"relevance", r.relevance_score},
                              {"provenance", std::move(prov)}});
    }
    return {{"qid", trace.qid},
            {"query", trace.query},
            {"config_fingerprint", trace.config_fingerprint},
            {"decompositions", {{"generated", std::move(generated)}, {"corrected", std::move(corrected)}}},
            {"titles", {{"unique", trace.titles.unique_titles}, {"candidates", std::move(candidates)}}},
            {"coarse", std::move(coarse)},
            {"final", std::move(final_list)},
            {"warnings", trace.warnings},
            {"timings_ms",
             {{"titles", trace.timings.titles_ms},
              {"coarse", trace.timings.coarse_ms},
              {"rerank", trace.timings.rerank_ms},
              {"total", trace.timings.total_ms}}}};
}

QueryTrace trace_from_json(const json& j)
{
    QueryTrace t;
    t.qid = j.value("qid", "");
    t.query = j.at("query").get<std::string>();
    t.config_fingerprint = j.value("config_fingerprint", "");
    if (auto it = j.find("decompositions"); it != j.end()) {
        for (const auto& d : it->value("generated", json::array())) t.generated.push_back(decomposition_from_json(d));
        for (const auto& d : it->value("corrected", json::array())) t.corrected.push_back(decomposition_from_json(d));
    }
    std::vector<TitleCandidate> candidates;
    if (auto it = j.find("titles"); it != j.end()) {
        for (const auto& c : it->value("candidates", json::array())) candidates.push_back(title_candidate_from_json(c));
    }
    t.titles = TitleSet::from_candidates(std::move(candidates));
    for (const auto& c : j.value("coarse", json::array())) {
        t.coarse.push_back({0, c.at("pid").get<std::string>(), c.at("bm25").get<double>()});
    }
    for (const auto& r : j.value("final", json::array())) {
        RankedPassage p;
        p.passage_id = r.at("pid").get<std::string>();
        p.page_title = r.at("title").get<std::string>();
        p.text = r.at("text").get<std::string>();
        p.bm25_score = r.at("bm25").get<double>();
        p.relevance_score = r.at("relevance").get<double>();
        for (const auto& c : r.value("provenance", json::array())) p.title_provenance.push_back(title_candidate_from_json(c));
        t.final.push_back(std::move(p));
    }
    t.warnings = j.value("warnings", Warnings{});
    if (auto it = j.find("timings_ms"); it != j.end()) {
        t.timings.titles_ms = it->value("titles", 0.0);
        t.timings.coarse_ms = it->value("coarse", 0.0);
        t.timings.rerank_ms = it->value("rerank", 0.0);
        t.timings.total_ms = it->value("total", 0.0);
    }
    return t;
}

}  // namespace elr
