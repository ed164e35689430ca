#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "elr/diagnostics.hpp"
#include "elr/index.hpp"
#include "elr/providers.hpp"
#include "elr/rerank.hpp"

namespace elr {

struct PipelineConfig {
    TitleGenerationConfig titles;  // 10 / 5 / 5 sets x 3 sentences
    std::size_t n_coarse = 200;
    std::size_t k_final = 100;
    std::uint64_t seed = 0;
    unsigned jobs = 1;  // batch-level parallelism

    void validate() const;
    [[nodiscard]] nlohmann::json to_json() const;
    static PipelineConfig from_json(const nlohmann::json& j);
    static PipelineConfig from_json(const nlohmann::json& j, PipelineConfig base);
    /// Hash of the retrieval-affecting fields; jobs does not participate.
    [[nodiscard]] std::string fingerprint() const;
};

struct Components {
    std::shared_ptr<const InvertedIndex> index;
    TitleProviders providers;
    std::shared_ptr<RelevanceScorer> scorer;
};

struct StageTimings {
    double titles_ms = 0.0;
    double coarse_ms = 0.0;
    double rerank_ms = 0.0;
    double total_ms = 0.0;
};

/// Everything one query went through, in enough detail to audit or replay it.
struct QueryTrace {
    std::string qid;
    std::string query;
    std::vector<Decomposition> generated;
    std::vector<Decomposition> corrected;
    TitleSet titles;
    std::vector<ScoredPassage> coarse;
    std::vector<RankedPassage> final;
    Warnings warnings;
    StageTimings timings;
    std::string config_fingerprint;
};

struct QueryInput {
    std::string qid;
    std::string query;
};

class Pipeline {
  public:
    /// Throws std::invalid_argument when the index is missing or config is invalid.
    Pipeline(Components components, PipelineConfig config);

    /// query -> titles -> page passages -> BM25 top n_coarse -> rerank -> top k_final.
    [[nodiscard]] QueryTrace retrieve(std::string_view query, std::string_view qid = {},
                                      std::optional<std::size_t> k_final = std::nullopt) const;

    /// Output order matches input order; up to `parallelism` queries in flight.
    [[nodiscard]] std::vector<QueryTrace> retrieve_batch(std::span<const QueryInput> queries,
                                                         unsigned parallelism) const;

    /// Re-runs coarse filtering and reranking from a stored trace's title set.
    [[nodiscard]] QueryTrace replay(const QueryTrace& trace) const;

    [[nodiscard]] const PipelineConfig& config() const { return config_; }
    [[nodiscard]] const Components& components() const { return components_; }
    [[nodiscard]] const TitleGenerator& title_generator() const { return generator_; }

  private:
    void select_passages(QueryTrace& trace, std::size_t k_final) const;

    Components components_;
    PipelineConfig config_;
    TitleGenerator generator_;
};

nlohmann::json to_json(const QueryTrace& trace);
QueryTrace trace_from_json(const nlohmann::json& j);

/// HTTP front end: POST /retrieve {"query", "k"?} -> trace; GET /health.
class RetrievalServer {
  public:
    explicit RetrievalServer(const Pipeline& pipeline);
    ~RetrievalServer();
    RetrievalServer(const RetrievalServer&) = delete;
    RetrievalServer& operator=(const RetrievalServer&) = delete;

    /// Binds and serves until stop(). Returns false if binding failed.
    bool listen(const std::string& host, int port);
    /// Binds to an ephemeral port; returns it, or -1.
    int bind_any_port(const std::string& host);
    void listen_after_bind();
    void stop();
    void wait_until_ready() const;

    [[nodiscard]] nlohmann::json health() const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace elr
