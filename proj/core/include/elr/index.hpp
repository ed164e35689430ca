#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "elr/corpus.hpp"
#include "elr/text.hpp"

namespace elr {

inline constexpr int kIndexFormatVersion = 1;

/// Okapi BM25 free parameters. Defaults follow Anserini/Pyserini.
struct Bm25Params {
    double k1 = 0.9;
    double b = 0.4;

    void validate() const;
    friend bool operator==(const Bm25Params&, const Bm25Params&) = default;
};

struct IndexOptions {
    Bm25Params bm25;
    text::TokenizerOptions tokenizer;
};

/// ln(1 + (N - df + 0.5) / (df + 0.5)); always positive for 1 <= df <= N.
double bm25_idf(std::uint64_t passage_count, std::uint64_t df);

/// Per-term contribution idf * tf * (k1 + 1) / (tf + k1 * (1 - b + b * dl / avgdl)).
double bm25_term_score(double idf, double tf, double doc_len, double avg_doc_len, const Bm25Params& params);

struct IndexStats {
    std::uint64_t passage_count = 0;
    std::uint64_t total_tokens = 0;
    double avg_passage_length = 0.0;
    std::uint64_t term_count = 0;
    std::uint64_t posting_count = 0;
};

struct ScoredPassage {
    std::uint32_t ordinal = 0;  // position in the passage store
    std::string passage_id;
    double bm25_score = 0.0;
};

class IndexError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Immutable BM25 index over a PassageStore. Concurrent queries are safe.
///
/// Statistics (N, df, avgdl) always cover the whole corpus; a title
/// restriction only narrows which passages are eligible.
class InvertedIndex {
  public:
    static InvertedIndex build(std::shared_ptr<const PassageStore> store, const IndexOptions& options = {},
                               unsigned jobs = 1);

    /// Writes manifest.json, passages.jsonl, terms.tsv, postings.bin and
    /// doclens.bin into `dir` (created if missing).
    void save(const std::filesystem::path& dir) const;
    static InvertedIndex load(const std::filesystem::path& dir);

    [[nodiscard]] const PassageStore& store() const { return *store_; }
    [[nodiscard]] std::shared_ptr<const PassageStore> shared_store() const { return store_; }
    [[nodiscard]] const IndexOptions& options() const { return options_; }
    [[nodiscard]] const IndexStats& stats() const { return stats_; }

    [[nodiscard]] std::vector<std::string> analyze(std::string_view text) const;
    [[nodiscard]] std::uint32_t df(std::string_view term) const;
    [[nodiscard]] std::uint32_t doc_length(std::uint32_t ordinal) const { return doc_len_.at(ordinal); }
    [[nodiscard]] std::uint32_t term_frequency(std::string_view term, std::uint32_t ordinal) const;

    /// BM25 of one passage. Duplicate query terms count once; unseen terms contribute 0.
    [[nodiscard]] double score(std::span<const std::string> query_terms, std::uint32_t ordinal) const;

    /// Highest-scoring passages, descending score then ascending passage_id.
    /// When fewer than k eligible passages score above zero, the remainder is
    /// filled with zero-score eligible passages in ascending passage_id order.
    [[nodiscard]] std::vector<ScoredPassage> top_k(std::string_view query, std::size_t k,
                                                   std::optional<std::span<const std::string>> restrict_titles
                                                   = std::nullopt) const;

    /// Rank of a passage in ascending passage_id order (tie-breaking key).
    [[nodiscard]] std::uint32_t id_rank(std::uint32_t ordinal) const { return id_rank_[ordinal]; }

  private:
    struct QueryTerm {
        std::uint32_t term_id;
        double idf;
    };

    InvertedIndex() = default;
    void finalize();
    [[nodiscard]] std::vector<QueryTerm> resolve(std::span<const std::string> terms) const;
    [[nodiscard]] double score_resolved(std::span<const QueryTerm> terms, std::uint32_t ordinal) const;
    [[nodiscard]] std::optional<std::uint32_t> term_id(std::string_view term) const;

    std::shared_ptr<const PassageStore> store_;
    IndexOptions options_;
    IndexStats stats_;

    std::vector<std::string> terms_;  // sorted lexicographically; id = position
    std::unordered_map<std::string, std::uint32_t> term_ids_;
    std::vector<std::uint64_t> posting_offsets_;  // terms_.size() + 1
    std::vector<std::uint32_t> posting_docs_;
    std::vector<std::uint32_t> posting_tfs_;
    std::vector<std::uint32_t> doc_len_;

    // Forward view (per passage, term ids ascending) for restricted scoring.
    std::vector<std::uint64_t> forward_offsets_;
    std::vector<std::uint32_t> forward_terms_;
    std::vector<std::uint32_t> forward_tfs_;

    std::vector<std::uint32_t> id_rank_;
    std::vector<std::uint32_t> by_id_;  // ordinals in ascending passage_id order
};

}  // namespace elr
