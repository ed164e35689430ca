#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "elr/corpus.hpp"
#include "elr/diagnostics.hpp"
#include "elr/index.hpp"
#include "elr/providers.hpp"
#include "elr/transport.hpp"

namespace elr {

struct ScorerRequest {
    std::string_view question;
    std::string_view context;
};

/// Probability-like confidence that the context helps answer the question.
/// Implementations return one value in [0, 1] per request, in request order.
class RelevanceScorer {
  public:
    virtual ~RelevanceScorer() = default;
    virtual std::vector<double> score_batch(std::span<const ScorerRequest> batch, Warnings& warnings) = 0;
    [[nodiscard]] virtual std::string describe() const = 0;
    virtual bool alive() { return true; }
};

/// Fraction of the question's distinct content tokens that occur in the
/// context. Content tokens are tokenize() output minus the shipped stopwords.
class LexicalScorer final : public RelevanceScorer {
  public:
    [[nodiscard]] static double score(std::string_view question, std::string_view context);
    std::vector<double> score_batch(std::span<const ScorerRequest> batch, Warnings& warnings) override;
    [[nodiscard]] std::string describe() const override { return "builtin:lexical-scorer"; }
};

/// Speaks {"op":"score","pairs":[{"q","c"}]} -> {"scores":[...]}. A batch that
/// fails or comes back off-contract is scored by `fallback` instead.
class RemoteScorer final : public RelevanceScorer {
  public:
    RemoteScorer(std::shared_ptr<Transport> transport, std::shared_ptr<RelevanceScorer> fallback, int retries,
                 std::size_t batch_size = 32);
    std::vector<double> score_batch(std::span<const ScorerRequest> batch, Warnings& warnings) override;
    [[nodiscard]] std::string describe() const override { return transport_->describe(); }
    bool alive() override { return transport_->alive(); }

  private:
    std::shared_ptr<Transport> transport_;
    std::shared_ptr<RelevanceScorer> fallback_;
    int retries_;
    std::size_t batch_size_;
};

nlohmann::json make_score_request(std::span<const ScorerRequest> batch);
/// Throws ProviderError unless the response holds exactly `expected` finite scores in [0, 1].
std::vector<double> parse_score_response(const nlohmann::json& response, std::size_t expected);

double score_pair(const ScorerRequest& request, RelevanceScorer& scorer, Warnings& warnings);

struct RankedPassage {
    std::uint32_t ordinal = 0;
    std::string passage_id;
    std::string page_title;
    std::string text;
    double bm25_score = 0.0;
    double relevance_score = 0.0;
    std::vector<TitleCandidate> title_provenance;
};

/// Orders candidates by relevance desc, then bm25 desc, then passage_id asc,
/// and keeps the first `top_k`.
std::vector<RankedPassage> rerank(std::string_view question, std::span<const ScoredPassage> candidates,
                                  const PassageStore& store, RelevanceScorer& scorer, std::size_t top_k,
                                  Warnings& warnings);

// --- training-data export ---------------------------------------------------

enum class PairLabel { positive, negative };
enum class SourceDataset { hotpotqa, nq };

std::string_view to_string(PairLabel label);
std::string_view to_string(SourceDataset source);

struct TrainingPair {
    std::string question;
    std::string context;
    PairLabel label = PairLabel::positive;
    SourceDataset source = SourceDataset::hotpotqa;
};

struct HotpotRecord {
    std::string question;
    std::vector<std::string> supporting;      // annotated supporting-fact sentences
    std::vector<std::string> non_supporting;  // every other context sentence
};

struct NqRecord {
    std::string question;
    std::vector<std::string> positives;
    std::vector<std::string> hard_negatives;
};

struct TrainingExport {
    std::vector<TrainingPair> pairs;
    std::uint64_t seed = 0;
    SourceDataset recipe = SourceDataset::hotpotqa;
    Warnings warnings;

    [[nodiscard]] std::size_t positives() const;
    [[nodiscard]] std::size_t negatives() const;
    /// Header `#recipe=..<TAB>seed=..<TAB>pairs=..<TAB>positives=..<TAB>negatives=..`,
    /// then question, context, label, source per line.
    void write_tsv(std::ostream& out) const;
};

/// Every supporting sentence becomes a positive; the same number of negatives
/// is drawn without replacement from the record's other sentences, topping up
/// from the global pool when a record runs short.
TrainingExport export_hotpot_pairs(std::span<const HotpotRecord> records, std::uint64_t seed);

/// One positive and one hard negative per sampled question; questions are
/// sampled uniformly so the export holds exactly `target_size` pairs.
/// `target_size` must be even.
TrainingExport export_nq_pairs(std::span<const NqRecord> records, std::size_t target_size, std::uint64_t seed);

/// Official HotpotQA training JSON (array with question/supporting_facts/context).
std::vector<HotpotRecord> load_hotpot_training(const std::filesystem::path& path);
/// DPR NQ training JSON (array with question/positive_ctxs/hard_negative_ctxs).
std::vector<NqRecord> load_nq_training(const std::filesystem::path& path);

/// Reads the pair count from an existing export's header line.
std::size_t read_export_size(const std::filesystem::path& path);

}  // namespace elr
