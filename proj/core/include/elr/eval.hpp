#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "elr/diagnostics.hpp"
#include "elr/transport.hpp"

namespace elr {

enum class AnswerType { span, boolean };

struct EvalQuestion {
    std::string qid;
    std::string question;
    std::vector<std::string> answers;
    AnswerType answer_type = AnswerType::span;
    std::optional<bool> gold_bool;
};

enum class DatasetKind { nq, tqa, hotpot, boolq, strategyqa };

DatasetKind dataset_kind_from_string(std::string_view name);
std::string_view to_string(DatasetKind kind);
/// Column prefix used in the results table ("NQ", "TQA", "Hotpot", "BoolQ", "STQA").
std::string_view column_label(DatasetKind kind);

class DatasetError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Adapters for the official dev-set layouts:
///   nq         NQ-open JSON lines            {"question", "answer": [..]}
///   tqa        TriviaQA JSON                 {"Data": [{"QuestionId", "Question", "Answer": {"Value", "Aliases"}}]}
///   hotpot     HotpotQA JSON array           [{"_id", "question", "answer"}]
///   boolq      BoolQ JSON lines              {"question", "answer": bool}
///   strategyqa StrategyQA JSON array/lines   [{"qid", "question", "answer": bool}]
std::vector<EvalQuestion> load_dataset(DatasetKind kind, const std::filesystem::path& path);
std::vector<EvalQuestion> load_dataset(DatasetKind kind, std::istream& in, const std::string& source_name = "<stream>");

struct YesNoFilterResult {
    std::vector<EvalQuestion> kept;
    std::size_t removed = 0;
    Warnings warnings;
};

/// Drops questions whose gold answer is exactly "yes" or "no" (after normalization).
YesNoFilterResult filter_yes_no(std::vector<EvalQuestion> questions);

/// Lowercase, remove ASCII punctuation, drop the articles a/an/the, collapse whitespace.
std::string normalize_answer(std::string_view s);

/// True iff some normalized answer occurs as a contiguous token run inside
/// some normalized passage.
bool contains_answer(std::span<const std::string> passages, std::span<const std::string> answers);

/// One retrieved list per query, as read back from a trace (run) file.
struct RunEntry {
    std::string qid;
    std::string query;
    std::vector<std::string> texts;
    std::string config_fingerprint;
};

std::vector<RunEntry> read_run_file(std::istream& in);
std::vector<RunEntry> read_run_file(const std::filesystem::path& path);

struct QuestionResult {
    std::string qid;
    std::optional<std::size_t> first_hit_rank;  // 1-based
    std::optional<bool> predicted;
    bool correct = false;
};

struct MetricReport {
    std::string dataset;
    std::size_t n_questions = 0;
    std::map<int, double> recall_at;
    std::optional<double> accuracy;
    std::vector<QuestionResult> per_question;
    std::string config_fingerprint;
    Warnings warnings;

    [[nodiscard]] nlohmann::json to_json() const;
    [[nodiscard]] std::string to_table() const;
};

/// For each K, the fraction of questions whose top-K passages contain an answer.
/// Questions are matched to run entries by qid, then by question text.
MetricReport recall_at_k(std::span<const RunEntry> run, std::span<const EvalQuestion> questions, std::span<const int> ks,
                         std::string dataset = {});

class YesNoAnswerer {
  public:
    virtual ~YesNoAnswerer() = default;
    /// true = yes. Throws on failure.
    virtual bool answer(std::string_view question, std::span<const std::string> contexts) = 0;
    [[nodiscard]] virtual std::string describe() const = 0;
};

/// Model-free baseline: "yes" when some context covers at least `threshold`
/// of the question's content tokens.
class KeywordAnswerer final : public YesNoAnswerer {
  public:
    explicit KeywordAnswerer(double threshold = 0.5) : threshold_(threshold) {}
    bool answer(std::string_view question, std::span<const std::string> contexts) override;
    [[nodiscard]] std::string describe() const override { return "builtin:keyword-answerer"; }

  private:
    double threshold_;
};

/// {"op":"answer","text":q,"contexts":[..]} -> {"answer":"yes"|"no"}
class RemoteAnswerer final : public YesNoAnswerer {
  public:
    RemoteAnswerer(std::shared_ptr<Transport> transport, int retries)
        : transport_(std::move(transport)), retries_(retries)
    {}
    bool answer(std::string_view question, std::span<const std::string> contexts) override;
    [[nodiscard]] std::string describe() const override { return transport_->describe(); }

  private:
    std::shared_ptr<Transport> transport_;
    int retries_;
};

/// Accuracy of `answerer` on boolean questions given each question's top-k texts.
/// A failed answer counts as incorrect.
MetricReport boolean_accuracy(std::span<const RunEntry> run, std::span<const EvalQuestion> questions,
                              YesNoAnswerer& answerer, std::size_t k, std::string dataset = {});

/// Systems x {NQ@5, NQ@20, TQA@5, TQA@20, Hotpot@5, Hotpot@20, BoolQ Acc., STQA Acc.}
class ResultsTable {
  public:
    static const std::vector<std::string>& columns();

    void add(const std::string& system, DatasetKind dataset, const MetricReport& report);
    [[nodiscard]] std::optional<double> cell(const std::string& system, const std::string& column) const;
    [[nodiscard]] std::string to_text() const;
    [[nodiscard]] nlohmann::json to_json() const;

  private:
    std::vector<std::string> systems_;
    std::map<std::string, std::map<std::string, double>> cells_;
};

}  // namespace elr
