#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "elr/diagnostics.hpp"
#include "elr/transport.hpp"

namespace elr {

enum class TitleSource { entity_link_query, event_link_query, event_link_decomposition };

std::string_view to_string(TitleSource source);
TitleSource title_source_from_string(std::string_view s);

struct TitleCandidate {
    std::string title;
    TitleSource source = TitleSource::entity_link_query;
    std::optional<std::string> origin_sentence;  // set iff source == event_link_decomposition
    int rank = 1;

    friend bool operator==(const TitleCandidate&, const TitleCandidate&) = default;
};

/// One generated set of hypothesis sentences for a query.
struct Decomposition {
    std::size_t set_index = 0;
    std::vector<std::string> sentences;

    friend bool operator==(const Decomposition&, const Decomposition&) = default;
};

/// Provenance-tagged titles plus their first-occurrence-ordered union.
struct TitleSet {
    std::vector<TitleCandidate> candidates;
    std::vector<std::string> unique_titles;

    static TitleSet from_candidates(std::vector<TitleCandidate> candidates);
    /// Candidates that introduced `title`, in call order.
    [[nodiscard]] std::vector<TitleCandidate> provenance(std::string_view title) const;
    [[nodiscard]] std::unordered_map<std::string, std::vector<TitleCandidate>> provenance_map() const;
};

/// A provider answered with {"error": ...}, answered off-protocol, or could
/// not be reached after retries.
class ProviderError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// --- provider backends ------------------------------------------------------

class LinkerBackend {
  public:
    virtual ~LinkerBackend() = default;
    /// Raw provider titles, uncapped. Throws ProviderError.
    virtual std::vector<std::string> link(std::string_view text, std::size_t k) = 0;
    [[nodiscard]] virtual std::string describe() const = 0;
    virtual bool alive() { return true; }
};

class DecomposerBackend {
  public:
    virtual ~DecomposerBackend() = default;
    virtual std::vector<std::vector<std::string>> decompose(std::string_view query, std::size_t sets,
                                                            std::size_t sentences_per_set) = 0;
    [[nodiscard]] virtual std::string describe() const = 0;
    virtual bool alive() { return true; }
};

class CorrectorBackend {
  public:
    virtual ~CorrectorBackend() = default;
    virtual std::vector<std::vector<std::string>> correct(std::string_view query,
                                                          const std::vector<std::vector<std::string>>& decompositions) = 0;
    [[nodiscard]] virtual std::string describe() const = 0;
    virtual bool alive() { return true; }
};

// Wire-format helpers; request fields are emitted exactly as the protocol names them.
nlohmann::json make_link_request(std::string_view op, std::string_view text, std::size_t k);
nlohmann::json make_decompose_request(std::string_view query, std::size_t sets, std::size_t sentences_per_set);
nlohmann::json make_correct_request(std::string_view query, const std::vector<std::vector<std::string>>& decompositions);
std::vector<std::string> parse_titles_response(const nlohmann::json& response);
std::vector<std::vector<std::string>> parse_decompositions_response(const nlohmann::json& response);

class RemoteLinker final : public LinkerBackend {
  public:
    RemoteLinker(std::shared_ptr<Transport> transport, std::string op, int retries);
    std::vector<std::string> link(std::string_view text, std::size_t k) override;
    [[nodiscard]] std::string describe() const override { return transport_->describe(); }
    bool alive() override { return transport_->alive(); }

  private:
    std::shared_ptr<Transport> transport_;
    std::string op_;
    int retries_;
};

class RemoteDecomposer final : public DecomposerBackend {
  public:
    RemoteDecomposer(std::shared_ptr<Transport> transport, int retries);
    std::vector<std::vector<std::string>> decompose(std::string_view query, std::size_t sets,
                                                    std::size_t sentences_per_set) override;
    [[nodiscard]] std::string describe() const override { return transport_->describe(); }
    bool alive() override { return transport_->alive(); }

  private:
    std::shared_ptr<Transport> transport_;
    int retries_;
};

class RemoteCorrector final : public CorrectorBackend {
  public:
    RemoteCorrector(std::shared_ptr<Transport> transport, int retries);
    std::vector<std::vector<std::string>> correct(std::string_view query,
                                                  const std::vector<std::vector<std::string>>& decompositions) override;
    [[nodiscard]] std::string describe() const override { return transport_->describe(); }
    bool alive() override { return transport_->alive(); }

  private:
    std::shared_ptr<Transport> transport_;
    int retries_;
};

/// Titles ranked by |tokens(title) ∩ tokens(text)| / |tokens(title)|, keeping
/// only positive overlap; ties in ascending title order.
std::vector<std::string> fallback_lexical_linker(std::string_view text, std::size_t k,
                                                 std::span<const std::string> title_dictionary);

/// Indexed form of fallback_lexical_linker for large title dictionaries.
class LexicalLinker final : public LinkerBackend {
  public:
    explicit LexicalLinker(std::vector<std::string> titles);
    std::vector<std::string> link(std::string_view text, std::size_t k) override;
    [[nodiscard]] std::string describe() const override { return "builtin:lexical-linker"; }

  private:
    std::vector<std::string> titles_;  // sorted ascending
    std::vector<std::size_t> title_token_count_;
    std::unordered_map<std::string, std::vector<std::uint32_t>> token_to_titles_;
};

/// Deterministic stand-in for a decomposition model: each sentence is a
/// window over the query's content words, shifted per set.
class HeuristicDecomposer final : public DecomposerBackend {
  public:
    std::vector<std::vector<std::string>> decompose(std::string_view query, std::size_t sets,
                                                    std::size_t sentences_per_set) override;
    [[nodiscard]] std::string describe() const override { return "builtin:heuristic-decomposer"; }
};

class IdentityCorrector final : public CorrectorBackend {
  public:
    std::vector<std::vector<std::string>> correct(std::string_view,
                                                  const std::vector<std::vector<std::string>>& decompositions) override
    {
        return decompositions;
    }
    [[nodiscard]] std::string describe() const override { return "builtin:identity"; }
};

// --- title generation -------------------------------------------------------

struct TitleGenerationConfig {
    std::size_t n_entity = 10;
    std::size_t n_event = 5;
    std::size_t n_sets = 5;
    std::size_t n_sentences = 3;
    bool corrector_enabled = false;
    unsigned link_parallelism = 1;

    void validate() const;
    /// n_entity + n_event + n_sets * n_sentences * n_event
    [[nodiscard]] std::size_t title_budget() const { return n_entity + n_event + n_sets * n_sentences * n_event; }
};

struct TitleGenerationResult {
    TitleSet titles;
    std::vector<Decomposition> generated;
    std::vector<Decomposition> corrected;
};

struct TitleProviders {
    std::shared_ptr<LinkerBackend> entity_linker;
    std::shared_ptr<LinkerBackend> event_linker;
    std::shared_ptr<DecomposerBackend> decomposer;
    std::shared_ptr<CorrectorBackend> corrector;  // null means identity
};

/// Runs linking -> decomposition -> linking and enforces every provider
/// contract (caps, shapes). Provider failures degrade to empty results with
/// a warning; nothing here is fatal except an empty query.
class TitleGenerator {
  public:
    TitleGenerator(TitleProviders providers, TitleGenerationConfig config);

    std::vector<TitleCandidate> entity_link(std::string_view query, Warnings& warnings) const;
    std::vector<TitleCandidate> event_link(std::string_view text, TitleSource source, Warnings& warnings) const;
    std::vector<Decomposition> decompose(std::string_view query, Warnings& warnings) const;
    std::vector<Decomposition> correct_decompositions(std::string_view query, const std::vector<Decomposition>& decompositions,
                                                      Warnings& warnings) const;
    TitleGenerationResult generate(std::string_view query, Warnings& warnings) const;

    [[nodiscard]] const TitleGenerationConfig& config() const { return config_; }
    [[nodiscard]] const TitleProviders& providers() const { return providers_; }

  private:
    std::vector<TitleCandidate> link_with(LinkerBackend* linker, std::string_view text, std::size_t k,
                                          TitleSource source, Warnings& warnings) const;

    TitleProviders providers_;
    TitleGenerationConfig config_;
};

nlohmann::json to_json(const TitleCandidate& c);
TitleCandidate title_candidate_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Decomposition& d);
Decomposition decomposition_from_json(const nlohmann::json& j);

}  // namespace elr
