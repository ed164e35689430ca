#pragma once

#include <filesystem>
#include <memory>

#include <nlohmann/json.hpp>

#include "elr/corpus.hpp"
#include "elr/providers.hpp"
#include "elr/rerank.hpp"
#include "elr/transport.hpp"

namespace elr {

/// Provider endpoints per op. "builtin" selects the model-free fallback:
/// lexical title linker, heuristic decomposer, identity corrector.
///
///   {"entity_link": {"endpoint": "exec:python3 sidecar.py", "timeout_ms": 30000, "retries": 2},
///    "event_link": "http://127.0.0.1:8500/provider",
///    "decompose": "builtin",
///    "correct": "builtin"}
struct ProviderSettings {
    EndpointConfig entity_link;
    EndpointConfig event_link;
    EndpointConfig decompose;
    EndpointConfig correct;

    static ProviderSettings from_json(const nlohmann::json& j);
    [[nodiscard]] nlohmann::json to_json() const;
};

struct ScorerSettings {
    EndpointConfig endpoint;
    std::size_t batch_size = 32;

    static ScorerSettings from_json(const nlohmann::json& j);
    [[nodiscard]] nlohmann::json to_json() const;
};

nlohmann::json read_json_config(const std::filesystem::path& path);

/// Ops sharing an endpoint string share one transport (one child process).
TitleProviders make_title_providers(const ProviderSettings& settings, const PassageStore& store);
std::shared_ptr<RelevanceScorer> make_scorer(const ScorerSettings& settings);

}  // namespace elr
