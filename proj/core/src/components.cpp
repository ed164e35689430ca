#include "elr/components.hpp"

#include <fstream>
#include <map>

namespace elr {

using nlohmann::json;

ProviderSettings ProviderSettings::from_json(const json& j)
{
    ProviderSettings s;
    if (!j.is_object()) {
        throw std::invalid_argument("provider config must be a JSON object");
    }
    for (const auto& [key, value] : j.items()) {
        if (key == "entity_link") s.entity_link = EndpointConfig::from_json(value);
        else if (key == "event_link") s.event_link = EndpointConfig::from_json(value);
        else if (key == "decompose") s.decompose = EndpointConfig::from_json(value);
        else if (key == "correct") s.correct = EndpointConfig::from_json(value);
        else throw std::invalid_argument("unknown provider op in config: " + key);
    }
    return s;
}

json ProviderSettings::to_json() const
{
    return {{"entity_link", entity_link.to_json()},
            {"event_link", event_link.to_json()},
            {"decompose", decompose.to_json()},
            {"correct", correct.to_json()}};
}

ScorerSettings ScorerSettings::from_json(const json& j)
{
    ScorerSettings s;
    s.endpoint = EndpointConfig::from_json(j);
    if (j.is_object()) {
        s.batch_size = j.value("batch_size", s.batch_size);
    }
    return s;
}

json ScorerSettings::to_json() const
{
    auto j = endpoint.to_json();
    j["batch_size"] = batch_size;
    return j;
}

json read_json_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open config file: " + path.string());
    }
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

TitleProviders make_title_providers(const ProviderSettings& settings, const PassageStore& store)
{
    std::map<std::string, std::shared_ptr<Transport>> transports;
    auto transport_for = [&](const EndpointConfig& c) {
        auto& t = transports[c.endpoint];
        if (!t) {
            t = make_transport(c);
        }
        return t;
    };
    std::shared_ptr<LexicalLinker> lexical;
    auto lexical_linker = [&] {
        if (!lexical) {
            lexical = std::make_shared<LexicalLinker>(store.titles());
        }
        return lexical;
    };

    TitleProviders p;
    p.entity_linker = settings.entity_link.is_builtin()
                          ? std::shared_ptr<LinkerBackend>(lexical_linker())
                          : std::make_shared<RemoteLinker>(transport_for(settings.entity_link), "entity_link",
                                                           settings.entity_link.retries);
    p.event_linker = settings.event_link.is_builtin()
                         ? std::shared_ptr<LinkerBackend>(lexical_linker())
                         : std::make_shared<RemoteLinker>(transport_for(settings.event_link), "event_link",
                                                          settings.event_link.retries);
    p.decomposer = settings.decompose.is_builtin()
                       ? std::shared_ptr<DecomposerBackend>(std::make_shared<HeuristicDecomposer>())
                       : std::make_shared<RemoteDecomposer>(transport_for(settings.decompose), settings.decompose.retries);
    p.corrector = settings.correct.is_builtin()
                      ? std::shared_ptr<CorrectorBackend>(std::make_shared<IdentityCorrector>())
                      : std::make_shared<RemoteCorrector>(transport_for(settings.correct), settings.correct.retries);
    return p;
}

std::shared_ptr<RelevanceScorer> make_scorer(const ScorerSettings& settings)
{
    auto lexical = std::make_shared<LexicalScorer>();
    if (settings.endpoint.is_builtin()) {
        return lexical;
    }
    return std::make_shared<RemoteScorer>(make_transport(settings.endpoint), lexical, settings.endpoint.retries,
                                          settings.batch_size);
}

}  // namespace elr
