#include "elr/providers.hpp"

#include <algorithm>
#include <cctype>
#include <future>
#include <unordered_set>

#include "elr/text.hpp"

namespace elr {

using nlohmann::json;

std::string_view to_string(TitleSource source)
{
    switch (source) {
    case TitleSource::entity_link_query:
        return "entity_link_query";
    case TitleSource::event_link_query:
        return "event_link_query";
    case TitleSource::event_link_decomposition:
        return "event_link_decomposition";
    }
    return "unknown";
}

TitleSource title_source_from_string(std::string_view s)
{
    if (s == "entity_link_query") return TitleSource::entity_link_query;
    if (s == "event_link_query") return TitleSource::event_link_query;
    if (s == "event_link_decomposition") return TitleSource::event_link_decomposition;
    throw std::invalid_argument("unknown title source: " + std::string(s));
}

TitleSet TitleSet::from_candidates(std::vector<TitleCandidate> candidates)
{
    TitleSet set;
    std::unordered_set<std::string> seen;
    for (const auto& c : candidates) {
        if (seen.insert(c.title).second) {
            set.unique_titles.push_back(c.title);
        }
    }
    set.candidates = std::move(candidates);
    return set;
}

std::vector<TitleCandidate> TitleSet::provenance(std::string_view title) const
{
    std::vector<TitleCandidate> out;
    for (const auto& c : candidates) {
        if (c.title == title) {
            out.push_back(c);
        }
    }
    return out;
}

std::unordered_map<std::string, std::vector<TitleCandidate>> TitleSet::provenance_map() const
{
    std::unordered_map<std::string, std::vector<TitleCandidate>> out;
    for (const auto& c : candidates) {
        out[c.title].push_back(c);
    }
    return out;
}

// --- wire format ------------------------------------------------------------

json make_link_request(std::string_view op, std::string_view text, std::size_t k)
{
    return {{"op", op}, {"text", text}, {"k", k}};
}

json make_decompose_request(std::string_view query, std::size_t sets, std::size_t sentences_per_set)
{
    return {{"op", "decompose"}, {"text", query}, {"sets", sets}, {"sentences_per_set", sentences_per_set}};
}

json make_correct_request(std::string_view query, const std::vector<std::vector<std::string>>& decompositions)
{
    return {{"op", "correct"}, {"text", query}, {"decompositions", decompositions}};
}

namespace {

void throw_if_error(const json& response)
{
    if (!response.is_object()) {
        throw ProviderError("provider response is not a JSON object");
    }
    if (auto it = response.find("error"); it != response.end()) {
        throw ProviderError("provider error: " + (it->is_string() ? it->get<std::string>() : it->dump()));
    }
}

json remote_call(Transport& transport, const json& request, int retries)
{
    try {
        return call_with_retries(transport, request, retries);
    } catch (const TransportError& e) {
        throw ProviderError(std::string(e.what()) + " (after " + std::to_string(retries + 1) + " attempts)");
    }
}

std::vector<std::vector<std::string>> to_raw(const std::vector<Decomposition>& decomps)
{
    std::vector<std::vector<std::string>> raw;
    raw.reserve(decomps.size());
    for (const auto& d : decomps) {
        raw.push_back(d.sentences);
    }
    return raw;
}

}  // namespace

std::vector<std::string> parse_titles_response(const json& response)
{
    throw_if_error(response);
    auto it = response.find("titles");
    if (it == response.end() || !it->is_array()) {
        throw ProviderError("link response lacks a \"titles\" array");
    }
    std::vector<std::string> titles;
    for (const auto& t : *it) {
        if (!t.is_string()) {
            throw ProviderError("link response contains a non-string title");
        }
        titles.push_back(t.get<std::string>());
    }
    return titles;
}

std::vector<std::vector<std::string>> parse_decompositions_response(const json& response)
{
    throw_if_error(response);
    auto it = response.find("decompositions");
    if (it == response.end() || !it->is_array()) {
        throw ProviderError("response lacks a \"decompositions\" array");
    }
    std::vector<std::vector<std::string>> sets;
    for (const auto& set : *it) {
        std::vector<std::string> sentences;
        bool ok = set.is_array();
        if (ok) {
            for (const auto& s : set) {
                if (!s.is_string()) {
                    ok = false;
                    break;
                }
                sentences.push_back(s.get<std::string>());
            }
        }
        // Off-shape sets survive as empty so the caller can report them by position.
        sets.push_back(ok ? std::move(sentences) : std::vector<std::string>{});
    }
    return sets;
}

RemoteLinker::RemoteLinker(std::shared_ptr<Transport> transport, std::string op, int retries)
    : transport_(std::move(transport)), op_(std::move(op)), retries_(retries)
{}

std::vector<std::string> RemoteLinker::link(std::string_view text, std::size_t k)
{
    return parse_titles_response(remote_call(*transport_, make_link_request(op_, text, k), retries_));
}

RemoteDecomposer::RemoteDecomposer(std::shared_ptr<Transport> transport, int retries)
    : transport_(std::move(transport)), retries_(retries)
{}

std::vector<std::vector<std::string>> RemoteDecomposer::decompose(std::string_view query, std::size_t sets,
                                                                  std::size_t sentences_per_set)
{
    return parse_decompositions_response(
        remote_call(*transport_, make_decompose_request(query, sets, sentences_per_set), retries_));
}

RemoteCorrector::RemoteCorrector(std::shared_ptr<Transport> transport, int retries)
    : transport_(std::move(transport)), retries_(retries)
{}

std::vector<std::vector<std::string>> RemoteCorrector::correct(std::string_view query,
                                                               const std::vector<std::vector<std::string>>& decompositions)
{
    return parse_decompositions_response(
        remote_call(*transport_, make_correct_request(query, decompositions), retries_));
}

// --- built-in fallbacks -----------------------------------------------------

LexicalLinker::LexicalLinker(std::vector<std::string> titles) : titles_(std::move(titles))
{
    std::sort(titles_.begin(), titles_.end());
    titles_.erase(std::unique(titles_.begin(), titles_.end()), titles_.end());
    title_token_count_.resize(titles_.size());
    for (std::size_t i = 0; i < titles_.size(); ++i) {
        auto toks = text::tokenize(titles_[i]);
        std::sort(toks.begin(), toks.end());
        toks.erase(std::unique(toks.begin(), toks.end()), toks.end());
        title_token_count_[i] = toks.size();
        for (auto& t : toks) {
            token_to_titles_[std::move(t)].push_back(static_cast<std::uint32_t>(i));
        }
    }
}

std::vector<std::string> LexicalLinker::link(std::string_view text, std::size_t k)
{
    auto toks = text::tokenize(text);
    std::sort(toks.begin(), toks.end());
    toks.erase(std::unique(toks.begin(), toks.end()), toks.end());

    std::unordered_map<std::uint32_t, std::size_t> matched;
    for (const auto& t : toks) {
        auto it = token_to_titles_.find(t);
        if (it == token_to_titles_.end()) {
            continue;
        }
        for (auto id : it->second) {
            ++matched[id];
        }
    }
    std::vector<std::pair<double, std::uint32_t>> scored;
    scored.reserve(matched.size());
    for (const auto& [id, count] : matched) {
        scored.emplace_back(static_cast<double>(count) / static_cast<double>(title_token_count_[id]), id);
    }
    auto better = [](const auto& a, const auto& b) { return a.first != b.first ? a.first > b.first : a.second < b.second; };
    if (scored.size() > k) {
        std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k), scored.end(), better);
        scored.resize(k);
    } else {
        std::sort(scored.begin(), scored.end(), better);
    }
    std::vector<std::string> out;
    out.reserve(scored.size());
    for (const auto& [s, id] : scored) {
        out.push_back(titles_[id]);
    }
    return out;
}

std::vector<std::string> fallback_lexical_linker(std::string_view text, std::size_t k,
                                                 std::span<const std::string> title_dictionary)
{
    LexicalLinker linker(std::vector<std::string>(title_dictionary.begin(), title_dictionary.end()));
    return linker.link(text, k);
}

std::vector<std::vector<std::string>> HeuristicDecomposer::decompose(std::string_view query, std::size_t sets,
                                                                     std::size_t sentences_per_set)
{
    auto is_punct = [](char c) {
        auto u = static_cast<unsigned char>(c);
        return u < 0x80 && !std::isalnum(u);
    };
    std::vector<std::string> content;
    for (auto w : text::split_words(query)) {
        while (!w.empty() && is_punct(w.front())) w.remove_prefix(1);
        while (!w.empty() && is_punct(w.back())) w.remove_suffix(1);
        if (!w.empty() && !text::is_stopword(text::to_lower_ascii(w))) {
            content.emplace_back(w);
        }
    }
    if (content.empty()) {
        content.push_back(text::trim(query));
    }
    const std::size_t m = content.size();
    const std::size_t window = std::max<std::size_t>(1, (m + sentences_per_set - 1) / std::max<std::size_t>(1, sentences_per_set));

    std::vector<std::vector<std::string>> out(sets);
    for (std::size_t i = 0; i < sets; ++i) {
        const std::size_t len = std::min(m, window + (i % 2));
        for (std::size_t j = 0; j < sentences_per_set; ++j) {
            std::size_t start = (j * window + i) % m;
            std::string sentence;
            for (std::size_t w = 0; w < len; ++w) {
                if (w > 0) sentence.push_back(' ');
                sentence += content[(start + w) % m];
            }
            out[i].push_back(std::move(sentence));
        }
    }
    return out;
}

// --- title generation -------------------------------------------------------

void TitleGenerationConfig::validate() const
{
    if (n_entity == 0 || n_event == 0 || n_sets == 0 || n_sentences == 0) {
        throw std::invalid_argument("title generation counts must be positive");
    }
}

TitleGenerator::TitleGenerator(TitleProviders providers, TitleGenerationConfig config)
    : providers_(std::move(providers)), config_(config)
{
    config_.validate();
}

std::vector<TitleCandidate> TitleGenerator::link_with(LinkerBackend* linker, std::string_view text, std::size_t k,
                                                      TitleSource source, Warnings& warnings) const
{
    const auto label = std::string(to_string(source));
    if (linker == nullptr) {
        warnings.push_back(label + ": no linker configured");
        return {};
    }
    std::vector<std::string> raw;
    try {
        raw = linker->link(text, k);
    } catch (const std::exception& e) {
        warnings.push_back(label + " degraded (" + linker->describe() + "): " + e.what());
        return {};
    }
    std::vector<TitleCandidate> out;
    std::size_t dropped = 0;
    for (auto& t : raw) {
        auto title = text::trim(t);
        if (title.empty()) {
            ++dropped;
            continue;
        }
        if (out.size() == k) {
            warnings.push_back(label + ": provider returned " + std::to_string(raw.size()) + " titles, truncated to " +
                               std::to_string(k));
            break;
        }
        TitleCandidate c;
        c.title = std::move(title);
        c.source = source;
        if (source == TitleSource::event_link_decomposition) {
            c.origin_sentence = std::string(text);
        }
        c.rank = static_cast<int>(out.size()) + 1;
        out.push_back(std::move(c));
    }
    if (dropped > 0) {
        warnings.push_back(label + ": dropped " + std::to_string(dropped) + " empty title(s)");
    }
    return out;
}

std::vector<TitleCandidate> TitleGenerator::entity_link(std::string_view query, Warnings& warnings) const
{
    if (text::trim(query).empty()) {
        throw std::invalid_argument("entity_link: query must be non-empty");
    }
    return link_with(providers_.entity_linker.get(), query, config_.n_entity, TitleSource::entity_link_query, warnings);
}

std::vector<TitleCandidate> TitleGenerator::event_link(std::string_view text, TitleSource source,
                                                       Warnings& warnings) const
{
    if (text::trim(text).empty()) {
        throw std::invalid_argument("event_link: text must be non-empty");
    }
    if (source == TitleSource::entity_link_query) {
        throw std::invalid_argument("event_link: source must be an event source");
    }
    return link_with(providers_.event_linker.get(), text, config_.n_event, source, warnings);
}

std::vector<Decomposition> TitleGenerator::decompose(std::string_view query, Warnings& warnings) const
{
    if (text::trim(query).empty()) {
        throw std::invalid_argument("decompose: query must be non-empty");
    }
    if (!providers_.decomposer) {
        warnings.push_back("decompose: no decomposer configured");
        return {};
    }
    std::vector<std::vector<std::string>> raw;
    try {
        raw = providers_.decomposer->decompose(query, config_.n_sets, config_.n_sentences);
    } catch (const std::exception& e) {
        warnings.push_back("decompose degraded (" + providers_.decomposer->describe() + "): " + e.what());
        return {};
    }
    if (raw.size() > config_.n_sets) {
        warnings.push_back("decompose: provider returned " + std::to_string(raw.size()) + " sets, truncated to " +
                           std::to_string(config_.n_sets));
        raw.resize(config_.n_sets);
    }
    std::vector<Decomposition> out;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        Decomposition d{i, {}};
        for (const auto& s : raw[i]) {
            d.sentences.push_back(text::trim(s));
        }
        bool ok = d.sentences.size() == config_.n_sentences &&
                  std::none_of(d.sentences.begin(), d.sentences.end(), [](const auto& s) { return s.empty(); });
        if (!ok) {
            warnings.push_back("decompose: set " + std::to_string(i) + " has " + std::to_string(raw[i].size()) +
                               " sentence(s) (expected " + std::to_string(config_.n_sentences) + " non-empty); dropped");
            continue;
        }
        out.push_back(std::move(d));
    }
    if (out.size() < config_.n_sets) {
        warnings.push_back("decompose: shortfall, " + std::to_string(out.size()) + " of " +
                           std::to_string(config_.n_sets) + " sets usable");
    }
    return out;
}

std::vector<Decomposition> TitleGenerator::correct_decompositions(std::string_view query,
                                                                  const std::vector<Decomposition>& decompositions,
                                                                  Warnings& warnings) const
{
    if (!providers_.corrector || decompositions.empty()) {
        return decompositions;
    }
    std::vector<std::vector<std::string>> fixed;
    try {
        fixed = providers_.corrector->correct(query, to_raw(decompositions));
    } catch (const std::exception& e) {
        warnings.push_back("correct degraded (" + providers_.corrector->describe() + "): " + e.what() +
                           "; decompositions left unchanged");
        return decompositions;
    }
    if (fixed.size() != decompositions.size()) {
        warnings.push_back("correct: provider returned " + std::to_string(fixed.size()) + " sets for " +
                           std::to_string(decompositions.size()) + "; decompositions left unchanged");
        return decompositions;
    }
    std::vector<Decomposition> out;
    out.reserve(decompositions.size());
    for (std::size_t i = 0; i < fixed.size(); ++i) {
        Decomposition d{decompositions[i].set_index, {}};
        for (const auto& s : fixed[i]) {
            d.sentences.push_back(text::trim(s));
        }
        bool ok = d.sentences.size() == decompositions[i].sentences.size() &&
                  std::none_of(d.sentences.begin(), d.sentences.end(), [](const auto& s) { return s.empty(); });
        if (!ok) {
            warnings.push_back("correct: set " + std::to_string(decompositions[i].set_index) + " came back with " +
                               std::to_string(fixed[i].size()) + " sentence(s); original retained");
            out.push_back(decompositions[i]);
        } else {
            out.push_back(std::move(d));
        }
    }
    return out;
}

TitleGenerationResult TitleGenerator::generate(std::string_view query, Warnings& warnings) const
{
    if (text::trim(query).empty()) {
        throw std::invalid_argument("generate_titles: query must be non-empty");
    }
    TitleGenerationResult result;
    std::vector<TitleCandidate> all = entity_link(query, warnings);
    auto query_events = event_link(query, TitleSource::event_link_query, warnings);
    all.insert(all.end(), query_events.begin(), query_events.end());

    result.generated = decompose(query, warnings);
    result.corrected = config_.corrector_enabled ? correct_decompositions(query, result.generated, warnings)
                                                 : result.generated;

    std::vector<const std::string*> sentences;
    for (const auto& d : result.corrected) {
        for (const auto& s : d.sentences) {
            sentences.push_back(&s);
        }
    }
    std::vector<std::vector<TitleCandidate>> per_sentence(sentences.size());
    std::vector<Warnings> per_warnings(sentences.size());
    auto link_one = [&](std::size_t i) {
        per_sentence[i] = link_with(providers_.event_linker.get(), *sentences[i], config_.n_event,
                                    TitleSource::event_link_decomposition, per_warnings[i]);
    };
    if (config_.link_parallelism <= 1) {
        for (std::size_t i = 0; i < sentences.size(); ++i) {
            link_one(i);
        }
    } else {
        for (std::size_t first = 0; first < sentences.size(); first += config_.link_parallelism) {
            std::vector<std::future<void>> batch;
            auto last = std::min(sentences.size(), first + config_.link_parallelism);
            for (std::size_t i = first; i < last; ++i) {
                batch.push_back(std::async(std::launch::async, link_one, i));
            }
            for (auto& f : batch) {
                f.get();
            }
        }
    }
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        all.insert(all.end(), per_sentence[i].begin(), per_sentence[i].end());
        warnings.insert(warnings.end(), per_warnings[i].begin(), per_warnings[i].end());
    }
    result.titles = TitleSet::from_candidates(std::move(all));
    return result;
}

// --- JSON -------------------------------------------------------------------

json to_json(const TitleCandidate& c)
{
    json j{{"title", c.title}, {"source", to_string(c.source)}, {"rank", c.rank}};
    if (c.origin_sentence) {
        j["origin_sentence"] = *c.origin_sentence;
    }
    return j;
}

TitleCandidate title_candidate_from_json(const json& j)
{
    TitleCandidate c;
    c.title = j.at("title").get<std::string>();
    c.source = title_source_from_string(j.at("source").get<std::string>());
    c.rank = j.at("rank").get<int>();
    if (auto it = j.find("origin_sentence"); it != j.end() && it->is_string()) {
        c.origin_sentence = it->get<std::string>();
    }
    return c;
}

json to_json(const Decomposition& d)
{
    return {{"set", d.set_index}, {"sentences", d.sentences}};
}

Decomposition decomposition_from_json(const json& j)
{
    return {j.at("set").get<std::size_t>(), j.at("sentences").get<std::vector<std::string>>()};
}

}  // namespace elr
