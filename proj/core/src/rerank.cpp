#include "elr/rerank.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "elr/text.hpp"

namespace elr {

using nlohmann::json;

namespace {

std::vector<std::string> content_tokens(std::string_view s)
{
    auto toks = text::tokenize(s, {.stem = false, .remove_stopwords = true});
    std::sort(toks.begin(), toks.end());
    toks.erase(std::unique(toks.begin(), toks.end()), toks.end());
    return toks;
}

}  // namespace

double LexicalScorer::score(std::string_view question, std::string_view context)
{
    auto q = content_tokens(question);
    if (q.empty()) {
        return 0.0;
    }
    auto c = content_tokens(context);
    std::size_t shared = 0;
    for (const auto& t : q) {
        if (std::binary_search(c.begin(), c.end(), t)) {
            ++shared;
        }
    }
    return static_cast<double>(shared) / static_cast<double>(q.size());
}

std::vector<double> LexicalScorer::score_batch(std::span<const ScorerRequest> batch, Warnings&)
{
    std::vector<double> out;
    out.reserve(batch.size());
    for (const auto& r : batch) {
        out.push_back(score(r.question, r.context));
    }
    return out;
}

json make_score_request(std::span<const ScorerRequest> batch)
{
    json pairs = json::array();
    for (const auto& r : batch) {
        pairs.push_back({{"q", r.question}, {"c", r.context}});
    }
    return {{"op", "score"}, {"pairs", std::move(pairs)}};
}

std::vector<double> parse_score_response(const json& response, std::size_t expected)
{
    if (!response.is_object()) {
        throw ProviderError("score response is not a JSON object");
    }
    if (auto it = response.find("error"); it != response.end()) {
        throw ProviderError("provider error: " + (it->is_string() ? it->get<std::string>() : it->dump()));
    }
    auto it = response.find("scores");
    if (it == response.end() || !it->is_array()) {
        throw ProviderError("score response lacks a \"scores\" array");
    }
    if (it->size() != expected) {
        throw ProviderError("score response has " + std::to_string(it->size()) + " scores for " +
                            std::to_string(expected) + " pairs");
    }
    std::vector<double> out;
    out.reserve(expected);
    for (const auto& v : *it) {
        if (!v.is_number()) {
            throw ProviderError("score response contains a non-numeric score");
        }
        auto d = v.get<double>();
        if (!std::isfinite(d) || d < 0.0 || d > 1.0) {
            throw ProviderError("score outside [0, 1]: " + v.dump());
        }
        out.push_back(d);
    }
    return out;
}

RemoteScorer::RemoteScorer(std::shared_ptr<Transport> transport, std::shared_ptr<RelevanceScorer> fallback,
                           int retries, std::size_t batch_size)
    : transport_(std::move(transport)),
      fallback_(fallback ? std::move(fallback) : std::make_shared<LexicalScorer>()),
      retries_(retries),
      batch_size_(std::max<std::size_t>(1, batch_size))
{}

std::vector<double> RemoteScorer::score_batch(std::span<const ScorerRequest> batch, Warnings& warnings)
{
    std::vector<double> out;
    out.reserve(batch.size());
    for (std::size_t first = 0; first < batch.size(); first += batch_size_) {
        auto chunk = batch.subspan(first, std::min(batch_size_, batch.size() - first));
        try {
            json response;
            try {
                response = call_with_retries(*transport_, make_score_request(chunk), retries_);
            } catch (const TransportError& e) {
                throw ProviderError(e.what());
            }
            auto scores = parse_score_response(response, chunk.size());
            out.insert(out.end(), scores.begin(), scores.end());
        } catch (const ProviderError& e) {
            warnings.push_back("score degraded (" + describe() + "): " + e.what() + "; " +
                               std::to_string(chunk.size()) + " pair(s) scored by " + fallback_->describe());
            auto scores = fallback_->score_batch(chunk, warnings);
            out.insert(out.end(), scores.begin(), scores.end());
        }
    }
    return out;
}

double score_pair(const ScorerRequest& request, RelevanceScorer& scorer, Warnings& warnings)
{
    if (request.question.empty() || request.context.empty()) {
        throw std::invalid_argument("score_pair: question and context must be non-empty");
    }
    auto scores = scorer.score_batch(std::span(&request, 1), warnings);
    if (scores.size() != 1) {
        throw std::logic_error("scorer returned the wrong number of scores");
    }
    return scores.front();
}

std::vector<RankedPassage> rerank(std::string_view question, std::span<const ScoredPassage> candidates,
                                  const PassageStore& store, RelevanceScorer& scorer, std::size_t top_k,
                                  Warnings& warnings)
{
    if (candidates.empty() || top_k == 0) {
        return {};
    }
    std::vector<ScorerRequest> requests;
    requests.reserve(candidates.size());
    for (const auto& c : candidates) {
        requests.push_back({question, store.at(c.ordinal).text});
    }
    auto scores = scorer.score_batch(requests, warnings);
    if (scores.size() != candidates.size()) {
        throw std::logic_error("scorer " + scorer.describe() + " returned " + std::to_string(scores.size()) +
                               " scores for " + std::to_string(candidates.size()) + " candidates");
    }

    std::vector<std::size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
        if (scores[a] != scores[b]) {
            return scores[a] > scores[b];
        }
        if (candidates[a].bm25_score != candidates[b].bm25_score) {
            return candidates[a].bm25_score > candidates[b].bm25_score;
        }
        return candidates[a].passage_id < candidates[b].passage_id;
    });
    order.resize(std::min(top_k, order.size()));

    std::vector<RankedPassage> out;
    out.reserve(order.size());
    for (auto i : order) {
        const auto& p = store.at(candidates[i].ordinal);
        RankedPassage r;
        r.ordinal = candidates[i].ordinal;
        r.passage_id = p.passage_id;
        r.page_title = p.page_title;
        r.text = p.text;
        r.bm25_score = candidates[i].bm25_score;
        r.relevance_score = scores[i];
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace elr
