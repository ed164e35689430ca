#include "elr/index.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <thread>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace elr {

using nlohmann::json;
namespace fs = std::filesystem;

void Bm25Params::validate() const
{
    if (!(k1 >= 0.0) || !std::isfinite(k1)) {
        throw std::invalid_argument("bm25 k1 must be >= 0");
    }
    if (!(b >= 0.0 && b <= 1.0)) {
        throw std::invalid_argument("bm25 b must be in [0, 1]");
    }
}

double bm25_idf(std::uint64_t passage_count, std::uint64_t df)
{
    auto n = static_cast<double>(passage_count);
    auto d = static_cast<double>(df);
    return std::log(1.0 + (n - d + 0.5) / (d + 0.5));
}

double bm25_term_score(double idf, double tf, double doc_len, double avg_doc_len, const Bm25Params& params)
{
    double norm = params.k1 * (1.0 - params.b + params.b * doc_len / avg_doc_len);
    return idf * tf * (params.k1 + 1.0) / (tf + norm);
}

namespace {

void put_u32(std::ostream& out, std::uint32_t v)
{
    char buf[4] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                   static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
    out.write(buf, 4);
}

std::vector<std::uint32_t> read_u32_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IndexError("cannot open " + path.string());
    }
    std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (raw.size() % 4 != 0) {
        throw IndexError("truncated binary file " + path.string());
    }
    std::vector<std::uint32_t> out(raw.size() / 4);
    for (std::size_t i = 0; i < out.size(); ++i) {
        auto b = [&](std::size_t k) { return static_cast<std::uint32_t>(static_cast<unsigned char>(raw[4 * i + k])); };
        out[i] = b(0) | (b(1) << 8) | (b(2) << 16) | (b(3) << 24);
    }
    return out;
}

std::ofstream open_out(const fs::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IndexError("cannot write " + path.string());
    }
    return out;
}

void check_written(std::ofstream& out, const fs::path& path)
{
    out.flush();
    if (!out) {
        throw IndexError("I/O error writing " + path.string());
    }
}

}  // namespace

InvertedIndex InvertedIndex::build(std::shared_ptr<const PassageStore> store, const IndexOptions& options,
                                   unsigned jobs)
{
    if (!store) {
        throw IndexError("build_index: no passage store");
    }
    options.bm25.validate();
    const auto passages = store->passages();
    const std::size_t n = passages.size();

    // Tokenize each passage into sorted (term, tf) runs.
    std::vector<std::vector<std::pair<std::string, std::uint32_t>>> per_doc(n);
    std::vector<std::uint32_t> lens(n);
    auto work = [&](std::size_t first, std::size_t step) {
        for (std::size_t i = first; i < n; i += step) {
            auto toks = text::tokenize(passages[i].text, options.tokenizer);
            lens[i] = static_cast<std::uint32_t>(toks.size());
            std::sort(toks.begin(), toks.end());
            auto& out = per_doc[i];
            for (std::size_t j = 0; j < toks.size();) {
                std::size_t k = j;
                while (k < toks.size() && toks[k] == toks[j]) {
                    ++k;
                }
                out.emplace_back(std::move(toks[j]), static_cast<std::uint32_t>(k - j));
                j = k;
            }
        }
    };
    jobs = std::max(1U, jobs);
    if (jobs == 1 || n < 1024) {
        work(0, 1);
    } else {
        std::vector<std::jthread> workers;
        for (unsigned w = 0; w < jobs; ++w) {
            workers.emplace_back(work, w, jobs);
        }
    }

    InvertedIndex idx;
    idx.store_ = std::move(store);
    idx.options_ = options;
    idx.doc_len_ = std::move(lens);

    std::map<std::string_view, std::uint32_t> df;
    for (const auto& doc : per_doc) {
        for (const auto& [term, tf] : doc) {
            ++df[term];
        }
    }
    idx.terms_.reserve(df.size());
    idx.posting_offsets_.reserve(df.size() + 1);
    idx.posting_offsets_.push_back(0);
    std::unordered_map<std::string_view, std::uint32_t> ids;
    for (const auto& [term, count] : df) {
        ids.emplace(term, static_cast<std::uint32_t>(idx.terms_.size()));
        idx.terms_.emplace_back(term);
        idx.posting_offsets_.push_back(idx.posting_offsets_.back() + count);
    }
    idx.posting_docs_.resize(idx.posting_offsets_.back());
    idx.posting_tfs_.resize(idx.posting_offsets_.back());
    std::vector<std::uint64_t> cursor(idx.posting_offsets_.begin(), idx.posting_offsets_.end() - 1);
    for (std::size_t d = 0; d < n; ++d) {
        for (const auto& [term, tf] : per_doc[d]) {
            auto& c = cursor[ids.at(term)];
            idx.posting_docs_[c] = static_cast<std::uint32_t>(d);
            idx.posting_tfs_[c] = tf;
            ++c;
        }
    }
    idx.finalize();
    return idx;
}

void InvertedIndex::finalize()
{
    const std::size_t n = store_->size();
    if (doc_len_.size() != n) {
        throw IndexError("document length table does not match passage store");
    }
    stats_ = {};
    stats_.passage_count = n;
    for (auto l : doc_len_) {
        stats_.total_tokens += l;
    }
    stats_.avg_passage_length = n > 0 ? static_cast<double>(stats_.total_tokens) / static_cast<double>(n) : 0.0;
    stats_.term_count = terms_.size();
    stats_.posting_count = posting_docs_.size();

    term_ids_.clear();
    term_ids_.reserve(terms_.size());
    for (std::size_t t = 0; t < terms_.size(); ++t) {
        term_ids_.emplace(terms_[t], static_cast<std::uint32_t>(t));
    }

    forward_offsets_.assign(n + 1, 0);
    for (auto d : posting_docs_) {
        ++forward_offsets_[d + 1];
    }
    for (std::size_t d = 0; d < n; ++d) {
        forward_offsets_[d + 1] += forward_offsets_[d];
    }
    forward_terms_.resize(posting_docs_.size());
    forward_tfs_.resize(posting_docs_.size());
    std::vector<std::uint64_t> cursor(forward_offsets_.begin(), forward_offsets_.end() - 1);
    for (std::size_t t = 0; t < terms_.size(); ++t) {
        for (auto p = posting_offsets_[t]; p < posting_offsets_[t + 1]; ++p) {
            auto d = posting_docs_[p];
            forward_terms_[cursor[d]] = static_cast<std::uint32_t>(t);
            forward_tfs_[cursor[d]] = posting_tfs_[p];
            ++cursor[d];
        }
    }

    const auto passages = store_->passages();
    by_id_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        by_id_[i] = static_cast<std::uint32_t>(i);
    }
    std::sort(by_id_.begin(), by_id_.end(),
              [&](auto a, auto b) { return passages[a].passage_id < passages[b].passage_id; });
    id_rank_.resize(n);
    for (std::size_t r = 0; r < n; ++r) {
        id_rank_[by_id_[r]] = static_cast<std::uint32_t>(r);
    }
}

std::vector<std::string> InvertedIndex::analyze(std::string_view text) const
{
    return text::tokenize(text, options_.tokenizer);
}

std::optional<std::uint32_t> InvertedIndex::term_id(std::string_view term) const
{
    auto it = term_ids_.find(std::string(term));
    if (it == term_ids_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::uint32_t InvertedIndex::df(std::string_view term) const
{
    auto id = term_id(term);
    return id ? static_cast<std::uint32_t>(posting_offsets_[*id + 1] - posting_offsets_[*id]) : 0;
}

std::uint32_t InvertedIndex::term_frequency(std::string_view term, std::uint32_t ordinal) const
{
    auto id = term_id(term);
    if (!id) {
        return 0;
    }
    auto first = forward_terms_.begin() + static_cast<std::ptrdiff_t>(forward_offsets_[ordinal]);
    auto last = forward_terms_.begin() + static_cast<std::ptrdiff_t>(forward_offsets_[ordinal + 1]);
    auto it = std::lower_bound(first, last, *id);
    if (it == last || *it != *id) {
        return 0;
    }
    return forward_tfs_[static_cast<std::size_t>(it - forward_terms_.begin())];
}

std::vector<InvertedIndex::QueryTerm> InvertedIndex::resolve(std::span<const std::string> terms) const
{
    std::vector<QueryTerm> out;
    std::unordered_set<std::uint32_t> seen;
    for (const auto& t : terms) {
        auto id = term_id(t);
        if (!id || !seen.insert(*id).second) {
            continue;
        }
        auto dfv = posting_offsets_[*id + 1] - posting_offsets_[*id];
        out.push_back({*id, bm25_idf(stats_.passage_count, dfv)});
    }
    return out;
}

double InvertedIndex::score_resolved(std::span<const QueryTerm> terms, std::uint32_t ordinal) const
{
    double s = 0.0;
    auto first = forward_terms_.begin() + static_cast<std::ptrdiff_t>(forward_offsets_[ordinal]);
    auto last = forward_terms_.begin() + static_cast<std::ptrdiff_t>(forward_offsets_[ordinal + 1]);
    const double dl = doc_len_[ordinal];
    for (const auto& qt : terms) {
        auto it = std::lower_bound(first, last, qt.term_id);
        if (it == last || *it != qt.term_id) {
            continue;
        }
        double tf = forward_tfs_[static_cast<std::size_t>(it - forward_terms_.begin())];
        s += bm25_term_score(qt.idf, tf, dl, stats_.avg_passage_length, options_.bm25);
    }
    return s;
}

double InvertedIndex::score(std::span<const std::string> query_terms, std::uint32_t ordinal) const
{
    if (ordinal >= store_->size()) {
        throw std::out_of_range("passage ordinal out of range");
    }
    auto resolved = resolve(query_terms);
    return score_resolved(resolved, ordinal);
}

std::vector<ScoredPassage> InvertedIndex::top_k(std::string_view query, std::size_t k,
                                                std::optional<std::span<const std::string>> restrict_titles) const
{
    if (k == 0) {
        throw std::invalid_argument("top_k: k must be >= 1");
    }
    if (store_->empty()) {
        return {};
    }
    const auto analyzed = analyze(query);
    const auto terms = resolve(analyzed);
    const std::size_t n = store_->size();

    std::vector<std::uint32_t> pool;  // eligible ordinals when restricted
    if (restrict_titles) {
        std::unordered_set<std::string_view> seen;
        for (const auto& t : *restrict_titles) {
            if (!seen.insert(t).second) {
                continue;
            }
            auto [first, last] = store_->range_of(t);
            for (auto o = first; o < last; ++o) {
                pool.push_back(o);
            }
        }
        if (pool.empty()) {
            return {};
        }
        std::sort(pool.begin(), pool.end());
    }

    std::vector<std::pair<double, std::uint32_t>> hits;
    if (restrict_titles) {
        std::uint64_t postings_cost = 0;
        for (const auto& qt : terms) {
            postings_cost += posting_offsets_[qt.term_id + 1] - posting_offsets_[qt.term_id];
        }
        if (pool.size() * terms.size() <= postings_cost) {
            for (auto o : pool) {
                if (double s = score_resolved(terms, o); s > 0.0) {
                    hits.emplace_back(s, o);
                }
            }
        } else {
            std::unordered_map<std::uint32_t, double> acc;
            for (const auto& qt : terms) {
                for (auto p = posting_offsets_[qt.term_id]; p < posting_offsets_[qt.term_id + 1]; ++p) {
                    auto d = posting_docs_[p];
                    if (!std::binary_search(pool.begin(), pool.end(), d)) {
                        continue;
                    }
                    acc[d] += bm25_term_score(qt.idf, posting_tfs_[p], doc_len_[d], stats_.avg_passage_length,
                                              options_.bm25);
                }
            }
            hits.reserve(acc.size());
            for (const auto& [d, s] : acc) {
                if (s > 0.0) {
                    hits.emplace_back(s, d);
                }
            }
        }
    } else {
        std::vector<double> acc(n, 0.0);
        std::vector<char> touched(n, 0);
        std::vector<std::uint32_t> touched_list;
        for (const auto& qt : terms) {
            for (auto p = posting_offsets_[qt.term_id]; p < posting_offsets_[qt.term_id + 1]; ++p) {
                auto d = posting_docs_[p];
                if (!touched[d]) {
                    touched[d] = 1;
                    touched_list.push_back(d);
                }
                acc[d] += bm25_term_score(qt.idf, posting_tfs_[p], doc_len_[d], stats_.avg_passage_length,
                                          options_.bm25);
            }
        }
        hits.reserve(touched_list.size());
        for (auto d : touched_list) {
            if (acc[d] > 0.0) {
                hits.emplace_back(acc[d], d);
            }
        }
    }

    auto better = [&](const auto& a, const auto& b) {
        if (a.first != b.first) {
            return a.first > b.first;
        }
        return id_rank_[a.second] < id_rank_[b.second];
    };
    if (hits.size() > k) {
        std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(k), hits.end(), better);
        hits.resize(k);
    } else {
        std::sort(hits.begin(), hits.end(), better);
    }

    std::vector<ScoredPassage> out;
    out.reserve(std::min(k, restrict_titles ? pool.size() : n));
    const auto passages = store_->passages();
    for (const auto& [s, o] : hits) {
        out.push_back({o, passages[o].passage_id, s});
    }

    if (out.size() < k) {
        std::unordered_set<std::uint32_t> positive;
        for (const auto& h : hits) {
            positive.insert(h.second);
        }
        if (restrict_titles) {
            std::vector<std::uint32_t> rest;
            for (auto o : pool) {
                if (!positive.contains(o)) {
                    rest.push_back(o);
                }
            }
            std::sort(rest.begin(), rest.end(), [&](auto a, auto b) { return id_rank_[a] < id_rank_[b]; });
            for (auto o : rest) {
                if (out.size() >= k) {
                    break;
                }
                out.push_back({o, passages[o].passage_id, 0.0});
            }
        } else {
            for (auto o : by_id_) {
                if (out.size() >= k) {
                    break;
                }
                if (!positive.contains(o)) {
                    out.push_back({o, passages[o].passage_id, 0.0});
                }
            }
        }
    }
    return out;
}

void InvertedIndex::save(const fs::path& dir) const
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IndexError("cannot create index directory " + dir.string() + ": " + ec.message());
    }

    json manifest{{"format", "elr-index"},
                  {"version", kIndexFormatVersion},
                  {"bm25", {{"k1", options_.bm25.k1}, {"b", options_.bm25.b}}},
                  {"tokenizer", {{"stem", options_.tokenizer.stem}, {"remove_stopwords", options_.tokenizer.remove_stopwords}}},
                  {"corpus_checksum", store_->checksum()},
                  {"passage_count", stats_.passage_count},
                  {"avg_passage_length", stats_.avg_passage_length},
                  {"total_tokens", stats_.total_tokens},
                  {"term_count", stats_.term_count},
                  {"posting_count", stats_.posting_count},
                  {"files", {{"passages", "passages.jsonl"}, {"terms", "terms.tsv"}, {"postings", "postings.bin"}, {"doclens", "doclens.bin"}}}};
    {
        auto path = dir / "manifest.json";
        auto out = open_out(path);
        out << manifest.dump(2) << '\n';
        check_written(out, path);
    }
    {
        auto path = dir / "passages.jsonl";
        auto out = open_out(path);
        store_->write(out);
        check_written(out, path);
    }
    {
        auto path = dir / "terms.tsv";
        auto out = open_out(path);
        for (std::size_t t = 0; t < terms_.size(); ++t) {
            out << terms_[t] << '\t' << (posting_offsets_[t + 1] - posting_offsets_[t]) << '\n';
        }
        check_written(out, path);
    }
    {
        auto path = dir / "postings.bin";
        auto out = open_out(path);
        for (std::size_t p = 0; p < posting_docs_.size(); ++p) {
            put_u32(out, posting_docs_[p]);
            put_u32(out, posting_tfs_[p]);
        }
        check_written(out, path);
    }
    {
        auto path = dir / "doclens.bin";
        auto out = open_out(path);
        for (auto l : doc_len_) {
            put_u32(out, l);
        }
        check_written(out, path);
    }
}

InvertedIndex InvertedIndex::load(const fs::path& dir)
{
    json manifest;
    {
        std::ifstream in(dir / "manifest.json");
        if (!in) {
            throw IndexError("index not found: " + (dir / "manifest.json").string());
        }
        try {
            manifest = json::parse(in);
        } catch (const json::exception& e) {
            throw IndexError("bad index manifest: " + std::string(e.what()));
        }
    }
    if (manifest.value("format", "") != "elr-index" || manifest.value("version", 0) != kIndexFormatVersion) {
        throw IndexError("unsupported index format/version in " + dir.string());
    }

    InvertedIndex idx;
    idx.options_.bm25.k1 = manifest.at("bm25").at("k1").get<double>();
    idx.options_.bm25.b = manifest.at("bm25").at("b").get<double>();
    idx.options_.bm25.validate();
    idx.options_.tokenizer.stem = manifest.at("tokenizer").at("stem").get<bool>();
    idx.options_.tokenizer.remove_stopwords = manifest.at("tokenizer").at("remove_stopwords").get<bool>();

    auto store = std::make_shared<PassageStore>(PassageStore::load(dir / "passages.jsonl"));
    if (store->checksum() != manifest.at("corpus_checksum").get<std::string>()) {
        throw IndexError("corpus checksum in manifest does not match passages.jsonl");
    }
    idx.store_ = std::move(store);

    {
        std::ifstream in(dir / "terms.tsv", std::ios::binary);
        if (!in) {
            throw IndexError("cannot open " + (dir / "terms.tsv").string());
        }
        idx.posting_offsets_.push_back(0);
        std::string line;
        while (std::getline(in, line)) {
            auto tab = line.find('\t');
            if (tab == std::string::npos) {
                throw IndexError("malformed terms.tsv line: " + line);
            }
            idx.terms_.push_back(line.substr(0, tab));
            idx.posting_offsets_.push_back(idx.posting_offsets_.back() + std::stoull(line.substr(tab + 1)));
        }
    }
    auto postings = read_u32_file(dir / "postings.bin");
    if (postings.size() != 2 * idx.posting_offsets_.back()) {
        throw IndexError("postings.bin size does not match terms.tsv");
    }
    idx.posting_docs_.resize(postings.size() / 2);
    idx.posting_tfs_.resize(postings.size() / 2);
    for (std::size_t p = 0; p < idx.posting_docs_.size(); ++p) {
        idx.posting_docs_[p] = postings[2 * p];
        idx.posting_tfs_[p] = postings[2 * p + 1];
        if (idx.posting_docs_[p] >= idx.store_->size()) {
            throw IndexError("posting refers to unknown passage");
        }
    }
    idx.doc_len_ = read_u32_file(dir / "doclens.bin");
    idx.finalize();
    if (idx.stats_.passage_count != manifest.at("passage_count").get<std::uint64_t>() ||
        idx.stats_.total_tokens != manifest.at("total_tokens").get<std::uint64_t>()) {
        throw IndexError("index statistics do not match manifest");
    }
    return idx;
}

}  // namespace elr
