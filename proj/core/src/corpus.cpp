#include "elr/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <thread>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "elr/text.hpp"

namespace elr {

using nlohmann::json;

std::string make_passage_id(std::string_view title, std::uint32_t block_index)
{
    return text::percent_encode(title) + "#" + std::to_string(block_index);
}

std::vector<Passage> chunk_document(const Document& doc, std::size_t words_per_block)
{
    auto words = text::split_words(doc.text);
    std::vector<Passage> out;
    out.reserve((words.size() + words_per_block - 1) / words_per_block);
    for (std::size_t start = 0; start < words.size(); start += words_per_block) {
        auto count = std::min(words_per_block, words.size() - start);
        auto block = static_cast<std::uint32_t>(out.size());
        Passage p;
        p.passage_id = make_passage_id(doc.title, block);
        p.page_title = doc.title;
        p.block_index = block;
        p.text = text::join_words(std::span(words).subspan(start, count));
        p.word_count = static_cast<std::uint32_t>(count);
        out.push_back(std::move(p));
    }
    return out;
}

namespace {

json passage_to_json(const Passage& p)
{
    return json{{"pid", p.passage_id}, {"title", p.page_title}, {"block", p.block_index},
                {"text", p.text}, {"wc", p.word_count}};
}

std::string require_string(const json& obj, const char* field, std::size_t line)
{
    auto it = obj.find(field);
    if (it == obj.end() || !it->is_string()) {
        throw CorpusError(std::string("missing or non-string field '") + field + "'", line);
    }
    return it->get<std::string>();
}

}  // namespace

void PassageStore::finalize()
{
    text::Fnv1a h;
    for (const auto& [title, range] : by_title_) {
        h.update(title);
        h.update_u64(range.second - range.first);
    }
    for (const auto& p : passages_) {
        h.update(p.passage_id);
        h.update(std::string_view("\x1f", 1));
        h.update(p.text);
        h.update(std::string_view("\x1e", 1));
    }
    checksum_ = h.hex();
    stats_.passages = passages_.size();
}

PassageStore PassageStore::from_documents(std::vector<Document> docs, unsigned jobs)
{
    std::unordered_set<std::string_view> ids;
    std::unordered_set<std::string_view> titles;
    for (const auto& d : docs) {
        if (d.title.empty()) {
            throw CorpusError("document '" + d.doc_id + "' has an empty title");
        }
        if (!ids.insert(d.doc_id).second) {
            throw CorpusError("duplicate doc_id: " + d.doc_id);
        }
        if (!titles.insert(d.title).second) {
            throw CorpusError("duplicate title: " + d.title);
        }
    }

    std::vector<std::vector<Passage>> chunks(docs.size());
    jobs = std::max(1U, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(1, docs.size()))));
    if (jobs == 1) {
        for (std::size_t i = 0; i < docs.size(); ++i) {
            chunks[i] = chunk_document(docs[i]);
        }
    } else {
        std::vector<std::jthread> workers;
        for (unsigned w = 0; w < jobs; ++w) {
            workers.emplace_back([&, w] {
                for (std::size_t i = w; i < docs.size(); i += jobs) {
                    chunks[i] = chunk_document(docs[i]);
                }
            });
        }
    }

    // Merge keyed by title so the result does not depend on input order.
    std::vector<std::size_t> order(docs.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return docs[a].title < docs[b].title; });

    PassageStore store;
    std::size_t total = 0;
    for (const auto& c : chunks) {
        total += c.size();
    }
    store.passages_.reserve(total);
    for (auto i : order) {
        auto first = static_cast<std::uint32_t>(store.passages_.size());
        for (auto& p : chunks[i]) {
            store.stats_.words += p.word_count;
            store.passages_.push_back(std::move(p));
        }
        store.by_title_.emplace(docs[i].title,
                                std::pair{first, static_cast<std::uint32_t>(store.passages_.size())});
    }
    store.stats_.documents = docs.size();
    store.finalize();
    return store;
}

bool PassageStore::has_title(std::string_view title) const { return by_title_.find(title) != by_title_.end(); }

std::pair<std::uint32_t, std::uint32_t> PassageStore::range_of(std::string_view title) const
{
    auto it = by_title_.find(title);
    return it == by_title_.end() ? std::pair<std::uint32_t, std::uint32_t>{0, 0} : it->second;
}

std::span<const Passage> PassageStore::passages_of(std::string_view title) const
{
    auto [first, last] = range_of(title);
    return std::span(passages_).subspan(first, last - first);
}

std::vector<std::string> PassageStore::titles() const
{
    std::vector<std::string> out;
    out.reserve(by_title_.size());
    for (const auto& [title, range] : by_title_) {
        out.push_back(title);
    }
    return out;
}

TitleSelection PassageStore::passages_for_titles(std::span<const std::string> titles) const
{
    TitleSelection sel;
    std::unordered_set<std::string_view> seen;
    for (const auto& t : titles) {
        if (!seen.insert(t).second) {
            continue;
        }
        auto it = by_title_.find(t);
        if (it == by_title_.end()) {
            sel.missing.push_back(t);
            continue;
        }
        for (auto o = it->second.first; o < it->second.second; ++o) {
            sel.passages.push_back(o);
        }
    }
    std::sort(sel.passages.begin(), sel.passages.end());
    return sel;
}

void PassageStore::write(std::ostream& out) const
{
    json empty_titles = json::array();
    for (const auto& [title, range] : by_title_) {
        if (range.first == range.second) {
            empty_titles.push_back(title);
        }
    }
    json header{{"format", "elr-passages"},
                {"version", kPassageStoreVersion},
                {"checksum", checksum_},
                {"documents", stats_.documents},
                {"passages", passages_.size()},
                {"words", stats_.words},
                {"empty_titles", std::move(empty_titles)}};
    out << header.dump() << '\n';
    for (const auto& p : passages_) {
        out << passage_to_json(p).dump() << '\n';
    }
}

PassageStore PassageStore::read(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line)) {
        throw CorpusError("passage store is empty (missing header)", 1);
    }
    json header;
    try {
        header = json::parse(line);
    } catch (const json::exception& e) {
        throw CorpusError(std::string("bad store header: ") + e.what(), 1);
    }
    if (header.value("format", "") != "elr-passages" || header.value("version", 0) != kPassageStoreVersion) {
        throw CorpusError("unsupported passage store format/version", 1);
    }

    PassageStore store;
    std::map<std::string, std::vector<Passage>, std::less<>> pages;
    for (const auto& t : header.at("empty_titles")) {
        pages.emplace(t.get<std::string>(), std::vector<Passage>{});
    }
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        try {
            auto j = json::parse(line);
            Passage p;
            p.passage_id = j.at("pid").get<std::string>();
            p.page_title = j.at("title").get<std::string>();
            p.block_index = j.at("block").get<std::uint32_t>();
            p.text = j.at("text").get<std::string>();
            p.word_count = j.at("wc").get<std::uint32_t>();
            pages[p.page_title].push_back(std::move(p));
        } catch (const json::exception& e) {
            throw CorpusError(std::string("bad passage record: ") + e.what(), lineno);
        }
    }
    for (auto& [title, list] : pages) {
        auto first = static_cast<std::uint32_t>(store.passages_.size());
        for (std::size_t i = 0; i < list.size(); ++i) {
            if (list[i].block_index != i) {
                throw CorpusError("non-contiguous blocks for title: " + title);
            }
            store.passages_.push_back(std::move(list[i]));
        }
        store.by_title_.emplace(title, std::pair{first, static_cast<std::uint32_t>(store.passages_.size())});
    }
    store.stats_.documents = header.value("documents", store.by_title_.size());
    store.stats_.words = header.value("words", std::size_t{0});
    store.finalize();
    if (store.checksum_ != header.value("checksum", "")) {
        throw CorpusError("passage store checksum mismatch (expected " + header.value("checksum", "") +
                          ", computed " + store.checksum_ + ")");
    }
    return store;
}

void PassageStore::save(const std::filesystem::path& path) const
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write passage store: " + path.string());
    }
    write(out);
    if (!out) {
        throw std::runtime_error("I/O error writing passage store: " + path.string());
    }
}

PassageStore PassageStore::load(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open passage store: " + path.string());
    }
    return read(in);
}

PassageStore ingest_corpus(std::istream& in, unsigned jobs)
{
    std::vector<Document> docs;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (text::split_words(line).empty()) {
            continue;
        }
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw CorpusError(std::string("malformed JSON record: ") + e.what(), lineno);
        }
        if (!j.is_object()) {
            throw CorpusError("record is not a JSON object", lineno);
        }
        Document d{require_string(j, "id", lineno), require_string(j, "title", lineno),
                   require_string(j, "text", lineno)};
        if (d.title.empty()) {
            throw CorpusError("empty title", lineno);
        }
        docs.push_back(std::move(d));
    }
    return PassageStore::from_documents(std::move(docs), jobs);
}

PassageStore ingest_corpus_file(const std::filesystem::path& path, unsigned jobs)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open corpus: " + path.string());
    }
    return ingest_corpus(in, jobs);
}

}  // namespace elr
