#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "elr/corpus.hpp"
#include "elr/index.hpp"

namespace test {

inline std::filesystem::path fixture(const std::string& rel) { return std::filesystem::path(ELR_FIXTURE_DIR) / rel; }

inline std::string read_file(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
  public:
    TempDir()
    {
        static std::mt19937_64 rng(std::random_device{}());
        path_ = std::filesystem::temp_directory_path() / ("elr-test-" + std::to_string(rng()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    [[nodiscard]] const std::filesystem::path& path() const { return path_; }
    [[nodiscard]] std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

  private:
    std::filesystem::path path_;
};

inline std::shared_ptr<const elr::PassageStore> make_store(const std::vector<std::pair<std::string, std::string>>& pages)
{
    std::vector<elr::Document> docs;
    for (std::size_t i = 0; i < pages.size(); ++i) {
        docs.push_back({"d" + std::to_string(i), pages[i].first, pages[i].second});
    }
    return std::make_shared<const elr::PassageStore>(elr::PassageStore::from_documents(std::move(docs)));
}

inline std::shared_ptr<const elr::InvertedIndex> make_index(const std::vector<std::pair<std::string, std::string>>& pages,
                                                            const elr::IndexOptions& options = {})
{
    return std::make_shared<const elr::InvertedIndex>(elr::InvertedIndex::build(make_store(pages), options));
}

inline std::shared_ptr<const elr::InvertedIndex> mini_wiki_index()
{
    auto store = std::make_shared<const elr::PassageStore>(elr::ingest_corpus_file(fixture("corpus/mini_wiki.jsonl")));
    return std::make_shared<const elr::InvertedIndex>(elr::InvertedIndex::build(store));
}

inline std::string words(std::size_t n, const std::string& stem = "w")
{
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
        if (i) out += ' ';
        out += stem + std::to_string(i);
    }
    return out;
}

}  // namespace test
