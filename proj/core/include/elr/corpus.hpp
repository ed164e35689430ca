#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace elr {

inline constexpr std::size_t kWordsPerPassage = 100;
inline constexpr int kPassageStoreVersion = 1;

struct Document {
    std::string doc_id;
    std::string title;
    std::string text;
};

/// A block of at most 100 whitespace-delimited words from one page.
struct Passage {
    std::string passage_id;
    std::string page_title;
    std::uint32_t block_index = 0;
    std::string text;  // words joined by single spaces
    std::uint32_t word_count = 0;

    friend bool operator==(const Passage&, const Passage&) = default;
};

/// Thrown for malformed corpus or store input. `line()` is 1-based, 0 when
/// the error is not tied to a line.
class CorpusError : public std::runtime_error {
  public:
    CorpusError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line)
    {}
    [[nodiscard]] std::size_t line() const noexcept { return line_; }

  private:
    std::size_t line_;
};

/// `<percent-encoded title>#<block>`
std::string make_passage_id(std::string_view title, std::uint32_t block_index);

std::vector<Passage> chunk_document(const Document& doc, std::size_t words_per_block = kWordsPerPassage);

struct IngestStats {
    std::size_t documents = 0;
    std::size_t passages = 0;
    std::size_t words = 0;
};

struct TitleSelection {
    std::vector<std::uint32_t> passages;  // store ordinals, ascending
    std::vector<std::string> missing;     // requested titles absent from the store
};

/// Immutable after construction. Passages are ordered by (title, block).
class PassageStore {
  public:
    PassageStore() = default;

    /// Throws CorpusError on a duplicate doc_id or title, or an empty title.
    static PassageStore from_documents(std::vector<Document> docs, unsigned jobs = 1);

    [[nodiscard]] std::span<const Passage> passages() const { return passages_; }
    [[nodiscard]] const Passage& at(std::uint32_t ordinal) const { return passages_.at(ordinal); }
    [[nodiscard]] std::size_t size() const { return passages_.size(); }
    [[nodiscard]] bool empty() const { return passages_.empty(); }

    [[nodiscard]] bool has_title(std::string_view title) const;
    /// Ordinals [first, last) of the page's passages; empty range for unknown titles.
    [[nodiscard]] std::pair<std::uint32_t, std::uint32_t> range_of(std::string_view title) const;
    [[nodiscard]] std::span<const Passage> passages_of(std::string_view title) const;
    [[nodiscard]] std::vector<std::string> titles() const;
    [[nodiscard]] std::size_t title_count() const { return by_title_.size(); }

    /// Union of the passages of the given titles; unknown titles are reported, not fatal.
    [[nodiscard]] TitleSelection passages_for_titles(std::span<const std::string> titles) const;

    [[nodiscard]] const IngestStats& stats() const { return stats_; }
    [[nodiscard]] const std::string& checksum() const { return checksum_; }

    void write(std::ostream& out) const;
    static PassageStore read(std::istream& in);
    void save(const std::filesystem::path& path) const;
    static PassageStore load(const std::filesystem::path& path);

    friend bool operator==(const PassageStore& a, const PassageStore& b)
    {
        return a.passages_ == b.passages_ && a.by_title_ == b.by_title_;
    }

  private:
    void finalize();

    std::vector<Passage> passages_;
    std::map<std::string, std::pair<std::uint32_t, std::uint32_t>, std::less<>> by_title_;
    IngestStats stats_;
    std::string checksum_;
};

/// Reads `{"id","title","text"}` JSON lines in one pass.
PassageStore ingest_corpus(std::istream& in, unsigned jobs = 1);
PassageStore ingest_corpus_file(const std::filesystem::path& path, unsigned jobs = 1);

}  // namespace elr
