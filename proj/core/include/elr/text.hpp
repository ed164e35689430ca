#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace elr::text {

/// Splits on runs of Unicode whitespace (ASCII plus the UTF-8 encoded
/// Zs/Zl/Zp code points and NEL). Views point into `text`.
std::vector<std::string_view> split_words(std::string_view text);

/// Joins words with single spaces.
std::string join_words(std::span<const std::string_view> words);

struct TokenizerOptions {
    bool stem = false;
    bool remove_stopwords = false;

    friend bool operator==(const TokenizerOptions&, const TokenizerOptions&) = default;
};

/// Lowercases ASCII, splits on anything that is not alphanumeric and drops
/// empty tokens. Non-ASCII code points are word characters unless they are
/// Unicode whitespace or punctuation, so UTF-8 words stay intact.
std::vector<std::string> tokenize(std::string_view text, const TokenizerOptions& options = {});

bool is_stopword(std::string_view token);
std::span<const std::string_view> stopwords();

/// Harman's "S" stemmer: strips plural endings only.
std::string s_stem(std::string_view token);

std::string to_lower_ascii(std::string_view s);
std::string trim(std::string_view s);
std::string percent_encode(std::string_view s);
std::string percent_decode(std::string_view s);

/// Incremental 64-bit FNV-1a, used for corpus checksums and fingerprints.
class Fnv1a {
  public:
    void update(std::string_view bytes);
    void update_u64(std::uint64_t v);
    [[nodiscard]] std::uint64_t value() const { return state_; }
    [[nodiscard]] std::string hex() const;

  private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::string fnv1a_hex(std::string_view bytes);

}  // namespace elr::text
