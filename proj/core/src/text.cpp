#include "elr/text.hpp"

#include <algorithm>
#include <array>
#include <cstdio>

namespace elr::text {

#include "stopwords.inc"

namespace {

// Length of the whitespace sequence starting at text[i], 0 if none.
std::size_t whitespace_len(std::string_view text, std::size_t i)
{
    auto c = static_cast<unsigned char>(text[i]);
    if (c == ' ' || (c >= '\t' && c <= '\r')) {
        return 1;
    }
    if (c < 0x80) {
        return 0;
    }
    auto at = [&](std::size_t k) -> unsigned {
        return i + k < text.size() ? static_cast<unsigned char>(text[i + k]) : 0U;
    };
    if (c == 0xC2 && (at(1) == 0x85 || at(1) == 0xA0)) {
        return 2;  // NEL, NBSP
    }
    if (c == 0xE1 && at(1) == 0x9A && at(2) == 0x80) {
        return 3;  // U+1680
    }
    if (c == 0xE2 && at(1) == 0x80) {
        unsigned t = at(2);
        if ((t >= 0x80 && t <= 0x8A) || t == 0xA8 || t == 0xA9 || t == 0xAF) {
            return 3;  // U+2000..200A, U+2028, U+2029, U+202F
        }
    }
    if (c == 0xE2 && at(1) == 0x81 && at(2) == 0x9F) {
        return 3;  // U+205F
    }
    if (c == 0xE3 && at(1) == 0x80 && at(2) == 0x80) {
        return 3;  // U+3000
    }
    return 0;
}

bool is_ascii_alnum(unsigned char c)
{
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

// Length of a non-ASCII separator code point at text[i] (Unicode whitespace,
// Latin-1 punctuation/symbols, General Punctuation, CJK punctuation), else 0.
std::size_t unicode_separator_len(std::string_view text, std::size_t i)
{
    if (auto ws = whitespace_len(text, i); ws > 0) {
        return ws;
    }
    auto at = [&](std::size_t k) -> unsigned {
        return i + k < text.size() ? static_cast<unsigned char>(text[i + k]) : 0U;
    };
    unsigned c = at(0);
    if (c == 0xC2) {
        unsigned t = at(1);
        bool letter_like = t == 0xAA || t == 0xB2 || t == 0xB3 || t == 0xB5 || t == 0xB9 || t == 0xBA ||
                           (t >= 0xBC && t <= 0xBE);
        if (t >= 0xA0 && t <= 0xBF && !letter_like) {
            return 2;
        }
    }
    if (c == 0xC3 && (at(1) == 0x97 || at(1) == 0xB7)) {
        return 2;  // multiplication / division signs
    }
    if (c == 0xE2 && (at(1) == 0x80 || at(1) == 0x81) && at(2) >= 0x80) {
        return 3;  // U+2000..U+207F
    }
    if (c == 0xE3 && at(1) == 0x80 && at(2) >= 0x80 && at(2) <= 0xBF) {
        return 3;  // U+3000..U+303F
    }
    return 0;
}

bool ends_with(std::string_view s, std::string_view suffix)
{
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

std::vector<std::string_view> split_words(std::string_view text)
{
    std::vector<std::string_view> words;
    std::size_t i = 0;
    std::size_t start = std::string_view::npos;
    while (i < text.size()) {
        if (auto ws = whitespace_len(text, i); ws > 0) {
            if (start != std::string_view::npos) {
                words.push_back(text.substr(start, i - start));
                start = std::string_view::npos;
            }
            i += ws;
        } else {
            if (start == std::string_view::npos) {
                start = i;
            }
            ++i;
        }
    }
    if (start != std::string_view::npos) {
        words.push_back(text.substr(start));
    }
    return words;
}

std::string join_words(std::span<const std::string_view> words)
{
    std::size_t n = words.empty() ? 0 : words.size() - 1;
    for (auto w : words) {
        n += w.size();
    }
    std::string out;
    out.reserve(n);
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (i > 0) {
            out.push_back(' ');
        }
        out.append(words[i]);
    }
    return out;
}

std::vector<std::string> tokenize(std::string_view text, const TokenizerOptions& options)
{
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&] {
        if (current.empty()) {
            return;
        }
        if (options.remove_stopwords && is_stopword(current)) {
            current.clear();
            return;
        }
        tokens.push_back(options.stem ? s_stem(current) : current);
        current.clear();
    };
    std::size_t i = 0;
    while (i < text.size()) {
        auto c = static_cast<unsigned char>(text[i]);
        if (is_ascii_alnum(c)) {
            current.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : text[i]);
            ++i;
        } else if (c < 0x80) {
            flush();
            ++i;
        } else if (auto sep = unicode_separator_len(text, i); sep > 0) {
            flush();
            i += sep;
        } else {
            current.push_back(text[i]);
            ++i;
        }
    }
    flush();
    return tokens;
}

std::span<const std::string_view> stopwords() { return kStopwords; }

bool is_stopword(std::string_view token)
{
    return std::find(kStopwords.begin(), kStopwords.end(), token) != kStopwords.end();
}

std::string s_stem(std::string_view token)
{
    std::string w(token);
    if (ends_with(w, "ies") && !ends_with(w, "eies") && !ends_with(w, "aies")) {
        w.replace(w.size() - 3, 3, "y");
    } else if (ends_with(w, "es") && !ends_with(w, "aes") && !ends_with(w, "ees") &&
               !ends_with(w, "oes")) {
        w.pop_back();
    } else if (ends_with(w, "s") && !ends_with(w, "us") && !ends_with(w, "ss")) {
        w.pop_back();
    }
    return w.empty() ? std::string(token) : w;
}

std::string to_lower_ascii(std::string_view s)
{
    std::string out(s);
    for (auto& c : out) {
        if (c >= 'A' && c <= 'Z') {
            c = static_cast<char>(c - 'A' + 'a');
        }
    }
    return out;
}

std::string trim(std::string_view s)
{
    auto words = split_words(s);
    if (words.empty()) {
        return {};
    }
    auto begin = words.front().data() - s.data();
    auto end = words.back().data() + words.back().size() - s.data();
    return std::string(s.substr(static_cast<std::size_t>(begin), static_cast<std::size_t>(end - begin)));
}

std::string percent_encode(std::string_view s)
{
    static constexpr char kHex[] = "0123456789ABCDEF";
    std::string out;
    out.reserve(s.size());
    for (char ch : s) {
        auto c = static_cast<unsigned char>(ch);
        bool unreserved = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                          c == '-' || c == '.' || c == '_' || c == '~';
        if (unreserved) {
            out.push_back(ch);
        } else {
            out.push_back('%');
            out.push_back(kHex[c >> 4]);
            out.push_back(kHex[c & 0xF]);
        }
    }
    return out;
}

std::string percent_decode(std::string_view s)
{
    auto hex = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        return -1;
    };
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '%' && i + 2 < s.size()) {
            int hi = hex(s[i + 1]);
            int lo = hex(s[i + 2]);
            if (hi >= 0 && lo >= 0) {
                out.push_back(static_cast<char>(hi * 16 + lo));
                i += 2;
                continue;
            }
        }
        out.push_back(s[i]);
    }
    return out;
}

void Fnv1a::update(std::string_view bytes)
{
    for (char c : bytes) {
        state_ ^= static_cast<unsigned char>(c);
        state_ *= 0x100000001b3ULL;
    }
}

void Fnv1a::update_u64(std::uint64_t v)
{
    for (int i = 0; i < 8; ++i) {
        state_ ^= (v >> (8 * i)) & 0xFFU;
        state_ *= 0x100000001b3ULL;
    }
}

std::string Fnv1a::hex() const
{
    std::array<char, 17> buf{};
    std::snprintf(buf.data(), buf.size(), "%016llx", static_cast<unsigned long long>(state_));
    return std::string(buf.data(), 16);
}

std::string fnv1a_hex(std::string_view bytes)
{
    Fnv1a h;
    h.update(bytes);
    return h.hex();
}

}  // namespace elr::text
