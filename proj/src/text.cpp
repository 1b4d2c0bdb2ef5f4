#include "kgcounsel/text.hpp"

#include <array>

namespace kgcounsel {

namespace {

// Decodes the code point starting at `pos`; `len` receives its byte length.
// Malformed sequences decode as a single opaque byte.
char32_t decode_at(std::string_view s, std::size_t pos, std::size_t& len) {
    const auto b0 = static_cast<unsigned char>(s[pos]);
    auto cont = [&](std::size_t i) -> int {
        if (pos + i >= s.size()) return -1;
        const auto b = static_cast<unsigned char>(s[pos + i]);
        return (b & 0xC0) == 0x80 ? (b & 0x3F) : -1;
    };
    if (b0 < 0x80) {
        len = 1;
        return b0;
    }
    if ((b0 & 0xE0) == 0xC0) {
        const int c1 = cont(1);
        if (c1 >= 0) {
            len = 2;
            return (char32_t(b0 & 0x1F) << 6) | char32_t(c1);
        }
    } else if ((b0 & 0xF0) == 0xE0) {
        const int c1 = cont(1), c2 = cont(2);
        if (c1 >= 0 && c2 >= 0) {
            len = 3;
            return (char32_t(b0 & 0x0F) << 12) | (char32_t(c1) << 6) | char32_t(c2);
        }
    } else if ((b0 & 0xF8) == 0xF0) {
        const int c1 = cont(1), c2 = cont(2), c3 = cont(3);
        if (c1 >= 0 && c2 >= 0 && c3 >= 0) {
            len = 4;
            return (char32_t(b0 & 0x07) << 18) | (char32_t(c1) << 12) | (char32_t(c2) << 6) |
                   char32_t(c3);
        }
    }
    len = 1;
    return 0xFFFD;
}

bool is_space(char32_t c) {
    switch (c) {
        case U' ': case U'\t': case U'\n': case U'\r': case U'\v': case U'\f':
        case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
        case 0x202F: case 0x205F: case 0x3000:
            return true;
        default:
            return c >= 0x2000 && c <= 0x200A;
    }
}

bool is_trim_punct(char32_t c) {
    if (c < 0x80) {
        return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) ||
               (c >= 0x5B && c <= 0x60) || (c >= 0x7B && c <= 0x7E);
    }
    switch (c) {
        case 0x0964: case 0x0965:                          // danda, double danda
        case 0x2018: case 0x2019: case 0x201C: case 0x201D:  // curly quotes
        case 0x2013: case 0x2014: case 0x2026:               // dashes, ellipsis
            return true;
        default:
            return false;
    }
}

}  // namespace

std::vector<WordSpan> word_spans(std::string_view text) {
    std::vector<WordSpan> spans;
    std::size_t pos = 0;
    bool in_word = false;
    std::size_t start = 0;
    while (pos < text.size()) {
        std::size_t len = 1;
        const char32_t c = decode_at(text, pos, len);
        if (is_space(c)) {
            if (in_word) spans.push_back({start, pos});
            in_word = false;
        } else if (!in_word) {
            in_word = true;
            start = pos;
        }
        pos += len;
    }
    if (in_word) spans.push_back({start, text.size()});
    return spans;
}

std::vector<std::string> split_words(std::string_view text) {
    std::vector<std::string> out;
    for (const auto& span : word_spans(text)) {
        out.emplace_back(text.substr(span.begin, span.end - span.begin));
    }
    return out;
}

std::size_t word_count(std::string_view text) { return word_spans(text).size(); }

std::string casefold(std::string_view text) {
    std::string out(text);
    for (char& ch : out) {
        if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
    }
    return out;
}

std::string normalize_token(std::string_view token) {
    std::size_t begin = 0;
    std::size_t end = token.size();
    while (begin < end) {
        std::size_t len = 1;
        if (!is_trim_punct(decode_at(token, begin, len))) break;
        begin += len;
    }
    // Trailing side: walk back to the start of each code point.
    while (end > begin) {
        std::size_t back = end - 1;
        while (back > begin && (static_cast<unsigned char>(token[back]) & 0xC0) == 0x80) --back;
        std::size_t len = 1;
        if (!is_trim_punct(decode_at(token, back, len)) || back + len != end) break;
        end = back;
    }
    return casefold(token.substr(begin, end - begin));
}

std::vector<std::string> normalized_tokens(std::string_view text) {
    std::vector<std::string> out;
    for (const auto& span : word_spans(text)) {
        auto tok = normalize_token(text.substr(span.begin, span.end - span.begin));
        if (!tok.empty()) out.push_back(std::move(tok));
    }
    return out;
}

std::set<std::string> token_set(std::string_view text) {
    auto toks = normalized_tokens(text);
    return {toks.begin(), toks.end()};
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (const char ch : bytes) {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace kgcounsel
