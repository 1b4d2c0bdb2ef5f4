#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace kgcounsel {

// Byte range [begin, end) of one whitespace-delimited word inside a UTF-8 string.
struct WordSpan {
    std::size_t begin = 0;
    std::size_t end = 0;
};

// Splits on Unicode whitespace (ASCII space/tab/newlines, NBSP, U+2000..U+200A,
// U+2028/2029, U+202F, U+205F, U+3000, U+1680, U+0085). Multi-byte letters of
// any script stay inside their word, so Bangla and Latin text count alike.
std::vector<WordSpan> word_spans(std::string_view text);

std::vector<std::string> split_words(std::string_view text);

std::size_t word_count(std::string_view text);

// ASCII-only case folding; non-ASCII bytes pass through untouched.
std::string casefold(std::string_view text);

// casefold + strip leading/trailing punctuation (ASCII, Bangla danda, curly quotes).
std::string normalize_token(std::string_view token);

// Normalized, non-empty tokens in source order (duplicates kept).
std::vector<std::string> normalized_tokens(std::string_view text);

std::set<std::string> token_set(std::string_view text);

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

// SplitMix64 step; the engine's only source of pseudo-randomness so that
// fixtures and the offline embedding provider are identical on every platform.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, bound).
    std::uint64_t below(std::uint64_t bound) { return bound ? next() % bound : 0; }

    // Uniform in [-1, 1) built from the top 53 bits; exact on any IEEE platform.
    double symmetric_unit() {
        return static_cast<double>(next() >> 11) * 0x1.0p-52 - 1.0;
    }

private:
    std::uint64_t state_;
};

}  // namespace kgcounsel
