#include "kgcounsel/embedding.hpp"

#include <algorithm>

#include "kgcounsel/text.hpp"

namespace kgcounsel {

HashEmbeddingProvider::HashEmbeddingProvider(std::size_t dim, std::uint64_t seed)
    : dim_(dim), seed_(seed) {
    if (dim_ == 0) throw Error(ErrorCode::InvalidArgument, "embedding dimension must be >= 1");
}

std::string HashEmbeddingProvider::name() const {
    return "hash-bow-" + std::to_string(dim_) + "-" + std::to_string(seed_);
}

EmbeddingVector HashEmbeddingProvider::raw_token_vector(std::string_view token) const {
    SplitMix64 rng(fnv1a64(token, 0xcbf29ce484222325ULL ^ seed_));
    EmbeddingVector v(static_cast<Eigen::Index>(dim_));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.symmetric_unit();
    // All-zero draws are astronomically unlikely but would break normalization.
    if (v.squaredNorm() == 0.0) v[0] = 1.0;
    return v;
}

EmbeddingVector HashEmbeddingProvider::token_vector(std::string_view token) const {
    const EmbeddingVector v = raw_token_vector(token);
    return v / v.norm();
}

EmbeddingVector HashEmbeddingProvider::embed(std::string_view text) const {
    auto tokens = normalized_tokens(text);
    if (tokens.empty()) return token_vector("");
    // Distinct tokens summed in sorted order: texts with the same word set
    // embed to identical bits. Raw draws (unequal norms) keep texts with
    // different word sets from scoring mathematically equal against a query.
    std::sort(tokens.begin(), tokens.end());
    tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
    EmbeddingVector sum = EmbeddingVector::Zero(static_cast<Eigen::Index>(dim_));
    for (const auto& t : tokens) sum += raw_token_vector(t);
    // Opposing token vectors can cancel exactly only in degenerate cases.
    if (sum.squaredNorm() == 0.0) return token_vector(text);
    return sum / sum.norm();
}

std::vector<EmbeddingVector> HashEmbeddingProvider::embed_texts(const std::vector<std::string>& texts) {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed(t));
    return out;
}

TokenEmbeddingMatrix HashEmbeddingProvider::embed_tokens(std::string_view text) {
    const auto tokens = normalized_tokens(text);
    TokenEmbeddingMatrix m(static_cast<Eigen::Index>(tokens.size()), static_cast<Eigen::Index>(dim_));
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        m.row(static_cast<Eigen::Index>(i)) = token_vector(tokens[i]).transpose();
    }
    return m;
}

}  // namespace kgcounsel
