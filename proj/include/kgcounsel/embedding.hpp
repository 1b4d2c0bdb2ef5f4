#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "kgcounsel/error.hpp"

namespace kgcounsel {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using EmbeddingVector = Vector<double>;
// One row per token.
using TokenEmbeddingMatrix = RowMatrix<double>;

// a.b / sqrt(|a|^2 |b|^2). Written with a single square root so that
// cosine(v, v) is exactly 1 for any non-zero v.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cosine(const Eigen::MatrixBase<DerivedA>& a,
                                 const Eigen::MatrixBase<DerivedB>& b) {
    using Scalar = typename DerivedA::Scalar;
    if (a.size() != b.size()) {
        throw Error(ErrorCode::DimMismatch, "cosine: dimension " + std::to_string(a.size()) +
                                                " vs " + std::to_string(b.size()));
    }
    const Scalar aa = a.dot(a);
    const Scalar bb = b.dot(b);
    if (aa == Scalar(0) || bb == Scalar(0)) throw Error(ErrorCode::ZeroVector, "cosine of a zero vector");
    const Scalar c = a.dot(b) / std::sqrt(aa * bb);
    return std::clamp(c, Scalar(-1), Scalar(1));
}

// Copy scaled to unit length; throws ZeroVector.
template <typename Derived>
Vector<typename Derived::Scalar> normalized(const Eigen::MatrixBase<Derived>& v) {
    const auto n = v.norm();
    if (n == 0) throw Error(ErrorCode::ZeroVector, "cannot normalize a zero vector");
    return v / n;
}

// Contract every embedding backend honours: one vector per input text, a
// constant dimension, and per-token matrices for token-level metrics.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;

    virtual std::string name() const = 0;
    virtual std::size_t dim() const = 0;
    virtual std::vector<EmbeddingVector> embed_texts(const std::vector<std::string>& texts) = 0;
    virtual TokenEmbeddingMatrix embed_tokens(std::string_view text) = 0;
};

// Offline, deterministic provider. Each normalized token maps to a seeded
// pseudo-random draw; token rows are the unit-length draws, and a text embeds
// as the normalized sum of the draws of its distinct tokens. Shared words pull
// texts together. Pure integer hashing plus IEEE arithmetic: same bits everywhere.
class HashEmbeddingProvider : public EmbeddingProvider {
public:
    explicit HashEmbeddingProvider(std::size_t dim = 64, std::uint64_t seed = 0x5eed);

    std::string name() const override;
    std::size_t dim() const override { return dim_; }
    std::vector<EmbeddingVector> embed_texts(const std::vector<std::string>& texts) override;
    TokenEmbeddingMatrix embed_tokens(std::string_view text) override;

    EmbeddingVector token_vector(std::string_view token) const;
    EmbeddingVector embed(std::string_view text) const;

private:
    EmbeddingVector raw_token_vector(std::string_view token) const;

    std::size_t dim_;
    std::uint64_t seed_;
};

}  // namespace kgcounsel
