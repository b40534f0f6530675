#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "visword/sparse.hpp"

namespace visword {

/// Non-owning P x D row-major patch matrix (one row per patch token).
struct PatchMatrixView {
    std::uint32_t patches = 0;
    std::uint32_t dim = 0;
    std::span<const float> values;

    std::span<const float> row(std::uint32_t p) const {
        return values.subspan(static_cast<std::size_t>(p) * dim, dim);
    }
};

struct PatchFeatures {
    std::uint32_t patches = 0;
    std::uint32_t dim = 0;
    std::vector<float> values;

    PatchMatrixView view() const { return {patches, dim, values}; }
};

/// Encoder half of a top-k sparse autoencoder: h = topk(ReLU(W_e z + b_e)).
/// `weights` is row-major with `vocab` rows of `dim` columns.
struct SaeEncoderWeights {
    std::uint32_t dim = 0;
    std::uint32_t vocab = 0;
    std::uint32_t k = 0;
    std::vector<float> weights;
    std::vector<float> bias;

    std::uint32_t expansion() const noexcept { return dim == 0 ? 0 : vocab / dim; }
};

/// Throws unless the encoder satisfies its shape and finiteness invariants.
void validate_weights(const SaeEncoderWeights& w);

struct EncodeConfig {
    std::uint32_t k = 16;       ///< per-patch sparsity
    std::uint32_t k_post = 16;  ///< image-level sparsity after pooling
    double quant_scale = kDefaultQuantScale;
};

/// Keeps the `k` largest strictly positive entries of `values`. Ties are
/// resolved toward the lower dimension. Result is sorted by dimension.
SparseVector top_k_positive(std::span<const double> values, std::uint32_t k);

SparseVector sae_encode_patch(std::span<const float> z, const SaeEncoderWeights& w);

SparseVector sum_pool(std::span<const SparseVector> patch_vectors);

SparseVector post_pool_topk(const SparseVector& pooled, std::uint32_t k_post);

/// Stores each value as round(x * scale) clipped to [0, 65535]; entries that
/// round to zero are dropped. doc_len is accumulated from dequantized values.
SparseDoc quantize(const SparseVector& v, double quant_scale = kDefaultQuantScale);

/// Full image pipeline: encode every patch, sum-pool, keep the top k_post
/// words, quantize. `cfg.k` overrides the per-patch sparsity stored in `w`.
SparseDoc encode_image(const PatchMatrixView& feats, const SaeEncoderWeights& w,
                       const EncodeConfig& cfg);

/// Encodes `image_count` consecutive P x D matrices packed in `values`.
/// Images are processed in parallel; output order matches input order.
std::vector<SparseDoc> encode_batch(std::span<const float> values,
                                    std::uint32_t image_count, std::uint32_t patches,
                                    const SaeEncoderWeights& w, const EncodeConfig& cfg);

}  // namespace visword
