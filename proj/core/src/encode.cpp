#include "visword/encode.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Core>

#include "visword/error.hpp"
#include "visword/parallel.hpp"

namespace visword {

namespace {

bool all_finite(std::span<const float> xs) {
    return std::all_of(xs.begin(), xs.end(), [](float x) { return std::isfinite(x); });
}

using RowMajor = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Pre-activations W_e * z + b_e for every patch row at once; returns P x eD.
RowMajor pre_activations(const PatchMatrixView& feats, const SaeEncoderWeights& w) {
    Eigen::Map<const RowMajor> z(feats.values.data(), feats.patches, feats.dim);
    Eigen::Map<const RowMajor> we(w.weights.data(), w.vocab, w.dim);
    Eigen::Map<const Eigen::RowVectorXf> be(w.bias.data(), w.vocab);
    RowMajor out = z * we.transpose();
    out.rowwise() += be;
    return out;
}

}  // namespace

void validate_weights(const SaeEncoderWeights& w) {
    if (w.dim == 0 || w.vocab == 0) {
        raise(ErrorCode::shape_mismatch, "encoder dimensions must be positive");
    }
    if (w.vocab % w.dim != 0) {
        raise(ErrorCode::shape_mismatch, "vocab " + std::to_string(w.vocab) +
                                             " is not a multiple of dim " + std::to_string(w.dim));
    }
    if (w.k == 0 || w.k > w.vocab) {
        raise(ErrorCode::invalid_argument, "encoder k must lie in [1, vocab]");
    }
    if (w.weights.size() != static_cast<std::size_t>(w.vocab) * w.dim ||
        w.bias.size() != w.vocab) {
        raise(ErrorCode::shape_mismatch, "encoder weight buffers do not match vocab x dim");
    }
    if (!all_finite(w.weights) || !all_finite(w.bias)) {
        raise(ErrorCode::invalid_argument, "encoder weights contain non-finite values");
    }
}

SparseVector top_k_positive(std::span<const double> values, std::uint32_t k) {
    SparseVector out;
    out.vocab = static_cast<std::uint32_t>(values.size());
    std::vector<WordId> candidates;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] > 0.0) candidates.push_back(static_cast<WordId>(i));
    }
    auto better = [&](WordId a, WordId b) {
        if (values[a] != values[b]) return values[a] > values[b];
        return a < b;
    };
    if (candidates.size() > k) {
        std::nth_element(candidates.begin(), candidates.begin() + k, candidates.end(), better);
        candidates.resize(k);
    }
    std::sort(candidates.begin(), candidates.end());
    out.entries.reserve(candidates.size());
    for (WordId d : candidates) out.entries.push_back({d, values[d]});
    return out;
}

SparseVector sae_encode_patch(std::span<const float> z, const SaeEncoderWeights& w) {
    if (z.size() != w.dim) {
        raise(ErrorCode::shape_mismatch, "patch has " + std::to_string(z.size()) +
                                             " features, encoder expects " + std::to_string(w.dim));
    }
    if (w.weights.size() != static_cast<std::size_t>(w.vocab) * w.dim ||
        w.bias.size() != w.vocab) {
        raise(ErrorCode::shape_mismatch, "encoder weight buffers do not match vocab x dim");
    }
    if (!all_finite(z)) raise(ErrorCode::invalid_argument, "patch contains non-finite values");

    RowMajor pre = pre_activations({1, w.dim, z}, w);
    std::vector<double> acts(w.vocab);
    for (std::uint32_t i = 0; i < w.vocab; ++i) acts[i] = pre(0, i);
    return top_k_positive(acts, w.k);
}

SparseVector sum_pool(std::span<const SparseVector> patch_vectors) {
    if (patch_vectors.empty()) raise(ErrorCode::empty_input, "sum_pool needs at least one patch");
    const std::uint32_t vocab = patch_vectors.front().vocab;
    std::vector<double> acc(vocab, 0.0);
    std::vector<char> seen(vocab, 0);
    for (const auto& h : patch_vectors) {
        if (h.vocab != vocab) {
            raise(ErrorCode::vocab_mismatch, "patch vectors disagree on vocabulary size");
        }
        for (const auto& e : h.entries) {
            acc[e.dim] += e.value;
            seen[e.dim] = 1;
        }
    }
    SparseVector out;
    out.vocab = vocab;
    for (std::uint32_t i = 0; i < vocab; ++i) {
        if (seen[i]) out.entries.push_back({i, acc[i]});
    }
    return out;
}

SparseVector post_pool_topk(const SparseVector& pooled, std::uint32_t k_post) {
    if (pooled.entries.size() <= k_post) return pooled;
    std::vector<SparseEntry> kept = pooled.entries;
    auto better = [](const SparseEntry& a, const SparseEntry& b) {
        if (a.value != b.value) return a.value > b.value;
        return a.dim < b.dim;
    };
    std::nth_element(kept.begin(), kept.begin() + k_post, kept.end(), better);
    kept.resize(k_post);
    std::sort(kept.begin(), kept.end(),
              [](const SparseEntry& a, const SparseEntry& b) { return a.dim < b.dim; });
    return {pooled.vocab, std::move(kept)};
}

SparseDoc quantize(const SparseVector& v, double quant_scale) {
    if (!(quant_scale > 0.0)) raise(ErrorCode::invalid_argument, "quant_scale must be positive");
    SparseDoc doc;
    doc.quant_scale = quant_scale;
    doc.entries.reserve(v.entries.size());
    for (const auto& e : v.entries) {
        if (!std::isfinite(e.value)) {
            raise(ErrorCode::invalid_argument, "cannot quantize a non-finite value");
        }
        double q = std::round(e.value * quant_scale);
        q = std::clamp(q, 0.0, static_cast<double>(kMaxQuantValue));
        if (q < 1.0) continue;
        const auto qval = static_cast<std::uint16_t>(q);
        doc.entries.push_back({e.dim, qval});
        doc.doc_len += doc.dequantize(qval);
    }
    return doc;
}

SparseDoc encode_image(const PatchMatrixView& feats, const SaeEncoderWeights& w,
                       const EncodeConfig& cfg) {
    if (feats.patches == 0) raise(ErrorCode::empty_input, "image has no patches");
    if (feats.dim != w.dim) {
        raise(ErrorCode::shape_mismatch, "features have dim " + std::to_string(feats.dim) +
                                             ", encoder expects " + std::to_string(w.dim));
    }
    if (feats.values.size() != static_cast<std::size_t>(feats.patches) * feats.dim) {
        raise(ErrorCode::shape_mismatch, "patch buffer does not match P x D");
    }
    if (cfg.k == 0 || cfg.k > w.vocab || cfg.k_post == 0) {
        raise(ErrorCode::invalid_argument, "k and k_post must be positive and k <= vocab");
    }
    if (!all_finite(feats.values)) {
        raise(ErrorCode::invalid_argument, "patch features contain non-finite values");
    }

    const RowMajor pre = pre_activations(feats, w);
    std::vector<double> row(w.vocab);
    std::vector<SparseVector> patches;
    patches.reserve(feats.patches);
    for (std::uint32_t p = 0; p < feats.patches; ++p) {
        for (std::uint32_t i = 0; i < w.vocab; ++i) row[i] = pre(p, i);
        patches.push_back(top_k_positive(row, cfg.k));
    }
    return quantize(post_pool_topk(sum_pool(patches), cfg.k_post), cfg.quant_scale);
}

std::vector<SparseDoc> encode_batch(std::span<const float> values, std::uint32_t image_count,
                                    std::uint32_t patches, const SaeEncoderWeights& w,
                                    const EncodeConfig& cfg) {
    validate_weights(w);
    const std::size_t per_image = static_cast<std::size_t>(patches) * w.dim;
    if (values.size() != per_image * image_count) {
        raise(ErrorCode::shape_mismatch, "feature buffer does not match image_count x P x D");
    }
    std::vector<SparseDoc> docs(image_count);
    parallel_for(image_count, [&](std::size_t i) {
        PatchMatrixView view{patches, w.dim, values.subspan(i * per_image, per_image)};
        docs[i] = encode_image(view, w, cfg);
    });
    return docs;
}

}  // namespace visword
