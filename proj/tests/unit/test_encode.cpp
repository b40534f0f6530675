#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "visword/encode.hpp"
#include "visword/error.hpp"

using namespace visword;

namespace {

SaeEncoderWeights identity(std::uint32_t d, std::uint32_t k) {
    SaeEncoderWeights w;
    w.dim = d;
    w.vocab = d;
    w.k = k;
    w.weights.assign(static_cast<std::size_t>(d) * d, 0.0f);
    for (std::uint32_t i = 0; i < d; ++i) w.weights[i * d + i] = 1.0f;
    w.bias.assign(d, 0.0f);
    return w;
}

SaeEncoderWeights random_weights(std::mt19937_64& rng, std::uint32_t d, std::uint32_t vocab,
                                 std::uint32_t k) {
    std::normal_distribution<float> g(0.0f, 1.0f);
    SaeEncoderWeights w;
    w.dim = d;
    w.vocab = vocab;
    w.k = k;
    w.weights.resize(static_cast<std::size_t>(vocab) * d);
    for (auto& x : w.weights) x = g(rng);
    w.bias.resize(vocab);
    for (auto& x : w.bias) x = 0.1f * g(rng);
    return w;
}

SparseVector sv(std::uint32_t vocab, std::vector<SparseEntry> e) { return {vocab, std::move(e)}; }

// Dense pipeline reference: full pre-activations, sort, keep k, with no
// sparse data structures.
std::vector<double> dense_patch(const std::vector<float>& z, const SaeEncoderWeights& w) {
    std::vector<double> h(w.vocab);
    for (std::uint32_t j = 0; j < w.vocab; ++j) {
        double s = w.bias[j];
        for (std::uint32_t i = 0; i < w.dim; ++i) s += static_cast<double>(w.weights[j * w.dim + i]) * z[i];
        h[j] = std::max(0.0, s);
    }
    return h;
}

std::vector<double> dense_keep(std::vector<double> h, std::uint32_t k) {
    std::vector<std::uint32_t> idx(h.size());
    std::iota(idx.begin(), idx.end(), 0u);
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return h[a] > h[b]; });
    std::vector<double> out(h.size(), 0.0);
    for (std::uint32_t r = 0; r < k && r < idx.size(); ++r) out[idx[r]] = h[idx[r]];
    return out;
}

}  // namespace

TEST(SaeEncodePatch, IdentityKeepsTwoLargest) {
    const auto w = identity(4, 2);
    const std::vector<float> z = {3.0f, -1.0f, 2.0f, 0.5f};
    const auto h = sae_encode_patch(z, w);
    EXPECT_EQ(h, sv(4, {{0, 3.0}, {2, 2.0}}));
}

TEST(SaeEncodePatch, AllNegativeGivesEmpty) {
    for (std::uint32_t k : {1u, 2u, 4u}) {
        const auto w = identity(4, k);
        const std::vector<float> z = {-3.0f, -1.0f, -2.0f, -0.5f};
        EXPECT_TRUE(sae_encode_patch(z, w).empty());
    }
}

TEST(SaeEncodePatch, MatchesDenseReference) {
    std::mt19937_64 rng(11);
    std::normal_distribution<float> g(0.0f, 1.0f);
    for (int trial = 0; trial < 50; ++trial) {
        const auto w = random_weights(rng, 8, 8, 3);
        std::vector<float> z(8);
        for (auto& x : z) x = g(rng);
        const auto h = sae_encode_patch(z, w);
        const auto ref = dense_keep(dense_patch(z, w), 3);
        std::size_t ref_nnz = 0;
        for (double x : ref) ref_nnz += x > 0.0;
        ASSERT_EQ(h.nnz(), ref_nnz);
        for (const auto& e : h.entries) {
            ASSERT_GT(ref[e.dim], 0.0);
            EXPECT_NEAR(e.value, ref[e.dim], 1e-5);
        }
    }
}

TEST(SaeEncodePatch, ExactSparsityIsMinOfKAndPositives) {
    std::mt19937_64 rng(3);
    std::normal_distribution<float> g(0.0f, 1.0f);
    for (int trial = 0; trial < 40; ++trial) {
        const auto w = random_weights(rng, 6, 24, 5);
        std::vector<float> z(6);
        for (auto& x : z) x = g(rng);
        const auto dense = dense_patch(z, w);
        const auto positives = static_cast<std::size_t>(
            std::count_if(dense.begin(), dense.end(), [](double x) { return x > 0.0; }));
        const auto h = sae_encode_patch(z, w);
        EXPECT_EQ(h.nnz(), std::min<std::size_t>(5, positives));
        for (const auto& e : h.entries) EXPECT_GT(e.value, 0.0);
    }
}

TEST(SaeEncodePatch, PositiveScalingKeepsSupport) {
    std::mt19937_64 rng(5);
    std::normal_distribution<float> g(0.0f, 1.0f);
    auto w = random_weights(rng, 8, 32, 4);
    std::fill(w.bias.begin(), w.bias.end(), 0.0f);
    std::vector<float> z(8);
    for (auto& x : z) x = g(rng);
    auto support = [](const SparseVector& v) {
        std::vector<WordId> s;
        for (const auto& e : v.entries) s.push_back(e.dim);
        return s;
    };
    const auto base = support(sae_encode_patch(z, w));
    for (float c : {0.25f, 2.0f, 10.0f}) {
        auto zc = z;
        for (auto& x : zc) x *= c;
        EXPECT_EQ(support(sae_encode_patch(zc, w)), base);
    }
}

TEST(SaeEncodePatch, ShapeMismatch) {
    const auto w = identity(4, 2);
    const std::vector<float> z = {1.0f, 2.0f, 3.0f};
    try {
        sae_encode_patch(z, w);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::shape_mismatch);
    }
}

TEST(SaeEncodePatch, RejectsNonFinite) {
    const auto w = identity(4, 2);
    const std::vector<float> z = {1.0f, std::nanf(""), 3.0f, 0.0f};
    EXPECT_THROW(sae_encode_patch(z, w), Error);
}

TEST(ValidateWeights, Invariants) {
    auto w = identity(4, 2);
    EXPECT_NO_THROW(validate_weights(w));
    auto bad = w;
    bad.k = 0;
    EXPECT_THROW(validate_weights(bad), Error);
    bad = w;
    bad.k = 5;
    EXPECT_THROW(validate_weights(bad), Error);
    bad = w;
    bad.vocab = 6;  // not a multiple of D
    EXPECT_THROW(validate_weights(bad), Error);
    bad = w;
    bad.bias.pop_back();
    EXPECT_THROW(validate_weights(bad), Error);
    bad = w;
    bad.weights[3] = INFINITY;
    EXPECT_THROW(validate_weights(bad), Error);
}

TEST(TopKPositive, TieBreaksTowardLowerIndex) {
    const std::vector<double> v = {5.0, 5.0, 5.0, -1.0};
    const auto out = top_k_positive(v, 2);
    EXPECT_EQ(out, sv(4, {{0, 5.0}, {1, 5.0}}));
}

TEST(SumPool, AddsElementwise) {
    const std::vector<SparseVector> in = {sv(4, {{1, 2.0}, {3, 1.0}}), sv(4, {{0, 1.0}, {3, 3.0}})};
    EXPECT_EQ(sum_pool(in), sv(4, {{0, 1.0}, {1, 2.0}, {3, 4.0}}));
}

TEST(SumPool, SingleIsIdentity) {
    const std::vector<SparseVector> in = {sv(8, {{2, 0.5}, {7, 1.5}})};
    EXPECT_EQ(sum_pool(in), in[0]);
}

TEST(SumPool, PermutationInvariant) {
    std::vector<SparseVector> in = {sv(6, {{1, 2.0}}), sv(6, {{1, 0.5}, {4, 1.0}}),
                                    sv(6, {{0, 3.0}, {5, 0.25}})};
    const auto ref = sum_pool(in);
    std::sort(in.begin(), in.end(), [](const auto& a, const auto& b) { return a.entries[0].dim < b.entries[0].dim; });
    do {
        EXPECT_EQ(sum_pool(in), ref);
    } while (std::next_permutation(in.begin(), in.end(), [](const auto& a, const auto& b) {
        return a.entries[0].dim < b.entries[0].dim;
    }));
}

TEST(SumPool, EmptyInputIsError) {
    try {
        sum_pool({});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::empty_input);
    }
}

TEST(SumPool, VocabMismatch) {
    const std::vector<SparseVector> in = {sv(4, {{1, 1.0}}), sv(5, {{1, 1.0}})};
    EXPECT_THROW(sum_pool(in), Error);
}

TEST(PostPoolTopK, KeepsLargest) {
    EXPECT_EQ(post_pool_topk(sv(4, {{0, 1.0}, {1, 2.0}, {3, 4.0}}), 2), sv(4, {{1, 2.0}, {3, 4.0}}));
}

TEST(PostPoolTopK, IdentityWhenSmall) {
    const auto v = sv(4, {{0, 1.0}, {1, 2.0}});
    EXPECT_EQ(post_pool_topk(v, 16), v);
}

TEST(PostPoolTopK, TieBreak) {
    EXPECT_EQ(post_pool_topk(sv(3, {{0, 5.0}, {1, 5.0}, {2, 5.0}}), 2), sv(3, {{0, 5.0}, {1, 5.0}}));
}

TEST(Quantize, Rounds) {
    const auto d = quantize(sv(8, {{5, 1.234}}));
    ASSERT_EQ(d.entries.size(), 1u);
    EXPECT_EQ(d.entries[0], (QuantizedEntry{5, 123}));
    EXPECT_NEAR(d.doc_len, 1.23, 1e-12);
}

TEST(Quantize, Clips) {
    const auto d = quantize(sv(8, {{5, 700.0}}));
    ASSERT_EQ(d.entries.size(), 1u);
    EXPECT_EQ(d.entries[0], (QuantizedEntry{5, 65535}));
    EXPECT_NEAR(d.doc_len, 655.35, 1e-9);
}

TEST(Quantize, DropsZeros) {
    const auto d = quantize(sv(8, {{5, 0.004}}));
    EXPECT_TRUE(d.entries.empty());
    EXPECT_EQ(d.doc_len, 0.0);
}

TEST(Quantize, RoundTripBound) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.005, 655.35);
    for (int i = 0; i < 20000; ++i) {
        const double x = u(rng);
        const auto d = quantize(sv(1, {{0, x}}));
        ASSERT_EQ(d.entries.size(), 1u);
        EXPECT_LE(std::abs(d.dequantize(d.entries[0].qval) - x), 0.005);
    }
}

TEST(Quantize, DocLenSumsDequantized) {
    const auto d = quantize(sv(16, {{1, 0.123}, {4, 2.5}, {9, 7.777}}));
    double sum = 0.0;
    for (const auto& e : d.entries) sum += e.qval / 100.0;
    EXPECT_NEAR(d.doc_len, sum, 1e-12);
    EXPECT_NO_THROW(validate_doc(d, 16));
}

TEST(EncodeImage, SinglePatchEqualsPatchPipeline) {
    std::mt19937_64 rng(23);
    std::normal_distribution<float> g(0.0f, 1.0f);
    const auto w = random_weights(rng, 8, 32, 6);
    PatchFeatures f{1, 8, std::vector<float>(8)};
    for (auto& x : f.values) x = g(rng);
    EncodeConfig cfg{6, 4, 100.0};
    const auto expected = quantize(post_pool_topk(sae_encode_patch(f.values, w), 4));
    EXPECT_EQ(encode_image(f.view(), w, cfg), expected);
}

TEST(EncodeImage, MatchesDenseReferencePipeline) {
    std::mt19937_64 rng(29);
    std::normal_distribution<float> g(0.0f, 1.0f);
    for (int trial = 0; trial < 20; ++trial) {
        const auto w = random_weights(rng, 8, 16, 4);
        PatchFeatures f{8, 8, std::vector<float>(64)};
        for (auto& x : f.values) x = g(rng);
        const EncodeConfig cfg{4, 4, 100.0};

        std::vector<double> pooled(16, 0.0);
        for (std::uint32_t p = 0; p < 8; ++p) {
            const std::vector<float> z(f.values.begin() + p * 8, f.values.begin() + (p + 1) * 8);
            const auto h = dense_keep(dense_patch(z, w), 4);
            for (std::size_t j = 0; j < 16; ++j) pooled[j] += h[j];
        }
        const auto kept = dense_keep(pooled, 4);

        const auto doc = encode_image(f.view(), w, cfg);
        double len = 0.0;
        std::size_t expected_nnz = 0;
        for (std::size_t j = 0; j < 16; ++j) {
            const double q = std::min(65535.0, std::round(kept[j] * 100.0));
            if (q >= 1.0) {
                ++expected_nnz;
                len += q / 100.0;
                auto it = std::find_if(doc.entries.begin(), doc.entries.end(),
                                       [&](const QuantizedEntry& e) { return e.dim == j; });
                ASSERT_NE(it, doc.entries.end());
                // Single-precision GEMM can move a value across a rounding
                // boundary, so allow one quantization step.
                EXPECT_LE(std::abs(static_cast<double>(it->qval) - q), 1.0);
            }
        }
        EXPECT_EQ(doc.entries.size(), expected_nnz);
        EXPECT_NEAR(doc.doc_len, len, 0.01 * expected_nnz + 1e-9);
    }
}

TEST(EncodeImage, CardinalityBound) {
    std::mt19937_64 rng(31);
    std::normal_distribution<float> g(0.0f, 1.0f);
    const auto w = random_weights(rng, 16, 256, 16);
    PatchFeatures f{32, 16, std::vector<float>(32 * 16)};
    for (auto& x : f.values) x = g(rng);
    const auto doc = encode_image(f.view(), w, {16, 16, 100.0});
    EXPECT_LE(doc.nnz(), 16u);
    EXPECT_NO_THROW(validate_doc(doc, 256));
}

TEST(EncodeImage, PatchPermutationInvariant) {
    std::mt19937_64 rng(37);
    std::normal_distribution<float> g(0.0f, 1.0f);
    const auto w = random_weights(rng, 8, 64, 8);
    PatchFeatures f{10, 8, std::vector<float>(80)};
    for (auto& x : f.values) x = g(rng);
    const EncodeConfig cfg{8, 16, 100.0};
    const auto ref = encode_image(f.view(), w, cfg);

    std::vector<std::uint32_t> perm(10);
    std::iota(perm.begin(), perm.end(), 0u);
    for (int t = 0; t < 5; ++t) {
        std::shuffle(perm.begin(), perm.end(), rng);
        PatchFeatures g2{10, 8, std::vector<float>(80)};
        for (std::uint32_t p = 0; p < 10; ++p) {
            std::copy_n(f.values.begin() + perm[p] * 8, 8, g2.values.begin() + p * 8);
        }
        const auto got = encode_image(g2.view(), w, cfg);
        ASSERT_EQ(got.entries.size(), ref.entries.size());
        for (std::size_t i = 0; i < got.entries.size(); ++i) {
            EXPECT_EQ(got.entries[i].dim, ref.entries[i].dim);
            EXPECT_LE(std::abs(int(got.entries[i].qval) - int(ref.entries[i].qval)), 1);
        }
    }
}

TEST(EncodeBatch, MatchesSequential) {
    std::mt19937_64 rng(41);
    std::normal_distribution<float> g(0.0f, 1.0f);
    const auto w = random_weights(rng, 8, 64, 8);
    const std::uint32_t images = 13, patches = 5;
    std::vector<float> values(images * patches * 8);
    for (auto& x : values) x = g(rng);
    const EncodeConfig cfg{8, 16, 100.0};
    const auto batch = encode_batch(values, images, patches, w, cfg);
    ASSERT_EQ(batch.size(), images);
    for (std::uint32_t i = 0; i < images; ++i) {
        const PatchMatrixView view{patches, 8,
                                   std::span<const float>(values).subspan(i * patches * 8, patches * 8)};
        EXPECT_EQ(batch[i], encode_image(view, w, cfg));
    }
}

TEST(EncodeBatch, SizeMismatch) {
    const auto w = identity(4, 2);
    std::vector<float> values(4 * 3 - 1);
    EXPECT_THROW(encode_batch(values, 3, 1, w, {}), Error);
}
