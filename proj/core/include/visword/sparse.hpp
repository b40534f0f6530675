#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace visword {

/// Identifier of a visual word, i.e. one latent dimension of the encoder.
using WordId = std::uint32_t;
/// Dense ordinal assigned to a document when it enters an index.
using DocId = std::uint32_t;

inline constexpr double kDefaultQuantScale = 100.0;
inline constexpr std::uint32_t kMaxQuantValue = 65535;

struct SparseEntry {
    WordId dim = 0;
    double value = 0.0;

    friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
};

/// Real-valued sparse vector over a vocabulary of `vocab` words.
/// Entries are kept sorted by `dim` with no duplicates.
struct SparseVector {
    std::uint32_t vocab = 0;
    std::vector<SparseEntry> entries;

    std::size_t nnz() const noexcept { return entries.size(); }
    bool empty() const noexcept { return entries.empty(); }

    friend bool operator==(const SparseVector&, const SparseVector&) = default;
};

struct QuantizedEntry {
    WordId dim = 0;
    std::uint16_t qval = 0;

    friend bool operator==(const QuantizedEntry&, const QuantizedEntry&) = default;
};

/// One image as a bag of visual words with quantized activations.
///
/// Invariants: dims strictly increasing, every qval >= 1, and `doc_len`
/// equals the sum of dequantized values.
struct SparseDoc {
    std::vector<QuantizedEntry> entries;
    double doc_len = 0.0;
    double quant_scale = kDefaultQuantScale;

    std::size_t nnz() const noexcept { return entries.size(); }
    bool empty() const noexcept { return entries.empty(); }

    double dequantize(std::uint16_t qval) const noexcept {
        return static_cast<double>(qval) / quant_scale;
    }

    friend bool operator==(const SparseDoc&, const SparseDoc&) = default;
};

/// Builds a SparseDoc from (dim, qval) pairs, sorting them and computing
/// doc_len. Throws on duplicate dims or zero qvals.
SparseDoc make_doc(std::vector<QuantizedEntry> entries,
                   double quant_scale = kDefaultQuantScale);

/// Throws unless `doc` satisfies the SparseDoc invariants against `vocab`.
void validate_doc(const SparseDoc& doc, std::uint32_t vocab);

/// A collection of documents sharing one vocabulary and quantization scale,
/// matching the on-disk sparse-doc file.
struct DocSet {
    std::uint32_t vocab = 0;
    double quant_scale = kDefaultQuantScale;
    std::vector<SparseDoc> docs;

    friend bool operator==(const DocSet&, const DocSet&) = default;
};

}  // namespace visword
