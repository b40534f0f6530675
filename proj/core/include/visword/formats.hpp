#pragma once

// Binary file formats exchanged with the feature extractor and between CLI
// stages. All integers and floats are little-endian; every file starts with a
// 4-byte magic followed by a u32 version (currently 1).
//
//   BMVF  patch features   u32 image_count, u32 P, u32 D, then f32[image_count*P*D]
//   BMVW  encoder weights  u32 D, u32 eD, u32 k, then W_e f32[eD*D] row-major, b_e f32[eD]
//   BMVS  sparse docs      u32 vocab, u32 quant_scale, u32 doc_count,
//                          then per doc u32 nnz, nnz x (u32 dim, u16 qval)
//   BMVD  dense embeddings u32 N, u32 D, then f32[N*D] row-major, then N names
//
// Names are stored as u32 byte length followed by UTF-8 bytes.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "visword/dense.hpp"
#include "visword/encode.hpp"
#include "visword/sparse.hpp"

namespace visword {

inline constexpr std::uint32_t kFormatVersion = 1;

struct FeatureFile {
    std::uint32_t image_count = 0;
    std::uint32_t patches = 0;
    std::uint32_t dim = 0;
    std::vector<float> values;

    PatchMatrixView image(std::uint32_t i) const {
        const std::size_t per = static_cast<std::size_t>(patches) * dim;
        return {patches, dim, std::span<const float>(values).subspan(i * per, per)};
    }
};

std::string encode_features(const FeatureFile& f);
FeatureFile decode_features(std::string bytes);
void write_features(const std::filesystem::path& path, const FeatureFile& f);
FeatureFile read_features(const std::filesystem::path& path);

std::string encode_weights(const SaeEncoderWeights& w);
SaeEncoderWeights decode_weights(std::string bytes);
void write_weights(const std::filesystem::path& path, const SaeEncoderWeights& w);
SaeEncoderWeights read_weights(const std::filesystem::path& path);

/// Payload bytes for one doc in the sparse-doc file, excluding its nnz prefix.
inline constexpr std::size_t sparse_payload_bytes(std::size_t nnz) { return 6 * nnz; }

std::string encode_docs(const DocSet& set);
DocSet decode_docs(std::string bytes);
void write_docs(const std::filesystem::path& path, const DocSet& set);
DocSet read_docs(const std::filesystem::path& path);

std::string encode_dense(const DenseMatrix& m);
DenseMatrix decode_dense(std::string bytes);
void write_dense(const std::filesystem::path& path, const DenseMatrix& m);
DenseMatrix read_dense(const std::filesystem::path& path);

/// One name per line; trailing CR is stripped and blank lines are skipped.
std::vector<std::string> read_names(const std::filesystem::path& path);
void write_names(const std::filesystem::path& path, const std::vector<std::string>& names);

std::string read_file(const std::filesystem::path& path);

/// Writes `bytes` to a temp file next to `path`, then renames it into place,
/// so readers never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, const std::string& bytes);

}  // namespace visword
