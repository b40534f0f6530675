#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "visword/dense.hpp"
#include "visword/index.hpp"
#include "visword/sparse.hpp"

namespace visword {

/// `doc_id` is the index id for sparse results and the gallery row for
/// dense_topk.
struct ScoredHit {
    DocId doc_id = 0;
    std::string name;
    double score = 0.0;

    friend bool operator==(const ScoredHit&, const ScoredHit&) = default;
};

/// Hits are ordered by score descending, then doc_id ascending.
struct SearchResult {
    std::vector<ScoredHit> hits;
    /// Postings whose contribution was scored (all of them for exhaustive
    /// traversal, the non-skipped ones for WAND).
    std::uint64_t postings_touched = 0;
    /// Multiply-adds spent on dense vectors (rows scored x D).
    std::uint64_t dense_ops = 0;
};

/// Orders hits by score desc, then id asc.
bool hit_before(const ScoredHit& a, const ScoredHit& b) noexcept;

/// BM25 score of one live document. The query contributes only the presence
/// of its words; activation magnitudes are ignored.
double bm25_score(const InvertedIndex& index, const SparseDoc& query, DocId doc_id);

/// Exact top-K by term-at-a-time accumulation over the query's posting
/// lists. Documents sharing no word with the query are never touched and
/// never returned.
SearchResult query_topk(const InvertedIndex& index, const SparseDoc& query, std::uint32_t k);

/// Exact top-K with WAND pruning. Returns the same list as query_topk
/// (bit-identical scores) while skipping documents whose score upper bound
/// cannot reach the current K-th score.
SearchResult wand_topk(const InvertedIndex& index, const SparseDoc& query, std::uint32_t k);

/// Exact cosine top-K over all gallery rows. Zero-norm rows are excluded.
SearchResult dense_topk(const DenseMatrix& gallery, std::span<const float> query, std::uint32_t k);

/// Sparse candidate generation (query_topk with `candidates`) followed by a
/// dense cosine rerank of just those candidates, truncated to `final_k`.
SearchResult two_stage(const InvertedIndex& index, const DenseMatrix& gallery,
                       const SparseDoc& query_sparse, std::span<const float> query_dense,
                       std::uint32_t candidates, std::uint32_t final_k, bool use_wand = false);

}  // namespace visword
