#include "visword/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "visword/error.hpp"

namespace visword {

bool hit_before(const ScoredHit& a, const ScoredHit& b) noexcept {
    if (a.score != b.score) return a.score > b.score;
    return a.doc_id < b.doc_id;
}

namespace {

struct Candidate {
    double score;
    DocId id;
};

bool candidate_before(const Candidate& a, const Candidate& b) noexcept {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
}

void check_k(std::uint32_t k) {
    if (k == 0) raise(ErrorCode::invalid_argument, "K must be at least 1");
}

void check_query(const InvertedIndex& index, const SparseDoc& query) {
    validate_doc(query, index.vocab());
}

// Per-word scoring context. Contributions are computed identically by every
// search path so that sums taken in the same word order are bit-identical.
struct TermScorer {
    const InvertedIndex& index;
    WordId word;
    std::span<const Posting> list;
    std::span<const double> weights;
    double idf;

    TermScorer(const InvertedIndex& ix, WordId w)
        : index(ix), word(w), list(ix.postings(w)), weights(ix.frozen_weights(w)),
          idf(bm25_idf(ix.size(), list.size())) {}

    double at(std::size_t pos) const {
        if (!weights.empty()) return weights[pos];
        const Posting& p = list[pos];
        return bm25_term(idf, p.tf, index.doc_len(p.doc_id), index.avg_doc_len(), index.params());
    }

    // Largest contribution any posting of this word can make: the highest tf
    // paired with the shortest live document.
    double upper_bound() const {
        return bm25_term(idf, index.max_tf(word), index.min_doc_len(), index.avg_doc_len(),
                         index.params());
    }
};

std::vector<ScoredHit> to_hits(const InvertedIndex& index, std::vector<Candidate> cands,
                               std::uint32_t k) {
    if (cands.size() > k) {
        std::nth_element(cands.begin(), cands.begin() + k, cands.end(), candidate_before);
        cands.resize(k);
    }
    std::sort(cands.begin(), cands.end(), candidate_before);
    std::vector<ScoredHit> hits;
    hits.reserve(cands.size());
    for (const auto& c : cands) hits.push_back({c.id, index.name(c.id), c.score});
    return hits;
}

}  // namespace

double bm25_score(const InvertedIndex& index, const SparseDoc& query, DocId doc_id) {
    auto lock = index.read_lock();
    check_query(index, query);
    if (!index.alive(doc_id)) {
        raise(ErrorCode::unknown_doc, "id " + std::to_string(doc_id) + " is not live");
    }
    double score = 0.0;
    for (const auto& e : query.entries) {
        TermScorer term(index, e.dim);
        auto it = std::lower_bound(term.list.begin(), term.list.end(), doc_id,
                                   [](const Posting& p, DocId d) { return p.doc_id < d; });
        if (it == term.list.end() || it->doc_id != doc_id) continue;
        score += term.at(static_cast<std::size_t>(it - term.list.begin()));
    }
    return score;
}

SearchResult query_topk(const InvertedIndex& index, const SparseDoc& query, std::uint32_t k) {
    check_k(k);
    auto lock = index.read_lock();
    check_query(index, query);
    SearchResult result;
    if (query.empty()) return result;

    std::vector<double> acc(index.slot_count(), 0.0);
    std::vector<DocId> touched;
    for (const auto& e : query.entries) {
        TermScorer term(index, e.dim);
        for (std::size_t pos = 0; pos < term.list.size(); ++pos) {
            const DocId d = term.list[pos].doc_id;
            if (acc[d] == 0.0) touched.push_back(d);
            acc[d] += term.at(pos);
        }
        result.postings_touched += term.list.size();
    }

    std::vector<Candidate> cands;
    cands.reserve(touched.size());
    for (DocId d : touched) cands.push_back({acc[d], d});
    result.hits = to_hits(index, std::move(cands), k);
    return result;
}

SearchResult wand_topk(const InvertedIndex& index, const SparseDoc& query, std::uint32_t k) {
    check_k(k);
    auto lock = index.read_lock();
    check_query(index, query);
    SearchResult result;

    constexpr DocId kEnd = std::numeric_limits<DocId>::max();
    struct Cursor {
        TermScorer term;
        std::size_t pos = 0;
        double ub = 0.0;

        DocId doc() const { return pos < term.list.size() ? term.list[pos].doc_id : kEnd; }

        void seek(DocId target) {
            auto it = std::lower_bound(term.list.begin() + static_cast<std::ptrdiff_t>(pos),
                                       term.list.end(), target,
                                       [](const Posting& p, DocId d) { return p.doc_id < d; });
            pos = static_cast<std::size_t>(it - term.list.begin());
        }
    };

    // Cursors stay in query-word order; `order` is re-sorted by current doc.
    std::vector<Cursor> cursors;
    for (const auto& e : query.entries) {
        TermScorer term(index, e.dim);
        if (term.list.empty()) continue;
        const double ub = term.upper_bound();
        cursors.push_back({term, 0, ub});
    }
    std::vector<std::size_t> order(cursors.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    // Worst retained candidate on top.
    std::priority_queue<Candidate, std::vector<Candidate>, decltype(&candidate_before)> heap(
        candidate_before);
    auto threshold = [&] {
        return heap.size() < k ? -std::numeric_limits<double>::infinity() : heap.top().score;
    };

    for (;;) {
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return cursors[a].doc() < cursors[b].doc();
        });

        // Pivot: first position where the accumulated upper bound can beat
        // the threshold. The relative slack absorbs summation-order rounding.
        const double theta = threshold();
        double bound = 0.0;
        std::size_t pivot = order.size();
        for (std::size_t i = 0; i < order.size(); ++i) {
            const Cursor& c = cursors[order[i]];
            if (c.doc() == kEnd) break;
            bound += c.ub;
            if (bound * (1.0 + 1e-9) > theta) {
                pivot = i;
                break;
            }
        }
        if (pivot == order.size()) break;

        const DocId pivot_doc = cursors[order[pivot]].doc();
        if (cursors[order[0]].doc() == pivot_doc) {
            double score = 0.0;
            for (auto& c : cursors) {
                if (c.doc() != pivot_doc) continue;
                score += c.term.at(c.pos);
                ++c.pos;
                ++result.postings_touched;
            }
            Candidate cand{score, pivot_doc};
            if (heap.size() < k) {
                heap.push(cand);
            } else if (candidate_before(cand, heap.top())) {
                heap.pop();
                heap.push(cand);
            }
        } else {
            for (std::size_t i = 0; i < pivot; ++i) cursors[order[i]].seek(pivot_doc);
        }
    }

    std::vector<Candidate> cands;
    cands.reserve(heap.size());
    while (!heap.empty()) {
        cands.push_back(heap.top());
        heap.pop();
    }
    result.hits = to_hits(index, std::move(cands), k);
    return result;
}

SearchResult dense_topk(const DenseMatrix& gallery, std::span<const float> query, std::uint32_t k) {
    check_k(k);
    if (query.size() != gallery.dim()) {
        raise(ErrorCode::shape_mismatch, "query has dim " + std::to_string(query.size()) +
                                             ", gallery has " + std::to_string(gallery.dim()));
    }
    const double qnorm = l2_norm(query);
    if (!(qnorm > 0.0)) raise(ErrorCode::invalid_argument, "dense query has zero norm");

    std::vector<Candidate> cands;
    cands.reserve(gallery.rows());
    for (std::uint32_t i = 0; i < gallery.rows(); ++i) {
        const double rnorm = gallery.norm(i);
        if (!(rnorm > 0.0)) continue;
        cands.push_back({dot(gallery.row(i), query) / (rnorm * qnorm), i});
    }
    if (cands.size() > k) {
        std::nth_element(cands.begin(), cands.begin() + k, cands.end(), candidate_before);
        cands.resize(k);
    }
    std::sort(cands.begin(), cands.end(), candidate_before);

    SearchResult result;
    result.dense_ops = static_cast<std::uint64_t>(gallery.rows()) * gallery.dim();
    result.hits.reserve(cands.size());
    for (const auto& c : cands) result.hits.push_back({c.id, gallery.name(c.id), c.score});
    return result;
}

SearchResult two_stage(const InvertedIndex& index, const DenseMatrix& gallery,
                       const SparseDoc& query_sparse, std::span<const float> query_dense,
                       std::uint32_t candidates, std::uint32_t final_k, bool use_wand) {
    check_k(final_k);
    if (candidates < final_k) {
        raise(ErrorCode::invalid_argument, "candidate count must be at least final_k");
    }
    if (query_dense.size() != gallery.dim()) {
        raise(ErrorCode::shape_mismatch, "dense query has dim " + std::to_string(query_dense.size()) +
                                             ", gallery has " + std::to_string(gallery.dim()));
    }
    const double qnorm = l2_norm(query_dense);
    if (!(qnorm > 0.0)) raise(ErrorCode::invalid_argument, "dense query has zero norm");

    SearchResult stage1 = use_wand ? wand_topk(index, query_sparse, candidates)
                                   : query_topk(index, query_sparse, candidates);
    SearchResult result;
    result.postings_touched = stage1.postings_touched;

    std::vector<ScoredHit> reranked;
    reranked.reserve(stage1.hits.size());
    for (auto& hit : stage1.hits) {
        const auto row = gallery.find(hit.name);
        if (!row) {
            raise(ErrorCode::unknown_doc, "candidate '" + hit.name + "' has no dense embedding");
        }
        result.dense_ops += gallery.dim();
        const double rnorm = gallery.norm(*row);
        if (!(rnorm > 0.0)) continue;
        hit.score = dot(gallery.row(*row), query_dense) / (rnorm * qnorm);
        reranked.push_back(std::move(hit));
    }
    std::sort(reranked.begin(), reranked.end(), hit_before);
    if (reranked.size() > final_k) reranked.resize(final_k);
    result.hits = std::move(reranked);
    return result;
}

}  // namespace visword
