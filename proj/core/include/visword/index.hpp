#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "visword/sparse.hpp"

namespace visword {

struct Bm25Params {
    float k1 = 1.5f;
    float b = 0.75f;

    friend bool operator==(const Bm25Params&, const Bm25Params&) = default;
};

void validate_params(const Bm25Params& p);

/// IDF = ln(1 + (N - df + 0.5) / (df + 0.5)).
double bm25_idf(std::uint64_t n_docs, std::uint64_t df);

/// One saturated term contribution:
/// idf * tf * (k1 + 1) / (tf + k1 * (1 - b + b * doc_len / avg_dl)).
double bm25_term(double idf, double tf, double doc_len, double avg_dl, const Bm25Params& p);

struct Posting {
    DocId doc_id = 0;
    float tf = 0.0f;

    friend bool operator==(const Posting&, const Posting&) = default;
};

/// BM25 inverted index over visual words.
///
/// Documents get dense ordinal ids in insertion order. Deleted ids are never
/// reused, so `slot_count()` may exceed `size()`. Deletion removes postings
/// eagerly.
///
/// Thread safety: single writer, many readers. `insert`, `remove` and
/// `freeze` take an exclusive lock; the search functions hold a shared lock
/// (via `read_lock()`) for the duration of a query. Plain accessors do not
/// lock; call them under `read_lock()` if a writer may be active.
class InvertedIndex {
  public:
    explicit InvertedIndex(std::uint32_t vocab = 0, Bm25Params params = {});

    InvertedIndex(const InvertedIndex& other);
    InvertedIndex& operator=(const InvertedIndex& other);
    InvertedIndex(InvertedIndex&& other) noexcept;
    InvertedIndex& operator=(InvertedIndex&& other) noexcept;

    /// Builds from scratch; ids follow the order of `docs`. Every document
    /// must fit the vocabulary.
    static InvertedIndex build(std::uint32_t vocab, std::span<const SparseDoc> docs,
                               std::span<const std::string> names, Bm25Params params = {});
    static InvertedIndex build(const DocSet& set, std::span<const std::string> names,
                               Bm25Params params = {});

    /// Appends one posting per word of `doc`; cost is O(nnz) plus the
    /// upper-bound refresh of the touched lists.
    DocId insert(const SparseDoc& doc, const std::string& name);

    /// Removes every posting of `id`. Throws unknown_doc if `id` was never
    /// assigned or is already deleted.
    void remove(DocId id);

    /// Materializes per-posting BM25 weights. A frozen index rejects
    /// mutations.
    void freeze();
    bool frozen() const noexcept { return s_.frozen; }

    std::uint32_t vocab() const noexcept { return s_.vocab; }
    const Bm25Params& params() const noexcept { return s_.params; }

    /// Live document count N.
    std::uint32_t size() const noexcept { return s_.live; }
    /// Number of ids ever assigned (live and deleted).
    std::uint32_t slot_count() const noexcept { return static_cast<std::uint32_t>(s_.names.size()); }

    bool alive(DocId id) const noexcept { return id < s_.alive.size() && s_.alive[id] != 0; }
    double avg_doc_len() const noexcept { return s_.avg_len; }
    double total_doc_len() const noexcept { return s_.total_len; }
    float doc_len(DocId id) const;
    const std::string& name(DocId id) const;
    std::optional<DocId> find(const std::string& name) const;
    /// Words of a live document in ascending order.
    const std::vector<WordId>& doc_words(DocId id) const;

    std::uint32_t df(WordId w) const;
    double idf(WordId w) const;
    std::span<const Posting> postings(WordId w) const;
    /// Per-posting weights, parallel to postings(w); empty unless frozen.
    std::span<const double> frozen_weights(WordId w) const;
    float max_tf(WordId w) const;
    /// Smallest doc_len over live documents (0 when empty).
    float min_doc_len() const noexcept { return s_.min_len; }

    /// Sum of df over the vocabulary, equal to the sum of live nnz.
    std::uint64_t total_postings() const noexcept { return s_.total_postings; }

    /// Live doc ids in ascending order.
    std::vector<DocId> live_ids() const;

    std::shared_lock<std::shared_mutex> read_lock() const { return std::shared_lock(mu_); }

    /// Index file (BMVI). Live documents are renumbered densely in id order
    /// on save, which preserves every ranking since the relative order of ids
    /// (the tie-breaker) is unchanged.
    std::string serialize() const;
    static InvertedIndex deserialize(std::string bytes);
    void save(const std::filesystem::path& path) const;
    static InvertedIndex load(const std::filesystem::path& path);

  private:
    void check_mutable() const;
    void refresh_max_tf(WordId w);
    void refresh_min_len();
    void refresh_avg_len();
    void compute_frozen_weights();
    DocId insert_unlocked(const SparseDoc& doc, const std::string& name);

    struct State {
        std::uint32_t vocab = 0;
        Bm25Params params;
        bool frozen = false;

        std::vector<std::vector<Posting>> lists;
        std::vector<float> max_tf;
        std::vector<std::vector<double>> weights;

        std::vector<std::string> names;
        std::vector<float> doc_len;
        std::vector<std::uint8_t> alive;
        std::vector<std::vector<WordId>> doc_words;
        std::unordered_map<std::string, DocId> by_name;

        std::uint32_t live = 0;
        double total_len = 0.0;
        double avg_len = 0.0;
        float min_len = 0.0f;
        std::uint64_t total_postings = 0;
    };

    State s_;
    mutable std::shared_mutex mu_;
};

}  // namespace visword
