#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "visword/dense.hpp"
#include "visword/index.hpp"
#include "visword/search.hpp"
#include "visword/sparse.hpp"

namespace visword {

inline const std::vector<std::uint32_t> kDefaultRecallKs = {1, 5, 10, 20, 50, 100, 200};

/// Name -> opaque class label.
class LabeledSplit {
  public:
    LabeledSplit() = default;
    explicit LabeledSplit(std::unordered_map<std::string, std::string> labels)
        : labels_(std::move(labels)) {}

    /// Parses `name,label` lines. A first line of exactly `name,label` is
    /// treated as a header.
    static LabeledSplit parse_csv(const std::string& text);
    static LabeledSplit read_csv(const std::filesystem::path& path);

    void set(const std::string& name, const std::string& label) { labels_[name] = label; }
    const std::string* label(const std::string& name) const;
    std::size_t size() const noexcept { return labels_.size(); }

  private:
    std::unordered_map<std::string, std::string> labels_;
};

/// Ranked result list for one query, the unit of the results file.
struct QueryResult {
    std::string query;
    std::vector<ScoredHit> hits;
    std::uint64_t postings_touched = 0;
    std::uint64_t dense_ops = 0;
};

/// One JSON object per line: {query, hits: [{name, score}], postings_touched, dense_ops}.
std::string to_jsonl(const std::vector<QueryResult>& results);
std::vector<QueryResult> parse_jsonl(const std::string& text);
void write_results(const std::filesystem::path& path, const std::vector<QueryResult>& results);
std::vector<QueryResult> read_results(const std::filesystem::path& path);

/// R@K: share of queries with at least one same-label hit among the first K.
/// A hit carrying the query's own name is skipped and unlabeled hits never
/// count as relevant. A query with no hits is a miss at every K. Throws if a
/// query has no label.
std::map<std::uint32_t, double> recall_at_k(const std::vector<QueryResult>& results,
                                            const LabeledSplit& split,
                                            const std::vector<std::uint32_t>& ks = kDefaultRecallKs);

enum class Method { sparse, wand, dense, two_stage };

std::string to_string(Method m);
Method parse_method(const std::string& s);

/// Queries as parallel sparse docs and dense rows sharing names.
struct QuerySet {
    std::vector<std::string> names;
    std::vector<SparseDoc> sparse;
    DenseMatrix dense;
};

struct BenchmarkReport {
    Method method = Method::sparse;
    std::uint32_t candidates = 0;
    std::uint32_t queries = 0;
    std::map<std::uint32_t, double> recall;
    double mean_postings_touched = 0.0;
    double mean_dense_ops = 0.0;
};

/// Runs every query through `method` and scores it against `split`.
/// `candidates` is the stage-1 depth for two_stage and the list depth for the
/// single-stage methods. Two-stage returns the whole reranked pool.
BenchmarkReport run_benchmark(const InvertedIndex& index, const DenseMatrix& gallery,
                              const QuerySet& queries, const LabeledSplit& split, Method method,
                              std::uint32_t candidates,
                              const std::vector<std::uint32_t>& ks = kDefaultRecallKs);

/// Runs a whole query set through one method, in parallel, preserving order.
std::vector<QueryResult> run_queries(const InvertedIndex& index, const DenseMatrix* gallery,
                                     const QuerySet& queries, Method method,
                                     std::uint32_t candidates, std::uint32_t final_k);

std::string report_to_json(const std::vector<BenchmarkReport>& reports);

}  // namespace visword
