#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "visword/dense.hpp"
#include "visword/eval.hpp"
#include "visword/index.hpp"

namespace visword {

struct BenchConfig {
    std::vector<Method> modes;
    std::uint32_t candidates = 200;  ///< K for sparse modes and stage 1
    std::uint32_t final_k = 10;      ///< returned hits for dense and two-stage
    std::uint32_t warmup = 1;        ///< untimed passes over the query set
};

struct ModeTiming {
    Method mode = Method::sparse;
    std::uint32_t queries = 0;
    double median_us = 0.0;
    double p95_us = 0.0;
    double mean_postings_touched = 0.0;
    double mean_dense_ops = 0.0;
};

struct BenchReport {
    std::uint32_t n_docs = 0;
    std::uint32_t vocab = 0;
    std::uint32_t v_active = 0;
    double mean_nnz = 0.0;
    /// C * L0^2 * N / V_active with C = 1 and L0 the mean doc nnz.
    double predicted_postings = 0.0;
    std::vector<ModeTiming> modes;
};

/// Times each query individually on one thread, mode by mode. Throws if
/// `cfg.modes` is empty.
BenchReport run_bench(const InvertedIndex& index, const DenseMatrix& gallery,
                      const QuerySet& queries, const BenchConfig& cfg);

std::string bench_to_json(const BenchReport& report);

/// Nearest-rank percentile of `samples` (p in [0, 100]); 0 for no samples.
double percentile(std::vector<double> samples, double p);

}  // namespace visword
