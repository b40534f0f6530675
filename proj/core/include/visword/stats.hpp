#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "visword/index.hpp"

namespace visword {

/// Least-squares line through (log rank, log df): log df = log A - alpha log rank.
struct PowerLawFit {
    double alpha = 0.0;
    double log_amplitude = 0.0;
    double r_squared = 0.0;
    /// Fitting range, 1-based and inclusive.
    std::uint32_t first_rank = 0;
    std::uint32_t last_rank = 0;
};

/// Fits ranks whose value is >= min_df after sorting `df` descending.
/// Returns nullopt when fewer than two ranks qualify. When every fitted value is
/// identical the fit is exact and r_squared is reported as 1.
std::optional<PowerLawFit> fit_power_law(std::span<const std::uint32_t> df,
                                         std::uint32_t min_df = 1);

struct CorpusStats {
    std::uint32_t n_docs = 0;
    std::uint32_t vocab = 0;
    std::uint32_t v_active = 0;
    double mean_nnz = 0.0;
    /// Share of active words with df > N/2.
    double head_fraction = 0.0;
    /// Share of active words with IDF > 2.
    double discriminative_fraction = 0.0;
    std::vector<std::uint32_t> df_ranked;
    std::optional<PowerLawFit> fit;
};

/// Requires N >= 2.
CorpusStats compute_stats(const InvertedIndex& index);

/// Expected active vocabulary after N documents of L0 uniformly drawn words:
/// D_s * (1 - (1 - L0/D_s)^N).
double coupon_collector_vactive(std::uint64_t n_docs, std::uint32_t l0, std::uint32_t vocab);

struct CostModelInput {
    std::uint64_t n_docs = 0;
    std::uint32_t l0 = 16;
    std::uint32_t vocab = 18432;
    double v_active = 0.0;
    double c = 1.0;  ///< operations per posting entry
};

/// Expected postings scored per query: C * L0^2 * N / V_active.
double predicted_query_ops(const CostModelInput& m);

struct MemoryModel {
    std::uint64_t dense_bytes = 0;      ///< 4 D per vector (float32)
    std::uint64_t sparse_bytes = 0;     ///< 6 L0: u32 word id + u16 value
    std::uint64_t two_stage_bytes = 0;  ///< dense + sparse
    double compression = 0.0;           ///< dense / sparse; infinite when L0 = 0
    bool degenerate = false;            ///< L0 = 0
};

MemoryModel memory_model(std::uint32_t dim, std::uint32_t l0);

}  // namespace visword
