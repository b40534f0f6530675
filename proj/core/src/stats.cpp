#include "visword/stats.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "visword/error.hpp"

namespace visword {

std::optional<PowerLawFit> fit_power_law(std::span<const std::uint32_t> df, std::uint32_t min_df) {
    std::vector<std::uint32_t> ranked(df.begin(), df.end());
    std::sort(ranked.begin(), ranked.end(), std::greater<>());
    const std::uint32_t floor = std::max<std::uint32_t>(min_df, 1);
    std::size_t count = 0;
    while (count < ranked.size() && ranked[count] >= floor) ++count;
    if (count < 2) return std::nullopt;

    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        mx += std::log(static_cast<double>(i + 1));
        my += std::log(static_cast<double>(ranked[i]));
    }
    mx /= static_cast<double>(count);
    my /= static_cast<double>(count);

    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const double dx = std::log(static_cast<double>(i + 1)) - mx;
        const double dy = std::log(static_cast<double>(ranked[i])) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    const double slope = sxy / sxx;

    PowerLawFit fit;
    fit.alpha = -slope;
    fit.log_amplitude = my - slope * mx;
    fit.first_rank = 1;
    fit.last_rank = static_cast<std::uint32_t>(count);
    if (ranked[0] == ranked[count - 1]) {
        fit.r_squared = 1.0;
    } else {
        double ss_res = 0.0;
        for (std::size_t i = 0; i < count; ++i) {
            const double x = std::log(static_cast<double>(i + 1));
            const double r = std::log(static_cast<double>(ranked[i])) - (fit.log_amplitude + slope * x);
            ss_res += r * r;
        }
        fit.r_squared = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
    }
    return fit;
}

CorpusStats compute_stats(const InvertedIndex& index) {
    auto lock = index.read_lock();
    const std::uint32_t n = index.size();
    if (n < 2) raise(ErrorCode::invalid_argument, "corpus statistics need at least two documents");

    CorpusStats s;
    s.n_docs = n;
    s.vocab = index.vocab();
    s.mean_nnz = static_cast<double>(index.total_postings()) / n;

    std::uint32_t head = 0;
    std::uint32_t discriminative = 0;
    for (WordId w = 0; w < index.vocab(); ++w) {
        const std::uint32_t df = index.df(w);
        if (df == 0) continue;
        s.df_ranked.push_back(df);
        if (2ull * df > n) ++head;
        if (bm25_idf(n, df) > 2.0) ++discriminative;
    }
    std::sort(s.df_ranked.begin(), s.df_ranked.end(), std::greater<>());
    s.v_active = static_cast<std::uint32_t>(s.df_ranked.size());
    if (s.v_active > 0) {
        s.head_fraction = static_cast<double>(head) / s.v_active;
        s.discriminative_fraction = static_cast<double>(discriminative) / s.v_active;
    }
    s.fit = fit_power_law(s.df_ranked);
    return s;
}

double coupon_collector_vactive(std::uint64_t n_docs, std::uint32_t l0, std::uint32_t vocab) {
    if (vocab == 0) raise(ErrorCode::invalid_argument, "vocabulary must be positive");
    if (l0 > vocab) raise(ErrorCode::invalid_argument, "L0 cannot exceed the vocabulary");
    if (n_docs == 0 || l0 == 0) return 0.0;
    if (n_docs == 1) return static_cast<double>(l0);
    // (1 - p)^N via exp(N log1p(-p)) keeps precision for small p.
    const double untouched = l0 == vocab ? 0.0
                                         : std::exp(static_cast<double>(n_docs) *
                                                    std::log1p(-static_cast<double>(l0) / vocab));
    return vocab * (1.0 - untouched);
}

double predicted_query_ops(const CostModelInput& m) {
    if (!(m.v_active > 0.0)) raise(ErrorCode::invalid_argument, "V_active must be positive");
    const double l0 = m.l0;
    return m.c * l0 * l0 * static_cast<double>(m.n_docs) / m.v_active;
}

MemoryModel memory_model(std::uint32_t dim, std::uint32_t l0) {
    if (dim == 0) raise(ErrorCode::invalid_argument, "dimension must be positive");
    MemoryModel m;
    m.dense_bytes = 4ull * dim;
    m.sparse_bytes = 6ull * l0;
    m.two_stage_bytes = m.dense_bytes + m.sparse_bytes;
    m.degenerate = l0 == 0;
    m.compression = m.degenerate ? std::numeric_limits<double>::infinity()
                                 : static_cast<double>(m.dense_bytes) / m.sparse_bytes;
    return m;
}

}  // namespace visword
