#include "visword/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <json.hpp>

#include "visword/error.hpp"
#include "visword/search.hpp"
#include "visword/stats.hpp"

namespace visword {

double percentile(std::vector<double> samples, double p) {
    if (samples.empty()) return 0.0;
    std::sort(samples.begin(), samples.end());
    const double rank = std::ceil(std::clamp(p, 0.0, 100.0) / 100.0 * samples.size());
    const auto idx = static_cast<std::size_t>(std::max(1.0, rank)) - 1;
    return samples[std::min(idx, samples.size() - 1)];
}

BenchReport run_bench(const InvertedIndex& index, const DenseMatrix& gallery,
                      const QuerySet& queries, const BenchConfig& cfg) {
    if (cfg.modes.empty()) raise(ErrorCode::invalid_argument, "bench needs at least one mode");
    if (cfg.candidates == 0 || cfg.final_k == 0 || cfg.final_k > cfg.candidates) {
        raise(ErrorCode::invalid_argument, "need 1 <= final_k <= candidates");
    }

    BenchReport report;
    {
        auto lock = index.read_lock();
        report.n_docs = index.size();
        report.vocab = index.vocab();
        for (WordId w = 0; w < index.vocab(); ++w) report.v_active += index.df(w) > 0;
        report.mean_nnz = index.size() == 0
                              ? 0.0
                              : static_cast<double>(index.total_postings()) / index.size();
    }
    if (report.v_active > 0) {
        report.predicted_postings =
            report.mean_nnz * report.mean_nnz * report.n_docs / report.v_active;
    }

    const std::size_t nq = queries.names.size();
    std::vector<std::span<const float>> dense_rows(nq);
    for (std::size_t i = 0; i < nq; ++i) {
        if (auto row = queries.dense.find(queries.names[i])) dense_rows[i] = queries.dense.row(*row);
    }

    for (Method mode : cfg.modes) {
        const bool needs_dense = mode == Method::dense || mode == Method::two_stage;
        auto run_one = [&](std::size_t i) -> SearchResult {
            if (needs_dense && dense_rows[i].empty()) {
                raise(ErrorCode::not_found,
                      "query '" + queries.names[i] + "' has no dense embedding");
            }
            switch (mode) {
                case Method::sparse: return query_topk(index, queries.sparse.at(i), cfg.candidates);
                case Method::wand: return wand_topk(index, queries.sparse.at(i), cfg.candidates);
                case Method::dense: return dense_topk(gallery, dense_rows[i], cfg.final_k);
                case Method::two_stage:
                    return two_stage(index, gallery, queries.sparse.at(i), dense_rows[i],
                                     cfg.candidates, cfg.final_k);
            }
            return {};
        };

        for (std::uint32_t pass = 0; pass < cfg.warmup; ++pass) {
            for (std::size_t i = 0; i < nq; ++i) (void)run_one(i);
        }

        ModeTiming t;
        t.mode = mode;
        t.queries = static_cast<std::uint32_t>(nq);
        std::vector<double> micros;
        micros.reserve(nq);
        for (std::size_t i = 0; i < nq; ++i) {
            const auto start = std::chrono::steady_clock::now();
            const SearchResult r = run_one(i);
            const auto stop = std::chrono::steady_clock::now();
            micros.push_back(std::chrono::duration<double, std::micro>(stop - start).count());
            t.mean_postings_touched += static_cast<double>(r.postings_touched);
            t.mean_dense_ops += static_cast<double>(r.dense_ops);
        }
        if (nq > 0) {
            t.mean_postings_touched /= static_cast<double>(nq);
            t.mean_dense_ops /= static_cast<double>(nq);
        }
        t.median_us = percentile(micros, 50.0);
        t.p95_us = percentile(micros, 95.0);
        report.modes.push_back(t);
    }
    return report;
}

std::string bench_to_json(const BenchReport& report) {
    using nlohmann::json;
    json modes = json::array();
    for (const auto& m : report.modes) {
        modes.push_back({{"mode", to_string(m.mode)},
                         {"queries", m.queries},
                         {"median_us", m.median_us},
                         {"p95_us", m.p95_us},
                         {"mean_postings_touched", m.mean_postings_touched},
                         {"mean_dense_ops", m.mean_dense_ops}});
    }
    json out = {{"n_docs", report.n_docs},
                {"vocab", report.vocab},
                {"v_active", report.v_active},
                {"mean_nnz", report.mean_nnz},
                {"predicted_postings", report.predicted_postings},
                {"modes", std::move(modes)}};
    return out.dump(2) + "\n";
}

}  // namespace visword
