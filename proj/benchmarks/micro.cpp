#include <benchmark/benchmark.h>

#include <map>
#include <memory>
#include <random>

#include "visword/encode.hpp"
#include "visword/index.hpp"
#include "visword/search.hpp"
#include "visword/synth.hpp"

using namespace visword;

namespace {

struct Corpus {
    SyntheticCorpus data;
    InvertedIndex index;
};

// Built once per (N, zipf) and shared by every benchmark.
const Corpus& corpus(std::uint32_t n, bool zipf) {
    static std::map<std::pair<std::uint32_t, bool>, std::unique_ptr<Corpus>> cache;
    auto& slot = cache[{n, zipf}];
    if (!slot) {
        SyntheticSpec spec;
        spec.n_docs = n;
        spec.n_queries = 256;
        spec.vocab = 18432;
        spec.l0 = 16;
        spec.distribution = zipf ? WordDistribution::zipf : WordDistribution::uniform;
        spec.zipf_alpha = 1.0;
        spec.classes = 100;
        spec.class_words = 4;
        spec.dense_dim = 256;
        spec.seed = 1;
        auto data = generate_synthetic(spec);
        auto index = InvertedIndex::build(data.gallery, data.gallery_names);
        slot = std::make_unique<Corpus>(Corpus{std::move(data), std::move(index)});
    }
    return *slot;
}

void BM_QueryTopk(benchmark::State& state) {
    const auto& c = corpus(static_cast<std::uint32_t>(state.range(0)), state.range(1) != 0);
    std::size_t q = 0;
    std::uint64_t touched = 0;
    for (auto _ : state) {
        auto r = query_topk(c.index, c.data.queries.docs[q++ % c.data.queries.docs.size()], 200);
        touched += r.postings_touched;
        benchmark::DoNotOptimize(r);
    }
    state.counters["postings"] = benchmark::Counter(static_cast<double>(touched), benchmark::Counter::kAvgIterations);
}
BENCHMARK(BM_QueryTopk)->ArgsProduct({{10000, 100000}, {0, 1}})->Unit(benchmark::kMicrosecond);

void BM_WandTopk(benchmark::State& state) {
    const auto& c = corpus(static_cast<std::uint32_t>(state.range(0)), state.range(1) != 0);
    std::size_t q = 0;
    std::uint64_t touched = 0;
    for (auto _ : state) {
        auto r = wand_topk(c.index, c.data.queries.docs[q++ % c.data.queries.docs.size()],
                           static_cast<std::uint32_t>(state.range(2)));
        touched += r.postings_touched;
        benchmark::DoNotOptimize(r);
    }
    state.counters["postings"] = benchmark::Counter(static_cast<double>(touched), benchmark::Counter::kAvgIterations);
}
BENCHMARK(BM_WandTopk)->ArgsProduct({{10000, 100000}, {0, 1}, {10, 200}})->Unit(benchmark::kMicrosecond);

void BM_DenseTopk(benchmark::State& state) {
    const auto& c = corpus(static_cast<std::uint32_t>(state.range(0)), true);
    std::size_t q = 0;
    for (auto _ : state) {
        auto r = dense_topk(c.data.gallery_dense, c.data.query_dense.row(q++ % c.data.query_dense.rows()), 10);
        benchmark::DoNotOptimize(r);
    }
}
BENCHMARK(BM_DenseTopk)->Arg(10000)->Arg(100000)->Unit(benchmark::kMicrosecond);

void BM_TwoStage(benchmark::State& state) {
    const auto& c = corpus(static_cast<std::uint32_t>(state.range(0)), true);
    std::size_t q = 0;
    for (auto _ : state) {
        const std::size_t i = q++ % c.data.queries.docs.size();
        auto r = two_stage(c.index, c.data.gallery_dense, c.data.queries.docs[i], c.data.query_dense.row(i),
                           200, 10);
        benchmark::DoNotOptimize(r);
    }
}
BENCHMARK(BM_TwoStage)->Arg(10000)->Arg(100000)->Unit(benchmark::kMicrosecond);

void BM_Build(benchmark::State& state) {
    const auto& c = corpus(static_cast<std::uint32_t>(state.range(0)), true);
    for (auto _ : state) {
        auto index = InvertedIndex::build(c.data.gallery, c.data.gallery_names);
        benchmark::DoNotOptimize(index);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Build)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_EncodeImage(benchmark::State& state) {
    // D = 1152 backbone width, 16x expansion, 196 patches.
    const std::uint32_t dim = 1152, patches = 196;
    const std::uint32_t vocab = dim * static_cast<std::uint32_t>(state.range(0));
    std::mt19937_64 rng(2);
    std::normal_distribution<float> g(0.0f, 0.05f);
    SaeEncoderWeights w;
    w.dim = dim;
    w.vocab = vocab;
    w.k = 16;
    w.weights.resize(static_cast<std::size_t>(dim) * vocab);
    for (auto& v : w.weights) v = g(rng);
    w.bias.assign(vocab, 0.0f);
    PatchFeatures f;
    f.patches = patches;
    f.dim = dim;
    f.values.resize(static_cast<std::size_t>(patches) * dim);
    for (auto& v : f.values) v = g(rng);
    EncodeConfig cfg;
    for (auto _ : state) {
        auto doc = encode_image(f.view(), w, cfg);
        benchmark::DoNotOptimize(doc);
    }
}
BENCHMARK(BM_EncodeImage)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
