#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "visword/error.hpp"
#include "visword/stats.hpp"
#include "visword/synth.hpp"

using namespace visword;

namespace {

std::vector<std::uint32_t> planted(double amplitude, double alpha, std::uint32_t ranks) {
    std::vector<std::uint32_t> df;
    for (std::uint32_t r = 1; r <= ranks; ++r) {
        df.push_back(static_cast<std::uint32_t>(std::lround(amplitude * std::pow(r, -alpha))));
    }
    return df;
}

std::vector<std::string> names_for(std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back("d" + std::to_string(i));
    return out;
}

}  // namespace

TEST(PowerLaw, RecoversPlantedExponents) {
    for (double alpha : {1.0, 1.5, 2.0}) {
        const auto fit = fit_power_law(planted(1e6, alpha, 500));
        ASSERT_TRUE(fit.has_value());
        EXPECT_NEAR(fit->alpha, alpha, 0.05);
        EXPECT_GT(fit->r_squared, 0.99);
        EXPECT_EQ(fit->first_rank, 1u);
        EXPECT_EQ(fit->last_rank, 500u);
    }
}

TEST(PowerLaw, SmallAmplitudeFlattensTail) {
    // At amplitude 1000 the r^-1.5 tail rounds to a run of df = 1 (and to 0
    // past rank 158), which drags an all-rank OLS fit below the planted slope.
    const auto df = planted(1000, 1.5, 500);
    const auto all = fit_power_law(df);
    ASSERT_TRUE(all.has_value());
    EXPECT_EQ(all->last_rank, 158u);
    EXPECT_NEAR(all->alpha, 1.37847168, 1e-6);
    EXPECT_NEAR(all->r_squared, 0.97109280, 1e-6);

    const auto trimmed = fit_power_law(df, 5);
    ASSERT_TRUE(trimmed.has_value());
    EXPECT_EQ(trimmed->last_rank, 36u);
    EXPECT_NEAR(trimmed->alpha, 1.5, 0.05);
    EXPECT_GT(trimmed->r_squared, 0.99);
}

TEST(PowerLaw, FlatProfile) {
    const std::vector<std::uint32_t> df(300, 42);
    const auto fit = fit_power_law(df);
    ASSERT_TRUE(fit.has_value());
    EXPECT_NEAR(fit->alpha, 0.0, 0.05);
    EXPECT_EQ(fit->r_squared, 1.0);
}

TEST(PowerLaw, UndefinedBelowTwoRanks) {
    EXPECT_FALSE(fit_power_law(std::vector<std::uint32_t>{}).has_value());
    EXPECT_FALSE(fit_power_law(std::vector<std::uint32_t>{7}).has_value());
    EXPECT_FALSE(fit_power_law(std::vector<std::uint32_t>{7, 0, 0}).has_value());
    EXPECT_TRUE(fit_power_law(std::vector<std::uint32_t>{7, 1}).has_value());
}

TEST(PowerLaw, OrderOfInputIrrelevant) {
    auto df = planted(1e5, 1.2, 200);
    const auto a = fit_power_law(df);
    std::mt19937_64 rng(1);
    std::shuffle(df.begin(), df.end(), rng);
    const auto b = fit_power_law(df);
    EXPECT_DOUBLE_EQ(a->alpha, b->alpha);
    EXPECT_DOUBLE_EQ(a->r_squared, b->r_squared);
}

TEST(CorpusStatsTest, FlatCorpus) {
    // Every doc holds words 0..3, so each df = N and every word is head.
    std::vector<SparseDoc> docs(10, make_doc({{0, 100}, {1, 100}, {2, 100}, {3, 100}}));
    const auto idx = InvertedIndex::build(50, docs, names_for(10));
    const auto s = compute_stats(idx);
    EXPECT_EQ(s.n_docs, 10u);
    EXPECT_EQ(s.v_active, 4u);
    EXPECT_DOUBLE_EQ(s.head_fraction, 1.0);
    EXPECT_DOUBLE_EQ(s.discriminative_fraction, 0.0);
    EXPECT_DOUBLE_EQ(s.mean_nnz, 4.0);
    ASSERT_TRUE(s.fit.has_value());
    EXPECT_NEAR(s.fit->alpha, 0.0, 0.05);
}

TEST(CorpusStatsTest, MatchesDirectCounts) {
    std::mt19937_64 rng(2);
    std::vector<SparseDoc> docs;
    for (int i = 0; i < 300; ++i) docs.push_back(oracle::random_doc(rng, 200, 1 + i % 20));
    const auto idx = InvertedIndex::build(200, docs, names_for(300));
    const oracle::BruteBm25 ref(docs);
    std::vector<std::uint32_t> df;
    int head = 0, disc = 0;
    for (WordId w = 0; w < 200; ++w) {
        if (ref.df(w) == 0) continue;
        df.push_back(ref.df(w));
        head += ref.df(w) > 150;
        disc += ref.idf(w) > 2.0;
    }
    std::sort(df.rbegin(), df.rend());
    const auto s = compute_stats(idx);
    EXPECT_EQ(s.df_ranked, df);
    EXPECT_EQ(s.v_active, df.size());
    EXPECT_DOUBLE_EQ(s.head_fraction, double(head) / df.size());
    EXPECT_DOUBLE_EQ(s.discriminative_fraction, double(disc) / df.size());
    EXPECT_TRUE(std::is_sorted(s.df_ranked.rbegin(), s.df_ranked.rend()));
    EXPECT_LE(s.v_active, s.vocab);
}

TEST(CorpusStatsTest, NeedsTwoDocs) {
    const auto idx = InvertedIndex::build(4, std::vector<SparseDoc>{make_doc({{1, 5}})}, names_for(1));
    EXPECT_THROW(compute_stats(idx), Error);
}

TEST(CorpusStatsTest, SyntheticZipfRecovery) {
    SyntheticSpec spec;
    spec.n_docs = 10000;
    spec.vocab = 1000;
    spec.l0 = 16;
    spec.distribution = WordDistribution::zipf;
    spec.zipf_alpha = 1.5;
    spec.seed = 3;
    const auto c = generate_synthetic(spec);
    const auto s = compute_stats(InvertedIndex::build(c.gallery, c.gallery_names));
    ASSERT_TRUE(s.fit.has_value());
    EXPECT_NEAR(s.fit->alpha, 1.5, 0.1);
}

TEST(CouponCollector, Values) {
    EXPECT_EQ(coupon_collector_vactive(0, 16, 18432), 0.0);
    EXPECT_EQ(coupon_collector_vactive(1, 16, 18432), 16.0);
    EXPECT_NEAR(coupon_collector_vactive(5994, 16, 18432), 18330.8647, 1e-3);
    EXPECT_NEAR(coupon_collector_vactive(100, 16, 18432), 1533.159, 1e-3);
    EXPECT_NEAR(coupon_collector_vactive(1000, 16, 18432), 10697.771, 1e-3);
    EXPECT_NEAR(coupon_collector_vactive(10000, 16, 18432), 18428.881, 1e-3);
    EXPECT_EQ(coupon_collector_vactive(3, 10, 10), 10.0);
    EXPECT_THROW(coupon_collector_vactive(3, 11, 10), Error);
}

TEST(CouponCollector, MonotoneAndBounded) {
    double prev = 0.0;
    // Beyond ~1e4 draws the untouched share drops below double resolution
    // relative to D_s, so strictness is checked where it is representable.
    for (std::uint64_t n = 1; n < 200000; n = n * 3 / 2 + 1) {
        const double v = coupon_collector_vactive(n, 16, 18432);
        if (n <= 20000) EXPECT_GT(v, prev) << n;
        EXPECT_GE(v, prev) << n;
        EXPECT_LE(v, 18432.0);
        prev = v;
    }
}

TEST(CostModel, Values) {
    EXPECT_NEAR(predicted_query_ops({5994, 16, 18432, 300.0, 1.0}), 5114.88, 1e-9);
    EXPECT_NEAR(predicted_query_ops({5994, 16, 18432, 18432.0, 1.0}), 256.0 * 5994 / 18432, 1e-12);
    EXPECT_NEAR(predicted_query_ops({5994, 16, 18432, 300.0, 2.5}), 2.5 * 5114.88, 1e-9);
    EXPECT_THROW(predicted_query_ops({5994, 16, 18432, 0.0, 1.0}), Error);
}

TEST(MemoryModelTest, Values) {
    const auto m = memory_model(1152, 16);
    EXPECT_EQ(m.dense_bytes, 4608u);
    EXPECT_EQ(m.sparse_bytes, 96u);
    EXPECT_EQ(m.two_stage_bytes, 4704u);
    EXPECT_EQ(m.compression, 48.0);
    EXPECT_FALSE(m.degenerate);

    const auto m32 = memory_model(1152, 32);
    EXPECT_EQ(m32.sparse_bytes, 192u);
    EXPECT_EQ(m32.compression, 24.0);

    const auto zero = memory_model(1152, 0);
    EXPECT_EQ(zero.sparse_bytes, 0u);
    EXPECT_TRUE(zero.degenerate);
    EXPECT_TRUE(std::isinf(zero.compression));
    EXPECT_THROW(memory_model(0, 16), Error);
}
