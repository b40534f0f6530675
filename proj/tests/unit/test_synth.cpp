#include <gtest/gtest.h>

#include <filesystem>
#include <set>

#include "visword/error.hpp"
#include "visword/formats.hpp"
#include "visword/index.hpp"
#include "visword/search.hpp"
#include "visword/synth.hpp"

using namespace visword;
namespace fs = std::filesystem;

TEST(Synthetic, ShapesAndInvariants) {
    SyntheticSpec spec;
    spec.n_docs = 50;
    spec.n_queries = 7;
    spec.vocab = 300;
    spec.l0 = 12;
    spec.dense_dim = 5;
    const auto c = generate_synthetic(spec);
    ASSERT_EQ(c.gallery.docs.size(), 50u);
    ASSERT_EQ(c.queries.docs.size(), 7u);
    EXPECT_EQ(c.gallery_dense.rows(), 50u);
    EXPECT_EQ(c.query_dense.dim(), 5u);
    EXPECT_EQ(c.gallery_names.front(), "g0000000");
    EXPECT_EQ(c.query_names.back(), "q0000006");
    for (const auto& d : c.gallery.docs) {
        EXPECT_EQ(d.nnz(), 12u);
        EXPECT_NO_THROW(validate_doc(d, 300));
    }
    // Without classes each item is its own label.
    EXPECT_EQ(c.gallery_labels[3], c.gallery_names[3]);
}

TEST(Synthetic, DeterministicGivenSeed) {
    SyntheticSpec spec;
    spec.n_docs = 80;
    spec.n_queries = 10;
    spec.vocab = 500;
    spec.distribution = WordDistribution::zipf;
    spec.classes = 4;
    spec.within_class_overlap = 0.5;
    spec.seed = 42;
    const auto a = generate_synthetic(spec);
    const auto b = generate_synthetic(spec);
    EXPECT_EQ(a.gallery, b.gallery);
    EXPECT_EQ(a.queries, b.queries);
    EXPECT_EQ(a.gallery_dense, b.gallery_dense);
    EXPECT_EQ(a.gallery_labels, b.gallery_labels);
    spec.seed = 43;
    EXPECT_NE(generate_synthetic(spec).gallery, a.gallery);
}

TEST(Synthetic, FilesAreByteIdentical) {
    SyntheticSpec spec;
    spec.n_docs = 40;
    spec.n_queries = 5;
    spec.vocab = 200;
    spec.classes = 4;
    spec.within_class_overlap = 0.25;
    spec.seed = 9;
    const auto dir = fs::temp_directory_path() / "visword_synth_files";
    fs::create_directories(dir);
    write_synthetic(generate_synthetic(spec), dir / "a");
    write_synthetic(generate_synthetic(spec), dir / "b");
    for (const char* suffix : {".gallery.bmvs", ".gallery.names", ".gallery.bmvd", ".queries.bmvs",
                               ".queries.names", ".queries.bmvd", ".labels.csv"}) {
        EXPECT_EQ(read_file(dir / (std::string("a") + suffix)), read_file(dir / (std::string("b") + suffix)))
            << suffix;
    }
    const auto split = LabeledSplit::read_csv(dir / "a.labels.csv");
    EXPECT_EQ(split.size(), 45u);
    EXPECT_EQ(read_docs(dir / "a.gallery.bmvs").docs.size(), 40u);
    fs::remove_all(dir);
}

TEST(Synthetic, DisjointClassPoolsGiveOwnClassAtRankOne) {
    SyntheticSpec spec;
    spec.classes = 25;
    spec.n_docs = 25;  // one doc per class
    spec.n_queries = 25;
    spec.vocab = 2000;
    spec.l0 = 8;
    spec.within_class_overlap = 1.0;
    spec.seed = 3;
    const auto c = generate_synthetic(spec);
    const auto idx = InvertedIndex::build(c.gallery, c.gallery_names);
    const auto split = c.split();
    for (std::size_t q = 0; q < c.queries.docs.size(); ++q) {
        const auto r = query_topk(idx, c.queries.docs[q], 3);
        ASSERT_FALSE(r.hits.empty());
        EXPECT_EQ(*split.label(r.hits[0].name), c.query_labels[q]);
        EXPECT_EQ(r.hits.size(), 1u);
    }
}

TEST(Synthetic, ClassWordsAreRare) {
    SyntheticSpec spec;
    spec.classes = 10;
    spec.n_docs = 500;
    spec.vocab = 5000;
    spec.l0 = 16;
    spec.class_words = 4;
    spec.class_pool = 8;
    spec.distribution = WordDistribution::zipf;
    spec.zipf_alpha = 1.0;
    spec.seed = 4;
    const auto c = generate_synthetic(spec);
    for (std::size_t i = 0; i < c.gallery.docs.size(); ++i) {
        const std::uint32_t cls = i % 10;
        const WordId hi = 5000 - cls * 8, lo = hi - 8;
        int in_pool = 0;
        for (const auto& e : c.gallery.docs[i].entries) in_pool += e.dim >= lo && e.dim < hi;
        EXPECT_GE(in_pool, 4);
    }
}

TEST(Synthetic, LargeL0UsesWholeVocabulary) {
    SyntheticSpec spec;
    spec.n_docs = 3;
    spec.vocab = 64;
    spec.l0 = 64;
    spec.distribution = WordDistribution::zipf;
    const auto c = generate_synthetic(spec);
    for (const auto& d : c.gallery.docs) EXPECT_EQ(d.nnz(), 64u);
}

TEST(Synthetic, InvalidSpecs) {
    SyntheticSpec spec;
    spec.classes = 4;
    spec.class_words = 8;
    spec.class_pool = 4;
    EXPECT_THROW(generate_synthetic(spec), Error);
    spec = {};
    spec.l0 = spec.vocab + 1;
    EXPECT_THROW(validate_spec(spec), Error);
    spec = {};
    spec.n_docs = 0;
    EXPECT_THROW(validate_spec(spec), Error);
    spec = {};
    spec.within_class_overlap = 1.5;
    EXPECT_THROW(validate_spec(spec), Error);
    spec = {};
    spec.tf_min = 0.0;
    EXPECT_THROW(validate_spec(spec), Error);
}

TEST(WordSamplerTest, DrawsDistinctWords) {
    for (auto dist : {WordDistribution::uniform, WordDistribution::zipf}) {
        const WordSampler s(100, dist, 1.5);
        std::mt19937_64 rng(1);
        for (std::uint32_t count : {1u, 10u, 60u, 100u}) {
            std::vector<std::uint8_t> taken(100, 0);
            std::vector<WordId> out;
            s.draw(rng, count, taken, out);
            ASSERT_EQ(out.size(), count);
            EXPECT_EQ(std::set<WordId>(out.begin(), out.end()).size(), count);
            for (WordId w : out) EXPECT_TRUE(taken[w]);
            EXPECT_THROW(s.draw(rng, 101 - count, taken, out), Error);
        }
    }
}

TEST(WordSamplerTest, ZipfFavoursLowIds) {
    const WordSampler s(1000, WordDistribution::zipf, 1.5);
    std::mt19937_64 rng(2);
    std::vector<int> hits(1000, 0);
    for (int t = 0; t < 2000; ++t) {
        std::vector<std::uint8_t> taken(1000, 0);
        std::vector<WordId> out;
        s.draw(rng, 4, taken, out);
        for (WordId w : out) ++hits[w];
    }
    EXPECT_GT(hits[0], hits[10]);
    EXPECT_GT(hits[10], hits[500]);
}
