#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "visword/dense.hpp"
#include "visword/eval.hpp"
#include "visword/sparse.hpp"

namespace visword {

enum class WordDistribution { uniform, zipf };

/// Desk-scale stand-in for an encoded image collection.
///
/// Each document belongs to class (i mod classes). It draws
/// round(within_class_overlap * l0) distinct words from its class pool and
/// fills the rest of its l0 words from the global distribution, where word w
/// has weight (w + 1)^-alpha under zipf. Class pools sit at the high-id
/// (rarest) end of the vocabulary and are disjoint whenever they fit.
/// Dense rows are a per-class centroid plus isotropic Gaussian noise.
struct SyntheticSpec {
    std::uint32_t n_docs = 1000;
    std::uint32_t n_queries = 0;
    std::uint32_t vocab = 18432;
    std::uint32_t l0 = 16;
    WordDistribution distribution = WordDistribution::uniform;
    double zipf_alpha = 1.5;
    std::uint32_t classes = 0;  ///< 0 disables class structure
    double within_class_overlap = 0.0;
    std::uint32_t class_pool = 0;  ///< words per class; 0 picks 2x the class draws
    /// Explicit per-doc class-word count; overrides within_class_overlap
    /// when non-zero (lets the per-doc signal stay fixed as l0 grows).
    std::uint32_t class_words = 0;
    std::uint32_t dense_dim = 64;
    double dense_noise = 0.5;  ///< noise std relative to the unit centroid
    double tf_min = 0.5;
    double tf_max = 5.0;
    std::uint64_t seed = 0;
};

/// Throws on an infeasible spec (e.g. class pool smaller than the draws).
void validate_spec(const SyntheticSpec& spec);

struct SyntheticCorpus {
    DocSet gallery;
    std::vector<std::string> gallery_names;
    std::vector<std::string> gallery_labels;
    DenseMatrix gallery_dense;

    DocSet queries;
    std::vector<std::string> query_names;
    std::vector<std::string> query_labels;
    DenseMatrix query_dense;

    LabeledSplit split() const;
    QuerySet query_set() const;
};

SyntheticCorpus generate_synthetic(const SyntheticSpec& spec);

/// Writes <prefix>.gallery.{bmvs,names,bmvd}, <prefix>.queries.{bmvs,names,bmvd}
/// and <prefix>.labels.csv.
void write_synthetic(const SyntheticCorpus& corpus, const std::filesystem::path& prefix);

/// Draws `count` distinct word ids and appends them to `out`. `taken` must
/// mark exactly the words already in `out`; both are updated.
class WordSampler {
  public:
    WordSampler(std::uint32_t vocab, WordDistribution dist, double alpha);

    void draw(std::mt19937_64& rng, std::uint32_t count, std::vector<std::uint8_t>& taken,
              std::vector<WordId>& out) const;

    std::uint32_t vocab() const noexcept { return vocab_; }

  private:
    std::uint32_t vocab_;
    WordDistribution dist_;
    std::vector<double> cdf_;
    std::vector<double> weights_;
};

}  // namespace visword
