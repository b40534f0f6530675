#include "visword/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "visword/encode.hpp"
#include "visword/error.hpp"
#include "visword/formats.hpp"

namespace visword {

WordSampler::WordSampler(std::uint32_t vocab, WordDistribution dist, double alpha)
    : vocab_(vocab), dist_(dist) {
    if (vocab == 0) raise(ErrorCode::invalid_argument, "vocabulary must be positive");
    if (dist_ == WordDistribution::zipf) {
        if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
            raise(ErrorCode::invalid_argument, "zipf exponent must be non-negative");
        }
        weights_.resize(vocab);
        cdf_.resize(vocab);
        double total = 0.0;
        for (std::uint32_t w = 0; w < vocab; ++w) {
            weights_[w] = std::pow(static_cast<double>(w) + 1.0, -alpha);
            total += weights_[w];
            cdf_[w] = total;
        }
        for (auto& c : cdf_) c /= total;
        for (auto& x : weights_) x /= total;
    }
}

void WordSampler::draw(std::mt19937_64& rng, std::uint32_t count, std::vector<std::uint8_t>& taken,
                       std::vector<WordId>& out) const {
    if (count == 0) return;
    const auto free = static_cast<std::uint32_t>(vocab_ - out.size());
    if (count > free) raise(ErrorCode::invalid_argument, "not enough free words to draw from");

    auto take = [&](WordId w) {
        taken[w] = 1;
        out.push_back(w);
    };

    if (dist_ == WordDistribution::uniform) {
        if (4ull * count <= free) {
            std::uniform_int_distribution<WordId> pick(0, vocab_ - 1);
            for (std::uint32_t got = 0; got < count;) {
                const WordId w = pick(rng);
                if (taken[w]) continue;
                take(w);
                ++got;
            }
            return;
        }
        std::vector<WordId> pool;
        pool.reserve(free);
        for (WordId w = 0; w < vocab_; ++w) {
            if (!taken[w]) pool.push_back(w);
        }
        for (std::uint32_t i = 0; i < count; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
            std::swap(pool[i], pool[pick(rng)]);
            take(pool[i]);
        }
        return;
    }

    // Zipf: inverse-CDF with rejection while draws are cheap, otherwise
    // weighted sampling without replacement via exponential keys.
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (64ull * count <= free) {
        const std::uint64_t budget = 64ull * count + 1024;
        std::uint32_t got = 0;
        for (std::uint64_t attempt = 0; attempt < budget && got < count; ++attempt) {
            const double u = unit(rng);
            auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
            const WordId w = it == cdf_.end() ? vocab_ - 1 : static_cast<WordId>(it - cdf_.begin());
            if (taken[w]) continue;
            take(w);
            ++got;
        }
        count -= got;
        if (count == 0) return;
    }
    std::vector<std::pair<double, WordId>> keys;
    keys.reserve(vocab_);
    for (WordId w = 0; w < vocab_; ++w) {
        if (taken[w]) continue;
        double u = unit(rng);
        if (u <= 0.0) u = std::numeric_limits<double>::min();
        keys.emplace_back(std::log(u) / weights_[w], w);
    }
    auto larger = [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    };
    std::nth_element(keys.begin(), keys.begin() + count, keys.end(), larger);
    for (std::uint32_t i = 0; i < count; ++i) take(keys[i].second);
}

namespace {

std::uint32_t class_draws(const SyntheticSpec& spec) {
    if (spec.classes == 0) return 0;
    if (spec.class_words > 0) return spec.class_words;
    return static_cast<std::uint32_t>(std::lround(spec.within_class_overlap * spec.l0));
}

std::uint32_t pool_size(const SyntheticSpec& spec) {
    if (spec.class_pool > 0) return spec.class_pool;
    return std::max<std::uint32_t>(1, 2 * class_draws(spec));
}

std::string make_name(char prefix, std::uint32_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%c%07u", prefix, i);
    return buf;
}

std::string class_label(std::uint32_t c) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "c%05u", c);
    return buf;
}

}  // namespace

void validate_spec(const SyntheticSpec& spec) {
    if (spec.n_docs == 0) raise(ErrorCode::invalid_argument, "synthetic corpus needs n_docs >= 1");
    if (spec.vocab == 0 || spec.l0 == 0 || spec.l0 > spec.vocab) {
        raise(ErrorCode::invalid_argument, "need 1 <= l0 <= vocab");
    }
    if (!(spec.within_class_overlap >= 0.0 && spec.within_class_overlap <= 1.0)) {
        raise(ErrorCode::invalid_argument, "within_class_overlap must lie in [0, 1]");
    }
    if (spec.dense_dim == 0) raise(ErrorCode::invalid_argument, "dense_dim must be positive");
    if (!(spec.dense_noise >= 0.0)) raise(ErrorCode::invalid_argument, "dense_noise must be >= 0");
    if (!(spec.tf_min > 0.0 && spec.tf_max >= spec.tf_min)) {
        raise(ErrorCode::invalid_argument, "need 0 < tf_min <= tf_max");
    }
    if (spec.classes > 0) {
        const std::uint32_t draws = class_draws(spec);
        const std::uint32_t pool = pool_size(spec);
        if (draws > spec.l0) raise(ErrorCode::invalid_argument, "class words exceed l0");
        if (pool < draws) {
            raise(ErrorCode::invalid_argument, "class pool of " + std::to_string(pool) +
                                                   " words cannot supply " + std::to_string(draws) +
                                                   " distinct draws");
        }
        if (pool > spec.vocab) raise(ErrorCode::invalid_argument, "class pool exceeds vocabulary");
    }
}

LabeledSplit SyntheticCorpus::split() const {
    LabeledSplit s;
    for (std::size_t i = 0; i < gallery_names.size(); ++i) s.set(gallery_names[i], gallery_labels[i]);
    for (std::size_t i = 0; i < query_names.size(); ++i) s.set(query_names[i], query_labels[i]);
    return s;
}

QuerySet SyntheticCorpus::query_set() const {
    return {query_names, queries.docs, query_dense};
}

SyntheticCorpus generate_synthetic(const SyntheticSpec& spec) {
    validate_spec(spec);
    std::mt19937_64 rng(spec.seed);
    const WordSampler sampler(spec.vocab, spec.distribution, spec.zipf_alpha);
    const std::uint32_t draws = class_draws(spec);
    const std::uint32_t pool = pool_size(spec);

    // Class pools: disjoint blocks at the top of the id range when they fit,
    // otherwise independent uniform subsets.
    std::vector<std::vector<WordId>> pools(spec.classes);
    if (spec.classes > 0 && draws > 0) {
        if (static_cast<std::uint64_t>(spec.classes) * pool <= spec.vocab) {
            for (std::uint32_t c = 0; c < spec.classes; ++c) {
                const WordId hi = spec.vocab - c * pool;
                for (WordId w = hi - pool; w < hi; ++w) pools[c].push_back(w);
            }
        } else {
            const WordSampler uniform(spec.vocab, WordDistribution::uniform, 0.0);
            std::vector<std::uint8_t> taken(spec.vocab, 0);
            for (auto& p : pools) {
                std::fill(taken.begin(), taken.end(), 0);
                uniform.draw(rng, pool, taken, p);
            }
        }
    }

    std::vector<std::vector<float>> centroids(std::max<std::uint32_t>(spec.classes, 1));
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double inv_sqrt_dim = 1.0 / std::sqrt(static_cast<double>(spec.dense_dim));
    auto random_unitish = [&] {
        std::vector<float> v(spec.dense_dim);
        for (auto& x : v) x = static_cast<float>(gauss(rng) * inv_sqrt_dim);
        return v;
    };
    if (spec.classes > 0) {
        for (auto& c : centroids) c = random_unitish();
    }

    std::uniform_real_distribution<double> tf_dist(spec.tf_min, spec.tf_max);
    std::vector<std::uint8_t> taken(spec.vocab, 0);
    std::vector<WordId> words;

    auto make_item = [&](std::uint32_t i, DocSet& docs, std::vector<float>& dense,
                         std::vector<std::string>& labels, std::vector<std::string>& names,
                         char prefix) {
        const std::uint32_t cls = spec.classes > 0 ? i % spec.classes : 0;
        words.clear();
        if (spec.classes > 0 && draws > 0) {
            // Partial shuffle of the class pool.
            std::vector<WordId> p = pools[cls];
            for (std::uint32_t j = 0; j < draws; ++j) {
                std::uniform_int_distribution<std::size_t> pick(j, p.size() - 1);
                std::swap(p[j], p[pick(rng)]);
                words.push_back(p[j]);
                taken[p[j]] = 1;
            }
        }
        sampler.draw(rng, spec.l0 - static_cast<std::uint32_t>(words.size()), taken, words);

        SparseVector v;
        v.vocab = spec.vocab;
        for (WordId w : words) {
            v.entries.push_back({w, tf_dist(rng)});
            taken[w] = 0;
        }
        std::sort(v.entries.begin(), v.entries.end(),
                  [](const SparseEntry& a, const SparseEntry& b) { return a.dim < b.dim; });
        docs.docs.push_back(quantize(v, docs.quant_scale));

        std::vector<float> row = spec.classes > 0 ? centroids[cls] : random_unitish();
        for (auto& x : row) x += static_cast<float>(spec.dense_noise * gauss(rng) * inv_sqrt_dim);
        dense.insert(dense.end(), row.begin(), row.end());

        names.push_back(make_name(prefix, i));
        labels.push_back(spec.classes > 0 ? class_label(cls) : names.back());
    };

    SyntheticCorpus corpus;
    corpus.gallery.vocab = spec.vocab;
    corpus.queries.vocab = spec.vocab;
    std::vector<float> gdense, qdense;
    gdense.reserve(static_cast<std::size_t>(spec.n_docs) * spec.dense_dim);
    for (std::uint32_t i = 0; i < spec.n_docs; ++i) {
        make_item(i, corpus.gallery, gdense, corpus.gallery_labels, corpus.gallery_names, 'g');
    }
    for (std::uint32_t i = 0; i < spec.n_queries; ++i) {
        make_item(i, corpus.queries, qdense, corpus.query_labels, corpus.query_names, 'q');
    }
    corpus.gallery_dense = DenseMatrix(spec.dense_dim, std::move(gdense), corpus.gallery_names);
    corpus.query_dense = DenseMatrix(spec.dense_dim, std::move(qdense), corpus.query_names);
    return corpus;
}

void write_synthetic(const SyntheticCorpus& corpus, const std::filesystem::path& prefix) {
    auto with = [&](const char* suffix) {
        auto p = prefix;
        p += suffix;
        return p;
    };
    write_docs(with(".gallery.bmvs"), corpus.gallery);
    write_names(with(".gallery.names"), corpus.gallery_names);
    write_dense(with(".gallery.bmvd"), corpus.gallery_dense);
    write_docs(with(".queries.bmvs"), corpus.queries);
    write_names(with(".queries.names"), corpus.query_names);
    write_dense(with(".queries.bmvd"), corpus.query_dense);

    std::string csv = "name,label\n";
    for (std::size_t i = 0; i < corpus.gallery_names.size(); ++i) {
        csv += corpus.gallery_names[i] + "," + corpus.gallery_labels[i] + "\n";
    }
    for (std::size_t i = 0; i < corpus.query_names.size(); ++i) {
        csv += corpus.query_names[i] + "," + corpus.query_labels[i] + "\n";
    }
    write_file_atomic(with(".labels.csv"), csv);
}

}  // namespace visword
