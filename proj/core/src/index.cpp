#include "visword/index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>

#include "binary_io.hpp"
#include "visword/error.hpp"
#include "visword/formats.hpp"

namespace visword {

void validate_params(const Bm25Params& p) {
    if (!(p.k1 > 0.0f) || !std::isfinite(p.k1)) {
        raise(ErrorCode::invalid_argument, "k1 must be positive");
    }
    if (!(p.b >= 0.0f && p.b <= 1.0f)) raise(ErrorCode::invalid_argument, "b must lie in [0, 1]");
}

double bm25_idf(std::uint64_t n_docs, std::uint64_t df) {
    const double n = static_cast<double>(n_docs);
    const double d = static_cast<double>(df);
    return std::log1p((n - d + 0.5) / (d + 0.5));
}

double bm25_term(double idf, double tf, double doc_len, double avg_dl, const Bm25Params& p) {
    const double k1 = p.k1;
    const double b = p.b;
    const double rel_len = avg_dl > 0.0 ? doc_len / avg_dl : 1.0;
    const double norm = k1 * (1.0 - b + b * rel_len);
    return idf * (tf * (k1 + 1.0)) / (tf + norm);
}

InvertedIndex::InvertedIndex(std::uint32_t vocab, Bm25Params params) {
    validate_params(params);
    s_.vocab = vocab;
    s_.params = params;
    s_.lists.resize(vocab);
    s_.max_tf.assign(vocab, 0.0f);
}

InvertedIndex::InvertedIndex(const InvertedIndex& other) {
    auto lock = other.read_lock();
    s_ = other.s_;
}

InvertedIndex& InvertedIndex::operator=(const InvertedIndex& other) {
    if (this != &other) {
        State copy;
        {
            auto lock = other.read_lock();
            copy = other.s_;
        }
        std::unique_lock lock(mu_);
        s_ = std::move(copy);
    }
    return *this;
}

InvertedIndex::InvertedIndex(InvertedIndex&& other) noexcept : s_(std::move(other.s_)) {}

InvertedIndex& InvertedIndex::operator=(InvertedIndex&& other) noexcept {
    if (this != &other) s_ = std::move(other.s_);
    return *this;
}

InvertedIndex InvertedIndex::build(std::uint32_t vocab, std::span<const SparseDoc> docs,
                                   std::span<const std::string> names, Bm25Params params) {
    if (docs.empty()) raise(ErrorCode::empty_input, "cannot build an index over zero documents");
    if (docs.size() != names.size()) {
        raise(ErrorCode::invalid_argument, std::to_string(docs.size()) + " documents but " +
                                               std::to_string(names.size()) + " names");
    }
    InvertedIndex index(vocab, params);
    for (std::size_t i = 0; i < docs.size(); ++i) index.insert_unlocked(docs[i], names[i]);
    index.refresh_avg_len();
    return index;
}

InvertedIndex InvertedIndex::build(const DocSet& set, std::span<const std::string> names,
                                   Bm25Params params) {
    return build(set.vocab, set.docs, names, params);
}

void InvertedIndex::check_mutable() const {
    if (s_.frozen) raise(ErrorCode::frozen_index, "frozen indices reject mutations");
}

DocId InvertedIndex::insert_unlocked(const SparseDoc& doc, const std::string& name) {
    check_mutable();
    validate_doc(doc, s_.vocab);
    if (s_.names.size() >= std::numeric_limits<DocId>::max()) {
        raise(ErrorCode::out_of_range, "document id space exhausted");
    }
    if (s_.by_name.contains(name)) raise(ErrorCode::duplicate_name, "'" + name + "'");

    const auto id = static_cast<DocId>(s_.names.size());
    std::vector<WordId> words;
    words.reserve(doc.entries.size());
    for (const auto& e : doc.entries) {
        const auto tf = static_cast<float>(doc.dequantize(e.qval));
        s_.lists[e.dim].push_back({id, tf});
        s_.max_tf[e.dim] = std::max(s_.max_tf[e.dim], tf);
        words.push_back(e.dim);
    }
    const auto len = static_cast<float>(doc.doc_len);
    s_.names.push_back(name);
    s_.doc_len.push_back(len);
    s_.alive.push_back(1);
    s_.doc_words.push_back(std::move(words));
    s_.by_name.emplace(name, id);

    s_.min_len = s_.live == 0 ? len : std::min(s_.min_len, len);
    s_.live += 1;
    s_.total_len += len;
    s_.total_postings += doc.entries.size();
    return id;
}

DocId InvertedIndex::insert(const SparseDoc& doc, const std::string& name) {
    std::unique_lock lock(mu_);
    const DocId id = insert_unlocked(doc, name);
    refresh_avg_len();
    return id;
}

void InvertedIndex::remove(DocId id) {
    std::unique_lock lock(mu_);
    check_mutable();
    if (!alive(id)) raise(ErrorCode::unknown_doc, "id " + std::to_string(id) + " is not live");

    for (WordId w : s_.doc_words[id]) {
        auto& list = s_.lists[w];
        auto it = std::lower_bound(list.begin(), list.end(), id,
                                   [](const Posting& p, DocId d) { return p.doc_id < d; });
        const float tf = it->tf;
        list.erase(it);
        if (tf >= s_.max_tf[w]) refresh_max_tf(w);
    }
    const float len = s_.doc_len[id];
    s_.total_postings -= s_.doc_words[id].size();
    s_.doc_words[id].clear();
    s_.doc_words[id].shrink_to_fit();
    s_.alive[id] = 0;
    s_.by_name.erase(s_.names[id]);
    s_.live -= 1;
    s_.total_len -= len;
    if (s_.live == 0) s_.total_len = 0.0;
    if (len <= s_.min_len) refresh_min_len();
    refresh_avg_len();
}

void InvertedIndex::refresh_max_tf(WordId w) {
    float m = 0.0f;
    for (const auto& p : s_.lists[w]) m = std::max(m, p.tf);
    s_.max_tf[w] = m;
}

void InvertedIndex::refresh_min_len() {
    float m = std::numeric_limits<float>::infinity();
    for (std::size_t i = 0; i < s_.alive.size(); ++i) {
        if (s_.alive[i]) m = std::min(m, s_.doc_len[i]);
    }
    s_.min_len = s_.live == 0 ? 0.0f : m;
}

void InvertedIndex::refresh_avg_len() {
    s_.avg_len = s_.live == 0 ? 0.0 : s_.total_len / s_.live;
}

void InvertedIndex::freeze() {
    std::unique_lock lock(mu_);
    if (s_.frozen) return;
    s_.frozen = true;
    compute_frozen_weights();
}

void InvertedIndex::compute_frozen_weights() {
    s_.weights.assign(s_.vocab, {});
    for (WordId w = 0; w < s_.vocab; ++w) {
        const auto& list = s_.lists[w];
        if (list.empty()) continue;
        const double idf_w = bm25_idf(s_.live, list.size());
        auto& out = s_.weights[w];
        out.reserve(list.size());
        for (const auto& p : list) {
            out.push_back(bm25_term(idf_w, p.tf, s_.doc_len[p.doc_id], s_.avg_len, s_.params));
        }
    }
}

float InvertedIndex::doc_len(DocId id) const {
    if (!alive(id)) raise(ErrorCode::unknown_doc, "id " + std::to_string(id) + " is not live");
    return s_.doc_len[id];
}

const std::string& InvertedIndex::name(DocId id) const {
    if (id >= s_.names.size()) raise(ErrorCode::unknown_doc, "id " + std::to_string(id));
    return s_.names[id];
}

std::optional<DocId> InvertedIndex::find(const std::string& name) const {
    auto it = s_.by_name.find(name);
    if (it == s_.by_name.end()) return std::nullopt;
    return it->second;
}

const std::vector<WordId>& InvertedIndex::doc_words(DocId id) const {
    if (!alive(id)) raise(ErrorCode::unknown_doc, "id " + std::to_string(id) + " is not live");
    return s_.doc_words[id];
}

std::uint32_t InvertedIndex::df(WordId w) const {
    if (w >= s_.vocab) raise(ErrorCode::out_of_range, "word " + std::to_string(w));
    return static_cast<std::uint32_t>(s_.lists[w].size());
}

double InvertedIndex::idf(WordId w) const { return bm25_idf(s_.live, df(w)); }

std::span<const Posting> InvertedIndex::postings(WordId w) const {
    if (w >= s_.vocab) raise(ErrorCode::out_of_range, "word " + std::to_string(w));
    return s_.lists[w];
}

std::span<const double> InvertedIndex::frozen_weights(WordId w) const {
    if (w >= s_.vocab) raise(ErrorCode::out_of_range, "word " + std::to_string(w));
    if (!s_.frozen) return {};
    return s_.weights[w];
}

float InvertedIndex::max_tf(WordId w) const {
    if (w >= s_.vocab) raise(ErrorCode::out_of_range, "word " + std::to_string(w));
    return s_.max_tf[w];
}

std::vector<DocId> InvertedIndex::live_ids() const {
    std::vector<DocId> ids;
    ids.reserve(s_.live);
    for (DocId i = 0; i < s_.alive.size(); ++i) {
        if (s_.alive[i]) ids.push_back(i);
    }
    return ids;
}

// ---- BMVI -----------------------------------------------------------------
//
// "BMVI", u32 version, u32 vocab, u32 N, f64 avg_dl, f32 k1, f32 b,
// u8 frozen, u32 df[vocab], f32 doc_len[N], N names, then per word
// u32 len followed by len x (u32 doc_id, f32 tf).

std::string InvertedIndex::serialize() const {
    auto lock = read_lock();
    std::vector<DocId> remap(s_.names.size(), 0);
    DocId next = 0;
    for (DocId i = 0; i < s_.alive.size(); ++i) {
        if (s_.alive[i]) remap[i] = next++;
    }

    detail::ByteWriter w;
    w.magic("BMVI");
    w.u32(kFormatVersion);
    w.u32(s_.vocab);
    w.u32(s_.live);
    w.f64(s_.avg_len);
    w.f32(s_.params.k1);
    w.f32(s_.params.b);
    w.u8(s_.frozen ? 1 : 0);
    for (const auto& list : s_.lists) w.u32(static_cast<std::uint32_t>(list.size()));
    for (DocId i = 0; i < s_.alive.size(); ++i) {
        if (s_.alive[i]) w.f32(s_.doc_len[i]);
    }
    for (DocId i = 0; i < s_.alive.size(); ++i) {
        if (s_.alive[i]) w.str(s_.names[i]);
    }
    for (const auto& list : s_.lists) {
        w.u32(static_cast<std::uint32_t>(list.size()));
        for (const auto& p : list) {
            w.u32(remap[p.doc_id]);
            w.f32(p.tf);
        }
    }
    return w.bytes();
}

InvertedIndex InvertedIndex::deserialize(std::string bytes) {
    detail::ByteReader r(std::move(bytes), "index file");
    r.header("BMVI", kFormatVersion);
    const std::uint32_t vocab = r.u32();
    const std::uint32_t n = r.u32();
    const double avg_dl = r.f64();
    Bm25Params params;
    params.k1 = r.f32();
    params.b = r.f32();
    const std::uint8_t frozen = r.u8();
    if (frozen > 1) raise(ErrorCode::corrupt_header, "index file: bad frozen flag");
    try {
        validate_params(params);
    } catch (const Error& e) {
        raise(ErrorCode::corrupt_header, std::string("index file: ") + e.what());
    }

    r.require(static_cast<std::uint64_t>(vocab) * 4 + static_cast<std::uint64_t>(n) * 8);
    std::vector<std::uint32_t> df(vocab);
    for (auto& d : df) d = r.u32();

    InvertedIndex index(vocab, params);
    State& s = index.s_;
    s.doc_len.resize(n);
    for (auto& len : s.doc_len) len = r.f32();
    s.names.resize(n);
    s.by_name.reserve(n);
    for (DocId i = 0; i < n; ++i) {
        s.names[i] = r.str();
        if (!s.by_name.emplace(s.names[i], i).second) {
            raise(ErrorCode::corrupt_header, "index file: duplicate name '" + s.names[i] + "'");
        }
    }
    s.alive.assign(n, 1);
    s.doc_words.assign(n, {});
    s.live = n;

    for (WordId w = 0; w < vocab; ++w) {
        const std::uint32_t len = r.u32();
        if (len != df[w]) {
            raise(ErrorCode::corrupt_header, "index file: df of word " + std::to_string(w) +
                                                 " disagrees with its posting list");
        }
        r.require(static_cast<std::uint64_t>(len) * 8);
        auto& list = s.lists[w];
        list.resize(len);
        for (std::uint32_t j = 0; j < len; ++j) {
            list[j].doc_id = r.u32();
            list[j].tf = r.f32();
            if (list[j].doc_id >= n || (j > 0 && list[j].doc_id <= list[j - 1].doc_id) ||
                !(list[j].tf > 0.0f)) {
                raise(ErrorCode::corrupt_header,
                      "index file: malformed posting list for word " + std::to_string(w));
            }
            s.doc_words[list[j].doc_id].push_back(w);
            s.max_tf[w] = std::max(s.max_tf[w], list[j].tf);
        }
        s.total_postings += len;
    }
    if (!r.at_end()) raise(ErrorCode::corrupt_header, "index file: trailing bytes");

    for (float len : s.doc_len) s.total_len += len;
    index.refresh_min_len();
    s.avg_len = avg_dl;
    const double expected = n == 0 ? 0.0 : s.total_len / n;
    if (!(std::abs(expected - avg_dl) <= 1e-6 * std::max(1.0, expected))) {
        raise(ErrorCode::corrupt_header, "index file: avg_dl disagrees with doc lengths");
    }
    if (frozen) {
        s.frozen = true;
        index.compute_frozen_weights();
    }
    return index;
}

void InvertedIndex::save(const std::filesystem::path& path) const {
    write_file_atomic(path, serialize());
}

InvertedIndex InvertedIndex::load(const std::filesystem::path& path) {
    return deserialize(read_file(path));
}

}  // namespace visword
