#include "visword/formats.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "binary_io.hpp"
#include "visword/error.hpp"

namespace visword {

using detail::ByteReader;
using detail::ByteWriter;

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::io_failure, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) raise(ErrorCode::io_failure, "cannot read " + path.string());
    return std::move(ss).str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
    auto tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) raise(ErrorCode::io_failure, "cannot create " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            raise(ErrorCode::io_failure, "cannot write " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        raise(ErrorCode::io_failure, "cannot rename into " + path.string());
    }
}

// ---- BMVF -----------------------------------------------------------------

std::string encode_features(const FeatureFile& f) {
    if (f.values.size() != static_cast<std::size_t>(f.image_count) * f.patches * f.dim) {
        raise(ErrorCode::shape_mismatch, "feature buffer does not match image_count x P x D");
    }
    ByteWriter w;
    w.magic("BMVF");
    w.u32(kFormatVersion);
    w.u32(f.image_count);
    w.u32(f.patches);
    w.u32(f.dim);
    for (float x : f.values) w.f32(x);
    return w.bytes();
}

FeatureFile decode_features(std::string bytes) {
    ByteReader r(std::move(bytes), "feature file");
    r.header("BMVF", kFormatVersion);
    FeatureFile f;
    f.image_count = r.u32();
    f.patches = r.u32();
    f.dim = r.u32();
    if (f.patches == 0 || f.dim == 0) {
        raise(ErrorCode::corrupt_header, "feature file: P and D must be positive");
    }
    const std::uint64_t count = static_cast<std::uint64_t>(f.image_count) * f.patches * f.dim;
    r.require(count * 4);
    f.values.resize(count);
    for (auto& x : f.values) {
        x = r.f32();
        if (!std::isfinite(x)) raise(ErrorCode::invalid_argument, "feature file: non-finite value");
    }
    if (!r.at_end()) raise(ErrorCode::corrupt_header, "feature file: trailing bytes");
    return f;
}

void write_features(const std::filesystem::path& path, const FeatureFile& f) {
    write_file_atomic(path, encode_features(f));
}

FeatureFile read_features(const std::filesystem::path& path) {
    return decode_features(read_file(path));
}

// ---- BMVW -----------------------------------------------------------------

std::string encode_weights(const SaeEncoderWeights& sae) {
    validate_weights(sae);
    ByteWriter w;
    w.magic("BMVW");
    w.u32(kFormatVersion);
    w.u32(sae.dim);
    w.u32(sae.vocab);
    w.u32(sae.k);
    for (float x : sae.weights) w.f32(x);
    for (float x : sae.bias) w.f32(x);
    return w.bytes();
}

SaeEncoderWeights decode_weights(std::string bytes) {
    ByteReader r(std::move(bytes), "weights file");
    r.header("BMVW", kFormatVersion);
    SaeEncoderWeights sae;
    sae.dim = r.u32();
    sae.vocab = r.u32();
    sae.k = r.u32();
    const std::uint64_t count = static_cast<std::uint64_t>(sae.vocab) * sae.dim;
    r.require((count + sae.vocab) * 4);
    sae.weights.resize(count);
    for (auto& x : sae.weights) x = r.f32();
    sae.bias.resize(sae.vocab);
    for (auto& x : sae.bias) x = r.f32();
    if (!r.at_end()) raise(ErrorCode::corrupt_header, "weights file: trailing bytes");
    validate_weights(sae);
    return sae;
}

void write_weights(const std::filesystem::path& path, const SaeEncoderWeights& w) {
    write_file_atomic(path, encode_weights(w));
}

SaeEncoderWeights read_weights(const std::filesystem::path& path) {
    return decode_weights(read_file(path));
}

// ---- BMVS -----------------------------------------------------------------

std::string encode_docs(const DocSet& set) {
    const double scale = set.quant_scale;
    if (!(scale >= 1.0) || scale != std::floor(scale) || scale > 4294967295.0) {
        raise(ErrorCode::invalid_argument, "sparse-doc file needs an integral quant_scale");
    }
    ByteWriter w;
    w.magic("BMVS");
    w.u32(kFormatVersion);
    w.u32(set.vocab);
    w.u32(static_cast<std::uint32_t>(scale));
    w.u32(static_cast<std::uint32_t>(set.docs.size()));
    for (const auto& doc : set.docs) {
        if (doc.quant_scale != scale) {
            raise(ErrorCode::invalid_argument, "document quant_scale differs from the set");
        }
        validate_doc(doc, set.vocab);
        w.u32(static_cast<std::uint32_t>(doc.entries.size()));
        for (const auto& e : doc.entries) {
            w.u32(e.dim);
            w.u16(e.qval);
        }
    }
    return w.bytes();
}

DocSet decode_docs(std::string bytes) {
    ByteReader r(std::move(bytes), "sparse-doc file");
    r.header("BMVS", kFormatVersion);
    DocSet set;
    set.vocab = r.u32();
    const std::uint32_t scale = r.u32();
    if (scale == 0) raise(ErrorCode::corrupt_header, "sparse-doc file: quant_scale is zero");
    set.quant_scale = scale;
    const std::uint32_t count = r.u32();
    r.require(static_cast<std::uint64_t>(count) * 4);
    set.docs.reserve(count);
    for (std::uint32_t d = 0; d < count; ++d) {
        const std::uint32_t nnz = r.u32();
        r.require(static_cast<std::uint64_t>(nnz) * 6);
        std::vector<QuantizedEntry> entries(nnz);
        for (auto& e : entries) {
            e.dim = r.u32();
            e.qval = r.u16();
        }
        SparseDoc doc;
        doc.quant_scale = set.quant_scale;
        doc.entries = std::move(entries);
        for (const auto& e : doc.entries) doc.doc_len += doc.dequantize(e.qval);
        validate_doc(doc, set.vocab);
        set.docs.push_back(std::move(doc));
    }
    if (!r.at_end()) raise(ErrorCode::corrupt_header, "sparse-doc file: trailing bytes");
    return set;
}

void write_docs(const std::filesystem::path& path, const DocSet& set) {
    write_file_atomic(path, encode_docs(set));
}

DocSet read_docs(const std::filesystem::path& path) { return decode_docs(read_file(path)); }

// ---- BMVD -----------------------------------------------------------------

std::string encode_dense(const DenseMatrix& m) {
    ByteWriter w;
    w.magic("BMVD");
    w.u32(kFormatVersion);
    w.u32(m.rows());
    w.u32(m.dim());
    for (float x : m.data()) w.f32(x);
    for (const auto& name : m.names()) w.str(name);
    return w.bytes();
}

DenseMatrix decode_dense(std::string bytes) {
    ByteReader r(std::move(bytes), "dense file");
    r.header("BMVD", kFormatVersion);
    const std::uint32_t n = r.u32();
    const std::uint32_t dim = r.u32();
    const std::uint64_t count = static_cast<std::uint64_t>(n) * dim;
    r.require(count * 4 + static_cast<std::uint64_t>(n) * 4);
    std::vector<float> data(count);
    for (auto& x : data) x = r.f32();
    std::vector<std::string> names(n);
    for (auto& name : names) name = r.str();
    if (!r.at_end()) raise(ErrorCode::corrupt_header, "dense file: trailing bytes");
    return DenseMatrix(dim, std::move(data), std::move(names));
}

void write_dense(const std::filesystem::path& path, const DenseMatrix& m) {
    write_file_atomic(path, encode_dense(m));
}

DenseMatrix read_dense(const std::filesystem::path& path) { return decode_dense(read_file(path)); }

// ---- names ----------------------------------------------------------------

std::vector<std::string> read_names(const std::filesystem::path& path) {
    std::istringstream in(read_file(path));
    std::vector<std::string> names;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) names.push_back(line);
    }
    return names;
}

void write_names(const std::filesystem::path& path, const std::vector<std::string>& names) {
    std::string out;
    for (const auto& n : names) {
        if (n.find('\n') != std::string::npos) {
            raise(ErrorCode::invalid_argument, "name contains a newline");
        }
        out += n;
        out += '\n';
    }
    write_file_atomic(path, out);
}

}  // namespace visword
