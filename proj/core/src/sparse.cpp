#include "visword/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "visword/error.hpp"

namespace visword {

SparseDoc make_doc(std::vector<QuantizedEntry> entries, double quant_scale) {
    if (!(quant_scale > 0.0)) raise(ErrorCode::invalid_argument, "quant_scale must be positive");
    std::sort(entries.begin(), entries.end(),
              [](const QuantizedEntry& a, const QuantizedEntry& b) { return a.dim < b.dim; });
    SparseDoc doc;
    doc.quant_scale = quant_scale;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (entries[i].qval == 0) {
            raise(ErrorCode::invalid_argument, "zero qval for word " + std::to_string(entries[i].dim));
        }
        if (i > 0 && entries[i].dim == entries[i - 1].dim) {
            raise(ErrorCode::invalid_argument, "duplicate word " + std::to_string(entries[i].dim));
        }
        doc.doc_len += doc.dequantize(entries[i].qval);
    }
    doc.entries = std::move(entries);
    return doc;
}

void validate_doc(const SparseDoc& doc, std::uint32_t vocab) {
    double len = 0.0;
    for (std::size_t i = 0; i < doc.entries.size(); ++i) {
        const auto& e = doc.entries[i];
        if (e.dim >= vocab) {
            raise(ErrorCode::vocab_mismatch, "word " + std::to_string(e.dim) +
                                                 " outside vocabulary of " + std::to_string(vocab));
        }
        if (i > 0 && e.dim <= doc.entries[i - 1].dim) {
            raise(ErrorCode::invalid_argument, "document words are not strictly increasing");
        }
        if (e.qval == 0) raise(ErrorCode::invalid_argument, "document holds a zero qval");
        len += doc.dequantize(e.qval);
    }
    if (std::abs(len - doc.doc_len) > 1e-6) {
        raise(ErrorCode::invalid_argument, "doc_len does not match the dequantized entries");
    }
}

}  // namespace visword
