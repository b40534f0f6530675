#include "visword/dense.hpp"

#include <cmath>

#include "visword/error.hpp"

namespace visword {

double dot(std::span<const float> a, std::span<const float> b) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t i = 0;
    const std::size_t n = a.size();
    for (; i + 4 <= n; i += 4) {
        s0 += static_cast<double>(a[i]) * b[i];
        s1 += static_cast<double>(a[i + 1]) * b[i + 1];
        s2 += static_cast<double>(a[i + 2]) * b[i + 2];
        s3 += static_cast<double>(a[i + 3]) * b[i + 3];
    }
    for (; i < n; ++i) s0 += static_cast<double>(a[i]) * b[i];
    return (s0 + s1) + (s2 + s3);
}

double l2_norm(std::span<const float> a) { return std::sqrt(dot(a, a)); }

DenseMatrix::DenseMatrix(std::uint32_t dim, std::vector<float> rows, std::vector<std::string> names)
    : dim_(dim), data_(std::move(rows)), names_(std::move(names)) {
    if (dim_ == 0) raise(ErrorCode::shape_mismatch, "dense matrix needs a positive dimension");
    if (data_.size() != names_.size() * dim_) {
        raise(ErrorCode::shape_mismatch, "dense buffer holds " + std::to_string(data_.size()) +
                                             " values for " + std::to_string(names_.size()) +
                                             " rows of dim " + std::to_string(dim_));
    }
    n_ = static_cast<std::uint32_t>(names_.size());
    norms_.resize(n_);
    by_name_.reserve(n_);
    for (std::uint32_t i = 0; i < n_; ++i) {
        for (float x : row(i)) {
            if (!std::isfinite(x)) {
                raise(ErrorCode::invalid_argument, "dense row '" + names_[i] + "' is not finite");
            }
        }
        norms_[i] = l2_norm(row(i));
        if (!by_name_.emplace(names_[i], i).second) {
            raise(ErrorCode::duplicate_name, "dense row name '" + names_[i] + "'");
        }
    }
}

std::optional<std::uint32_t> DenseMatrix::find(const std::string& name) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) return std::nullopt;
    return it->second;
}

}  // namespace visword
