#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace visword {

/// N x D matrix of pooled image embeddings with one unique name per row.
/// Row norms are cached at construction for cosine scoring.
class DenseMatrix {
  public:
    DenseMatrix() = default;
    DenseMatrix(std::uint32_t dim, std::vector<float> rows, std::vector<std::string> names);

    std::uint32_t rows() const noexcept { return n_; }
    std::uint32_t dim() const noexcept { return dim_; }

    std::span<const float> row(std::uint32_t i) const {
        return {data_.data() + static_cast<std::size_t>(i) * dim_, dim_};
    }
    double norm(std::uint32_t i) const { return norms_[i]; }
    const std::string& name(std::uint32_t i) const { return names_[i]; }
    const std::vector<std::string>& names() const noexcept { return names_; }
    const std::vector<float>& data() const noexcept { return data_; }

    std::optional<std::uint32_t> find(const std::string& name) const;

    friend bool operator==(const DenseMatrix& a, const DenseMatrix& b) {
        return a.dim_ == b.dim_ && a.data_ == b.data_ && a.names_ == b.names_;
    }

  private:
    std::uint32_t n_ = 0;
    std::uint32_t dim_ = 0;
    std::vector<float> data_;
    std::vector<std::string> names_;
    std::vector<double> norms_;
    std::unordered_map<std::string, std::uint32_t> by_name_;
};

double dot(std::span<const float> a, std::span<const float> b);
double l2_norm(std::span<const float> a);

}  // namespace visword
