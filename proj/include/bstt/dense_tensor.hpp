#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace bstt {

using Index = Eigen::Index;

/// Dense order-d tensor with row-major storage (last index runs fastest).
/// Order 0 (empty shape) is allowed and holds a single scalar.
class DenseTensor {
public:
    DenseTensor() = default;

    static DenseTensor zeros(std::vector<Index> shape);
    static DenseTensor from_values(std::vector<Index> shape, std::vector<double> values);
    static DenseTensor scalar(double value);

    Index order() const { return static_cast<Index>(shape_.size()); }
    const std::vector<Index>& shape() const { return shape_; }
    Index dim(Index mode) const { return shape_.at(static_cast<std::size_t>(mode)); }
    Index size() const { return static_cast<Index>(values_.size()); }

    double& operator[](Index linear) { return values_[static_cast<std::size_t>(linear)]; }
    double operator[](Index linear) const { return values_[static_cast<std::size_t>(linear)]; }

    double& at(std::span<const Index> multi_index);
    double at(std::span<const Index> multi_index) const;
    double& at(std::initializer_list<Index> multi_index);
    double at(std::initializer_list<Index> multi_index) const;

    Index linear_index(std::span<const Index> multi_index) const;

    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }
    double* data() { return values_.data(); }
    const double* data() const { return values_.data(); }

    double frobenius_norm() const;

private:
    std::vector<Index> shape_;
    std::vector<double> values_;
};

Index shape_product(std::span<const Index> shape);

/// Row-major reindexing to a new shape; total size must match.
DenseTensor reshape(const DenseTensor& t, std::vector<Index> new_shape);

/// Reorders modes: result mode i is t's mode perm[i].
DenseTensor permute(const DenseTensor& t, std::span<const Index> perm);

/// Sums over the paired modes; free modes of a precede free modes of b,
/// each block keeping its original order.
DenseTensor contract(const DenseTensor& a, std::span<const Index> a_modes,
                     const DenseTensor& b, std::span<const Index> b_modes);

DenseTensor operator+(const DenseTensor& a, const DenseTensor& b);
DenseTensor operator-(const DenseTensor& a, const DenseTensor& b);
DenseTensor operator*(double s, const DenseTensor& t);

/// Matricization joining modes 0..split-1 (rows) vs split..d-1 (columns).
Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
unfold_at(const DenseTensor& t, Index split);

}  // namespace bstt
