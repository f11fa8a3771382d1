#include "bstt/dense_tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bstt {

Index shape_product(std::span<const Index> shape) {
    Index n = 1;
    for (Index s : shape) {
        if (s <= 0) throw std::invalid_argument("shape entries must be positive");
        n *= s;
    }
    return n;
}

DenseTensor DenseTensor::zeros(std::vector<Index> shape) {
    DenseTensor t;
    Index n = shape_product(shape);
    t.shape_ = std::move(shape);
    t.values_.assign(static_cast<std::size_t>(n), 0.0);
    return t;
}

DenseTensor DenseTensor::from_values(std::vector<Index> shape, std::vector<double> values) {
    Index n = shape_product(shape);
    if (n != static_cast<Index>(values.size()))
        throw std::invalid_argument("value count does not match shape product");
    DenseTensor t;
    t.shape_ = std::move(shape);
    t.values_ = std::move(values);
    return t;
}

DenseTensor DenseTensor::scalar(double value) {
    DenseTensor t;
    t.values_.assign(1, value);
    return t;
}

Index DenseTensor::linear_index(std::span<const Index> multi_index) const {
    if (multi_index.size() != shape_.size())
        throw std::invalid_argument("multi-index order does not match tensor order");
    Index lin = 0;
    for (std::size_t k = 0; k < shape_.size(); ++k) {
        Index i = multi_index[k];
        if (i < 0 || i >= shape_[k]) throw std::out_of_range("multi-index out of range");
        lin = lin * shape_[k] + i;
    }
    return lin;
}

double& DenseTensor::at(std::span<const Index> mi) { return values_[static_cast<std::size_t>(linear_index(mi))]; }
double DenseTensor::at(std::span<const Index> mi) const { return values_[static_cast<std::size_t>(linear_index(mi))]; }
double& DenseTensor::at(std::initializer_list<Index> mi) { return at(std::span<const Index>(mi.begin(), mi.size())); }
double DenseTensor::at(std::initializer_list<Index> mi) const { return at(std::span<const Index>(mi.begin(), mi.size())); }

double DenseTensor::frobenius_norm() const {
    double s = 0.0;
    for (double v : values_) s += v * v;
    return std::sqrt(s);
}

DenseTensor reshape(const DenseTensor& t, std::vector<Index> new_shape) {
    if (shape_product(new_shape) != t.size())
        throw std::invalid_argument("reshape: shape products differ");
    return DenseTensor::from_values(std::move(new_shape), t.values());
}

DenseTensor permute(const DenseTensor& t, std::span<const Index> perm) {
    const Index d = t.order();
    if (static_cast<Index>(perm.size()) != d)
        throw std::invalid_argument("permute: permutation length mismatch");
    std::vector<bool> seen(static_cast<std::size_t>(d), false);
    std::vector<Index> new_shape(static_cast<std::size_t>(d));
    for (Index i = 0; i < d; ++i) {
        Index p = perm[static_cast<std::size_t>(i)];
        if (p < 0 || p >= d || seen[static_cast<std::size_t>(p)])
            throw std::invalid_argument("permute: not a permutation");
        seen[static_cast<std::size_t>(p)] = true;
        new_shape[static_cast<std::size_t>(i)] = t.dim(p);
    }
    DenseTensor out = DenseTensor::zeros(new_shape);
    if (d == 0) {
        out[0] = t[0];
        return out;
    }

    // old strides, and for each output mode the stride of the source mode it reads
    std::vector<Index> old_stride(static_cast<std::size_t>(d), 1);
    for (Index k = d - 2; k >= 0; --k)
        old_stride[static_cast<std::size_t>(k)] =
            old_stride[static_cast<std::size_t>(k + 1)] * t.dim(k + 1);

    std::vector<Index> idx(static_cast<std::size_t>(d), 0);
    const Index n = t.size();
    for (Index lin = 0; lin < n; ++lin) {
        Index src = 0;
        for (Index k = 0; k < d; ++k)
            src += idx[static_cast<std::size_t>(k)] * old_stride[static_cast<std::size_t>(perm[static_cast<std::size_t>(k)])];
        out[lin] = t[src];
        for (Index k = d - 1; k >= 0; --k) {
            if (++idx[static_cast<std::size_t>(k)] < new_shape[static_cast<std::size_t>(k)]) break;
            idx[static_cast<std::size_t>(k)] = 0;
        }
    }
    return out;
}

DenseTensor contract(const DenseTensor& a, std::span<const Index> a_modes,
                     const DenseTensor& b, std::span<const Index> b_modes) {
    if (a_modes.size() != b_modes.size())
        throw std::invalid_argument("contract: mode lists must have equal length");
    auto check_modes = [](const DenseTensor& t, std::span<const Index> modes) {
        std::vector<bool> seen(static_cast<std::size_t>(t.order()), false);
        for (Index m : modes) {
            if (m < 0 || m >= t.order()) throw std::invalid_argument("contract: invalid mode");
            if (seen[static_cast<std::size_t>(m)]) throw std::invalid_argument("contract: duplicate mode");
            seen[static_cast<std::size_t>(m)] = true;
        }
    };
    check_modes(a, a_modes);
    check_modes(b, b_modes);
    for (std::size_t j = 0; j < a_modes.size(); ++j)
        if (a.dim(a_modes[j]) != b.dim(b_modes[j]))
            throw std::invalid_argument("contract: paired mode dimensions differ");

    auto free_modes = [](const DenseTensor& t, std::span<const Index> modes) {
        std::vector<bool> used(static_cast<std::size_t>(t.order()), false);
        for (Index m : modes) used[static_cast<std::size_t>(m)] = true;
        std::vector<Index> free;
        for (Index m = 0; m < t.order(); ++m)
            if (!used[static_cast<std::size_t>(m)]) free.push_back(m);
        return free;
    };
    const std::vector<Index> a_free = free_modes(a, a_modes);
    const std::vector<Index> b_free = free_modes(b, b_modes);

    std::vector<Index> a_perm(a_free);
    a_perm.insert(a_perm.end(), a_modes.begin(), a_modes.end());
    std::vector<Index> b_perm(b_modes.begin(), b_modes.end());
    b_perm.insert(b_perm.end(), b_free.begin(), b_free.end());

    DenseTensor ap = permute(a, a_perm);
    DenseTensor bp = permute(b, b_perm);

    Index k_dim = 1;
    for (Index m : a_modes) k_dim *= a.dim(m);
    const Index fa = ap.size() / k_dim;
    const Index fb = bp.size() / k_dim;

    using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<const RowMat> ma(ap.data(), fa, k_dim);
    Eigen::Map<const RowMat> mb(bp.data(), k_dim, fb);
    RowMat mc = ma * mb;

    std::vector<Index> out_shape;
    for (Index m : a_free) out_shape.push_back(a.dim(m));
    for (Index m : b_free) out_shape.push_back(b.dim(m));
    std::vector<double> vals(mc.data(), mc.data() + mc.size());
    return DenseTensor::from_values(std::move(out_shape), std::move(vals));
}

DenseTensor operator+(const DenseTensor& a, const DenseTensor& b) {
    if (a.shape() != b.shape()) throw std::invalid_argument("tensor add: shape mismatch");
    DenseTensor r = a;
    for (Index i = 0; i < r.size(); ++i) r[i] += b[i];
    return r;
}

DenseTensor operator-(const DenseTensor& a, const DenseTensor& b) {
    if (a.shape() != b.shape()) throw std::invalid_argument("tensor subtract: shape mismatch");
    DenseTensor r = a;
    for (Index i = 0; i < r.size(); ++i) r[i] -= b[i];
    return r;
}

DenseTensor operator*(double s, const DenseTensor& t) {
    DenseTensor r = t;
    for (Index i = 0; i < r.size(); ++i) r[i] *= s;
    return r;
}

Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
unfold_at(const DenseTensor& t, Index split) {
    if (split < 0 || split > t.order()) throw std::invalid_argument("unfold_at: invalid split");
    Index rows = 1;
    for (Index k = 0; k < split; ++k) rows *= t.dim(k);
    const Index cols = t.size() / rows;
    using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    return Eigen::Map<const RowMat>(t.data(), rows, cols);
}

}  // namespace bstt
