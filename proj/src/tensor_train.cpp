#include "bstt/tensor_train.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/SVD>
#include <nlohmann/json.hpp>

#include "bstt/linalg.hpp"

namespace bstt {

namespace {

void validate_components(const std::vector<DenseTensor>& comps) {
    if (comps.empty()) throw std::invalid_argument("tensor train needs at least one component");
    for (const auto& c : comps)
        if (c.order() != 3) throw std::invalid_argument("tensor train components must have order 3");
    if (comps.front().dim(0) != 1 || comps.back().dim(2) != 1)
        throw std::invalid_argument("boundary ranks must be 1");
    for (std::size_t k = 0; k + 1 < comps.size(); ++k)
        if (comps[k].dim(2) != comps[k + 1].dim(0))
            throw std::invalid_argument("adjacent ranks disagree");
}

}  // namespace

TensorTrain::TensorTrain(std::vector<DenseTensor> components) : components_(std::move(components)) {
    validate_components(components_);
}

std::vector<Index> TensorTrain::dims() const {
    std::vector<Index> n;
    for (const auto& c : components_) n.push_back(c.dim(1));
    return n;
}

std::vector<Index> TensorTrain::ranks() const {
    std::vector<Index> r{1};
    for (const auto& c : components_) r.push_back(c.dim(2));
    return r;
}

void TensorTrain::set_component(Index k, DenseTensor c) {
    if (c.order() != 3) throw std::invalid_argument("component must have order 3");
    components_.at(static_cast<std::size_t>(k)) = std::move(c);
    validate_components(components_);
}

void TensorTrain::set_canonical_core(std::optional<Index> c) {
    if (c && (*c < 0 || *c >= order()))
        throw std::invalid_argument("canonical core out of range");
    canonical_core_ = c;
}

double TensorTrain::frobenius_norm() const {
    // gram chain: G_k = sum_i C_k(:,i,:)^T G_{k-1} C_k(:,i,:)
    Eigen::MatrixXd g = Eigen::MatrixXd::Ones(1, 1);
    for (const auto& c : components_) {
        const Index r0 = c.dim(0), n = c.dim(1), r1 = c.dim(2);
        Eigen::MatrixXd next = Eigen::MatrixXd::Zero(r1, r1);
        for (Index i = 0; i < n; ++i) {
            Eigen::MatrixXd slice(r0, r1);
            for (Index a = 0; a < r0; ++a)
                for (Index b = 0; b < r1; ++b) slice(a, b) = c.at({a, i, b});
            next += slice.transpose() * g * slice;
        }
        g = std::move(next);
    }
    return std::sqrt(std::max(0.0, g(0, 0)));
}

Eigen::MatrixXd left_unfold(const DenseTensor& core) {
    using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    return Eigen::Map<const RowMat>(core.data(), core.dim(0) * core.dim(1), core.dim(2));
}

Eigen::MatrixXd right_unfold(const DenseTensor& core) {
    using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    return Eigen::Map<const RowMat>(core.data(), core.dim(0), core.dim(1) * core.dim(2));
}

DenseTensor fold_left(const Eigen::MatrixXd& m, Index r0, Index n, Index r1) {
    if (m.rows() != r0 * n || m.cols() != r1) throw std::invalid_argument("fold_left: shape mismatch");
    DenseTensor c = DenseTensor::zeros({r0, n, r1});
    using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<RowMat>(c.data(), r0 * n, r1) = m;
    return c;
}

DenseTensor fold_right(const Eigen::MatrixXd& m, Index r0, Index n, Index r1) {
    if (m.rows() != r0 || m.cols() != n * r1) throw std::invalid_argument("fold_right: shape mismatch");
    DenseTensor c = DenseTensor::zeros({r0, n, r1});
    using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<RowMat>(c.data(), r0, n * r1) = m;
    return c;
}

DenseTensor tt_to_dense(const TensorTrain& t, Index cap) {
    const auto n = t.dims();
    Index total = 1;
    for (Index nk : n) {
        total *= nk;
        if (total > cap) throw std::runtime_error("tt_to_dense: entry count exceeds cap");
    }
    using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    RowMat acc = RowMat::Ones(1, 1);
    for (Index k = 0; k < t.order(); ++k) {
        const auto& c = t.component(k);
        // (P x r0) * (r0 x n*r1) -> (P x n*r1) -> reshape (P*n x r1)
        RowMat prod = acc * right_unfold(c);
        acc = Eigen::Map<RowMat>(prod.data(), prod.rows() * c.dim(1), c.dim(2));
    }
    std::vector<double> vals(acc.data(), acc.data() + acc.size());
    return DenseTensor::from_values(n, std::move(vals));
}

TensorTrain dense_to_tt(const DenseTensor& x, Index max_rank, double tol) {
    const Index d = x.order();
    if (d < 1) throw std::invalid_argument("dense_to_tt: order must be at least 1");
    const double norm = x.frobenius_norm();
    if (norm == 0.0) throw std::invalid_argument("dense_to_tt: input is zero");
    if (max_rank < 1) throw std::invalid_argument("dense_to_tt: max_rank must be positive");

    const double budget2 = tol * tol * norm * norm;
    const double per_cut = d > 1 ? budget2 / static_cast<double>(d - 1) : 0.0;

    using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    std::vector<DenseTensor> cores;
    RowMat w = Eigen::Map<const RowMat>(x.data(), 1, x.size());
    Index r_prev = 1;
    double discarded = 0.0;
    bool capped = false;

    for (Index k = 0; k + 1 < d; ++k) {
        const Index nk = x.dim(k);
        const Index rows = r_prev * nk;
        const Index cols = w.size() / rows;
        RowMat m = Eigen::Map<RowMat>(w.data(), rows, cols);
        Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const auto& sv = svd.singularValues();

        Index keep = sv.size();
        double tail = 0.0;
        while (keep > 1) {
            const double s = sv(keep - 1);
            const bool numeric_zero = s <= 1e-14 * sv(0);
            if (!numeric_zero && tail + s * s > per_cut) break;
            tail += s * s;
            --keep;
        }
        if (keep > max_rank) {
            capped = true;
            for (Index i = max_rank; i < keep; ++i) tail += sv(i) * sv(i);
            keep = max_rank;
        }
        discarded += tail;

        cores.push_back(fold_left(svd.matrixU().leftCols(keep), r_prev, nk, keep));
        RowMat next = sv.head(keep).asDiagonal() * svd.matrixV().leftCols(keep).transpose();
        w = Eigen::Map<RowMat>(next.data(), 1, next.size());
        r_prev = keep;
    }
    cores.push_back(fold_left(Eigen::Map<RowMat>(w.data(), r_prev * x.dim(d - 1), 1),
                              r_prev, x.dim(d - 1), 1));

    // numeric-zero cleanup never counts against the budget; the rank cap does
    const double slack = 1e-24 * norm * norm;
    if (capped && discarded > budget2 + slack)
        throw ToleranceUnreachable("dense_to_tt: rank cap forces error " +
                                   std::to_string(std::sqrt(discarded) / norm) +
                                   " above tolerance " + std::to_string(tol));

    TensorTrain t(std::move(cores));
    t.set_canonical_core(d - 1);
    return t;
}

std::vector<Index> tt_rank(const DenseTensor& x) {
    std::vector<Index> r;
    for (Index k = 1; k < x.order(); ++k)
        r.push_back(matrix_rank(unfold_at(x, k)));
    return r;
}

TensorTrain orthogonalize(const TensorTrain& t, Direction direction) {
    const Index d = t.order();
    std::vector<DenseTensor> comps;
    comps.reserve(static_cast<std::size_t>(d));
    for (Index k = 0; k < d; ++k) comps.push_back(t.component(k));

    if (direction == Direction::Left) {
        for (Index k = 0; k + 1 < d; ++k) {
            Eigen::MatrixXd q, r;
            thin_qr(left_unfold(comps[static_cast<std::size_t>(k)]), q, r);
            const Index r0 = comps[static_cast<std::size_t>(k)].dim(0);
            const Index n = comps[static_cast<std::size_t>(k)].dim(1);
            comps[static_cast<std::size_t>(k)] = fold_left(q, r0, n, q.cols());
            auto& nxt = comps[static_cast<std::size_t>(k + 1)];
            Eigen::MatrixXd m = r * right_unfold(nxt);
            nxt = fold_right(m, m.rows(), nxt.dim(1), nxt.dim(2));
        }
    } else {
        for (Index k = d - 1; k > 0; --k) {
            Eigen::MatrixXd l, q;
            thin_lq(right_unfold(comps[static_cast<std::size_t>(k)]), l, q);
            const Index n = comps[static_cast<std::size_t>(k)].dim(1);
            const Index r1 = comps[static_cast<std::size_t>(k)].dim(2);
            comps[static_cast<std::size_t>(k)] = fold_right(q, q.rows(), n, r1);
            auto& prv = comps[static_cast<std::size_t>(k - 1)];
            Eigen::MatrixXd m = left_unfold(prv) * l;
            prv = fold_left(m, prv.dim(0), prv.dim(1), m.cols());
        }
    }
    TensorTrain out(std::move(comps));
    out.set_canonical_core(direction == Direction::Left ? d - 1 : 0);
    return out;
}

void tt_left_push(TensorTrain& t, Index k) {
    if (k < 0 || k + 1 >= t.order()) throw std::invalid_argument("tt_left_push: core index out of range");
    DenseTensor core = t.component(k);
    DenseTensor next = t.component(k + 1);
    Eigen::MatrixXd q, r;
    thin_qr(left_unfold(core), q, r);
    if (q.cols() != core.dim(2))
        throw std::runtime_error("tt_left_push: rank exceeds unfolding rows");
    core = fold_left(q, core.dim(0), core.dim(1), core.dim(2));
    Eigen::MatrixXd m = r * right_unfold(next);
    next = fold_right(m, next.dim(0), next.dim(1), next.dim(2));
    const auto canon = t.canonical_core();
    t.set_component(k, std::move(core));
    t.set_component(k + 1, std::move(next));
    t.set_canonical_core(canon && *canon == k ? std::optional<Index>(k + 1) : std::nullopt);
}

void tt_right_push(TensorTrain& t, Index k) {
    if (k < 1 || k >= t.order()) throw std::invalid_argument("tt_right_push: core index out of range");
    DenseTensor core = t.component(k);
    DenseTensor prev = t.component(k - 1);
    Eigen::MatrixXd l, q;
    thin_lq(right_unfold(core), l, q);
    if (q.rows() != core.dim(0))
        throw std::runtime_error("tt_right_push: rank exceeds unfolding columns");
    core = fold_right(q, core.dim(0), core.dim(1), core.dim(2));
    Eigen::MatrixXd m = left_unfold(prev) * l;
    prev = fold_left(m, prev.dim(0), prev.dim(1), prev.dim(2));
    const auto canon = t.canonical_core();
    t.set_component(k, std::move(core));
    t.set_component(k - 1, std::move(prev));
    t.set_canonical_core(canon && *canon == k ? std::optional<Index>(k - 1) : std::nullopt);
}

namespace {

void require_side_orthogonal(const TensorTrain& t, Index k, Direction side) {
    const Index d = t.order();
    if (k < 0 || k > d) throw std::invalid_argument("interface position out of range");
    const auto c = t.canonical_core();
    if (side == Direction::Left) {
        if (k == 0) return;
        const Index need = std::min(k, d - 1);
        if (!c || *c < need)
            throw std::runtime_error("interface tensors: components left of the cut are not left orthogonal");
    } else {
        if (k == d) return;
        const Index need = std::max<Index>(k - 1, 0);
        if (!c || *c > need)
            throw std::runtime_error("interface tensors: components right of the cut are not right orthogonal");
    }
}

}  // namespace

std::vector<DenseTensor> interface_tensors(const TensorTrain& t, Index k, Direction side, Index cap) {
    require_side_orthogonal(t, k, side);
    const Index d = t.order();
    const auto n = t.dims();
    const auto r = t.ranks();
    using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

    if (side == Direction::Left) {
        RowMat acc = RowMat::Ones(1, 1);  // (prod n_0..n_{j-1}) x r_j
        Index total = 1;
        for (Index j = 0; j < k; ++j) {
            total *= n[static_cast<std::size_t>(j)];
            if (total > cap) throw std::runtime_error("interface_tensors: size exceeds cap");
            RowMat prod = acc * right_unfold(t.component(j));
            acc = Eigen::Map<RowMat>(prod.data(), prod.rows() * n[static_cast<std::size_t>(j)],
                                     t.component(j).dim(2));
        }
        std::vector<Index> shape(n.begin(), n.begin() + k);
        std::vector<DenseTensor> out;
        for (Index l = 0; l < r[static_cast<std::size_t>(k)]; ++l) {
            Eigen::VectorXd col = acc.col(l);
            out.push_back(DenseTensor::from_values(shape, std::vector<double>(col.data(), col.data() + col.size())));
        }
        return out;
    }

    RowMat acc = RowMat::Ones(1, 1);  // r_j x (prod n_j..n_{d-1}), built right to left
    Index total = 1;
    for (Index j = d - 1; j >= k; --j) {
        total *= n[static_cast<std::size_t>(j)];
        if (total > cap) throw std::runtime_error("interface_tensors: size exceeds cap");
        // (r_{j} n_j x r_{j+1}) * (r_{j+1} x P) -> reshape r_j x (n_j P)
        RowMat lu = left_unfold(t.component(j));
        RowMat prod = lu * acc;
        acc = Eigen::Map<RowMat>(prod.data(), t.component(j).dim(0),
                                 prod.size() / t.component(j).dim(0));
    }
    std::vector<Index> shape(n.begin() + k, n.end());
    std::vector<DenseTensor> out;
    for (Index l = 0; l < r[static_cast<std::size_t>(k)]; ++l) {
        Eigen::VectorXd row = acc.row(l);
        out.push_back(DenseTensor::from_values(shape, std::vector<double>(row.data(), row.data() + row.size())));
    }
    return out;
}

Eigen::MatrixXd interface_evaluations(const TensorTrain& t, Index k, Direction side,
                                      std::span<const Eigen::MatrixXd> xi) {
    require_side_orthogonal(t, k, side);
    const Index d = t.order();
    if (static_cast<Index>(xi.size()) != d)
        throw std::invalid_argument("interface_evaluations: need one evaluation matrix per mode");
    const Index m_count = xi.empty() ? 0 : xi[0].cols();
    for (Index j = 0; j < d; ++j)
        if (xi[static_cast<std::size_t>(j)].rows() != t.component(j).dim(1) ||
            xi[static_cast<std::size_t>(j)].cols() != m_count)
            throw std::invalid_argument("interface_evaluations: evaluation matrix shape mismatch");

    if (side == Direction::Left) {
        Eigen::MatrixXd stack = Eigen::MatrixXd::Ones(m_count, 1);
        for (Index j = 0; j < k; ++j) {
            const auto& c = t.component(j);
            const Index r0 = c.dim(0), n = c.dim(1), r1 = c.dim(2);
            Eigen::MatrixXd next(m_count, r1);
            for (Index m = 0; m < m_count; ++m) {
                for (Index b = 0; b < r1; ++b) {
                    double acc = 0.0;
                    for (Index i = 0; i < n; ++i) {
                        double inner = 0.0;
                        for (Index a = 0; a < r0; ++a) inner += stack(m, a) * c.at({a, i, b});
                        acc += xi[static_cast<std::size_t>(j)](i, m) * inner;
                    }
                    next(m, b) = acc;
                }
            }
            stack = std::move(next);
        }
        return stack;
    }

    Eigen::MatrixXd stack = Eigen::MatrixXd::Ones(m_count, 1);
    for (Index j = d - 1; j >= k; --j) {
        const auto& c = t.component(j);
        const Index r0 = c.dim(0), n = c.dim(1), r1 = c.dim(2);
        Eigen::MatrixXd next(m_count, r0);
        for (Index m = 0; m < m_count; ++m) {
            for (Index a = 0; a < r0; ++a) {
                double acc = 0.0;
                for (Index i = 0; i < n; ++i) {
                    double inner = 0.0;
                    for (Index b = 0; b < r1; ++b) inner += c.at({a, i, b}) * stack(m, b);
                    acc += xi[static_cast<std::size_t>(j)](i, m) * inner;
                }
                next(m, a) = acc;
            }
        }
        stack = std::move(next);
    }
    return stack;
}

void to_json(nlohmann::json& j, const TensorTrain& t) {
    j = nlohmann::json::object();
    j["shape"] = t.dims();
    j["ranks"] = t.ranks();
    nlohmann::json comps = nlohmann::json::array();
    for (Index k = 0; k < t.order(); ++k) {
        const auto& c = t.component(k);
        nlohmann::json a = nlohmann::json::array();
        for (Index i = 0; i < c.dim(0); ++i) {
            nlohmann::json bi = nlohmann::json::array();
            for (Index n = 0; n < c.dim(1); ++n) {
                nlohmann::json ci = nlohmann::json::array();
                for (Index l = 0; l < c.dim(2); ++l) ci.push_back(c.at({i, n, l}));
                bi.push_back(std::move(ci));
            }
            a.push_back(std::move(bi));
        }
        comps.push_back(std::move(a));
    }
    j["components"] = std::move(comps);
    const auto core = t.canonical_core();
    if (!core) {
        j["orthogonality"] = "none";
    } else if (*core == t.order() - 1) {
        j["orthogonality"] = "left";
    } else if (*core == 0) {
        j["orthogonality"] = "right";
    } else {
        j["orthogonality"] = "mixed";
        j["core"] = *core + 1;  // 1-based in documents
    }
}

void from_json(const nlohmann::json& j, TensorTrain& t) {
    const auto& comps = j.at("components");
    std::vector<DenseTensor> cores;
    for (const auto& a : comps) {
        const Index r0 = static_cast<Index>(a.size());
        const Index n = static_cast<Index>(a.at(0).size());
        const Index r1 = static_cast<Index>(a.at(0).at(0).size());
        DenseTensor c = DenseTensor::zeros({r0, n, r1});
        for (Index i = 0; i < r0; ++i)
            for (Index m = 0; m < n; ++m)
                for (Index l = 0; l < r1; ++l)
                    c.at({i, m, l}) = a.at(static_cast<std::size_t>(i))
                                          .at(static_cast<std::size_t>(m))
                                          .at(static_cast<std::size_t>(l))
                                          .get<double>();
        cores.push_back(std::move(c));
    }
    t = TensorTrain(std::move(cores));
    const std::string orth = j.value("orthogonality", "none");
    if (orth == "left") {
        t.set_canonical_core(t.order() - 1);
    } else if (orth == "right") {
        t.set_canonical_core(0);
    } else if (orth == "mixed") {
        t.set_canonical_core(j.at("core").get<Index>() - 1);
    }
    if (j.contains("shape") && j.at("shape").get<std::vector<Index>>() != t.dims())
        throw std::invalid_argument("tensor train json: shape field disagrees with components");
    if (j.contains("ranks") && j.at("ranks").get<std::vector<Index>>() != t.ranks())
        throw std::invalid_argument("tensor train json: ranks field disagrees with components");
}

}  // namespace bstt
