#include "bstt/block_sparse_tt.hpp"

#include <random>
#include <stdexcept>

#include <Eigen/SVD>
#include <nlohmann/json.hpp>

#include "bstt/linalg.hpp"

namespace bstt {

namespace {

void check_shapes(const TensorTrain& tt, const BlockStructure& bs) {
    if (tt.order() != bs.order())
        throw std::invalid_argument("block sparse tt: order mismatch");
    for (Index k = 0; k < tt.order(); ++k)
        if (tt.component(k).dim(1) != bs.mode_dim())
            throw std::invalid_argument("block sparse tt: mode dimension mismatch");
    if (tt.ranks() != bs.ranks())
        throw std::invalid_argument("block sparse tt: rank tuple does not match group sizes");
}

bool triple_allowed(const BlockStructure& bs, int k, Index l1, Index m, Index l2) {
    const int g1 = bs.group_of_slot(k, l1);
    const int g2 = bs.group_of_slot(k + 1, l2);
    return g2 == g1 + static_cast<int>(m);
}

}  // namespace

BlockSparseTT::BlockSparseTT(TensorTrain tt, BlockStructure structure)
    : tt_(std::move(tt)), structure_(std::move(structure)) {
    validate(tt_, structure_);
}

void BlockSparseTT::validate(const TensorTrain& tt, const BlockStructure& bs) {
    check_shapes(tt, bs);
    for (Index k = 0; k < tt.order(); ++k) {
        const auto& c = tt.component(k);
        for (Index a = 0; a < c.dim(0); ++a)
            for (Index m = 0; m < c.dim(1); ++m)
                for (Index b = 0; b < c.dim(2); ++b)
                    if (c.at({a, m, b}) != 0.0 &&
                        !triple_allowed(bs, static_cast<int>(k), a, m, b))
                        throw std::invalid_argument(
                            "block sparse tt: nonzero entry outside the allowed pattern in component " +
                            std::to_string(k + 1));
    }
}

DenseTensor degree_operator_apply(const DenseTensor& c, std::span<const double> grading) {
    const Index d = c.order();
    if (d < 1) throw std::invalid_argument("degree operator: order must be at least 1");
    const Index p = c.dim(0);
    for (Index k = 1; k < d; ++k)
        if (c.dim(k) != p) throw std::invalid_argument("degree operator: modes must be square");
    std::vector<double> weights;
    if (grading.empty()) {
        for (Index i = 0; i < p; ++i) weights.push_back(static_cast<double>(i));
    } else {
        if (static_cast<Index>(grading.size()) != p)
            throw std::invalid_argument("degree operator: grading length must match mode dimension");
        weights.assign(grading.begin(), grading.end());
    }
    DenseTensor out = c;
    std::vector<Index> idx(static_cast<std::size_t>(d), 0);
    for (Index lin = 0; lin < c.size(); ++lin) {
        double w = 0.0;
        for (Index k = 0; k < d; ++k) w += weights[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])];
        out[lin] = w * c[lin];
        for (Index k = d - 1; k >= 0; --k) {
            if (++idx[static_cast<std::size_t>(k)] < p) break;
            idx[static_cast<std::size_t>(k)] = 0;
        }
    }
    return out;
}

BlockSparseTT random_block_sparse(const BlockStructure& bs, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto ranks = bs.ranks();
    std::vector<DenseTensor> cores;
    for (int k = 0; k < bs.order(); ++k) {
        DenseTensor c = DenseTensor::zeros({ranks[static_cast<std::size_t>(k)], static_cast<Index>(bs.mode_dim()),
                                            ranks[static_cast<std::size_t>(k + 1)]});
        for (const Triple& t : sparsity_pattern(bs, k)) c.at({t.left, t.mode, t.right}) = normal(gen);
        cores.push_back(std::move(c));
    }
    BlockSparseTT t(TensorTrain(std::move(cores)), bs);
    return block_orthogonalize(t, Direction::Right);
}

void block_left_push(TensorTrain& tt, const BlockStructure& bs, Index k) {
    if (k < 0 || k + 1 >= tt.order())
        throw std::invalid_argument("block_left_push: core index out of range");
    DenseTensor core = tt.component(k);
    DenseTensor next = tt.component(k + 1);
    const int g = bs.degree();

    for (int g2 = 0; g2 <= g; ++g2) {
        const int n2 = bs.group_size(static_cast<int>(k) + 1, g2);
        if (n2 == 0) continue;
        const Index off2 = bs.group_offset(static_cast<int>(k) + 1, g2);

        std::vector<std::pair<Index, Index>> rows;  // (l1, m) feeding group g2
        for (Index m = 0; m < bs.mode_dim(); ++m) {
            const int g1 = g2 - static_cast<int>(m);
            if (g1 < 0) break;
            const int n1 = bs.group_size(static_cast<int>(k), g1);
            const Index off1 = bs.group_offset(static_cast<int>(k), g1);
            for (Index a = 0; a < n1; ++a) rows.emplace_back(off1 + a, m);
        }
        if (static_cast<Index>(rows.size()) < n2)
            throw std::runtime_error("block_left_push: group rank exceeds available parent slots");

        Eigen::MatrixXd block(static_cast<Index>(rows.size()), n2);
        for (std::size_t r = 0; r < rows.size(); ++r)
            for (Index b = 0; b < n2; ++b)
                block(static_cast<Index>(r), b) = core.at({rows[r].first, rows[r].second, off2 + b});

        Eigen::MatrixXd q, rfac;
        thin_qr(block, q, rfac);
        for (std::size_t r = 0; r < rows.size(); ++r)
            for (Index b = 0; b < n2; ++b)
                core.at({rows[r].first, rows[r].second, off2 + b}) = q(static_cast<Index>(r), b);

        // next core, rows of group g2: absorb R within the group
        Eigen::MatrixXd slab(n2, next.dim(1) * next.dim(2));
        for (Index b = 0; b < n2; ++b)
            for (Index i = 0; i < next.dim(1); ++i)
                for (Index c2 = 0; c2 < next.dim(2); ++c2)
                    slab(b, i * next.dim(2) + c2) = next.at({off2 + b, i, c2});
        Eigen::MatrixXd mixed = rfac * slab;
        for (Index b = 0; b < n2; ++b)
            for (Index i = 0; i < next.dim(1); ++i)
                for (Index c2 = 0; c2 < next.dim(2); ++c2)
                    next.at({off2 + b, i, c2}) = mixed(b, i * next.dim(2) + c2);
    }

    const auto canon = tt.canonical_core();
    tt.set_component(k, std::move(core));
    tt.set_component(k + 1, std::move(next));
    tt.set_canonical_core(canon && *canon == k ? std::optional<Index>(k + 1) : std::nullopt);
}

void block_right_push(TensorTrain& tt, const BlockStructure& bs, Index k) {
    if (k < 1 || k >= tt.order())
        throw std::invalid_argument("block_right_push: core index out of range");
    DenseTensor core = tt.component(k);
    DenseTensor prev = tt.component(k - 1);
    const int g = bs.degree();

    for (int g1 = 0; g1 <= g; ++g1) {
        const int n1 = bs.group_size(static_cast<int>(k), g1);
        if (n1 == 0) continue;
        const Index off1 = bs.group_offset(static_cast<int>(k), g1);

        std::vector<std::pair<Index, Index>> cols;  // (m, l2) fed by group g1
        for (Index m = 0; m < bs.mode_dim(); ++m) {
            const int g2 = g1 + static_cast<int>(m);
            if (g2 > g) break;
            const int n2 = bs.group_size(static_cast<int>(k) + 1, g2);
            const Index off2 = bs.group_offset(static_cast<int>(k) + 1, g2);
            for (Index b = 0; b < n2; ++b) cols.emplace_back(m, off2 + b);
        }
        if (static_cast<Index>(cols.size()) < n1)
            throw std::runtime_error("block_right_push: group rank exceeds available child slots");

        Eigen::MatrixXd block(n1, static_cast<Index>(cols.size()));
        for (Index a = 0; a < n1; ++a)
            for (std::size_t c = 0; c < cols.size(); ++c)
                block(a, static_cast<Index>(c)) = core.at({off1 + a, cols[c].first, cols[c].second});

        Eigen::MatrixXd lfac, q;
        thin_lq(block, lfac, q);
        for (Index a = 0; a < n1; ++a)
            for (std::size_t c = 0; c < cols.size(); ++c)
                core.at({off1 + a, cols[c].first, cols[c].second}) = q(a, static_cast<Index>(c));

        Eigen::MatrixXd slab(prev.dim(0) * prev.dim(1), n1);
        for (Index a0 = 0; a0 < prev.dim(0); ++a0)
            for (Index i = 0; i < prev.dim(1); ++i)
                for (Index a = 0; a < n1; ++a)
                    slab(a0 * prev.dim(1) + i, a) = prev.at({a0, i, off1 + a});
        Eigen::MatrixXd mixed = slab * lfac;
        for (Index a0 = 0; a0 < prev.dim(0); ++a0)
            for (Index i = 0; i < prev.dim(1); ++i)
                for (Index a = 0; a < n1; ++a)
                    prev.at({a0, i, off1 + a}) = mixed(a0 * prev.dim(1) + i, a);
    }

    const auto canon = tt.canonical_core();
    tt.set_component(k, std::move(core));
    tt.set_component(k - 1, std::move(prev));
    tt.set_canonical_core(canon && *canon == k ? std::optional<Index>(k - 1) : std::nullopt);
}

void block_left_push(BlockSparseTT& t, Index k) { block_left_push(t.tt(), t.structure(), k); }
void block_right_push(BlockSparseTT& t, Index k) { block_right_push(t.tt(), t.structure(), k); }

void block_orthogonalize_inplace(TensorTrain& tt, const BlockStructure& bs, Direction direction) {
    const Index d = tt.order();
    if (direction == Direction::Left) {
        for (Index k = 0; k + 1 < d; ++k) block_left_push(tt, bs, k);
        tt.set_canonical_core(d - 1);
    } else {
        for (Index k = d - 1; k > 0; --k) block_right_push(tt, bs, k);
        tt.set_canonical_core(0);
    }
}

BlockSparseTT block_orthogonalize(const BlockSparseTT& t, Direction direction) {
    BlockSparseTT out = t;
    block_orthogonalize_inplace(out.tt(), out.structure(), direction);
    return out;
}

TensorTrain to_dense_tt(const BlockSparseTT& t) { return t.tt(); }

BlockSparseTT dense_to_block_sparse(const DenseTensor& c, int g, double cutoff) {
    const Index d = c.order();
    if (d < 1) throw std::invalid_argument("dense_to_block_sparse: order must be at least 1");
    const Index p = c.dim(0);
    for (Index k = 1; k < d; ++k)
        if (c.dim(k) != p) throw std::invalid_argument("dense_to_block_sparse: modes must be square");
    if (g < 0 || g > static_cast<int>(p - 1) * static_cast<int>(d))
        throw std::invalid_argument("dense_to_block_sparse: degree out of range");

    using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    RowMat w = Eigen::Map<const RowMat>(c.data(), 1, c.size());
    std::vector<int> degs{0};
    std::vector<std::vector<int>> rho{std::vector<int>(static_cast<std::size_t>(g + 1), 0)};
    rho[0][0] = 1;
    std::vector<DenseTensor> cores;

    for (Index k = 0; k + 1 < d; ++k) {
        const Index r_prev = static_cast<Index>(degs.size());
        const Index cols = w.size() / (r_prev * p);
        RowMat m = Eigen::Map<RowMat>(w.data(), r_prev * p, cols);  // rows are (l1, mode)

        std::vector<int> new_degs;
        std::vector<std::vector<std::pair<Index, Index>>> rows_of(static_cast<std::size_t>(g + 1));
        for (Index l1 = 0; l1 < r_prev; ++l1)
            for (Index mm = 0; mm < p; ++mm) {
                const int delta = degs[static_cast<std::size_t>(l1)] + static_cast<int>(mm);
                if (delta <= g) rows_of[static_cast<std::size_t>(delta)].emplace_back(l1, mm);
            }

        std::vector<Eigen::MatrixXd> kept_u(static_cast<std::size_t>(g + 1));
        std::vector<Eigen::MatrixXd> kept_w(static_cast<std::size_t>(g + 1));
        std::vector<int> sizes(static_cast<std::size_t>(g + 1), 0);
        for (int delta = 0; delta <= g; ++delta) {
            const auto& rows = rows_of[static_cast<std::size_t>(delta)];
            if (rows.empty()) continue;
            Eigen::MatrixXd block(static_cast<Index>(rows.size()), cols);
            for (std::size_t r = 0; r < rows.size(); ++r)
                block.row(static_cast<Index>(r)) = m.row(rows[r].first * p + rows[r].second);
            if (block.norm() == 0.0) continue;
            Eigen::BDCSVD<Eigen::MatrixXd> svd(block, Eigen::ComputeThinU | Eigen::ComputeThinV);
            const auto& sv = svd.singularValues();
            Index keep = 0;
            for (Index i = 0; i < sv.size(); ++i)
                if (sv(i) > cutoff * sv(0)) ++keep;
            if (keep == 0) continue;
            sizes[static_cast<std::size_t>(delta)] = static_cast<int>(keep);
            kept_u[static_cast<std::size_t>(delta)] = svd.matrixU().leftCols(keep);
            kept_w[static_cast<std::size_t>(delta)] =
                sv.head(keep).asDiagonal() * svd.matrixV().leftCols(keep).transpose();
            for (Index i = 0; i < keep; ++i) new_degs.push_back(delta);
        }

        const Index r_new = static_cast<Index>(new_degs.size());
        if (r_new == 0) throw std::invalid_argument("dense_to_block_sparse: tensor has no degree-" +
                                                    std::to_string(g) + " content");
        DenseTensor core = DenseTensor::zeros({r_prev, p, r_new});
        RowMat w_next(r_new, cols);
        Index slot = 0;
        for (int delta = 0; delta <= g; ++delta) {
            const int n = sizes[static_cast<std::size_t>(delta)];
            if (n == 0) continue;
            const auto& rows = rows_of[static_cast<std::size_t>(delta)];
            for (std::size_t r = 0; r < rows.size(); ++r)
                for (Index b = 0; b < n; ++b)
                    core.at({rows[r].first, rows[r].second, slot + b}) =
                        kept_u[static_cast<std::size_t>(delta)](static_cast<Index>(r), b);
            w_next.middleRows(slot, n) = kept_w[static_cast<std::size_t>(delta)];
            slot += n;
        }
        cores.push_back(std::move(core));
        rho.emplace_back(static_cast<std::size_t>(g + 1), 0);
        for (int delta = 0; delta <= g; ++delta)
            rho.back()[static_cast<std::size_t>(delta)] = sizes[static_cast<std::size_t>(delta)];
        degs = std::move(new_degs);
        w = Eigen::Map<RowMat>(w_next.data(), 1, w_next.size());
    }

    // last component: only rows completing the total degree g survive
    const Index r_prev = static_cast<Index>(degs.size());
    RowMat m = Eigen::Map<RowMat>(w.data(), r_prev, p);
    DenseTensor last = DenseTensor::zeros({r_prev, p, 1});
    for (Index l1 = 0; l1 < r_prev; ++l1)
        for (Index mm = 0; mm < p; ++mm)
            if (degs[static_cast<std::size_t>(l1)] + static_cast<int>(mm) == g)
                last.at({l1, mm, 0}) = m(l1, mm);
    cores.push_back(std::move(last));
    rho.emplace_back(static_cast<std::size_t>(g + 1), 0);
    rho.back()[static_cast<std::size_t>(g)] = 1;

    BlockStructure bs(static_cast<int>(d), g, static_cast<int>(p), std::move(rho));
    TensorTrain tt(std::move(cores));
    tt.set_canonical_core(d - 1);
    return BlockSparseTT(std::move(tt), std::move(bs));
}

void to_json(nlohmann::json& j, const BlockSparseTT& t) {
    j = nlohmann::json{{"structure", t.structure()}, {"tt", t.tt()}};
}

void from_json(const nlohmann::json& j, BlockSparseTT& t) {
    TensorTrain tt = j.at("tt").get<TensorTrain>();
    BlockStructure bs = j.at("structure").get<BlockStructure>();
    t = BlockSparseTT(std::move(tt), std::move(bs));  // validates the pattern
}

void to_json(nlohmann::json& j, const AugmentedBlockSparseTT& t) {
    to_json(j, t.train);
    j["augmented"] = true;
}

void from_json(const nlohmann::json& j, AugmentedBlockSparseTT& t) {
    if (!j.value("augmented", false))
        throw std::invalid_argument("augmented train json: missing augmented marker");
    from_json(j, t.train);
}

}  // namespace bstt
