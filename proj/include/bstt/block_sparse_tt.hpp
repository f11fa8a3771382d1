#pragma once

#include <cstdint>
#include <span>

#include "bstt/block_structure.hpp"
#include "bstt/tensor_train.hpp"

#include <nlohmann/json_fwd.hpp>

namespace bstt {

/// Tensor train constrained by a BlockStructure. Entries outside the allowed
/// pattern are kept exactly (bit) zero; the dense reconstruction is then an
/// eigenvector of the degree operator with eigenvalue structure().degree().
class BlockSparseTT {
public:
    BlockSparseTT() = default;
    BlockSparseTT(TensorTrain tt, BlockStructure structure);

    const TensorTrain& tt() const { return tt_; }
    TensorTrain& tt() { return tt_; }
    const BlockStructure& structure() const { return structure_; }

    /// Throws when shapes disagree or any off-pattern entry is nonzero.
    static void validate(const TensorTrain& tt, const BlockStructure& structure);

private:
    TensorTrain tt_;
    BlockStructure structure_;
};

/// Order-(d+1) block-sparse train whose last mode is the shadow variable;
/// contracting it with the all-ones vector yields the sum over degrees 0..g.
struct AugmentedBlockSparseTT {
    BlockSparseTT train;
    int ambient_order() const { return train.structure().order() - 1; }
};

/// (Lc)(m_1..m_d) = (sum_k grading[m_k]) * c(m_1..m_d). Empty grading means the
/// standard degrees (0, 1, ..., p-1). Modes must share one dimension.
DenseTensor degree_operator_apply(const DenseTensor& c, std::span<const double> grading = {});

/// I.i.d. standard normal entries on the allowed pattern (deterministic in the
/// seed), right-orthogonalized group-wise.
BlockSparseTT random_block_sparse(const BlockStructure& bs, std::uint64_t seed);

/// One-core orthogonalization steps that factor each degree group separately,
/// so the pattern is preserved and off-pattern entries stay bit-zero.
void block_left_push(BlockSparseTT& t, Index k);   // k in [0, d-2]
void block_right_push(BlockSparseTT& t, Index k);  // k in [1, d-1]

/// Unvalidated variants for sweep loops; the caller guarantees the train
/// already complies with the structure.
void block_left_push(TensorTrain& tt, const BlockStructure& bs, Index k);
void block_right_push(TensorTrain& tt, const BlockStructure& bs, Index k);
void block_orthogonalize_inplace(TensorTrain& tt, const BlockStructure& bs, Direction direction);

BlockSparseTT block_orthogonalize(const BlockSparseTT& t, Direction direction);

/// The underlying train with the sparsity merely materialized as zeros.
TensorTrain to_dense_tt(const BlockSparseTT& t);

/// Structured sequential SVD of a degree-g coefficient tensor: groups the rows
/// of every unfolding by degree and factors each group separately, producing a
/// pattern-compliant representation. Off-degree content (anything that is not
/// part of the eigenspace) is projected away.
BlockSparseTT dense_to_block_sparse(const DenseTensor& c, int g, double cutoff = 1e-12);

void to_json(nlohmann::json& j, const BlockSparseTT& t);
void from_json(const nlohmann::json& j, BlockSparseTT& t);
void to_json(nlohmann::json& j, const AugmentedBlockSparseTT& t);
void from_json(const nlohmann::json& j, AugmentedBlockSparseTT& t);

}  // namespace bstt
