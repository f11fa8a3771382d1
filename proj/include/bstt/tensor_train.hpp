#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "bstt/dense_tensor.hpp"

#include <nlohmann/json_fwd.hpp>

namespace bstt {

enum class Direction { Left, Right };

/// Tensor train: a chain of order-3 components C_k of shape (r_{k-1}, n_k, r_k)
/// with boundary ranks r_0 = r_d = 1.
///
/// Canonical-form tracking: canonical_core() == c (0-based) means components
/// 0..c-1 are left orthogonal and components c+1..d-1 are right orthogonal.
/// c == d-1 is the left-orthogonal flag, c == 0 the right-orthogonal one.
class TensorTrain {
public:
    TensorTrain() = default;
    explicit TensorTrain(std::vector<DenseTensor> components);

    Index order() const { return static_cast<Index>(components_.size()); }
    std::vector<Index> dims() const;
    std::vector<Index> ranks() const;  // r_0 .. r_d

    const DenseTensor& component(Index k) const { return components_.at(static_cast<std::size_t>(k)); }
    /// Replaces a component; resets the canonical flag unless the caller restores it.
    void set_component(Index k, DenseTensor c);

    std::optional<Index> canonical_core() const { return canonical_core_; }
    void set_canonical_core(std::optional<Index> c);
    bool is_left_orthogonal() const { return canonical_core_ && *canonical_core_ == order() - 1; }
    bool is_right_orthogonal() const { return canonical_core_ && *canonical_core_ == 0; }

    double frobenius_norm() const;

private:
    std::vector<DenseTensor> components_;
    std::optional<Index> canonical_core_;
};

/// Left unfolding (r0*n) x r1 and right unfolding r0 x (n*r1) of an order-3 core.
Eigen::MatrixXd left_unfold(const DenseTensor& core);
Eigen::MatrixXd right_unfold(const DenseTensor& core);
DenseTensor fold_left(const Eigen::MatrixXd& m, Index r0, Index n, Index r1);
DenseTensor fold_right(const Eigen::MatrixXd& m, Index r0, Index n, Index r1);

/// Full contraction. Throws when the result would exceed `cap` entries.
DenseTensor tt_to_dense(const TensorTrain& t, Index cap = 10'000'000);

struct ToleranceUnreachable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Sequential-SVD decomposition. The reconstruction differs from x by at most
/// tol * ||x|| in Frobenius norm; throws ToleranceUnreachable when the rank cap
/// forces a larger error. Result is left orthogonal.
TensorTrain dense_to_tt(const DenseTensor& x, Index max_rank, double tol);

/// TT-rank via unfolding matrix ranks (relative cutoff kRankCutoff).
std::vector<Index> tt_rank(const DenseTensor& x);

TensorTrain orthogonalize(const TensorTrain& t, Direction direction);

/// One-core gauge moves used by sweeps: QR on component k with the factor
/// absorbed into the neighbor. Ranks are unchanged (the triangular factor stays
/// square), and the canonical core advances when it sat at k.
void tt_left_push(TensorTrain& t, Index k);   // k in [0, d-2]
void tt_right_push(TensorTrain& t, Index k);  // k in [1, d-1]

/// Dense interface tensors at interface k in [0, order]:
/// Left  -> contraction of components [0, k), one order-k tensor per slot l = 1..r_k;
/// Right -> contraction of components [k, order), one order-(d-k) tensor per slot.
/// Requires the matching side to be orthogonal (see canonical_core()).
std::vector<DenseTensor> interface_tensors(const TensorTrain& t, Index k, Direction side,
                                           Index cap = 10'000'000);

/// Interface tensors evaluated against per-mode evaluation matrices xi[k] of
/// shape (n_k x M); returns an M x r_k stack. Same preconditions as above.
Eigen::MatrixXd interface_evaluations(const TensorTrain& t, Index k, Direction side,
                                      std::span<const Eigen::MatrixXd> xi);

void to_json(nlohmann::json& j, const TensorTrain& t);
void from_json(const nlohmann::json& j, TensorTrain& t);

}  // namespace bstt
