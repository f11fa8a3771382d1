#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "bstt/dense_tensor.hpp"
#include "bstt/spaces.hpp"

#include <nlohmann/json_fwd.hpp>

namespace bstt {

/// Allowed entry of a component tensor: 0-based rank slots and mode index.
struct Triple {
    Index left;
    Index mode;
    Index right;
    friend bool operator==(const Triple&, const Triple&) = default;
};

/// Degree-group partition of the rank slots of a tensor train whose coefficient
/// tensor is a degree-g eigenvector of the degree operator.
///
/// For each interface k = 0..d the rank slots split into groups S_{k,gt} of size
/// rho[k][gt], gt = 0..g, laid out contiguously in ascending degree order. A slot
/// l in group gt at interface k means: the l-th left interface polynomial has
/// degree gt (and the right one degree g - gt). Interface 0 carries a single
/// slot of degree 0 and interface d a single slot of degree g.
class BlockStructure {
public:
    BlockStructure() = default;
    BlockStructure(int d, int g, int p, std::vector<std::vector<int>> group_sizes);

    int order() const { return d_; }
    int degree() const { return g_; }
    int mode_dim() const { return p_; }

    int group_size(int interface, int gt) const;
    const std::vector<std::vector<int>>& group_sizes() const { return rho_; }

    /// First slot of group gt at the given interface.
    Index group_offset(int interface, int gt) const;
    /// Degree group of an absolute slot index.
    int group_of_slot(int interface, Index slot) const;

    Index rank(int interface) const;
    std::vector<Index> ranks() const;  // r_0 .. r_d

    friend bool operator==(const BlockStructure&, const BlockStructure&) = default;

private:
    int d_ = 0, g_ = 0, p_ = 0;
    std::vector<std::vector<int>> rho_;  // (d+1) x (g+1)
};

/// Group-size bound from the degree-split combinatorics (monomial counts on both
/// sides of the cut), for interfaces k = 1..d-1.
std::int64_t interface_rank_bound(int d, int g, int k, int gt);

/// d-independent bound for degree-g polynomials with variable locality K_loc.
/// Returns 1 for gt in {0, g}. The augmented flag gives the shadow-variable
/// variant of the bound.
std::int64_t local_rank_bound(int g, int gt, int k_loc, bool augmented = false);

/// Group sizes min{interface bound, rho_max} (and the locality bound when K_loc
/// is given); boundary interfaces fixed to a single slot.
BlockStructure build_block_structure(int d, int g, int rho_max,
                                     std::optional<int> k_loc = std::nullopt);

/// Structure of the order-(d+1) augmented train: one extra shadow mode whose
/// contraction with the all-ones vector realizes the sum over degrees 0..g.
/// The last component routes interface-d group gt to shadow index m = g - gt.
BlockStructure build_augmented(int d, int g, int rho_max);

/// Allowed entries of component k (0-based, between interfaces k and k+1):
/// (l1, m, l2) with l1 in S_{k,gt} and l2 in S_{k+1,gt+m} for some gt.
std::vector<Triple> sparsity_pattern(const BlockStructure& bs, int k);

/// Total number of allowed entries over all components.
std::int64_t pattern_size(const BlockStructure& bs);

/// Degrees of freedom of an ansatz space. Linear families report their
/// dimension; B/S_rho families count allowed component entries; T_r(V) counts
/// the raw parameters of a representation with ranks min{r, p^k, p^(d-k)}.
std::int64_t dof_count(const SpaceDescriptor& s);

/// Families whose DOF number is a representation-dependent convention rather
/// than a space dimension get a short note for reports.
std::optional<std::string> dof_convention_note(const SpaceDescriptor& s);

void to_json(nlohmann::json& j, const BlockStructure& bs);
void from_json(const nlohmann::json& j, BlockStructure& bs);

}  // namespace bstt
