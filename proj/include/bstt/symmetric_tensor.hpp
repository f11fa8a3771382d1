#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "bstt/dense_tensor.hpp"

#include <nlohmann/json_fwd.hpp>

namespace bstt {

/// Symmetric order-g tensor over d variables, stored on sorted multi-indices
/// only (0-based variables). Represents the homogeneous degree-g polynomial
/// u(x) = sum B(i_1..i_g) x_{i_1} ... x_{i_g} over the full index range; the
/// combinatorial multiplicity of each sorted index is applied at evaluation and
/// conversion time.
class SymmetricTensor {
public:
    SymmetricTensor() = default;
    SymmetricTensor(int d, int g);

    int variable_count() const { return d_; }
    int degree() const { return g_; }

    double get(std::span<const int> index) const;
    void set(std::span<const int> index, double value);
    const std::map<std::vector<int>, double>& entries() const { return entries_; }

    double evaluate(std::span<const double> x) const;
    /// Frobenius norm of the full symmetric tensor (multiplicities included).
    double full_frobenius_norm() const;
    /// Largest index spread max|n_i - n_j| over nonzero entries; 0 when none.
    int locality() const;

private:
    std::vector<int> sorted_key(std::span<const int> index) const;

    int d_ = 0, g_ = 0;
    std::map<std::vector<int>, double> entries_;  // sorted index -> value, zeros omitted
};

/// Number of distinct permutations of a sorted multi-index (the multinomial of
/// its per-variable multiplicities).
std::int64_t index_multiplicity(std::span<const int> sorted_index, int d);

/// Coefficient tensor of shape (g+1)^d for the monomial dictionary: the entry
/// at counts (m_1..m_d), m_k = #occurrences of variable k, equals
/// multinomial(g; m) * B(sorted index).
DenseTensor symmetric_to_coefficient(const SymmetricTensor& b);

/// Exact inverse; the degree is inferred from the dominant entry and any
/// off-degree entry above 1e-14 in magnitude raises an error.
SymmetricTensor coefficient_to_symmetric(const DenseTensor& c);

struct LocalityRestriction {
    SymmetricTensor restricted;
    double removed_mass = 0.0;  // Frobenius mass of the dropped entries
};

/// Zeroes every entry whose sorted index spread exceeds k_loc.
LocalityRestriction restrict_locality(const SymmetricTensor& b, int k_loc);

/// Standard-normal entries on all sorted indices (restricted to spread <= k_loc
/// when given); deterministic in the seed.
SymmetricTensor random_symmetric(int d, int g, std::optional<int> k_loc, std::uint64_t seed);

void to_json(nlohmann::json& j, const SymmetricTensor& b);
void from_json(const nlohmann::json& j, SymmetricTensor& b);

}  // namespace bstt
