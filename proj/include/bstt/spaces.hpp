#pragma once

#include <cstdint>
#include <string>

namespace bstt {

/// Ansatz-space descriptor with a canonical string form used by the CLI:
///   V(d=8,p=3)            full product space
///   T(r=6;V(d=8,p=3))     TT-rank-capped product space
///   W(d=8,g=2)            fixed total degree g
///   B(rho=4;W(d=8,g=2))   block-size-capped W
///   S(d=10,g=5)           degrees 0..g
///   S(d=10,g=5,rho=3)     sum of block-size-capped summands
///   S(d=10,g=5,rho=3,aug) single augmented train with a shadow mode
/// Whenever g is present the dictionary size is p = g+1.
struct SpaceDescriptor {
    enum class Family { V, TrV, W, BrhoW, S, Srho, SrhoAug };

    Family family = Family::V;
    int d = 1;
    int p = 1;        // dictionary size; equals g+1 when g is present
    int g = 0;        // total degree (W/S families)
    int r = 0;        // rank cap (TrV)
    int rho_max = 0;  // block-size cap (BrhoW/Srho/SrhoAug)

    static SpaceDescriptor parse(const std::string& text);
    std::string str() const;

    bool has_degree() const {
        return family != Family::V && family != Family::TrV;
    }
};

/// Exact dimension of the linear families V, W, S.
std::int64_t space_dimension(const SpaceDescriptor& s);

struct VariationConstant {
    double value = 0.0;
    bool is_upper_bound = false;
};

/// Variation constant K(A) = sup ||v||_inf^2 / ||v||_L2^2 over the space, for the
/// Legendre dictionary on [-1,1]^d with the uniform probability measure.
/// weighted=true gives the optimally-weighted value K = dim; unweighted V is the
/// exact p^(2d); unweighted W is reported as an upper bound, using the sharper
/// product form binom(d-1+g,d-1) * (2*floor(g/d)+3)^(g mod d) *
/// (2*floor(g/d)+1)^(d - g mod d). A cruder simplification (3e(d-1+g)/g)^g holds
/// for g <= d but is not computed here.
VariationConstant variation_constant(const SpaceDescriptor& s, bool weighted);

}  // namespace bstt
