#include "bstt/block_structure.hpp"

#include <algorithm>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "bstt/combinatorics.hpp"

namespace bstt {

BlockStructure::BlockStructure(int d, int g, int p, std::vector<std::vector<int>> group_sizes)
    : d_(d), g_(g), p_(p), rho_(std::move(group_sizes)) {
    if (d_ < 1 || g_ < 0 || p_ < 1) throw std::invalid_argument("block structure: bad sizes");
    if (static_cast<int>(rho_.size()) != d_ + 1)
        throw std::invalid_argument("block structure: need one group list per interface");
    for (const auto& row : rho_) {
        if (static_cast<int>(row.size()) != g_ + 1)
            throw std::invalid_argument("block structure: need g+1 group sizes per interface");
        for (int s : row)
            if (s < 0) throw std::invalid_argument("block structure: negative group size");
    }
    auto boundary = [&](int k, int gt) {
        for (int j = 0; j <= g_; ++j)
            if (rho_[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] != (j == gt ? 1 : 0))
                throw std::invalid_argument("block structure: boundary interfaces must hold a single slot");
    };
    boundary(0, 0);
    boundary(d_, g_);
}

int BlockStructure::group_size(int interface, int gt) const {
    return rho_.at(static_cast<std::size_t>(interface)).at(static_cast<std::size_t>(gt));
}

Index BlockStructure::group_offset(int interface, int gt) const {
    Index off = 0;
    for (int j = 0; j < gt; ++j) off += group_size(interface, j);
    return off;
}

int BlockStructure::group_of_slot(int interface, Index slot) const {
    Index off = 0;
    for (int gt = 0; gt <= g_; ++gt) {
        off += group_size(interface, gt);
        if (slot < off) return gt;
    }
    throw std::out_of_range("block structure: slot out of range");
}

Index BlockStructure::rank(int interface) const {
    Index r = 0;
    for (int gt = 0; gt <= g_; ++gt) r += group_size(interface, gt);
    return r;
}

std::vector<Index> BlockStructure::ranks() const {
    std::vector<Index> r;
    for (int k = 0; k <= d_; ++k) r.push_back(rank(k));
    return r;
}

std::int64_t interface_rank_bound(int d, int g, int k, int gt) {
    if (k < 1 || k > d - 1) throw std::invalid_argument("interface_rank_bound: k must be interior");
    if (gt < 0 || gt > g) return 0;
    return std::min(binomial(k + gt - 1, k - 1), binomial(d - k + g - gt - 1, d - k - 1));
}

std::int64_t local_rank_bound(int g, int gt, int k_loc, bool augmented) {
    if (gt < 0 || gt > g) throw std::invalid_argument("local_rank_bound: degree out of range");
    if (k_loc < 1) throw std::invalid_argument("local_rank_bound: K_loc must be at least 1");
    if (gt == 0 || gt == g) return 1;
    std::int64_t sum = augmented ? 1 : 0;
    for (int l = 1; l <= k_loc; ++l) {
        const int lc = augmented ? l + 1 : l;
        sum += std::min(binomial(k_loc - l + 1 + gt - 2, k_loc - l),
                        binomial(lc + g - gt - 2, lc - 1));
    }
    return sum;
}

BlockStructure build_block_structure(int d, int g, int rho_max, std::optional<int> k_loc) {
    if (d < 1 || g < 0 || rho_max < 1)
        throw std::invalid_argument("build_block_structure: need d >= 1, g >= 0, rho_max >= 1");
    const int p = g + 1;
    std::vector<std::vector<int>> rho(static_cast<std::size_t>(d + 1),
                                      std::vector<int>(static_cast<std::size_t>(g + 1), 0));
    rho[0][0] = 1;
    rho[static_cast<std::size_t>(d)][static_cast<std::size_t>(g)] = 1;
    for (int k = 1; k <= d - 1; ++k) {
        for (int gt = 0; gt <= g; ++gt) {
            std::int64_t bound = std::min<std::int64_t>(interface_rank_bound(d, g, k, gt), rho_max);
            if (k_loc) bound = std::min(bound, local_rank_bound(g, gt, *k_loc));
            rho[static_cast<std::size_t>(k)][static_cast<std::size_t>(gt)] = static_cast<int>(bound);
        }
    }
    return BlockStructure(d, g, p, std::move(rho));
}

BlockStructure build_augmented(int d, int g, int rho_max) {
    // the shadow mode has dimension g+1 = p, so the order-(d+1) structure carries
    // it without a special mode size; the boundary group S_{d+1,g} = {1} forces
    // the last component to route group gt to shadow index m = g - gt.
    return build_block_structure(d + 1, g, rho_max);
}

std::vector<Triple> sparsity_pattern(const BlockStructure& bs, int k) {
    if (k < 0 || k >= bs.order()) throw std::invalid_argument("sparsity_pattern: core index out of range");
    std::vector<Triple> triples;
    const int g = bs.degree();
    for (int g1 = 0; g1 <= g; ++g1) {
        const int n1 = bs.group_size(k, g1);
        if (n1 == 0) continue;
        const Index off1 = bs.group_offset(k, g1);
        for (Index m = 0; m < bs.mode_dim(); ++m) {
            const int g2 = g1 + static_cast<int>(m);
            if (g2 > g) break;
            const int n2 = bs.group_size(k + 1, g2);
            if (n2 == 0) continue;
            const Index off2 = bs.group_offset(k + 1, g2);
            for (Index a = 0; a < n1; ++a)
                for (Index b = 0; b < n2; ++b)
                    triples.push_back({off1 + a, m, off2 + b});
        }
    }
    return triples;
}

std::int64_t pattern_size(const BlockStructure& bs) {
    std::int64_t total = 0;
    for (int k = 0; k < bs.order(); ++k) {
        const int g = bs.degree();
        for (int g1 = 0; g1 <= g; ++g1)
            for (int g2 = g1; g2 <= std::min(g, g1 + bs.mode_dim() - 1); ++g2)
                total += static_cast<std::int64_t>(bs.group_size(k, g1)) * bs.group_size(k + 1, g2);
    }
    return total;
}

std::int64_t dof_count(const SpaceDescriptor& s) {
    using Family = SpaceDescriptor::Family;
    switch (s.family) {
        case Family::V:
        case Family::W:
        case Family::S:
            return space_dimension(s);
        case Family::BrhoW:
            return pattern_size(build_block_structure(s.d, s.g, s.rho_max));
        case Family::Srho: {
            std::int64_t total = 0;
            for (int gt = 0; gt <= s.g; ++gt)
                total += pattern_size(build_block_structure(s.d, gt, s.rho_max));
            return total;
        }
        case Family::SrhoAug:
            return pattern_size(build_augmented(s.d, s.g, s.rho_max));
        case Family::TrV: {
            // parameter count of the stored representation with ranks min{r, p^k, p^(d-k)}
            std::vector<std::int64_t> r(static_cast<std::size_t>(s.d + 1), 1);
            for (int k = 1; k < s.d; ++k) {
                std::int64_t cap = s.r;
                std::int64_t pk = 1;
                for (int i = 0; i < std::min(k, s.d - k); ++i) {
                    pk *= s.p;
                    if (pk >= cap) break;
                }
                r[static_cast<std::size_t>(k)] = std::min<std::int64_t>(cap, pk);
            }
            std::int64_t total = 0;
            for (int k = 1; k <= s.d; ++k)
                total += r[static_cast<std::size_t>(k - 1)] * s.p * r[static_cast<std::size_t>(k)];
            return total;
        }
    }
    throw std::logic_error("unreachable");
}

std::optional<std::string> dof_convention_note(const SpaceDescriptor& s) {
    using Family = SpaceDescriptor::Family;
    if (s.family == Family::TrV)
        return "parameter count of the rank-capped representation; published tables may use a "
               "different counting convention";
    if (s.family == Family::SrhoAug)
        return "allowed-entry count of the augmented train built from the interface rank bounds; "
               "published tables may use a different block-size rule";
    return std::nullopt;
}

void to_json(nlohmann::json& j, const BlockStructure& bs) {
    j = nlohmann::json{{"d", bs.order()},
                       {"g", bs.degree()},
                       {"p", bs.mode_dim()},
                       {"rho", bs.group_sizes()}};
}

void from_json(const nlohmann::json& j, BlockStructure& bs) {
    bs = BlockStructure(j.at("d").get<int>(), j.at("g").get<int>(), j.at("p").get<int>(),
                        j.at("rho").get<std::vector<std::vector<int>>>());
}

}  // namespace bstt
