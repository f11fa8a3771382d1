#include "bstt/symmetric_tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "bstt/combinatorics.hpp"

namespace bstt {

SymmetricTensor::SymmetricTensor(int d, int g) : d_(d), g_(g) {
    if (d_ < 1 || g_ < 0) throw std::invalid_argument("symmetric tensor: need d >= 1, g >= 0");
}

std::vector<int> SymmetricTensor::sorted_key(std::span<const int> index) const {
    if (static_cast<int>(index.size()) != g_)
        throw std::invalid_argument("symmetric tensor: index order must equal the degree");
    std::vector<int> key(index.begin(), index.end());
    for (int i : key)
        if (i < 0 || i >= d_) throw std::out_of_range("symmetric tensor: variable index out of range");
    std::sort(key.begin(), key.end());
    return key;
}

double SymmetricTensor::get(std::span<const int> index) const {
    auto it = entries_.find(sorted_key(index));
    return it == entries_.end() ? 0.0 : it->second;
}

void SymmetricTensor::set(std::span<const int> index, double value) {
    auto key = sorted_key(index);
    if (value == 0.0)
        entries_.erase(key);
    else
        entries_[std::move(key)] = value;
}

std::int64_t index_multiplicity(std::span<const int> sorted_index, int d) {
    std::vector<std::int64_t> counts(static_cast<std::size_t>(d), 0);
    for (int i : sorted_index) counts[static_cast<std::size_t>(i)]++;
    return multinomial(static_cast<std::int64_t>(sorted_index.size()), counts);
}

double SymmetricTensor::evaluate(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != d_)
        throw std::invalid_argument("symmetric tensor: point dimension mismatch");
    double sum = 0.0;
    for (const auto& [idx, v] : entries_) {
        double prod = static_cast<double>(index_multiplicity(idx, d_)) * v;
        for (int i : idx) prod *= x[static_cast<std::size_t>(i)];
        sum += prod;
    }
    return sum;
}

double SymmetricTensor::full_frobenius_norm() const {
    double s = 0.0;
    for (const auto& [idx, v] : entries_)
        s += static_cast<double>(index_multiplicity(idx, d_)) * v * v;
    return std::sqrt(s);
}

int SymmetricTensor::locality() const {
    int spread = 0;
    for (const auto& [idx, v] : entries_)
        if (v != 0.0 && !idx.empty()) spread = std::max(spread, idx.back() - idx.front());
    return spread;
}

DenseTensor symmetric_to_coefficient(const SymmetricTensor& b) {
    const int d = b.variable_count();
    const int g = b.degree();
    const Index p = g + 1;
    DenseTensor c = DenseTensor::zeros(std::vector<Index>(static_cast<std::size_t>(d), p));
    std::vector<Index> counts(static_cast<std::size_t>(d));
    for (const auto& [idx, v] : b.entries()) {
        std::fill(counts.begin(), counts.end(), 0);
        for (int i : idx) counts[static_cast<std::size_t>(i)]++;
        c.at(std::span<const Index>(counts)) = static_cast<double>(index_multiplicity(idx, d)) * v;
    }
    return c;
}

SymmetricTensor coefficient_to_symmetric(const DenseTensor& c) {
    const Index d = c.order();
    const Index p = c.dim(0);
    for (Index k = 1; k < d; ++k)
        if (c.dim(k) != p) throw std::invalid_argument("coefficient_to_symmetric: modes must be square");

    // degree of the dominant entry fixes g
    Index best = 0;
    double best_mag = -1.0;
    std::vector<Index> idx(static_cast<std::size_t>(d), 0);
    int g = -1;
    for (Index lin = 0; lin < c.size(); ++lin) {
        const double mag = std::abs(c[lin]);
        if (mag > best_mag) {
            best_mag = mag;
            best = lin;
        }
        for (Index k = d - 1; k >= 0; --k) {
            if (++idx[static_cast<std::size_t>(k)] < p) break;
            idx[static_cast<std::size_t>(k)] = 0;
        }
    }
    if (best_mag <= 0.0) throw std::invalid_argument("coefficient_to_symmetric: zero tensor");
    {
        Index rem = best;
        int deg = 0;
        for (Index k = d - 1; k >= 0; --k) {
            deg += static_cast<int>(rem % p);
            rem /= p;
        }
        g = deg;
    }

    SymmetricTensor b(static_cast<int>(d), g);
    std::fill(idx.begin(), idx.end(), 0);
    for (Index lin = 0; lin < c.size(); ++lin) {
        int deg = 0;
        for (Index k = 0; k < d; ++k) deg += static_cast<int>(idx[static_cast<std::size_t>(k)]);
        const double v = c[lin];
        if (deg != g) {
            if (std::abs(v) > 1e-14)
                throw std::invalid_argument("coefficient_to_symmetric: tensor is not homogeneous (entry of degree " +
                                            std::to_string(deg) + " present)");
        } else if (v != 0.0) {
            std::vector<int> sorted;
            for (Index k = 0; k < d; ++k)
                for (Index rep = 0; rep < idx[static_cast<std::size_t>(k)]; ++rep)
                    sorted.push_back(static_cast<int>(k));
            std::vector<std::int64_t> counts(static_cast<std::size_t>(d));
            for (Index k = 0; k < d; ++k) counts[static_cast<std::size_t>(k)] = idx[static_cast<std::size_t>(k)];
            b.set(sorted, v / static_cast<double>(multinomial(g, counts)));
        }
        for (Index k = d - 1; k >= 0; --k) {
            if (++idx[static_cast<std::size_t>(k)] < p) break;
            idx[static_cast<std::size_t>(k)] = 0;
        }
    }
    return b;
}

LocalityRestriction restrict_locality(const SymmetricTensor& b, int k_loc) {
    if (k_loc < 0) throw std::invalid_argument("restrict_locality: K_loc must be nonnegative");
    LocalityRestriction out;
    out.restricted = SymmetricTensor(b.variable_count(), b.degree());
    double removed2 = 0.0;
    for (const auto& [idx, v] : b.entries()) {
        const int spread = idx.empty() ? 0 : idx.back() - idx.front();
        if (spread > k_loc)
            removed2 += static_cast<double>(index_multiplicity(idx, b.variable_count())) * v * v;
        else
            out.restricted.set(idx, v);
    }
    out.removed_mass = std::sqrt(removed2);
    return out;
}

namespace {

void enumerate_sorted(int d, int g, int start, std::vector<int>& cur,
                      const std::function<void(const std::vector<int>&)>& fn) {
    if (static_cast<int>(cur.size()) == g) {
        fn(cur);
        return;
    }
    for (int i = start; i < d; ++i) {
        cur.push_back(i);
        enumerate_sorted(d, g, i, cur, fn);
        cur.pop_back();
    }
}

}  // namespace

SymmetricTensor random_symmetric(int d, int g, std::optional<int> k_loc, std::uint64_t seed) {
    SymmetricTensor b(d, g);
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<int> cur;
    enumerate_sorted(d, g, 0, cur, [&](const std::vector<int>& idx) {
        const int spread = idx.empty() ? 0 : idx.back() - idx.front();
        if (k_loc && spread > *k_loc) return;
        b.set(idx, normal(gen));
    });
    return b;
}

void to_json(nlohmann::json& j, const SymmetricTensor& b) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& [idx, v] : b.entries()) {
        std::vector<int> one_based;
        for (int i : idx) one_based.push_back(i + 1);
        entries.push_back({{"index", one_based}, {"value", v}});
    }
    j = nlohmann::json{{"d", b.variable_count()}, {"g", b.degree()}, {"entries", std::move(entries)}};
}

void from_json(const nlohmann::json& j, SymmetricTensor& b) {
    b = SymmetricTensor(j.at("d").get<int>(), j.at("g").get<int>());
    for (const auto& e : j.at("entries")) {
        std::vector<int> idx = e.at("index").get<std::vector<int>>();
        for (int& i : idx) --i;
        b.set(idx, e.at("value").get<double>());
    }
}

}  // namespace bstt
