#include "bstt/spaces.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <stdexcept>

#include "bstt/combinatorics.hpp"

namespace bstt {

namespace {

std::string strip_spaces(const std::string& s) {
    std::string out;
    for (char c : s)
        if (!std::isspace(static_cast<unsigned char>(c))) out.push_back(c);
    return out;
}

[[noreturn]] void bad(const std::string& text) {
    throw std::invalid_argument("cannot parse space descriptor '" + text + "'");
}

// "d=8,g=2[,rho=3][,aug]" -> key/value map plus flags
void parse_kv(const std::string& body, const std::string& full, std::map<std::string, int>& kv,
              bool& aug) {
    std::size_t pos = 0;
    while (pos < body.size()) {
        std::size_t comma = body.find(',', pos);
        std::string item = body.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        pos = comma == std::string::npos ? body.size() : comma + 1;
        if (item == "aug") {
            aug = true;
            continue;
        }
        std::size_t eq = item.find('=');
        if (eq == std::string::npos) bad(full);
        try {
            kv[item.substr(0, eq)] = std::stoi(item.substr(eq + 1));
        } catch (const std::exception&) {
            bad(full);
        }
    }
}

int require(const std::map<std::string, int>& kv, const std::string& key, const std::string& full) {
    auto it = kv.find(key);
    if (it == kv.end()) bad(full);
    return it->second;
}

void validate(const SpaceDescriptor& s) {
    if (s.d < 1 || s.p < 1) throw std::invalid_argument("space descriptor: d and p must be positive");
    if (s.has_degree()) {
        if (s.g < 0) throw std::invalid_argument("space descriptor: g must be nonnegative");
        if (s.p != s.g + 1) throw std::invalid_argument("space descriptor: requires p = g+1");
    }
    if (s.family == SpaceDescriptor::Family::TrV && s.r < 1)
        throw std::invalid_argument("space descriptor: rank cap must be positive");
    if ((s.family == SpaceDescriptor::Family::BrhoW || s.family == SpaceDescriptor::Family::Srho ||
         s.family == SpaceDescriptor::Family::SrhoAug) &&
        s.rho_max < 1)
        throw std::invalid_argument("space descriptor: rho must be at least 1");
}

}  // namespace

SpaceDescriptor SpaceDescriptor::parse(const std::string& text) {
    const std::string t = strip_spaces(text);
    if (t.size() < 3 || t.back() != ')') bad(text);

    SpaceDescriptor s;
    const char head = t[0];
    if (t[1] != '(') bad(text);
    const std::string body = t.substr(2, t.size() - 3);

    if (head == 'T' || head == 'B') {
        // outer(param;inner(...))
        std::size_t semi = body.find(';');
        if (semi == std::string::npos) bad(text);
        std::map<std::string, int> kv;
        bool aug = false;
        parse_kv(body.substr(0, semi), text, kv, aug);
        SpaceDescriptor inner = parse(body.substr(semi + 1));
        if (head == 'T') {
            if (inner.family != Family::V) bad(text);
            s = inner;
            s.family = Family::TrV;
            s.r = require(kv, "r", text);
        } else {
            if (inner.family != Family::W) bad(text);
            s = inner;
            s.family = Family::BrhoW;
            s.rho_max = require(kv, "rho", text);
        }
        validate(s);
        return s;
    }

    std::map<std::string, int> kv;
    bool aug = false;
    parse_kv(body, text, kv, aug);
    s.d = require(kv, "d", text);
    switch (head) {
        case 'V':
            s.family = Family::V;
            s.p = require(kv, "p", text);
            break;
        case 'W':
            s.family = Family::W;
            s.g = require(kv, "g", text);
            s.p = s.g + 1;
            break;
        case 'S':
            s.g = require(kv, "g", text);
            s.p = s.g + 1;
            if (kv.count("rho")) {
                s.rho_max = kv.at("rho");
                s.family = aug ? Family::SrhoAug : Family::Srho;
            } else {
                if (aug) bad(text);
                s.family = Family::S;
            }
            break;
        default:
            bad(text);
    }
    validate(s);
    return s;
}

std::string SpaceDescriptor::str() const {
    switch (family) {
        case Family::V:
            return "V(d=" + std::to_string(d) + ",p=" + std::to_string(p) + ")";
        case Family::TrV:
            return "T(r=" + std::to_string(r) + ";V(d=" + std::to_string(d) + ",p=" +
                   std::to_string(p) + "))";
        case Family::W:
            return "W(d=" + std::to_string(d) + ",g=" + std::to_string(g) + ")";
        case Family::BrhoW:
            return "B(rho=" + std::to_string(rho_max) + ";W(d=" + std::to_string(d) + ",g=" +
                   std::to_string(g) + "))";
        case Family::S:
            return "S(d=" + std::to_string(d) + ",g=" + std::to_string(g) + ")";
        case Family::Srho:
            return "S(d=" + std::to_string(d) + ",g=" + std::to_string(g) + ",rho=" +
                   std::to_string(rho_max) + ")";
        case Family::SrhoAug:
            return "S(d=" + std::to_string(d) + ",g=" + std::to_string(g) + ",rho=" +
                   std::to_string(rho_max) + ",aug)";
    }
    throw std::logic_error("unreachable");
}

std::int64_t space_dimension(const SpaceDescriptor& s) {
    switch (s.family) {
        case SpaceDescriptor::Family::V:
            return ipow(s.p, s.d);
        case SpaceDescriptor::Family::W:
            return binomial(s.d + s.g - 1, s.d - 1);
        case SpaceDescriptor::Family::S:
            return binomial(s.d + s.g, s.d);
        default:
            throw std::invalid_argument(
                "space_dimension: only V, W, S are linear spaces with a dimension; use dof_count "
                "for " +
                s.str());
    }
}

VariationConstant variation_constant(const SpaceDescriptor& s, bool weighted) {
    if (s.family == SpaceDescriptor::Family::V) {
        if (weighted) return {static_cast<double>(ipow(s.p, s.d)), false};
        return {static_cast<double>(ipow(s.p, 2 * s.d)), false};
    }
    if (s.family == SpaceDescriptor::Family::W) {
        const double dim = static_cast<double>(binomial(s.d - 1 + s.g, s.d - 1));
        if (weighted) return {dim, false};
        const int q = s.g / s.d;
        const int rem = s.g % s.d;
        double bound = dim;
        for (int i = 0; i < rem; ++i) bound *= 2.0 * q + 3.0;
        for (int i = 0; i < s.d - rem; ++i) bound *= 2.0 * q + 1.0;
        return {bound, true};
    }
    throw std::invalid_argument("variation_constant: unsupported descriptor " + s.str());
}

}  // namespace bstt
