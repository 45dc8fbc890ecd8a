#pragma once

#include <boost/container_hash/hash.hpp>

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "mdlvq/imat.hpp"
#include "mdlvq/lattice.hpp"

namespace mdlvq {

struct NestingError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct VecHash {
    size_t operator()(const std::vector<int64_t>& v) const { return boost::hash_range(v.begin(), v.end()); }
};

template <class T>
using VecMap = std::unordered_map<std::vector<int64_t>, T, VecHash>;

enum class MultiplierKind { Scalar, Gaussian, Eisenstein };

// Similarity choice: scalar K, Gaussian a+bi (Z²) or Eisenstein a+bω (A2, ω = e^{iπ/3}).
struct Multiplier {
    MultiplierKind kind = MultiplierKind::Scalar;
    int64_t a = 1;
    int64_t b = 0;
};

inline std::string multiplierKindName(MultiplierKind k) {
    switch (k) {
        case MultiplierKind::Scalar: return "scalar";
        case MultiplierKind::Gaussian: return "gaussian";
        case MultiplierKind::Eisenstein: return "eisenstein";
    }
    return "?";
}

inline MultiplierKind multiplierKindFromName(const std::string& s) {
    if (s == "scalar") return MultiplierKind::Scalar;
    if (s == "gaussian") return MultiplierKind::Gaussian;
    if (s == "eisenstein") return MultiplierKind::Eisenstein;
    throw std::invalid_argument("unknown multiplier kind: " + s);
}

inline IMat multiplierMatrix(const LatticeSpec& c, const Multiplier& m) {
    switch (m.kind) {
        case MultiplierKind::Scalar:
            if (m.a < 1) throw std::invalid_argument("scalar multiplier must be >= 1");
            return IMat::identity(c.dim, m.a);
        case MultiplierKind::Gaussian: {
            if (c.kind != LatticeKind::Z || c.dim != 2)
                throw std::invalid_argument("Gaussian multipliers need Z^2");
            IMat r(2);
            r(0, 0) = m.a;
            r(0, 1) = -m.b;
            r(1, 0) = m.b;
            r(1, 1) = m.a;
            return r;
        }
        case MultiplierKind::Eisenstein: {
            if (c.kind != LatticeKind::A2) throw std::invalid_argument("Eisenstein multipliers need A2");
            // (a + bω)·1 = a + bω, (a + bω)·ω = -b + (a + b)ω
            IMat r(2);
            r(0, 0) = m.a;
            r(0, 1) = -m.b;
            r(1, 0) = m.b;
            r(1, 1) = m.a + m.b;
            return r;
        }
    }
    throw std::invalid_argument("bad multiplier");
}

struct Sublattice {
    Multiplier mult;
    IMat scale;  // over the central basis
    IMat adj;
    int64_t det = 1;
    int64_t index = 1;
    double nestingRatio = 1.0;
    Basis basis;  // real generators: central basis × scale
};

inline Sublattice makeSublattice(const LatticeSpec& c, const IMat& m, const Multiplier& mult = {}) {
    Sublattice s;
    s.mult = mult;
    s.scale = m;
    s.det = determinant(m);
    if (s.det == 0) throw NestingError("singular sublattice matrix");
    s.adj = adjugate(m);
    s.index = s.det < 0 ? -s.det : s.det;
    s.nestingRatio = std::pow(static_cast<double>(s.index), 1.0 / c.dim);
    const int L = c.dim;
    std::vector<double> g(static_cast<size_t>(L) * L, 0.0);
    for (int i = 0; i < L; ++i)
        for (int j = 0; j < L; ++j) {
            double v = 0.0;
            for (int k = 0; k < L; ++k) v += c.basis.g[i * L + k] * static_cast<double>(m(k, j));
            g[i * L + j] = v;
        }
    s.basis = makeBasis(std::move(g), L);
    return s;
}

inline bool inSublattice(const Sublattice& s, const std::vector<int64_t>& u) {
    const int n = s.scale.n;
    for (int i = 0; i < n; ++i) {
        i128 acc = 0;
        for (int j = 0; j < n; ++j) acc += static_cast<i128>(s.adj(i, j)) * u[j];
        if (acc % s.det != 0) return false;
    }
    return true;
}

// u = rep + scale·translate with rep in the half-open cell [0,1)^L of the sublattice basis.
struct CosetSplit {
    std::vector<int64_t> rep;
    std::vector<int64_t> translate;
};

inline CosetSplit splitCoset(const Sublattice& s, const std::vector<int64_t>& u) {
    const int n = s.scale.n;
    CosetSplit r;
    r.translate.resize(n);
    for (int i = 0; i < n; ++i) {
        i128 acc = 0;
        for (int j = 0; j < n; ++j) acc += static_cast<i128>(s.adj(i, j)) * u[j];
        r.translate[i] = floorDiv(acc, s.det);
    }
    r.rep = u;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) r.rep[i] -= s.scale(i, j) * r.translate[j];
    return r;
}

inline void addTranslate(const Sublattice& s, std::vector<int64_t>& u, const std::vector<int64_t>& k, int sign = 1) {
    const int n = s.scale.n;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) u[i] += sign * s.scale(i, j) * k[j];
}

enum class ProductRule { Dedup, Full };

struct NestedSystem {
    LatticeSpec central;
    int n = 0;
    std::vector<Sublattice> subs;
    Sublattice product;
    std::vector<double> mu;
    ProductRule rule = ProductRule::Dedup;
    std::vector<Multiplier> specs;

    // Canonical representatives in V_pi(0), central basis coordinates, sorted.
    std::vector<std::vector<int64_t>> centralCell;
    VecMap<int> centralIndex;
    std::vector<std::vector<std::vector<int64_t>>> subCell;
    std::vector<VecMap<int>> subIndex;

    int L() const { return central.dim; }
    int64_t productIndex() const { return product.index; }
    double indexProduct() const {
        double p = 1.0;
        for (const auto& s : subs) p *= static_cast<double>(s.index);
        return p;
    }
    std::vector<double> coords(const std::vector<int64_t>& u) const { return central.basis.map(u); }
};

namespace detail {

inline bool sameLattice(const IMat& a, const IMat& b) { return dividesLeft(a, b) && dividesLeft(b, a); }

inline std::vector<std::vector<int64_t>> scanCell(const Sublattice& prod) {
    const int n = prod.scale.n;
    std::vector<int64_t> lo(n, 0), hi(n, 0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const int64_t v = prod.scale(i, j);
            (v < 0 ? lo[i] : hi[i]) += v;
        }
    std::vector<std::vector<int64_t>> out;
    out.reserve(static_cast<size_t>(prod.index));
    scanBox(lo, hi, [&](const std::vector<int64_t>& u) {
        bool inside = true;
        for (int i = 0; i < n && inside; ++i) {
            i128 acc = 0;
            for (int j = 0; j < n; ++j) acc += static_cast<i128>(prod.adj(i, j)) * u[j];
            const int64_t k = floorDiv(acc, prod.det);
            inside = (k == 0);
        }
        if (inside) out.push_back(u);
    });
    return out;
}

}  // namespace detail

inline void indexCells(NestedSystem& sys) {
    sys.centralCell = detail::scanCell(sys.product);
    if (static_cast<int64_t>(sys.centralCell.size()) != sys.product.index)
        throw NestingError("product cell enumeration mismatch");
    sys.centralIndex.clear();
    for (int k = 0; k < static_cast<int>(sys.centralCell.size()); ++k) sys.centralIndex[sys.centralCell[k]] = k;
    sys.subCell.assign(sys.n, {});
    sys.subIndex.assign(sys.n, {});
    for (int i = 0; i < sys.n; ++i) {
        for (const auto& u : sys.centralCell)
            if (inSublattice(sys.subs[i], u)) sys.subCell[i].push_back(u);
        if (static_cast<int64_t>(sys.subCell[i].size()) * sys.subs[i].index != sys.product.index)
            throw NestingError("sublattice cell count mismatch");
        for (int k = 0; k < static_cast<int>(sys.subCell[i].size()); ++k) sys.subIndex[i][sys.subCell[i][k]] = k;
    }
}

inline NestedSystem buildNested(const LatticeSpec& central, const std::vector<Multiplier>& specs,
                                std::vector<double> mu, ProductRule rule = ProductRule::Dedup) {
    const int n = static_cast<int>(specs.size());
    if (n < 1) throw std::invalid_argument("need at least one sublattice");
    if (mu.empty()) mu.assign(n, 1.0);
    if (static_cast<int>(mu.size()) != n) throw std::invalid_argument("mu length must equal the number of descriptions");
    for (double m : mu)
        if (!(m > 0.0)) throw std::invalid_argument("description weights must be positive");
    NestedSystem sys;
    sys.central = central;
    sys.n = n;
    sys.mu = std::move(mu);
    sys.rule = rule;
    sys.specs = specs;
    std::vector<IMat> mats;
    for (const auto& m : specs) {
        mats.push_back(multiplierMatrix(central, m));
        sys.subs.push_back(makeSublattice(central, mats.back(), m));
    }
    IMat prod = IMat::identity(central.dim);
    if (rule == ProductRule::Full) {
        for (const auto& m : mats) prod = prod * m;
    } else {
        std::vector<IMat> distinct;
        for (const auto& m : mats) {
            bool seen = false;
            for (const auto& d : distinct) seen = seen || detail::sameLattice(d, m);
            if (!seen) distinct.push_back(m);
        }
        if (distinct.size() == 1 && n > 1)
            prod = distinct[0] * distinct[0];
        else
            for (const auto& d : distinct) prod = prod * d;
    }
    for (int i = 0; i < n; ++i)
        if (!dividesLeft(mats[i], prod))
            throw NestingError("product lattice is not contained in sublattice " + std::to_string(i));
    sys.product = makeSublattice(central, prod);
    indexCells(sys);
    return sys;
}

inline LatticePoint canonicalRep(const NestedSystem& sys, const LatticePoint& p) {
    return pointFromBasis(sys.central, splitCoset(sys.product, p.basisCoords).rep);
}

// which = -1 for the central lattice, otherwise sublattice index.
inline std::vector<LatticePoint> pointsInProductCell(const NestedSystem& sys, int which) {
    const auto& src = which < 0 ? sys.centralCell : sys.subCell.at(which);
    std::vector<LatticePoint> out;
    out.reserve(src.size());
    for (const auto& u : src) out.push_back(pointFromBasis(sys.central, u));
    return out;
}

struct CleanReport {
    bool clean = true;
    std::optional<LatticePoint> witness;
};

// Checks the Voronoi cells of the coarse lattice (which = -1: product, else sublattice) for central points on a boundary.
inline CleanReport isClean(const NestedSystem& sys, int which) {
    const Sublattice& coarse = which < 0 ? sys.product : sys.subs.at(which);
    const int L = sys.L();
    double reach = 0.0;
    for (int j = 0; j < L; ++j) {
        double c = 0.0;
        for (int i = 0; i < L; ++i) c += coarse.basis.g[i * L + j] * coarse.basis.g[i * L + j];
        reach += std::sqrt(c);
    }
    reach = 0.5 * reach + kTol;
    CleanReport rep;
    for (const auto& u : sys.centralCell) {
        const auto x = sys.coords(u);
        const auto near = ballBasisCoords(coarse.basis, x, reach);
        double best = std::numeric_limits<double>::infinity();
        std::vector<double> d(near.size());
        for (size_t k = 0; k < near.size(); ++k) {
            d[k] = std::sqrt(dist2(coarse.basis.map(near[k]), x));
            best = std::min(best, d[k]);
        }
        int ties = 0;
        for (double v : d) ties += (v <= best + kTol) ? 1 : 0;
        if (ties > 1) {
            rep.clean = false;
            rep.witness = pointFromBasis(sys.central, u);
            return rep;
        }
    }
    return rep;
}

}  // namespace mdlvq
