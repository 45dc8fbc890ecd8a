#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace mdlvq {

inline constexpr double kTol = 1e-9;

struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class LatticeKind { Z, A2, D4 };

inline std::string kindName(LatticeKind k) {
    switch (k) {
        case LatticeKind::Z: return "Z";
        case LatticeKind::A2: return "A2";
        case LatticeKind::D4: return "D4";
    }
    return "?";
}

inline LatticeKind kindFromName(const std::string& s) {
    if (s == "Z") return LatticeKind::Z;
    if (s == "A2") return LatticeKind::A2;
    if (s == "D4") return LatticeKind::D4;
    throw std::invalid_argument("unknown lattice kind: " + s);
}

// Real L×L matrix, row-major, columns are generators.
struct Basis {
    int dim = 0;
    std::vector<double> g, inv;

    double det() const;
    std::vector<double> map(const std::vector<int64_t>& z) const {
        std::vector<double> x(dim, 0.0);
        for (int i = 0; i < dim; ++i) {
            double s = 0.0;
            for (int j = 0; j < dim; ++j) s += g[i * dim + j] * static_cast<double>(z[j]);
            x[i] = s;
        }
        return x;
    }
    std::vector<double> solve(const std::vector<double>& x) const {
        std::vector<double> y(dim, 0.0);
        for (int i = 0; i < dim; ++i) {
            double s = 0.0;
            for (int j = 0; j < dim; ++j) s += inv[i * dim + j] * x[j];
            y[i] = s;
        }
        return y;
    }
};

namespace detail {

inline std::vector<double> invert(const std::vector<double>& m, int n) {
    std::vector<double> a = m, r(static_cast<size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) r[i * n + i] = 1.0;
    for (int c = 0; c < n; ++c) {
        int p = c;
        for (int i = c + 1; i < n; ++i)
            if (std::abs(a[i * n + c]) > std::abs(a[p * n + c])) p = i;
        if (a[p * n + c] == 0.0) throw std::invalid_argument("singular basis");
        for (int j = 0; j < n; ++j) {
            std::swap(a[c * n + j], a[p * n + j]);
            std::swap(r[c * n + j], r[p * n + j]);
        }
        const double d = a[c * n + c];
        for (int j = 0; j < n; ++j) {
            a[c * n + j] /= d;
            r[c * n + j] /= d;
        }
        for (int i = 0; i < n; ++i) {
            if (i == c) continue;
            const double f = a[i * n + c];
            if (f == 0.0) continue;
            for (int j = 0; j < n; ++j) {
                a[i * n + j] -= f * a[c * n + j];
                r[i * n + j] -= f * r[c * n + j];
            }
        }
    }
    return r;
}

inline double determinant(std::vector<double> a, int n) {
    double d = 1.0;
    for (int c = 0; c < n; ++c) {
        int p = c;
        for (int i = c + 1; i < n; ++i)
            if (std::abs(a[i * n + c]) > std::abs(a[p * n + c])) p = i;
        if (a[p * n + c] == 0.0) return 0.0;
        if (p != c) {
            for (int j = 0; j < n; ++j) std::swap(a[c * n + j], a[p * n + j]);
            d = -d;
        }
        d *= a[c * n + c];
        for (int i = c + 1; i < n; ++i) {
            const double f = a[i * n + c] / a[c * n + c];
            for (int j = c; j < n; ++j) a[i * n + j] -= f * a[c * n + j];
        }
    }
    return d;
}

}  // namespace detail

inline double Basis::det() const { return detail::determinant(g, dim); }

inline Basis makeBasis(std::vector<double> g, int dim) {
    Basis b;
    b.dim = dim;
    b.g = std::move(g);
    b.inv = detail::invert(b.g, dim);
    return b;
}

struct LatticeSpec {
    LatticeKind kind = LatticeKind::Z;
    int dim = 1;
    double scale = 1.0;
    Basis basis;
    double cellVolume = 1.0;
    double secondMoment = 1.0 / 12.0;
};

struct LatticePoint {
    std::vector<double> coords;
    std::vector<int64_t> basisCoords;
};

inline double tableSecondMoment(LatticeKind k) {
    switch (k) {
        case LatticeKind::Z: return 1.0 / 12.0;
        case LatticeKind::A2: return 5.0 / (36.0 * std::sqrt(3.0));
        case LatticeKind::D4: return 13.0 / (120.0 * std::sqrt(2.0));
    }
    return 0.0;
}

inline LatticeSpec makeLattice(LatticeKind kind, int dim, double scale = 1.0) {
    if (scale <= 0.0) throw std::invalid_argument("lattice scale must be positive");
    if (kind == LatticeKind::A2 && dim != 2) throw DimensionError("A2 is two-dimensional");
    if (kind == LatticeKind::D4 && dim != 4) throw DimensionError("D4 is four-dimensional");
    if (dim < 1) throw DimensionError("dimension must be >= 1");
    std::vector<double> g(static_cast<size_t>(dim) * dim, 0.0);
    switch (kind) {
        case LatticeKind::Z:
            for (int i = 0; i < dim; ++i) g[i * dim + i] = 1.0;
            break;
        case LatticeKind::A2:
            g = {1.0, 0.5, 0.0, std::sqrt(3.0) / 2.0};
            break;
        case LatticeKind::D4:
            g = {1, 0, 0, 0, -1, 1, 0, 0, 0, -1, 1, 1, 0, 0, -1, 1};
            break;
    }
    for (double& v : g) v *= scale;
    LatticeSpec s;
    s.kind = kind;
    s.dim = dim;
    s.scale = scale;
    s.basis = makeBasis(std::move(g), dim);
    s.cellVolume = std::abs(s.basis.det());
    s.secondMoment = tableSecondMoment(kind);
    return s;
}

inline double dist2(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

// Per-dimension squared norm used by every distortion.
inline double normDim2(const std::vector<double>& a, const std::vector<double>& b) {
    return dist2(a, b) / static_cast<double>(a.size());
}

inline LatticePoint pointFromBasis(const LatticeSpec& s, std::vector<int64_t> z) {
    LatticePoint p;
    p.coords = s.basis.map(z);
    p.basisCoords = std::move(z);
    return p;
}

namespace detail {

// Candidate integer vectors around y in basis coordinates: y_i + offsets.
template <class Visit>
void scanBox(const std::vector<int64_t>& lo, const std::vector<int64_t>& hi, Visit&& visit) {
    const int n = static_cast<int>(lo.size());
    std::vector<int64_t> z = lo;
    for (int i = 0; i < n; ++i)
        if (lo[i] > hi[i]) return;
    while (true) {
        visit(z);
        int k = n - 1;
        while (k >= 0 && z[k] == hi[k]) {
            z[k] = lo[k];
            --k;
        }
        if (k < 0) return;
        ++z[k];
    }
}

inline bool tieBetter(double d2, const std::vector<int64_t>& z, double best2,
                      const std::vector<int64_t>& bestZ) {
    const double slack = 2.0 * kTol * std::sqrt(std::max(best2, 0.0)) + kTol * kTol;
    if (d2 < best2 - slack) return true;
    if (d2 > best2 + slack) return false;
    return z < bestZ;
}

}  // namespace detail

inline LatticePoint nearestPoint(const LatticeSpec& s, const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != s.dim) throw DimensionError("point dimension mismatch");
    const int L = s.dim;
    if (s.kind == LatticeKind::Z) {
        std::vector<int64_t> z(L);
        const double eps = kTol / s.scale;
        for (int i = 0; i < L; ++i) z[i] = static_cast<int64_t>(std::ceil(x[i] / s.scale - 0.5 - eps));
        return pointFromBasis(s, std::move(z));
    }
    std::vector<int64_t> best;
    double best2 = std::numeric_limits<double>::infinity();
    if (s.kind == LatticeKind::A2) {
        // Nearest point lies on the Delaunay triangle holding x; scan a slightly wider patch.
        const auto y = s.basis.solve(x);
        std::vector<int64_t> lo(2), hi(2);
        for (int i = 0; i < 2; ++i) {
            lo[i] = static_cast<int64_t>(std::floor(y[i])) - 1;
            hi[i] = lo[i] + 3;
        }
        detail::scanBox(lo, hi, [&](const std::vector<int64_t>& z) {
            const double d2 = dist2(s.basis.map(z), x);
            if (best.empty() || detail::tieBetter(d2, z, best2, best)) {
                best = z;
                best2 = d2;
            }
        });
        return pointFromBasis(s, std::move(best));
    }
    // D4: integer vectors with even sum; every minimizer is within one step of rounding.
    std::vector<int64_t> r(4), lo(4), hi(4);
    for (int i = 0; i < 4; ++i) {
        r[i] = static_cast<int64_t>(std::llround(x[i] / s.scale));
        lo[i] = r[i] - 1;
        hi[i] = r[i] + 1;
    }
    detail::scanBox(lo, hi, [&](const std::vector<int64_t>& v) {
        if (((v[0] + v[1] + v[2] + v[3]) & 1) != 0) return;
        std::vector<double> c(4);
        for (int i = 0; i < 4; ++i) c[i] = s.scale * static_cast<double>(v[i]);
        const double d2 = dist2(c, x);
        const auto yb = s.basis.solve(c);
        std::vector<int64_t> z(4);
        for (int i = 0; i < 4; ++i) z[i] = std::llround(yb[i]);
        if (best.empty() || detail::tieBetter(d2, z, best2, best)) {
            best = z;
            best2 = d2;
        }
    });
    return pointFromBasis(s, std::move(best));
}

inline constexpr double kDefaultBoxBudget = 5e7;

// Integer basis coordinates of every point of the lattice spanned by `b` within `radius` of center.
inline std::vector<std::vector<int64_t>> ballBasisCoords(const Basis& b, const std::vector<double>& center,
                                                         double radius, double budget = kDefaultBoxBudget) {
    if (radius < 0.0) throw std::invalid_argument("radius must be nonnegative");
    if (static_cast<int>(center.size()) != b.dim) throw DimensionError("center dimension mismatch");
    const int n = b.dim;
    const auto yc = b.solve(center);
    std::vector<int64_t> lo(n), hi(n);
    double cells = 1.0;
    for (int i = 0; i < n; ++i) {
        double rn = 0.0;
        for (int j = 0; j < n; ++j) rn += b.inv[i * n + j] * b.inv[i * n + j];
        const double w = (radius + kTol) * std::sqrt(rn);
        lo[i] = static_cast<int64_t>(std::ceil(yc[i] - w - kTol));
        hi[i] = static_cast<int64_t>(std::floor(yc[i] + w + kTol));
        cells *= static_cast<double>(hi[i] - lo[i] + 1);
    }
    if (cells > budget) throw CapacityError("ball enumeration exceeds box budget");
    const double lim = (radius + kTol) * (radius + kTol);
    std::vector<std::vector<int64_t>> out;
    detail::scanBox(lo, hi, [&](const std::vector<int64_t>& z) {
        if (dist2(b.map(z), center) <= lim) out.push_back(z);
    });
    return out;
}

inline std::vector<LatticePoint> enumerateInBall(const LatticeSpec& s, const std::vector<double>& center,
                                                 double radius, double budget = kDefaultBoxBudget) {
    std::vector<LatticePoint> pts;
    for (auto& z : ballBasisCoords(s.basis, center, radius, budget)) pts.push_back(pointFromBasis(s, std::move(z)));
    return pts;
}

inline double unitSphereVolume(int L) {
    const double h = 0.5 * L;
    return std::exp(h * std::log(std::numbers::pi) - std::lgamma(h + 1.0));
}

inline double sphereSecondMoment(int L) {
    if (L < 1) throw std::invalid_argument("L must be >= 1");
    const double h = 0.5 * L;
    return std::exp((2.0 / L) * std::lgamma(h + 1.0)) / ((L + 2) * std::numbers::pi);
}

inline double coveringRadiusBound(const LatticeSpec& s, int64_t index) {
    if (index < 1) throw std::invalid_argument("index must be >= 1");
    const double L = s.dim;
    return 0.5 * std::sqrt(2.0) * std::pow(s.cellVolume, 1.0 / L) * std::pow(static_cast<double>(index), 1.0 / L);
}

}  // namespace mdlvq
