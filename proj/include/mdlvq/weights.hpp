#pragma once

#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace mdlvq {

using Mask = unsigned;

inline int popcount(Mask m) { return std::popcount(m); }
inline bool has(Mask m, int i) { return (m >> i) & 1u; }

// κ-subsets of {0..n-1} as bitmasks, lexicographic in their sorted element lists.
inline std::vector<Mask> subsetsOfSize(int n, int k) {
    std::vector<Mask> out;
    std::vector<int> idx(k);
    for (int i = 0; i < k; ++i) idx[i] = i;
    if (k > n || k < 0) return out;
    while (true) {
        Mask m = 0;
        for (int v : idx) m |= 1u << v;
        out.push_back(m);
        int p = k - 1;
        while (p >= 0 && idx[p] == n - k + p) --p;
        if (p < 0) break;
        ++idx[p];
        for (int q = p + 1; q < k; ++q) idx[q] = idx[q - 1] + 1;
    }
    return out;
}

inline std::string maskName(Mask m, int n) {
    std::string s;
    for (int i = 0; i < n; ++i)
        if (has(m, i)) s += static_cast<char>('0' + i);
    return s;
}

inline Mask maskFromName(const std::string& s, int n) {
    Mask m = 0;
    for (char ch : s) {
        const int i = ch - '0';
        if (i < 0 || i >= n) throw std::invalid_argument("subset label out of range: " + s);
        if (has(m, i)) throw std::invalid_argument("repeated index in subset label: " + s);
        m |= 1u << i;
    }
    return m;
}

struct WeightProfile {
    int n = 2;
    std::vector<double> gamma;  // by mask; only 1 <= |ℓ| <= n-1 are meaningful
    std::vector<double> mu;
    std::vector<double> c;  // n×n symmetric pair radius factors

    double& g(Mask m) { return gamma[m]; }
    double g(Mask m) const { return gamma[m]; }
    double radiusFactor(int i, int j) const { return c[i * n + j]; }
};

inline WeightProfile uniformProfile(int n) {
    if (n < 2 || n > 10) throw std::invalid_argument("n must lie in [2,10]");
    WeightProfile p;
    p.n = n;
    p.gamma.assign(size_t{1} << n, 0.0);
    for (Mask m = 1; m + 1 < (Mask{1} << n); ++m) p.gamma[m] = 1.0;
    p.mu.assign(n, 1.0);
    p.c.assign(static_cast<size_t>(n) * n, 1.0);
    return p;
}

inline double gammaBar(const WeightProfile& p, int k) {
    double s = 0.0;
    for (Mask m : subsetsOfSize(p.n, k)) s += p.g(m);
    return s;
}

inline double gammaBar(const WeightProfile& p, int k, int i) {
    double s = 0.0;
    for (Mask m : subsetsOfSize(p.n, k))
        if (has(m, i)) s += p.g(m);
    return s;
}

inline double gammaBar(const WeightProfile& p, int k, int i, int j) {
    double s = 0.0;
    for (Mask m : subsetsOfSize(p.n, k))
        if (has(m, i) && has(m, j)) s += p.g(m);
    return s;
}

inline double hatGammaPair(const WeightProfile& p, int k, int i, int j) {
    const double all = gammaBar(p, k);
    if (all == 0.0) throw std::domain_error("zero weight sum");
    return (gammaBar(p, k, i) * gammaBar(p, k, j) / all - gammaBar(p, k, i, j)) / (double(k) * k);
}

// Subset coefficient with pair radius factors c.
inline double hatGammaEll(const WeightProfile& p, Mask ell) {
    const int n = p.n;
    const int k = popcount(ell);
    const double all = gammaBar(p, k);
    if (all == 0.0) throw std::domain_error("zero weight sum");
    std::vector<double> gb(n);
    for (int i = 0; i < n; ++i) gb[i] = gammaBar(p, k, i);
    double t1 = 0.0;
    for (int j = 0; j < n; ++j) {
        if (!has(ell, j)) continue;
        for (int i = 0; i < n; ++i)
            if (i != j) t1 += gb[i] * p.radiusFactor(i, j);
    }
    double t2 = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (has(ell, i) && has(ell, j)) t2 += p.radiusFactor(i, j);
    double t3 = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) t3 += gb[i] * gb[j] * p.radiusFactor(i, j);
    return (all * t1 - all * all * t2 - t3) / (all * all * double(k) * k);
}

// Pair weight of the separable cost, summed over κ.
inline std::vector<double> pairWeights(const WeightProfile& p) {
    std::vector<double> w(static_cast<size_t>(p.n) * p.n, 0.0);
    for (int k = 1; k < p.n; ++k)
        for (int i = 0; i < p.n; ++i)
            for (int j = i + 1; j < p.n; ++j) {
                const double v = hatGammaPair(p, k, i, j);
                w[i * p.n + j] += v;
                w[j * p.n + i] += v;
            }
    return w;
}

struct ProfileIssue {
    bool ok = true;
    std::string message;
};

inline ProfileIssue validate(const WeightProfile& p) {
    const int n = p.n;
    if (n < 2) return {false, "n must be >= 2"};
    if (p.gamma.size() != (size_t{1} << n)) return {false, "gamma table size mismatch"};
    if (static_cast<int>(p.mu.size()) != n) return {false, "mu length mismatch"};
    if (p.c.size() != static_cast<size_t>(n) * n) return {false, "radius factor table size mismatch"};
    for (Mask m = 1; m + 1 < (Mask{1} << n); ++m)
        if (!(p.gamma[m] >= 0.0) || !std::isfinite(p.gamma[m]))
            return {false, "gamma_" + maskName(m, n) + " must be finite and nonnegative"};
    for (int k = 1; k < n; ++k)
        if (!(gammaBar(p, k) > 0.0)) return {false, "gamma sum for subset size " + std::to_string(k) + " must be positive"};
    for (double m : p.mu)
        if (!(m > 0.0)) return {false, "mu must be positive"};
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            if (!(p.radiusFactor(i, j) > 0.0)) return {false, "radius factors must be positive"};
            if (p.radiusFactor(i, j) != p.radiusFactor(j, i)) return {false, "radius factors must be symmetric"};
        }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                if (i == j || j == k || i == k) continue;
                if (p.radiusFactor(i, j) > p.radiusFactor(i, k) + p.radiusFactor(k, j) + 1e-12)
                    return {false, "radius factors violate the triangle inequality at (" + std::to_string(i) + "," +
                                       std::to_string(j) + ") via " + std::to_string(k)};
            }
    return {};
}

inline bool unitRadii(const WeightProfile& p) {
    for (int i = 0; i < p.n; ++i)
        for (int j = 0; j < p.n; ++j)
            if (i != j && p.radiusFactor(i, j) != 1.0) return false;
    return true;
}

namespace detail {

using RVec = std::vector<double>;

inline double dotDim(const RVec& a, const RVec& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s / static_cast<double>(a.size());
}

inline double nrmDim(const RVec& a) { return dotDim(a, a); }

inline RVec axpy(const RVec& x, double a, const RVec& y) {
    RVec r = x;
    for (size_t i = 0; i < r.size(); ++i) r[i] += a * y[i];
    return r;
}

}  // namespace detail

struct Residual {
    double residual = 0.0;
    double magnitude = 0.0;
    double relative() const { return magnitude > 0.0 ? residual / magnitude : residual; }
};

// Per-subset weighted distortion versus its pairwise + centroid decomposition.
inline Residual checkDecomposition(const WeightProfile& p, int k, const std::vector<double>& lc,
                              const std::vector<std::vector<double>>& lam) {
    using namespace detail;
    const int n = p.n;
    std::vector<RVec> t(n);
    for (int i = 0; i < n; ++i) {
        t[i] = lam[i];
        for (double& v : t[i]) v *= p.mu[i];
    }
    double lhs = 0.0;
    for (Mask m : subsetsOfSize(n, k)) {
        RVec avg(lc.size(), 0.0);
        for (int i = 0; i < n; ++i)
            if (has(m, i)) avg = axpy(avg, 1.0 / k, t[i]);
        lhs += p.g(m) * nrmDim(axpy(lc, -1.0, avg));
    }
    const double all = gammaBar(p, k);
    double rhs = 0.0;
    RVec cen(lc.size(), 0.0);
    for (int i = 0; i < n; ++i) {
        cen = axpy(cen, gammaBar(p, k, i) / (k * all), t[i]);
        for (int j = i + 1; j < n; ++j) rhs += hatGammaPair(p, k, i, j) * nrmDim(axpy(t[i], -1.0, t[j]));
    }
    rhs += all * nrmDim(axpy(lc, -1.0, cen));
    return {std::abs(lhs - rhs), std::max(std::abs(lhs), std::abs(rhs))};
}

struct IdentityReport {
    // Worst relative residual per lemma, index 0 ↔ first identity.
    std::vector<double> worst = std::vector<double>(7, 0.0);
    std::vector<std::string> names = {"sumL_j", "sumL_ij", "inner_sum", "norm_pair_bar", "norm_pair_ij",
                                      "norm_subset_sum", "centroid_split"};
    bool pass(double tol) const {
        for (double w : worst)
            if (!(w <= tol)) return false;
        return true;
    }
};

inline IdentityReport checkWeightIdentities(const WeightProfile& p, const std::vector<double>& lc,
                                               const std::vector<std::vector<double>>& lam) {
    using namespace detail;
    const int n = p.n;
    IdentityReport rep;
    auto note = [&](int id, double a, double b) {
        const double mag = std::max({std::abs(a), std::abs(b), 1e-300});
        rep.worst[id] = std::max(rep.worst[id], std::abs(a - b) / std::max(mag, 1.0));
    };
    for (int k = 1; k < n; ++k) {
        const double all = gammaBar(p, k);
        std::vector<double> gb(n);
        for (int i = 0; i < n; ++i) gb[i] = gammaBar(p, k, i);
        auto gij = [&](int i, int j) { return i == j ? gb[i] : gammaBar(p, k, i, j); };
        for (int i = 0; i < n; ++i) {
            double s = 0.0, s2 = 0.0;
            for (int j = 0; j < n; ++j) {
                if (j != i) s += gb[j];
                s2 += gij(i, j);
            }
            note(0, s, k * all - gb[i]);
            note(1, s2, k * gb[i]);
        }
        double lhs6 = 0.0;
        for (Mask m : subsetsOfSize(n, k)) {
            RVec sum(lc.size(), 0.0);
            for (int i = 0; i < n; ++i)
                if (has(m, i)) sum = axpy(sum, 1.0, lam[i]);
            lhs6 += p.g(m) * dotDim(lc, sum);
        }
        RVec wsum(lc.size(), 0.0);
        for (int i = 0; i < n; ++i) wsum = axpy(wsum, gb[i], lam[i]);
        note(2, lhs6, dotDim(lc, wsum));

        double l7 = 0.0, r7 = 0.0, l8 = 0.0, r8 = 0.0, pairIJ = 0.0;
        for (int i = 0; i < n; ++i) {
            r7 += gb[i] * (k * all - gb[i]) * nrmDim(lam[i]);
            r8 += (k - 1) * gb[i] * nrmDim(lam[i]);
            for (int j = i + 1; j < n; ++j) {
                const double d = nrmDim(axpy(lam[i], -1.0, lam[j]));
                const double ip = dotDim(lam[i], lam[j]);
                l7 += gb[i] * gb[j] * d;
                r7 -= 2.0 * gb[i] * gb[j] * ip;
                l8 += gij(i, j) * d;
                r8 -= 2.0 * gij(i, j) * ip;
                pairIJ += gij(i, j) * d;
            }
        }
        note(3, l7, r7);
        note(4, l8, r8);

        double l9 = 0.0, r9 = -pairIJ;
        for (Mask m : subsetsOfSize(n, k)) {
            RVec sum(lc.size(), 0.0);
            for (int i = 0; i < n; ++i)
                if (has(m, i)) sum = axpy(sum, 1.0, lam[i]);
            l9 += p.g(m) * nrmDim(sum);
        }
        for (int i = 0; i < n; ++i) r9 += k * gb[i] * nrmDim(lam[i]);
        note(5, l9, r9);

        WeightProfile unit = p;
        unit.mu.assign(n, 1.0);
        const Residual r10 = checkDecomposition(unit, k, lc, lam);
        rep.worst[6] = std::max(rep.worst[6], r10.residual / std::max(r10.magnitude, 1.0));
    }
    return rep;
}

}  // namespace mdlvq
