#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace mdlvq {

using i128 = __int128;

// Small dense integer matrix, row-major.
struct IMat {
    int n = 0;
    std::vector<int64_t> a;

    IMat() = default;
    explicit IMat(int dim) : n(dim), a(static_cast<size_t>(dim) * dim, 0) {}

    int64_t& operator()(int i, int j) { return a[static_cast<size_t>(i) * n + j]; }
    int64_t operator()(int i, int j) const { return a[static_cast<size_t>(i) * n + j]; }

    static IMat identity(int dim, int64_t k = 1) {
        IMat m(dim);
        for (int i = 0; i < dim; ++i) m(i, i) = k;
        return m;
    }

    bool operator==(const IMat& o) const { return n == o.n && a == o.a; }
};

inline IMat operator*(const IMat& x, const IMat& y) {
    IMat r(x.n);
    for (int i = 0; i < x.n; ++i)
        for (int k = 0; k < x.n; ++k) {
            const int64_t v = x(i, k);
            if (v == 0) continue;
            for (int j = 0; j < x.n; ++j) r(i, j) += v * y(k, j);
        }
    return r;
}

// Bareiss fraction-free elimination; exact for the small matrices used here.
inline int64_t determinant(const IMat& m) {
    const int n = m.n;
    if (n == 0) return 1;
    std::vector<i128> a(m.a.begin(), m.a.end());
    auto at = [&](int i, int j) -> i128& { return a[static_cast<size_t>(i) * n + j]; };
    i128 prev = 1;
    int sign = 1;
    for (int k = 0; k < n - 1; ++k) {
        if (at(k, k) == 0) {
            int p = k + 1;
            while (p < n && at(p, k) == 0) ++p;
            if (p == n) return 0;
            for (int j = 0; j < n; ++j) std::swap(at(k, j), at(p, j));
            sign = -sign;
        }
        for (int i = k + 1; i < n; ++i)
            for (int j = k + 1; j < n; ++j)
                at(i, j) = (at(i, j) * at(k, k) - at(i, k) * at(k, j)) / prev;
        prev = at(k, k);
    }
    return static_cast<int64_t>(sign * at(n - 1, n - 1));
}

// adj(M) with adj(M)·M = det(M)·I.
inline IMat adjugate(const IMat& m) {
    const int n = m.n;
    IMat adj(n);
    if (n == 1) {
        adj(0, 0) = 1;
        return adj;
    }
    IMat minor(n - 1);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            for (int i = 0, mi = 0; i < n; ++i) {
                if (i == r) continue;
                for (int j = 0, mj = 0; j < n; ++j) {
                    if (j == c) continue;
                    minor(mi, mj++) = m(i, j);
                }
                ++mi;
            }
            const int64_t cof = determinant(minor);
            adj(c, r) = ((r + c) % 2 == 0) ? cof : -cof;
        }
    return adj;
}

inline int64_t floorDiv(i128 a, int64_t d) {
    if (d < 0) {
        a = -a;
        d = -d;
    }
    i128 q = a / d;
    if ((a % d) != 0 && a < 0) --q;
    return static_cast<int64_t>(q);
}

inline std::vector<int64_t> apply(const IMat& m, const std::vector<int64_t>& v) {
    std::vector<int64_t> r(m.n, 0);
    for (int i = 0; i < m.n; ++i) {
        i128 s = 0;
        for (int j = 0; j < m.n; ++j) s += static_cast<i128>(m(i, j)) * v[j];
        r[i] = static_cast<int64_t>(s);
    }
    return r;
}

// True when m⁻¹·x is integral for every integer column of x.
inline bool dividesLeft(const IMat& m, const IMat& x) {
    const int64_t d = determinant(m);
    if (d == 0) return false;
    const IMat q = adjugate(m) * x;
    for (int64_t v : q.a)
        if (v % d != 0) return false;
    return true;
}

}  // namespace mdlvq
