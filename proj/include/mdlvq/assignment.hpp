#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace mdlvq {

struct AssignmentResult {
    std::vector<int> rowToCol;
    double total = 0.0;
    std::vector<double> rowPotential;
    std::vector<double> colPotential;
    // Largest violation of dual feasibility and of complementary slackness on the matching.
    double worstNegativeReduced = 0.0;
    double worstMatchedReduced = 0.0;
    bool certified(double tol) const { return worstNegativeReduced <= tol && worstMatchedReduced <= tol; }
};

// Square min-cost perfect matching by shortest augmenting paths with potentials. cost is row-major n×n.
inline AssignmentResult solveAssignment(const std::vector<double>& cost, int n) {
    if (static_cast<long long>(cost.size()) != static_cast<long long>(n) * n)
        throw std::invalid_argument("cost matrix must be square");
    const double inf = std::numeric_limits<double>::infinity();
    // 1-based columns; column 0 is the virtual source.
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            const double* row = cost.data() + static_cast<size_t>(i0 - 1) * n;
            double delta = inf;
            int j1 = 0;
            const double ui = u[i0];
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = row[j - 1] - ui - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    AssignmentResult r;
    r.rowToCol.assign(n, -1);
    for (int j = 1; j <= n; ++j)
        if (p[j] > 0) r.rowToCol[p[j] - 1] = j - 1;
    r.rowPotential.assign(u.begin() + 1, u.end());
    r.colPotential.assign(v.begin() + 1, v.end());
    for (int i = 0; i < n; ++i) {
        const double* row = cost.data() + static_cast<size_t>(i) * n;
        for (int j = 0; j < n; ++j) {
            const double red = row[j] - r.rowPotential[i] - r.colPotential[j];
            r.worstNegativeReduced = std::max(r.worstNegativeReduced, -red);
        }
        const int j = r.rowToCol[i];
        r.total += row[j];
        r.worstMatchedReduced =
            std::max(r.worstMatchedReduced, std::abs(row[j] - r.rowPotential[i] - r.colPotential[j]));
    }
    return r;
}

}  // namespace mdlvq
