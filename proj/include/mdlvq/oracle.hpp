#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "mdlvq/analysis.hpp"
#include "mdlvq/parallel.hpp"
#include "mdlvq/rng.hpp"

namespace mdlvq {

namespace detail {

// Uniform point in the unit L-ball; returns (|z|², z_1).
inline std::pair<double, double> ballPoint(RngStream& rng, int L) {
    if (L == 1) {
        const double z = 2.0 * rng.uniform() - 1.0;
        return {z * z, z};
    }
    double n2 = 0.0, first = 0.0;
    for (int d = 0; d < L; ++d) {
        const double g = rng.gaussian();
        n2 += g * g;
        if (d == 0) first = g;
    }
    const double rad = std::pow(rng.uniform(), 1.0 / L);
    const double s = rad / std::sqrt(n2);
    return {rad * rad, first * s};
}

inline constexpr int64_t kOracleBlock = 1 << 16;

}  // namespace detail

// Volume of the intersection of two unit L-balls whose centres are `distance` apart.
inline double intersectionVolumeMc(int L, double distance, int64_t samples, uint64_t seed) {
    if (distance >= 2.0) return 0.0;
    RngStream rng(seed, StreamTag::Oracle, 0xFFFFFFFFu);
    int64_t hit = 0;
    for (int64_t s = 0; s < samples; ++s) {
        const auto [n2, z1] = detail::ballPoint(rng, L);
        if (n2 - 2.0 * distance * z1 + distance * distance <= 1.0) ++hit;
    }
    return unitSphereVolume(L) * static_cast<double>(hit) / static_cast<double>(samples);
}

// Intersection volume averaged over centre offsets drawn uniformly from the unit ball, normalised so the count
// weighting (distance^0) and the second-moment weighting (distance^2) reproduce the closed-form sums.
inline OracleEstimate mcIntersectionOracle(int L, int64_t samples, uint64_t seed, int workers = 1) {
    const int64_t blocks = std::max<int64_t>(2, (samples + detail::kOracleBlock - 1) / detail::kOracleBlock);
    const int64_t per = (samples + blocks - 1) / blocks;
    std::vector<double> c(blocks), m(blocks);
    forEachBlock(blocks, workers, [&](int64_t b) {
        RngStream rng(seed, StreamTag::Oracle, static_cast<uint32_t>(b));
        CompensatedSum sc, sm;
        for (int64_t i = 0; i < per; ++i) {
            const double u = (static_cast<double>(i) + rng.uniform()) / static_cast<double>(per);
            const double d = std::pow(u, 1.0 / L);
            const auto [n2, z1] = detail::ballPoint(rng, L);
            const double base = n2 + d * d;
            const double hit = 0.5 * ((base - 2.0 * d * z1 <= 1.0 ? 1.0 : 0.0) + (base + 2.0 * d * z1 <= 1.0 ? 1.0 : 0.0));
            sc.add(hit);
            sm.add(hit * d * d);
        }
        c[b] = static_cast<double>(sc.value()) / per;
        m[b] = static_cast<double>(sm.value()) / per;
    });
    const double norm = (L + 1.0) * unitSphereVolume(L) / (2.0 * L * unitSphereVolume0(L - 1));
    auto summarize = [&](const std::vector<double>& v, double& mean, double& se) {
        CompensatedSum s;
        for (double x : v) s.add(x);
        mean = static_cast<double>(s.value()) / blocks;
        CompensatedSum q;
        for (double x : v) q.add((x - mean) * (x - mean));
        se = std::sqrt(static_cast<double>(q.value()) / (blocks - 1) / blocks);
    };
    OracleEstimate e;
    double mc, sec, mm, sem;
    summarize(c, mc, sec);
    summarize(m, mm, sem);
    e.count = norm * mc;
    e.moment = norm * mm;
    e.countStdErr = norm * sec;
    e.momentStdErr = norm * sem;
    e.samples = per * blocks;
    return e;
}

}  // namespace mdlvq
