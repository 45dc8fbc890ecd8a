#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <numbers>

#include "mdlvq/analysis.hpp"
#include "mdlvq/oracle.hpp"

using namespace mdlvq;

namespace {

// Volume of two unit L-balls at distance t intersected, via the regularized incomplete beta function.
double lensVolume(int L, double t) {
    if (t >= 2.0) return 0.0;
    return unitSphereVolume(L) * boost::math::ibeta((L + 1) / 2.0, 0.5, 1.0 - t * t / 4.0);
}

// Independent route to the count (w=0) and second-moment (w=2) integrals: radial quadrature.
double quadratureIntegral(int L, int w) {
    auto f = [&](double t) { return L * unitSphereVolume(L) * std::pow(t, L - 1 + w) * lensVolume(L, t); };
    const double I = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, 1.0, 15, 1e-14);
    return (L + 1.0) / (2.0 * L * unitSphereVolume(L) * unitSphereVolume0(L - 1)) * I;
}

const double kTwoPiE = 2.0 * std::numbers::pi * std::numbers::e;

}  // namespace

TEST(Analysis, PochhammerAndCompensatedSum) {
    EXPECT_NEAR(static_cast<double>(pochhammer(0.5L, 3)), 0.5 * 1.5 * 2.5, 1e-15);
    EXPECT_EQ(pochhammer(-2.0L, 3), 0.0L);
    EXPECT_NEAR(static_cast<double>(pochhammer(-3.0L, 2)), 6.0, 1e-13);
    EXPECT_NEAR(static_cast<double>(pochhammer(-3.0L, 3)), -6.0, 1e-13);
    EXPECT_NEAR(static_cast<double>(pochhammer(-1.5L, 2)), -1.5 * -0.5, 1e-15);
    CompensatedSum s;
    s.add(1e20L);
    for (int i = 0; i < 1000; ++i) s.add(1.0L);
    s.add(-1e20L);
    EXPECT_EQ(s.value(), 1000.0L);
}

TEST(Analysis, IntersectionSumsExactSmallL) {
    EXPECT_NEAR(betaL(1), 1.5, 1e-13);
    EXPECT_NEAR(betaTildeL(1), 5.0 / 12.0, 1e-13);
    EXPECT_NEAR(betaL(3), 5.0 / 12.0, 1e-13);
    EXPECT_NEAR(betaTildeL(3), 0.2208333333333333, 1e-13);
    EXPECT_NEAR(betaL(5), 0.19875, 1e-12);
    EXPECT_NEAR(betaTildeL(5), 0.12901785714285714, 1e-12);
    EXPECT_NEAR(betaL(7), 0.11058673469387755, 1e-12);
    EXPECT_NEAR(betaL(21) / 0.005455380588246486, 1.0, 1e-9);
    EXPECT_NEAR(betaTildeL(21) / 0.004805022627773787, 1.0, 1e-9);
}

TEST(Analysis, IntersectionSumsMatchQuadrature) {
    for (int L = 1; L <= 21; L += 2) {
        EXPECT_NEAR(betaL(L) / quadratureIntegral(L, 0), 1.0, 1e-9) << "L=" << L;
        EXPECT_NEAR(betaTildeL(L) / quadratureIntegral(L, 2), 1.0, 1e-9) << "L=" << L;
    }
}

TEST(Analysis, MomentRatioBelowOne) {
    for (int L = 1; L <= 21; L += 2) {
        const double r = betaTildeL(L) / betaL(L);
        EXPECT_GT(r, 0.0);
        EXPECT_LT(r, 1.0);
    }
}

TEST(Analysis, EvenDimensionUnsupported) {
    EXPECT_THROW(betaL(2), UnsupportedError);
    EXPECT_THROW(psi3(4), UnsupportedError);
    EXPECT_THROW(phiL(6), UnsupportedError);
    EXPECT_THROW(betaL(kMaxOddL + 2), UnsupportedError);
    EXPECT_THROW(fig2Data(22), UnsupportedError);
}

TEST(Analysis, OracleGeometryEdgeCases) {
    for (int L : {1, 3}) {
        EXPECT_NEAR(intersectionVolumeMc(L, 0.0, 10000, 1), unitSphereVolume(L), 1e-12);
        EXPECT_EQ(intersectionVolumeMc(L, 2.0, 10000, 1), 0.0);
        EXPECT_EQ(intersectionVolumeMc(L, 2.5, 10000, 1), 0.0);
    }
    EXPECT_NEAR(intersectionVolumeMc(1, 1.0, 1000000, 2), 1.0, 5e-3);
    EXPECT_NEAR(intersectionVolumeMc(3, 0.7, 1000000, 3), lensVolume(3, 0.7), 0.01 * lensVolume(3, 0.7));
}

TEST(Analysis, OracleMatchesClosedForms) {
    for (int L : {1, 3, 5}) {
        const auto e = mcIntersectionOracle(L, 10000000, 20240601u + L, 2);
        EXPECT_GE(e.samples, 10000000);
        EXPECT_NEAR(e.count / betaL(L), 1.0, 1e-3) << "L=" << L << " se=" << e.countStdErr;
        EXPECT_NEAR(e.moment / betaTildeL(L), 1.0, 1e-3) << "L=" << L << " se=" << e.momentStdErr;
        EXPECT_LT(e.countStdErr / e.count, 5e-4);
    }
}

TEST(Analysis, OracleIgnoresWorkerCount) {
    const auto a = mcIntersectionOracle(3, 300000, 9, 1);
    const auto b = mcIntersectionOracle(3, 300000, 9, 3);
    EXPECT_EQ(a.count, b.count);
    EXPECT_EQ(a.moment, b.moment);
    EXPECT_EQ(a.countStdErr, b.countStdErr);
}

TEST(Analysis, ExpansionFactors) {
    EXPECT_EQ(psi2(), 1.0);
    EXPECT_NEAR(psi3Infinity(), 1.07457, 1e-5);
    EXPECT_NEAR(phiInfinity(), 1.1547005, 1e-7);
    EXPECT_NEAR(psi3(1), 2.0 / std::sqrt(3.0), 1e-12);
    EXPECT_NEAR(psi3(3), 1.1346008899494892, 1e-10);
    EXPECT_NEAR(phiL(1), 10.0 / 9.0, 1e-12);
    EXPECT_NEAR(phiL(3), 1.1371319418688528, 1e-10);
    EXPECT_NEAR(phiL(21), 1.1642687189272391, 1e-8);
    double prev = psi3(1);
    for (int L = 3; L <= 21; L += 2) {
        const double v = psi3(L);
        EXPECT_LT(v, prev);
        EXPECT_GT(v, psi3Infinity());
        prev = v;
    }
}

TEST(Analysis, Fig2Table) {
    const auto rows = fig2Data(21);
    ASSERT_EQ(rows.size(), 11u);
    EXPECT_NEAR(rows[0].gslTerm, std::log2(kTwoPiE / 12.0), 1e-12);
    EXPECT_NEAR(rows[0].gslTerm, 0.5093, 1e-4);
    for (size_t i = 0; i < rows.size(); ++i) {
        EXPECT_LT(rows[i].phiTerm, rows[i].gslTerm) << "L=" << rows[i].L;
        if (i) {
            EXPECT_LT(rows[i].gslTerm, rows[i - 1].gslTerm);
        }
    }
}

TEST(Analysis, RatesRoundTrip) {
    const double hX = gaussianLogEntropy(2, 1.0);
    const double nu = 3.7e-4;
    const auto r = rates(hX, 2, nu, {1.0, 61.0}, {1.0, 1.3});
    EXPECT_NEAR(r.side[0], r.central, 1e-14);
    for (int i = 0; i < 2; ++i) {
        const double mu = i ? 1.3 : 1.0;
        const double N = indexFromRate(hX, 2, nu, r.side[i], mu);
        EXPECT_NEAR(N, i ? 61.0 : 1.0, 1e-9);
    }
    EXPECT_THROW(indexFromRate(hX, 2, nu, r.central + 1.0, 1.0), InfeasibleRateError);
    EXPECT_THROW(rates(hX, 2, 0.0, {1.0}, {1.0}), std::invalid_argument);
}

TEST(Analysis, OperatingPointIndex) {
    // unit Gaussian pairs at central rate Rc and side rate 5 bit/dim
    const double hX = gaussianLogEntropy(2, 1.0);
    const double Rc = 5.0 + 0.5 * std::log2(61.0);
    const double nu = std::exp2(hX - 2.0 * Rc);
    EXPECT_NEAR(indexFromRate(hX, 2, nu, 5.0, 1.0), 61.0, 1e-9);
}

TEST(Analysis, TwoDescriptionForms) {
    auto p = uniformProfile(2);
    const double nu = 0.01;
    const auto d = theoreticalDistortion2(p, 2, nu, 25, 13);
    const double common = sphereSecondMoment(2) * nu * 25.0 * 13.0;
    EXPECT_NEAR(d[0], 0.25 * common, 1e-15);
    EXPECT_NEAR(d[1], 0.25 * common, 1e-15);
    p.g(0b01) = 1.55;
    const double hX = gaussianLogEntropy(2, 1.0);
    const auto r = rates(hX, 2, nu, {25, 13}, {1, 1});
    const auto lattice = theoreticalDistortion2(p, 2, nu, 25, 13);
    const auto rate = theoreticalDistortion2Rate(p, 2, hX, r.central, r.side[0], r.side[1]);
    EXPECT_NEAR(lattice[0] / rate[0], 1.0, 1e-12);
    EXPECT_NEAR(lattice[1] / rate[1], 1.0, 1e-12);
    EXPECT_GT(lattice[1], lattice[0]);
    const auto dg = diggaviDistortion2Rate(p, 1.0 / 12.0, 2, hX, r.central, r.side[0], r.side[1]);
    EXPECT_NEAR(dg[0] / rate[0], (1.0 / 12.0) / sphereSecondMoment(2), 1e-12);
    EXPECT_NEAR(10.0 * std::log10(dg[0] / rate[0]), 0.2, 0.005);
}

TEST(Analysis, ThreeDescriptionForms) {
    const auto p = uniformProfile(3);
    const auto d = theoreticalDistortion3(p, 1, 1e-3, 15, 15, 15);
    for (Mask i : subsetsOfSize(3, 1))
        for (Mask ij : subsetsOfSize(3, 2)) EXPECT_NEAR(d.at(i) / d.at(ij), 4.0, 1e-12);
    const auto small = theoreticalDistortion3(p, 1, 1e-9, 15, 15, 15);
    EXPECT_LT(small.at(1), 1e-12);
    const double hX = gaussianLogEntropy(3, 1.0);
    const auto r = rates(hX, 3, 2e-4, {7, 9, 11}, {1, 1, 1});
    const auto a = theoreticalDistortion3(p, 3, 2e-4, 7, 9, 11);
    const auto b = theoreticalDistortion3Rate(p, 3, hX, r.central, {r.side[0], r.side[1], r.side[2]});
    for (const auto& [m, v] : a) EXPECT_NEAR(v / b.at(m), 1.0, 1e-12);
}

TEST(Analysis, CentralDistortionHomogeneity) {
    EXPECT_NEAR(centralDistortion(1.0 / 12.0, 1, 0.2), 0.04 / 12.0, 1e-16);
    const double s = 1.7;
    const double a = centralDistortion(0.08, 3, 0.5);
    const double b = centralDistortion(0.08, 3, 0.5 * s * s * s);
    EXPECT_NEAR(b / a, s * s, 1e-12);
}

TEST(Analysis, DistortionProductIgnoresCentralRate) {
    const double hX = gaussianLogEntropy(1, 1.0);
    const double R = 3.0;
    const double ref = distortionProduct3(1, R, hX, 1.0 / 12.0);
    for (double Rc = 3.5; Rc < 9.0; Rc += 0.25)
        EXPECT_NEAR(distortionProduct3FromFactors(1, R, Rc, hX, 1.0 / 12.0) / ref, 1.0, 1e-12);
    EXPECT_DOUBLE_EQ(gaussianLimitProduct(0.0), 1.0 / 27.0);
    // large-dimension constants: Φ² = 4/3, G(S)·2πe = 1, G_c·2πe = 1
    const double limit = (4.0 / 3.0) / 36.0;
    EXPECT_NEAR(limit, 1.0 / 27.0, 1e-15);
}

TEST(Analysis, TradeoffSweep) {
    const auto p = uniformProfile(3);
    const double hX = gaussianLogEntropy(1, 1.0);
    std::vector<double> grid;
    for (int i = 1; i <= 9; ++i) grid.push_back(0.1 * i);
    const auto rep = tradeoffSweep(grid, p, 1, hX, {3.0, 3.0, 3.0}, 1.0 / 12.0, {0b001, 0b011});
    EXPECT_TRUE(rep.invariant(1e-9));
    EXPECT_NEAR(rep.rows[0].product / distortionProduct3(1, 3.0, hX, 1.0 / 12.0), 1.0, 1e-9);
    EXPECT_THROW(tradeoffSweep({1.0}, p, 1, hX, {3, 3, 3}, 1.0 / 12.0, {1, 3}), std::domain_error);
}

TEST(Analysis, PradhanInnerBound) {
    const auto a = pradhanFromNoise(0.0, 0.3);
    EXPECT_DOUBLE_EQ(a.mmse1, 0.3);
    EXPECT_DOUBLE_EQ(a.mmse2, 0.15);
    const double R = 2.0;
    const auto lim = pradhanInnerBound(-0.5 + 1e-9, R);
    EXPECT_NEAR(lim.product / gaussianLimitProduct(R), 1.0, 1e-5);
    EXPECT_THROW(pradhanInnerBound(-0.5, R), std::domain_error);
    EXPECT_THROW(pradhanInnerBound(0.7, R), std::domain_error);
    // high-resolution form is the small-noise limit of the exact MMSE
    EXPECT_NEAR(pradhanMmseExact(2, 0.1, 1e-6) / (0.5 * 1e-6 * 1.1), 1.0, 1e-5);
}

TEST(Analysis, RateLoss) {
    EXPECT_NEAR(rateLoss(1, 1.0 / 12.0), 0.2358, 5e-4);
    EXPECT_NEAR(rateLoss(1, 1.0 / 12.0), 0.2361091160886057, 1e-12);
    // formula evaluated with the tabulated cubic constant
    EXPECT_NEAR(rateLoss(3, kBccSecondMoment), 0.19478852646297353, 1e-10);
}

TEST(Analysis, BinningThreshold) {
    EXPECT_NEAR(binningThreshold(4.0, 1.0, 1), 2.0 + 0.5 * std::log2(psi3(1)), 1e-14);
    EXPECT_NEAR(binningThreshold(4.0, 16.0, 3), 2.0 + 0.5 * std::log2(psi3(3) * 4.0), 1e-14);
    const auto b = binnedDistortions(3.0, 5.0, -0.5 + 1e-12);
    EXPECT_NEAR(b.centralDistortion / b.pradhanCentral, 1.0, 1e-6);
    EXPECT_NEAR(b.pairDistortion, 25.0 * (4.0 / 3.0) * std::exp2(-12.0) / 12.0, 1e-15);
}
