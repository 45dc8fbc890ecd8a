#pragma once

#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "mdlvq/lattice.hpp"
#include "mdlvq/weights.hpp"

namespace mdlvq {

struct UnsupportedError : std::domain_error {
    using std::domain_error::domain_error;
};

struct InfeasibleRateError : std::domain_error {
    using std::domain_error::domain_error;
};

inline constexpr int kMaxOddL = 41;
// Body-centred cubic, from the standard tables; re-measured in the test suite.
inline constexpr double kBccSecondMoment = 0.0785432;

// Neumaier compensated accumulator.
class CompensatedSum {
public:
    void add(long double v) {
        const long double t = sum_ + v;
        if (std::fabs(sum_) >= std::fabs(v))
            comp_ += (sum_ - t) + v;
        else
            comp_ += (v - t) + sum_;
        sum_ = t;
    }
    long double value() const { return sum_ + comp_; }

private:
    long double sum_ = 0.0L;
    long double comp_ = 0.0L;
};

// Rising factorial (a)_k through log-gamma, with exact handling of non-positive integer a.
inline long double pochhammer(long double a, int k) {
    if (k == 0) return 1.0L;
    const long double ra = std::nearbyint(a);
    if (a <= 0.0L && ra == a) {
        const long long q = static_cast<long long>(-ra);
        if (k > q) return 0.0L;
        const long double mag = std::exp(std::lgamma(static_cast<long double>(q + 1)) -
                                         std::lgamma(static_cast<long double>(q - k + 1)));
        return (k % 2 == 0) ? mag : -mag;
    }
    if (a > 0.0L) return std::exp(std::lgamma(a + k) - std::lgamma(a));
    long double p = 1.0L;
    for (int i = 0; i < k; ++i) p *= a + i;
    return p;
}

inline long double binomialLd(int n, int k) {
    if (k < 0 || k > n) return 0.0L;
    return std::exp(std::lgamma(static_cast<long double>(n + 1)) - std::lgamma(static_cast<long double>(k + 1)) -
                    std::lgamma(static_cast<long double>(n - k + 1)));
}

namespace detail {

inline void requireOdd(int L) {
    if (L < 1 || L % 2 == 0) throw UnsupportedError("only odd L is supported, got L=" + std::to_string(L));
    if (L > kMaxOddL) throw UnsupportedError("L exceeds the supported maximum " + std::to_string(kMaxOddL));
}

// Shared triple sum; shift = 0 gives the count integral, shift = 2 the second-moment one.
inline double intersectionSum(int L, int shift) {
    requireOdd(L);
    const int h = (L + 1) / 2;
    const int kmax = (L - 1) / 2;
    const long double a = (L + 1) / 2.0L, b = (1 - L) / 2.0L, c = (L + 3) / 2.0L;
    CompensatedSum s;
    for (int m = 0; m <= h; ++m) {
        const long double outer = binomialLd(h, m) * std::pow(2.0L, h - m) * ((m % 2) ? -1.0L : 1.0L);
        for (int k = 0; k <= kmax; ++k) {
            const long double coef = pochhammer(a, k) * pochhammer(b, k) /
                                     (pochhammer(c, k) * std::exp(std::lgamma(static_cast<long double>(k + 1))));
            if (coef == 0.0L) continue;
            for (int j = 0; j <= k; ++j) {
                const long double t = binomialLd(k, j) * std::pow(0.5L, k - j) * ((j % 2) ? -1.0L : 1.0L) *
                                      std::pow(0.25L, j) / static_cast<long double>(L + m + j + shift);
                s.add(outer * coef * t);
            }
        }
    }
    return static_cast<double>(s.value());
}

}  // namespace detail

inline double betaL(int L) { return detail::intersectionSum(L, 0); }
inline double betaTildeL(int L) { return detail::intersectionSum(L, 2); }

inline double unitSphereVolume0(int L) { return L == 0 ? 1.0 : unitSphereVolume(L); }

inline double psi2() { return 1.0; }
inline double psi3Infinity() { return std::pow(4.0 / 3.0, 0.25); }
inline double phiInfinity() { return std::sqrt(4.0 / 3.0); }

inline double psi3(int L) {
    const double b = betaL(L);
    const double e = 1.0 / (2.0 * L);
    return std::pow(unitSphereVolume0(L) / unitSphereVolume0(L - 1), e) * std::pow((L + 1.0) / (2.0 * L), e) *
           std::pow(b, -e);
}

inline double phiL(int L) {
    const double p = psi3(L);
    return (L + 2.0) / L * betaTildeL(L) / betaL(L) * p * p;
}

// Monte-Carlo estimate of the normalised integrals behind betaL / betaTildeL.
struct OracleEstimate {
    double count = 0.0;   // matches betaL
    double moment = 0.0;  // matches betaTildeL
    double countStdErr = 0.0;
    double momentStdErr = 0.0;
    long long samples = 0;
};

inline double gaussianLogEntropy(int L, double sigma2) {
    return 0.5 * L * std::log2(2.0 * std::numbers::pi * std::numbers::e * sigma2);
}

inline double centralDistortion(double G, int L, double nuC) { return G * std::pow(nuC, 2.0 / L); }

struct Rates {
    double central = 0.0;
    std::vector<double> side;
};

inline Rates rates(double hX, int L, double nuC, const std::vector<double>& N, const std::vector<double>& mu) {
    if (!(nuC > 0.0)) throw std::invalid_argument("cell volume must be positive");
    if (N.size() != mu.size()) throw std::invalid_argument("index and weight lists differ in length");
    Rates r;
    r.central = hX / L - std::log2(nuC) / L;
    for (size_t i = 0; i < N.size(); ++i) {
        if (!(N[i] >= 1.0) || !(mu[i] > 0.0)) throw std::invalid_argument("indices must be >= 1 and weights positive");
        r.side.push_back(r.central - std::log2(N[i] * mu[i]) / L);
    }
    return r;
}

inline double indexFromRate(double hX, int L, double nuC, double Ri, double mui) {
    const double N = std::exp2(hX - L * Ri) / (nuC * mui);
    if (!(N >= 1.0 - 1e-12))
        throw InfeasibleRateError("side rate " + std::to_string(Ri) + " implies index " + std::to_string(N) + " < 1");
    return N;
}

// Two descriptions: (D0, D1) from the lattice form.
inline std::array<double, 2> theoreticalDistortion2(const WeightProfile& p, int L, double nuC, double N0, double N1) {
    if (p.n != 2) throw std::invalid_argument("two-description profile required");
    const double g0 = p.g(0b01), g1 = p.g(0b10);
    const double s = (g0 + g1) * (g0 + g1);
    const double common = sphereSecondMoment(L) * std::pow(nuC, 2.0 / L) * std::pow(N0 * N1, 2.0 / L) *
                          std::pow(p.mu[0] * p.mu[1], 2.0 / L);
    return {g1 * g1 / s * common, g0 * g0 / s * common};
}

inline std::array<double, 2> theoreticalDistortion2Rate(const WeightProfile& p, int L, double hX, double Rc, double R0,
                                                        double R1) {
    const double g0 = p.g(0b01), g1 = p.g(0b10);
    const double s = (g0 + g1) * (g0 + g1);
    const double common = sphereSecondMoment(L) * std::exp2(2.0 / L * hX) * std::exp2(2.0 * (Rc - (R0 + R1)));
    return {g1 * g1 / s * common, g0 * g0 / s * common};
}

// Two-description prior design: same form with the product cell's second moment in place of the sphere's.
inline std::array<double, 2> diggaviDistortion2Rate(const WeightProfile& p, double Gprod, int L, double hX, double Rc,
                                                    double R0, double R1) {
    auto d = theoreticalDistortion2Rate(p, L, hX, Rc, R0, R1);
    const double k = Gprod / sphereSecondMoment(L);
    return {d[0] * k, d[1] * k};
}

// Three descriptions, keyed by subset mask.
inline std::map<Mask, double> theoreticalDistortion3(const WeightProfile& p, int L, double nuC, double N0, double N1,
                                                     double N2) {
    if (p.n != 3) throw std::invalid_argument("three-description profile required");
    const double common = phiL(L) * sphereSecondMoment(L) * std::pow(nuC, 2.0 / L) *
                          std::pow(p.mu[0] * p.mu[1] * p.mu[2], 1.0 / L) * std::pow(N0 * N1 * N2, 1.0 / L);
    std::map<Mask, double> out;
    for (int k = 1; k < 3; ++k)
        for (Mask m : subsetsOfSize(3, k)) out[m] = hatGammaEll(p, m) * common;
    return out;
}

inline std::map<Mask, double> theoreticalDistortion3Rate(const WeightProfile& p, int L, double hX, double Rc,
                                                         const std::array<double, 3>& R) {
    const double common =
        phiL(L) * sphereSecondMoment(L) * std::exp2(2.0 / L * hX) * std::exp2(Rc - (R[0] + R[1] + R[2]));
    std::map<Mask, double> out;
    for (int k = 1; k < 3; ++k)
        for (Mask m : subsetsOfSize(3, k)) out[m] = hatGammaEll(p, m) * common;
    return out;
}

// Closed-form single-element and pair coefficients for three descriptions with unit radius factors.
inline double hatGammaSingle3(const WeightProfile& p, int i) {
    const int j = (i + 1) % 3, k = (i + 2) % 3;
    const double gj = p.g(Mask{1} << j), gk = p.g(Mask{1} << k);
    const double s = p.g(0b001) + p.g(0b010) + p.g(0b100);
    return (gj * gj + gk * gk + gj * gk) / (s * s);
}

inline double hatGammaPair3(const WeightProfile& p, int i, int j) {
    const int k = 3 - i - j;
    const double a = p.g((Mask{1} << i) | (Mask{1} << k)), b = p.g((Mask{1} << j) | (Mask{1} << k));
    const double s = p.g(0b011) + p.g(0b101) + p.g(0b110);
    return 0.25 * (a * a + b * b + a * b) / (s * s);
}

// Symmetric three-description product Dc·Di·Dij at side rate R.
inline double distortionProduct3(int L, double R, double hX, double Gc) {
    const double phi = phiL(L);
    const double gs = sphereSecondMoment(L);
    return phi * phi * gs * gs * Gc * std::exp2(6.0 / L * hX - 6.0 * R) / 36.0;
}

// Same product assembled from its three factors at an explicit central rate.
inline double distortionProduct3FromFactors(int L, double R, double Rc, double hX, double Gc) {
    const double phi = phiL(L);
    const double gs = sphereSecondMoment(L);
    const double side = phi * gs * std::exp2(2.0 / L * hX + Rc - 3.0 * R);
    const double dc = Gc * std::exp2(2.0 / L * hX - 2.0 * Rc);
    return dc * (side / 3.0) * (side / 12.0);
}

inline double gaussianLimitProduct(double R, double sigma2 = 1.0) {
    return sigma2 * sigma2 * sigma2 * std::exp2(-6.0 * R) / 27.0;
}

struct PradhanPoint {
    double sigmaQ2 = 0.0;
    double mmse1 = 0.0, mmse2 = 0.0, mmse3 = 0.0;
    double product = 0.0;
};

inline PradhanPoint pradhanFromNoise(double rho, double sigmaQ2) {
    if (!(rho > -0.5 && rho <= 0.5)) throw std::domain_error("correlation must lie in (-1/2, 1/2]");
    PradhanPoint p;
    p.sigmaQ2 = sigmaQ2;
    p.mmse1 = sigmaQ2;
    p.mmse2 = 0.5 * sigmaQ2 * (1.0 + rho);
    p.mmse3 = sigmaQ2 * (1.0 + 2.0 * rho) / 3.0;
    p.product = p.mmse1 * p.mmse2 * p.mmse3;
    return p;
}

// High-resolution noise variance at description rate R.
inline PradhanPoint pradhanInnerBound(double rho, double R) {
    if (!(rho > -0.5 && rho <= 0.5)) throw std::domain_error("correlation must lie in (-1/2, 1/2]");
    const double s = std::pow(1.0 - rho, -2.0 / 3.0) * std::pow(1.0 + 2.0 * rho, -1.0 / 3.0) * std::exp2(-2.0 * R);
    return pradhanFromNoise(rho, s);
}

// Exact-form MMSE from a set of m noisy looks.
inline double pradhanMmseExact(int m, double rho, double sigmaQ2) {
    const double v = sigmaQ2 * (1.0 + (m - 1) * rho);
    return v / (m + v);
}

inline double rateLoss(int L, double Gc) {
    const double phi = phiL(L);
    const double gs = sphereSecondMoment(L);
    const double twoPiE = 2.0 * std::numbers::pi * std::numbers::e;
    return (std::log2(phi * phi) + std::log2(0.75) + std::log2(gs * gs * Gc * twoPiE * twoPiE * twoPiE)) / 6.0;
}

inline double binningThreshold(double R, double nestingRatio, int L) {
    return 0.5 * R + 0.5 * std::log2(psi3(L) * std::sqrt(nestingRatio));
}

struct BinnedForms {
    double pairDistortion = 0.0;     // two received
    double centralDistortion = 0.0;  // all received
    double pradhanCentral = 0.0;     // inner-bound three-look MMSE at matched pair distortion
};

// Large-L binned distortions at binning rate Rb; rho parametrises the inner-bound side.
inline BinnedForms binnedDistortions(double Rb, double nestingRatio, double rho) {
    const double psi2v = std::sqrt(4.0 / 3.0);  // squared large-L expansion factor
    BinnedForms b;
    b.pairDistortion = nestingRatio * nestingRatio * psi2v * psi2v * std::exp2(-4.0 * Rb) / 12.0;
    b.centralDistortion = psi2v * std::exp2(-4.0 * Rb) / nestingRatio;
    const double inner = psi2v * psi2v * nestingRatio * nestingRatio / 12.0;
    b.pradhanCentral = 2.0 / 3.0 / std::sqrt(inner) * std::sqrt(1.0 + rho) / std::sqrt(1.0 - rho) * std::exp2(-4.0 * Rb);
    return b;
}

struct Fig2Row {
    int L = 1;
    double gslTerm = 0.0;
    double phiTerm = 0.0;
};

inline std::vector<Fig2Row> fig2Data(int Lmax) {
    if (Lmax < 1 || Lmax % 2 == 0 || Lmax > 21) throw UnsupportedError("Lmax must be odd and <= 21");
    std::vector<Fig2Row> rows;
    const double twoPiE = 2.0 * std::numbers::pi * std::numbers::e;
    for (int L = 1; L <= Lmax; L += 2) {
        const double phi = phiL(L);
        rows.push_back({L, std::log2(sphereSecondMoment(L) * twoPiE), std::log2(phi * phi * 0.75)});
    }
    return rows;
}

struct TradeoffRow {
    double a = 0.0;
    double centralRate = 0.0;
    double centralDistortion = 0.0;
    std::vector<double> sideDistortions;
    double product = 0.0;
};

struct TradeoffReport {
    std::vector<TradeoffRow> rows;
    double maxRelativeSpread = 0.0;
    bool invariant(double tol) const { return maxRelativeSpread <= tol; }
};

// Central/side split controlled by a; product of central and n-1 chosen side distortions.
inline TradeoffReport tradeoffSweep(const std::vector<double>& aGrid, const WeightProfile& p, int L, double hX,
                                    const std::array<double, 3>& R, double Gc, const std::vector<Mask>& chosen) {
    if (p.n != 3) throw std::invalid_argument("closed forms exist for three descriptions only");
    if (static_cast<int>(chosen.size()) != p.n - 1) throw std::invalid_argument("need n-1 side patterns");
    TradeoffReport rep;
    const double sumR = R[0] + R[1] + R[2];
    double lo = 0.0, hi = 0.0;
    for (double a : aGrid) {
        if (!(a > 0.0 && a < 1.0)) throw std::domain_error("a must lie in (0,1)");
        TradeoffRow row;
        row.a = a;
        row.centralRate = sumR * (a * (p.n - 1) + 1.0) / p.n;
        row.centralDistortion = Gc * std::exp2(2.0 / L * hX - 2.0 * row.centralRate);
        const auto d = theoreticalDistortion3Rate(p, L, hX, row.centralRate, R);
        row.product = row.centralDistortion;
        for (Mask m : chosen) {
            row.sideDistortions.push_back(d.at(m));
            row.product *= d.at(m);
        }
        if (rep.rows.empty()) lo = hi = row.product;
        lo = std::min(lo, row.product);
        hi = std::max(hi, row.product);
        rep.rows.push_back(std::move(row));
    }
    rep.maxRelativeSpread = hi > 0.0 ? (hi - lo) / hi : 0.0;
    return rep;
}

}  // namespace mdlvq
