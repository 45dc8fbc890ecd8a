#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "mdlvq/analysis.hpp"
#include "mdlvq/labeling.hpp"
#include "mdlvq/parallel.hpp"
#include "mdlvq/rng.hpp"

namespace mdlvq {

struct CorruptionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Description i carries its product-lattice translate and the index of its representative in the product cell.
struct EncodedFrame {
    std::vector<std::vector<int64_t>> translate;
    std::vector<int64_t> sideIndex;
    bool operator==(const EncodedFrame&) const = default;
};

inline EncodedFrame encodePoint(const LabelingFunction& lab, const std::vector<int64_t>& lc) {
    const NestedSystem& sys = *lab.sys;
    const Tuple t = alphaApply(lab, lc);
    EncodedFrame f;
    for (int i = 0; i < sys.n; ++i) {
        auto s = splitCoset(sys.product, t[i]);
        const auto it = sys.subIndex[i].find(s.rep);
        if (it == sys.subIndex[i].end()) throw ConstructionError("sublattice representative missing from cell index");
        f.translate.push_back(std::move(s.translate));
        f.sideIndex.push_back(it->second);
    }
    return f;
}

inline EncodedFrame encode(const LabelingFunction& lab, const std::vector<double>& x) {
    return encodePoint(lab, nearestPoint(lab.sys->central, x).basisCoords);
}

inline std::vector<int64_t> sidePoint(const LabelingFunction& lab, const EncodedFrame& f, int i) {
    const NestedSystem& sys = *lab.sys;
    if (f.sideIndex[i] < 0 || f.sideIndex[i] >= static_cast<int64_t>(sys.subCell[i].size()))
        throw CorruptionError("side index out of range for description " + std::to_string(i));
    std::vector<int64_t> u = sys.subCell[i][f.sideIndex[i]];
    addTranslate(sys.product, u, f.translate[i]);
    return u;
}

// Reconstruction from the received set; the full set inverts the labeling, an empty set returns `mean`.
inline std::vector<double> decode(const LabelingFunction& lab, const EncodedFrame& f, Mask received,
                                  const std::vector<double>& mean = {}) {
    const NestedSystem& sys = *lab.sys;
    const int n = sys.n;
    const Mask full = (Mask{1} << n) - 1;
    if (received == 0) return mean.empty() ? std::vector<double>(sys.L(), 0.0) : mean;
    if (received == full) {
        Tuple t(n);
        for (int i = 0; i < n; ++i) t[i] = sidePoint(lab, f, i);
        try {
            return sys.coords(alphaInvert(lab, std::move(t)));
        } catch (const NotALabelError& e) {
            throw CorruptionError(std::string("frame does not decode: ") + e.what());
        }
    }
    const int k = popcount(received);
    std::vector<double> x(sys.L(), 0.0);
    for (int i = 0; i < n; ++i) {
        if (!has(received, i)) continue;
        const auto y = sys.coords(sidePoint(lab, f, i));
        for (int d = 0; d < sys.L(); ++d) x[d] += lab.profile.mu[i] * y[d] / k;
    }
    return x;
}

struct SourceConfig {
    double sigma2 = 1.0;
    double mean = 0.0;
};

// Reproducible i.i.d. Gaussian vectors; block b of the stream is independent of every other block.
class GaussianSource {
public:
    GaussianSource(int L, SourceConfig cfg, uint64_t seed, uint32_t block = 0)
        : L_(L), cfg_(cfg), rng_(seed, StreamTag::Source, block) {}

    std::vector<double> next() {
        std::vector<double> x(L_);
        const double s = std::sqrt(cfg_.sigma2);
        for (double& v : x) v = cfg_.mean + s * rng_.gaussian();
        return x;
    }

private:
    int L_;
    SourceConfig cfg_;
    RngStream rng_;
};

inline GaussianSource gaussianSource(int L, double sigma2, uint64_t seed) { return {L, {sigma2, 0.0}, seed}; }

struct SimConfig {
    int64_t samples = 100000;
    uint64_t seed = 1;
    int workers = 1;
    SourceConfig source;
    int64_t blockSize = 1 << 16;
    int64_t entropyWindow = 64;  // per-coordinate bound on translates counted individually
    double erasureProb = 0.0;    // 0: every pattern is evaluated on every sample
};

struct PatternResult {
    Mask mask = 0;
    int64_t samples = 0;
    double empirical = 0.0;
    double theory = std::numeric_limits<double>::quiet_NaN();
};

struct ExperimentResult {
    int n = 0;
    int L = 0;
    uint64_t seed = 0;
    int64_t samples = 0;
    std::vector<PatternResult> patterns;  // one per nonempty subset, by mask
    double central = 0.0;
    double centralTheory = 0.0;
    std::vector<double> sideEntropy;  // bits per dimension
    std::vector<double> sideRateTheory;
    double centralEntropy = 0.0;
    double wallSeconds = 0.0;

    const PatternResult& pattern(Mask m) const {
        for (const auto& p : patterns)
            if (p.mask == m) return p;
        throw std::out_of_range("no such pattern");
    }
};

// Escape-coded plug-in entropy over a windowed alphabet.
class SymbolCounter {
public:
    explicit SymbolCounter(int64_t window) : window_(window) {}

    void add(const std::vector<int64_t>& sym, const std::vector<int64_t>& translate) {
        for (int64_t v : translate)
            if (v > window_ || v < -window_) {
                ++escapes_;
                ++total_;
                return;
            }
        ++counts_[sym];
        ++total_;
    }

    void merge(const SymbolCounter& o) {
        for (const auto& [k, c] : o.counts_) counts_[k] += c;
        escapes_ += o.escapes_;
        total_ += o.total_;
    }

    double entropyBits() const {
        if (total_ == 0) return 0.0;
        CompensatedSum s;
        const double n = static_cast<double>(total_);
        auto term = [&](int64_t c) {
            if (c > 0) {
                const double p = static_cast<double>(c) / n;
                s.add(-p * std::log2(p));
            }
        };
        for (const auto& [k, c] : counts_) term(c);
        term(escapes_);
        return static_cast<double>(s.value());
    }

    int64_t escapes() const { return escapes_; }

private:
    int64_t window_;
    std::map<std::vector<int64_t>, int64_t> counts_;
    int64_t escapes_ = 0;
    int64_t total_ = 0;
};

namespace detail {

struct SimAccum {
    std::vector<CompensatedSum> err;
    std::vector<int64_t> count;
    CompensatedSum central;
    std::vector<SymbolCounter> side;
    SymbolCounter centralSym{0};
};

}  // namespace detail

// Closed-form predictions where the theory provides them (two descriptions, or three with odd L).
inline void attachTheory(ExperimentResult& r, const LabelingFunction& lab) {
    const NestedSystem& sys = *lab.sys;
    const int L = sys.L();
    const double nu = sys.central.cellVolume;
    r.centralTheory = centralDistortion(sys.central.secondMoment, L, nu);
    const Mask full = (Mask{1} << sys.n) - 1;
    std::map<Mask, double> th;
    if (sys.n == 2) {
        const auto d = theoreticalDistortion2(lab.profile, L, nu, sys.subs[0].index, sys.subs[1].index);
        th[0b01] = d[0];
        th[0b10] = d[1];
    } else if (sys.n == 3 && L % 2 == 1 && L <= kMaxOddL) {
        th = theoreticalDistortion3(lab.profile, L, nu, sys.subs[0].index, sys.subs[1].index, sys.subs[2].index);
    }
    for (auto& p : r.patterns) {
        if (p.mask == full)
            p.theory = r.centralTheory;
        else if (th.count(p.mask))
            p.theory = th[p.mask];
    }
}

inline ExperimentResult simulate(const LabelingFunction& lab, const SimConfig& cfg) {
    if (cfg.samples < 1) throw std::invalid_argument("sample count must be >= 1");
    if (cfg.blockSize < 1) throw std::invalid_argument("block size must be >= 1");
    if (!(cfg.erasureProb >= 0.0 && cfg.erasureProb < 1.0)) throw std::invalid_argument("erasure probability must lie in [0,1)");
    const auto t0 = std::chrono::steady_clock::now();
    const NestedSystem& sys = *lab.sys;
    const int n = sys.n, L = sys.L();
    const Mask full = (Mask{1} << n) - 1;
    const int64_t blocks = (cfg.samples + cfg.blockSize - 1) / cfg.blockSize;
    if (blocks > std::numeric_limits<uint32_t>::max()) throw std::invalid_argument("too many blocks");
    std::vector<detail::SimAccum> acc(blocks);
    const std::vector<double> mean(L, cfg.source.mean);

    forEachBlock(blocks, cfg.workers, [&](int64_t b) {
        auto& a = acc[b];
        a.err.assign(full + 1, {});
        a.count.assign(full + 1, 0);
        a.side.assign(n, SymbolCounter(cfg.entropyWindow));
        a.centralSym = SymbolCounter(std::numeric_limits<int64_t>::max());
        GaussianSource src(L, cfg.source, cfg.seed, static_cast<uint32_t>(b));
        RngStream erase(cfg.seed, StreamTag::Erasure, static_cast<uint32_t>(b));
        const int64_t lo = b * cfg.blockSize;
        const int64_t hi = std::min(cfg.samples, lo + cfg.blockSize);
        for (int64_t s = lo; s < hi; ++s) {
            const auto x = src.next();
            const auto lc = nearestPoint(sys.central, x);
            const Tuple t = alphaApply(lab, lc.basisCoords);
            std::vector<std::vector<double>> y(n);
            for (int i = 0; i < n; ++i) {
                y[i] = sys.coords(t[i]);
                for (double& v : y[i]) v *= lab.profile.mu[i];
                a.side[i].add(t[i], splitCoset(sys.product, t[i]).translate);
            }
            a.centralSym.add(lc.basisCoords, {});
            const double ce = normDim2(x, lc.coords);
            a.central.add(ce);
            auto score = [&](Mask m) {
                double e;
                if (m == full) {
                    e = ce;
                } else if (m == 0) {
                    e = normDim2(x, mean);
                } else {
                    std::vector<double> avg(L, 0.0);
                    const int k = popcount(m);
                    for (int i = 0; i < n; ++i)
                        if (has(m, i))
                            for (int d = 0; d < L; ++d) avg[d] += y[i][d] / k;
                    e = normDim2(x, avg);
                }
                a.err[m].add(e);
                ++a.count[m];
            };
            if (cfg.erasureProb > 0.0) {
                Mask m = 0;
                for (int i = 0; i < n; ++i)
                    if (erase.uniform() >= cfg.erasureProb) m |= Mask{1} << i;
                score(m);
            } else {
                for (Mask m = 1; m <= full; ++m) score(m);
            }
        }
    });

    ExperimentResult r;
    r.n = n;
    r.L = L;
    r.seed = cfg.seed;
    r.samples = cfg.samples;
    std::vector<CompensatedSum> err(full + 1);
    std::vector<int64_t> count(full + 1, 0);
    CompensatedSum central;
    std::vector<SymbolCounter> side(n, SymbolCounter(cfg.entropyWindow));
    SymbolCounter csym(std::numeric_limits<int64_t>::max());
    for (const auto& a : acc) {
        for (Mask m = 0; m <= full; ++m) {
            err[m].add(a.err[m].value());
            count[m] += a.count[m];
        }
        central.add(a.central.value());
        for (int i = 0; i < n; ++i) side[i].merge(a.side[i]);
        csym.merge(a.centralSym);
    }
    const Mask first = cfg.erasureProb > 0.0 ? 0 : 1;
    for (Mask m = first; m <= full; ++m) {
        PatternResult p;
        p.mask = m;
        p.samples = count[m];
        p.empirical = count[m] ? static_cast<double>(err[m].value()) / count[m] : 0.0;
        r.patterns.push_back(p);
    }
    r.central = static_cast<double>(central.value()) / cfg.samples;
    for (int i = 0; i < n; ++i) r.sideEntropy.push_back(side[i].entropyBits() / L);
    r.centralEntropy = csym.entropyBits() / L;
    attachTheory(r, lab);
    const double h = gaussianLogEntropy(L, cfg.source.sigma2);
    std::vector<double> N, mu;
    for (int i = 0; i < n; ++i) {
        N.push_back(static_cast<double>(sys.subs[i].index));
        mu.push_back(lab.profile.mu[i]);
    }
    r.sideRateTheory = rates(h, L, sys.central.cellVolume, N, mu).side;
    r.wallSeconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

inline double dbGap(double empirical, double theory) { return 10.0 * std::log10(empirical / theory); }

}  // namespace mdlvq
